#include "cli.hpp"

#include "ssgd/c_api.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ssgd_cli {
namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ApiFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(ssgd_status st, const char* what) {
  if (st == SSGD_OK) return;
  std::string msg = std::string(what) + ": " + ssgd_status_string(st);
  const std::string detail = ssgd_last_error();
  if (!detail.empty()) msg += " (" + detail + ")";
  if (st == SSGD_ERR_IO) throw IoError(msg);
  throw ApiFailure(msg);
}

// RAII wrappers over the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Tensor = Handle<ssgd_tensor, ssgd_tensor_free>;
using Problem = Handle<ssgd_problem, ssgd_problem_free>;
using Run = Handle<ssgd_run, ssgd_run_free>;
using Catalog = Handle<ssgd_catalog, ssgd_catalog_free>;
using VerifyResult = Handle<ssgd_verify_result, ssgd_verify_free>;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

ssgd_objective parse_objective(const std::string& s) {
  if (s == "correlation") return SSGD_OBJECTIVE_CORRELATION;
  if (s == "reconstruction") return SSGD_OBJECTIVE_RECONSTRUCTION;
  if (s == "maxeig") return SSGD_OBJECTIVE_MAXEIG;
  throw std::invalid_argument("unknown objective: " + s);
}

ssgd_sampler_kind parse_sampler(const std::string& s) {
  if (s == "simple") return SSGD_SAMPLER_SIMPLE;
  if (s == "ica") return SSGD_SAMPLER_ICA;
  if (s == "exact") return SSGD_SAMPLER_EXACT;
  throw std::invalid_argument("unknown sampler: " + s);
}

ssgd_schedule parse_schedule(const std::string& s) {
  if (s == "constant") return SSGD_SCHEDULE_CONSTANT;
  if (s == "inv-t") return SSGD_SCHEDULE_INVERSE_T;
  throw std::invalid_argument("unknown schedule: " + s);
}

ssgd_fault parse_fault(const std::string& s) {
  if (s == "none") return SSGD_FAULT_NONE;
  if (s == "ica-sign") return SSGD_FAULT_ICA_SIGN_FLIP;
  throw std::invalid_argument("unknown fault: " + s);
}

json snapshot(const Settings& s) {
  return json{{"command", s.command},
              {"d", s.d},
              {"objective", s.objective},
              {"sampler", s.sampler},
              {"schedule", s.schedule},
              {"eta", s.eta},
              {"iters", s.iters},
              {"batch", s.batch},
              {"seed", s.seed},
              {"seeds", s.seeds},
              {"seed_count", s.seed_count},
              {"out", s.out},
              {"timing", s.timing},
              {"decay_offset", s.decay_offset},
              {"noise", s.noise},
              {"record_every", s.record_every},
              {"trials", s.trials},
              {"starts", s.starts},
              {"support", s.support},
              {"workers", s.workers},
              {"points", s.points},
              {"fault", s.fault}};
}

// Applies a config file on top of the defaults. Unknown keys are an error so
// typos do not silently fall back to defaults.
void apply_config(Settings& s, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "d") s.d = v.get<int>();
    else if (key == "objective") s.objective = v.get<std::string>();
    else if (key == "sampler") s.sampler = v.get<std::string>();
    else if (key == "schedule") s.schedule = v.get<std::string>();
    else if (key == "eta") s.eta = v.get<double>();
    else if (key == "iters") s.iters = v.get<long>();
    else if (key == "batch") s.batch = v.get<int>();
    else if (key == "seed") s.seed = v.get<std::uint64_t>();
    else if (key == "seeds") {
      if (v.is_array()) {
        s.seeds = v.get<std::vector<std::uint64_t>>();
      } else {
        s.seed_count = v.get<int>();
        s.seeds.clear();
      }
    }
    else if (key == "out") s.out = v.get<std::string>();
    else if (key == "overwrite") s.overwrite = v.get<bool>();
    else if (key == "timing") s.timing = v.get<bool>();
    else if (key == "decay_offset") s.decay_offset = v.get<double>();
    else if (key == "noise") s.noise = v.get<double>();
    else if (key == "record_every") s.record_every = v.get<long>();
    else if (key == "trials") s.trials = v.get<int>();
    else if (key == "starts") s.starts = v.get<int>();
    else if (key == "support") s.support = v.get<int>();
    else if (key == "workers") s.workers = v.get<int>();
    else if (key == "points") s.points = v.get<int>();
    else if (key == "fault") s.fault = v.get<std::string>();
    else if (key == "command") continue;
    else throw std::invalid_argument("unknown config key: " + key);
  }
}

ssgd_sgd_config sgd_config(const Settings& s, std::uint64_t run_seed) {
  ssgd_sgd_config c;
  ssgd_sgd_config_default(&c);
  c.eta = s.eta;
  c.eta_max = std::max(c.eta_max, s.eta);
  c.iterations = s.iters;
  c.schedule = parse_schedule(s.schedule);
  c.decay_offset = s.decay_offset;
  c.noise_scale = s.noise;
  c.batch_size = s.batch;
  c.seed = run_seed;
  c.record_every = s.record_every;
  c.record_timing = s.timing ? 1 : 0;
  return c;
}

// Tensor and run generator for one experiment seed. Both schedules of the ICA
// command call this with the same seed, so they see the same tensor, start
// and sample stream.
std::uint64_t tensor_seed(std::uint64_t seed) { return ssgd_substream_seed(seed, 0); }
std::uint64_t run_seed(std::uint64_t seed) { return ssgd_substream_seed(seed, 1); }

void prepare_output_dir(const Settings& s) {
  const fs::path dir(s.out);
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!s.overwrite) {
      throw std::invalid_argument("output directory already exists: " + s.out +
                                  " (pass --overwrite to replace it)");
    }
    fs::remove_all(dir, ec);
    if (ec) throw IoError("cannot clear " + s.out + ": " + ec.message());
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + s.out + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << text;
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

struct Manifest {
  json doc;

  Manifest(const Settings& s) {
    doc = json{{"command", s.command},
               {"version", ssgd_version()},
               {"config", snapshot(s)},
               {"started", utc_now()},
               {"runs", json::array()},
               {"outputs", json::array()}};
  }

  void add_output(const std::string& file) { doc["outputs"].push_back(file); }
  void add_run(json run) { doc["runs"].push_back(std::move(run)); }

  void write(const Settings& s) {
    doc["finished"] = utc_now();
    write_text(fs::path(s.out) / "manifest.json", doc.dump(2) + "\n");
  }
};

// Bounded pool: at most `workers` threads pull job indices in order.
void run_pool(int jobs, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, jobs);
  std::atomic<int> next{0};
  auto loop = [&] {
    for (int i = next++; i < jobs; i = next++) fn(i);
  };
  if (workers <= 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

const char* run_status_name(ssgd_run_status s) {
  switch (s) {
    case SSGD_RUN_COMPLETED: return "completed";
    case SSGD_RUN_STOPPED: return "stopped";
    case SSGD_RUN_DIVERGED: return "diverged";
    case SSGD_RUN_DEGENERATE_PROJECTION: return "degenerate_projection";
    case SSGD_RUN_NON_FINITE: return "non_finite";
  }
  return "unknown";
}

struct TraceSummary {
  std::string status = "error";
  std::string error;
  bool io_error = false;
  long steps = 0;
  double final_f = NAN;
  double final_grad_norm = NAN;
  double final_recon = NAN;
  long noise_violations = 0;
  std::vector<double> recon;  // full error trace, kept only when requested
  std::string started, finished;
};

// One projected SGD run written to `path`.
TraceSummary single_run(const Settings& s, std::uint64_t seed, ssgd_sampler_kind sampler,
                        ssgd_pair_convention convention, ssgd_schedule schedule,
                        const fs::path& path, bool keep_trace) {
  TraceSummary r;
  r.started = utc_now();
  try {
    Tensor tensor;
    check(ssgd_tensor_random_orthogonal(s.d, tensor_seed(seed), tensor.out()), "tensor");
    Problem problem;
    check(ssgd_problem_create(tensor.get(), parse_objective(s.objective), convention, sampler,
                              problem.out()),
          "problem");
    auto cfg = sgd_config(s, run_seed(seed));
    cfg.schedule = schedule;
    Run run;
    check(ssgd_run_projected(problem.get(), nullptr, &cfg, run.out()), "run");
    check(ssgd_run_write_csv(run.get(), path.c_str()), "trace");
    const auto code = ssgd_run_status_code(run.get());
    r.status = run_status_name(code);
    if (code != SSGD_RUN_COMPLETED) r.error = ssgd_run_diagnostic(run.get());
    r.steps = ssgd_run_steps(run.get());
    const size_t n = ssgd_run_length(run.get());
    if (n > 0) {
      check(ssgd_run_row(run.get(), n - 1, nullptr, &r.final_f, &r.final_grad_norm,
                         &r.final_recon, nullptr),
            "row");
    }
    if (keep_trace) {
      r.recon.resize(n);
      for (size_t i = 0; i < n; ++i) {
        check(ssgd_run_row(run.get(), i, nullptr, nullptr, nullptr, &r.recon[i], nullptr), "row");
      }
    }
    check(ssgd_run_noise_stats(run.get(), nullptr, &r.noise_violations, nullptr), "noise");
  } catch (const IoError& e) {
    r.status = "error";
    r.error = e.what();
    r.io_error = true;
  } catch (const std::exception& e) {
    r.status = "error";
    r.error = e.what();
  }
  r.finished = utc_now();
  return r;
}

int exit_for(const std::vector<TraceSummary>& runs) {
  for (const auto& r : runs) if (r.io_error) return kExitIo;
  for (const auto& r : runs) if (r.status != "completed") return kExitRunFailed;
  return kExitOk;
}

int cmd_decompose(const Settings& s, std::ostream& out, std::ostream& err) {
  prepare_output_dir(s);
  Manifest manifest(s);
  const auto sampler = parse_sampler(s.sampler);
  const auto schedule = parse_schedule(s.schedule);
  const int n = static_cast<int>(s.seeds.size());
  std::vector<TraceSummary> runs(n);
  std::vector<std::string> files(n);
  for (int k = 0; k < n; ++k) files[k] = "trace_seed_" + std::to_string(s.seeds[k]) + ".csv";

  run_pool(n, s.workers, [&](int k) {
    runs[k] = single_run(s, s.seeds[k], sampler, SSGD_PAIRS_ORDERED, schedule,
                         fs::path(s.out) / files[k], false);
  });

  std::ostringstream summary;
  summary << "seed,status,steps,final_f,final_grad_norm,final_recon_error,noise_bound_violations\n";
  for (int k = 0; k < n; ++k) {
    const auto& r = runs[k];
    summary << s.seeds[k] << ',' << r.status << ',' << r.steps << ',' << fmt(r.final_f) << ','
            << fmt(r.final_grad_norm) << ',' << fmt(r.final_recon) << ',' << r.noise_violations
            << '\n';
    manifest.add_run({{"seed", s.seeds[k]},
                      {"status", r.status},
                      {"started", r.started},
                      {"finished", r.finished},
                      {"outputs", json::array({files[k]})}});
    out << "seed " << s.seeds[k] << ": " << r.status << " final_recon_error="
        << fmt(r.final_recon) << '\n';
    if (!r.error.empty()) err << "seed " << s.seeds[k] << ": " << r.error << '\n';
  }
  write_text(fs::path(s.out) / "summary.csv", summary.str());
  manifest.add_output("summary.csv");
  manifest.write(s);
  return exit_for(runs);
}

struct Plateau {
  double mean = NAN;
  double range = NAN;
};

// Statistics of the trailing fifth of a trace.
Plateau trailing_plateau(const std::vector<double>& trace) {
  Plateau p;
  if (trace.empty()) return p;
  const size_t n = trace.size();
  const size_t start = n - std::max<size_t>(1, n / 5);
  double sum = 0.0, lo = trace[start], hi = trace[start];
  for (size_t i = start; i < n; ++i) {
    sum += trace[i];
    lo = std::min(lo, trace[i]);
    hi = std::max(hi, trace[i]);
  }
  p.mean = sum / static_cast<double>(n - start);
  p.range = hi - lo;
  return p;
}

int cmd_ica(const Settings& s, std::ostream& out, std::ostream& err) {
  prepare_output_dir(s);
  Manifest manifest(s);
  const auto sampler = parse_sampler(s.sampler);
  const int n = static_cast<int>(s.seeds.size());
  std::vector<TraceSummary> constant(n), decaying(n);
  std::vector<std::string> cfiles(n), dfiles(n);
  for (int k = 0; k < n; ++k) {
    cfiles[k] = "ica_constant_seed_" + std::to_string(s.seeds[k]) + ".csv";
    dfiles[k] = "ica_inv_t_seed_" + std::to_string(s.seeds[k]) + ".csv";
  }

  // Unordered-pair convention: with it the per-sample ICA gradient is an
  // unbiased estimate of the objective's gradient.
  run_pool(2 * n, s.workers, [&](int job) {
    const int k = job / 2;
    if (job % 2 == 0) {
      constant[k] = single_run(s, s.seeds[k], sampler, SSGD_PAIRS_HALF, SSGD_SCHEDULE_CONSTANT,
                               fs::path(s.out) / cfiles[k], true);
    } else {
      decaying[k] = single_run(s, s.seeds[k], sampler, SSGD_PAIRS_HALF, SSGD_SCHEDULE_INVERSE_T,
                               fs::path(s.out) / dfiles[k], false);
    }
  });

  std::ostringstream summary;
  summary << "seed,constant_status,inv_t_status,plateau_mean,plateau_range,constant_final,"
             "inv_t_final\n";
  for (int k = 0; k < n; ++k) {
    const auto p = trailing_plateau(constant[k].recon);
    summary << s.seeds[k] << ',' << constant[k].status << ',' << decaying[k].status << ','
            << fmt(p.mean) << ',' << fmt(p.range) << ',' << fmt(constant[k].final_recon) << ','
            << fmt(decaying[k].final_recon) << '\n';
    manifest.add_run({{"seed", s.seeds[k]},
                      {"schedule", "constant"},
                      {"status", constant[k].status},
                      {"started", constant[k].started},
                      {"finished", constant[k].finished},
                      {"outputs", json::array({cfiles[k]})}});
    manifest.add_run({{"seed", s.seeds[k]},
                      {"schedule", "inv-t"},
                      {"status", decaying[k].status},
                      {"started", decaying[k].started},
                      {"finished", decaying[k].finished},
                      {"outputs", json::array({dfiles[k]})}});
    out << "seed " << s.seeds[k] << ": plateau_mean=" << fmt(p.mean)
        << " inv_t_final=" << fmt(decaying[k].final_recon) << '\n';
    for (const auto* r : {&constant[k], &decaying[k]}) {
      if (!r->error.empty()) err << "seed " << s.seeds[k] << ": " << r->error << '\n';
    }
  }
  write_text(fs::path(s.out) / "summary.csv", summary.str());
  manifest.add_output("summary.csv");
  manifest.write(s);
  std::vector<TraceSummary> all = constant;
  all.insert(all.end(), decaying.begin(), decaying.end());
  return exit_for(all);
}

int cmd_verify(const Settings& s, std::ostream& out, std::ostream&) {
  VerifyResult result;
  check(ssgd_verify(s.d, s.seed, s.points, parse_fault(s.fault), result.out()), "verify");
  const size_t n = ssgd_verify_count(result.get());
  size_t failed = 0;
  std::ostringstream csv;
  csv << "check,passed,detail\n";
  for (size_t i = 0; i < n; ++i) {
    const char* name = nullptr;
    const char* detail = nullptr;
    int passed = 0;
    check(ssgd_verify_check(result.get(), i, &name, &passed, &detail), "check");
    out << (passed ? "PASS " : "FAIL ") << name << ' ' << detail << '\n';
    std::string d = detail;
    std::replace(d.begin(), d.end(), ',', ';');
    csv << name << ',' << passed << ',' << d << '\n';
    if (!passed) ++failed;
  }
  out << (n - failed) << '/' << n << " checks passed\n";
  if (!s.out.empty()) {
    prepare_output_dir(s);
    Manifest manifest(s);
    write_text(fs::path(s.out) / "checks.csv", csv.str());
    manifest.add_output("checks.csv");
    manifest.write(s);
  }
  return failed == 0 ? kExitOk : kExitRunFailed;
}

int cmd_escape(const Settings& s, std::ostream& out, std::ostream&) {
  prepare_output_dir(s);
  Manifest manifest(s);
  Tensor tensor;
  check(ssgd_tensor_random_orthogonal(s.d, tensor_seed(s.seed), tensor.out()), "tensor");
  Problem problem;
  check(ssgd_problem_create(tensor.get(), parse_objective(s.objective), SSGD_PAIRS_ORDERED,
                            parse_sampler(s.sampler), problem.out()),
        "problem");
  std::vector<int> support(s.support);
  for (int i = 0; i < s.support; ++i) support[i] = i;
  std::vector<double> saddle(s.d);
  check(ssgd_balanced_saddle(tensor.get(), support.data(), s.support, saddle.data()), "saddle");

  const auto cfg = sgd_config(s, run_seed(s.seed));
  ssgd_escape_stats st{};
  check(ssgd_escape(problem.get(), saddle.data(), s.trials, &cfg, 0.0, s.workers, &st), "escape");

  std::ostringstream csv;
  csv << "support,trials,escaped,escape_fraction,median_steps,mean_f_decrease,threshold,"
         "saddle_value,max_displacement\n";
  csv << s.support << ',' << st.trials << ',' << st.escaped << ',' << fmt(st.escape_fraction)
      << ',' << fmt(st.median_steps) << ',' << fmt(st.mean_f_decrease) << ','
      << fmt(st.threshold) << ',' << fmt(st.saddle_value) << ',' << fmt(st.max_displacement)
      << '\n';
  write_text(fs::path(s.out) / "escape.csv", csv.str());
  manifest.add_output("escape.csv");
  manifest.write(s);
  out << "escaped " << st.escaped << '/' << st.trials << " median_steps=" << fmt(st.median_steps)
      << " threshold=" << fmt(st.threshold) << '\n';
  return kExitOk;
}

int cmd_minima(const Settings& s, std::ostream& out, std::ostream&) {
  prepare_output_dir(s);
  Manifest manifest(s);
  Tensor tensor;
  check(ssgd_tensor_random_orthogonal(s.d, tensor_seed(s.seed), tensor.out()), "tensor");
  Problem problem;
  check(ssgd_problem_create(tensor.get(), parse_objective(s.objective), SSGD_PAIRS_ORDERED,
                            parse_sampler(s.sampler), problem.out()),
        "problem");
  const auto cfg = sgd_config(s, run_seed(s.seed));
  Catalog catalog;
  check(ssgd_enumerate_minima(problem.get(), s.starts, &cfg, 0.0, s.workers, catalog.out()),
        "minima");
  check(ssgd_catalog_write_csv(catalog.get(), (fs::path(s.out) / "minima.csv").c_str()), "csv");
  manifest.add_output("minima.csv");

  const size_t n = ssgd_catalog_size(catalog.get());
  const int dim = ssgd_problem_dim(problem.get());
  std::vector<double> point(dim), known(dim);
  size_t matched = 0;
  for (size_t i = 0; i < n; ++i) {
    double f = 0.0, eig = 0.0;
    int hits = 0, found = 0;
    check(ssgd_catalog_entry(catalog.get(), i, point.data(), &f, &eig, &hits), "entry");
    check(ssgd_problem_nearest_known_minimum(problem.get(), point.data(), known.data(), &found),
          "nearest");
    double dist = NAN;
    if (found) {
      double acc = 0.0;
      for (int j = 0; j < dim; ++j) acc += (point[j] - known[j]) * (point[j] - known[j]);
      dist = std::sqrt(acc);
      if (dist <= 1e-4) ++matched;
    }
    out << "minimum " << i << ": f=" << fmt(f) << " min_tangent_eig=" << fmt(eig)
        << " hits=" << hits << " distance_to_known=" << fmt(dist) << '\n';
  }
  out << n << " distinct minima from " << s.starts << " starts (" << matched
      << " match closed-form minima, " << ssgd_catalog_rejected(catalog.get())
      << " starts rejected)\n";
  manifest.write(s);
  return kExitOk;
}

// Every flag lands in a Settings field; only flags actually given on the
// command line override the config file.
struct FlagSet {
  Settings v;
  std::string config;
  std::vector<std::pair<CLI::Option*, std::function<void(Settings&)>>> setters;

  template <typename T>
  void add(CLI::App* app, const std::string& name, T Settings::*field, const std::string& help) {
    auto* opt = app->add_option(name, v.*field, help);
    setters.emplace_back(opt, [this, field](Settings& s) { s.*field = v.*field; });
  }

  void flag(CLI::App* app, const std::string& name, bool Settings::*field, const std::string& help) {
    auto* opt = app->add_flag(name, v.*field, help);
    setters.emplace_back(opt, [this, field](Settings& s) { s.*field = v.*field; });
  }
};

void register_common(CLI::App* app, FlagSet& f) {
  app->add_option("--config", f.config, "JSON config file; flags override its values");
  auto* seed = app->add_option("--seed", f.v.seed, "Base seed");
  f.setters.emplace_back(seed, [&f](Settings& s) {
    s.seed = f.v.seed;
    s.seeds.clear();
  });
  auto* seeds = app->add_option("--seeds", f.v.seed_count, "Number of seeds (base seed upward)");
  f.setters.emplace_back(seeds, [&f](Settings& s) {
    s.seed_count = f.v.seed_count;
    s.seeds.clear();
  });
  f.add(app, "--out", &Settings::out, "Output directory");
  f.add(app, "--d", &Settings::d, "Dimension");
  f.add(app, "--eta", &Settings::eta, "Base learning rate");
  f.add(app, "--iters", &Settings::iters, "Iterations per run");
  f.add(app, "--schedule", &Settings::schedule, "constant | inv-t");
  f.add(app, "--batch", &Settings::batch, "Mini-batch size");
  f.add(app, "--objective", &Settings::objective, "correlation | reconstruction | maxeig");
  f.add(app, "--sampler", &Settings::sampler, "simple | ica | exact");
  f.add(app, "--decay-offset", &Settings::decay_offset, "t0 in eta*min(1, t0/(t+1))");
  f.add(app, "--noise", &Settings::noise, "Scale of the injected sphere noise");
  f.add(app, "--record-every", &Settings::record_every, "Trace stride");
  f.add(app, "--workers", &Settings::workers, "Worker threads (0: all cores)");
  f.flag(app, "--overwrite", &Settings::overwrite, "Replace an existing output directory");
  f.flag(app, "--timing", &Settings::timing, "Record wall-clock time in traces");
}

std::string default_out(const std::string& command) {
  const char* root = std::getenv(kOutputRootEnv);
  const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
  return (base / command).string();
}

}  // namespace

Settings defaults_for(const std::string& command) {
  Settings s;
  s.command = command;
  if (command == "ica") {
    s.sampler = "ica";
    s.batch = 100;
    s.eta = 0.01;
    s.decay_offset = 2000.0;
  } else if (command == "verify") {
    s.d = 5;
  } else if (command == "escape") {
    s.objective = "maxeig";
    s.eta = 0.01;
  } else if (command == "minima") {
    s.d = 2;
    s.iters = 1000;
  }
  return s;
}

void resolve_seeds(Settings& s) {
  if (!s.seeds.empty()) return;
  if (s.seed_count < 1) throw std::invalid_argument("seed count must be >= 1");
  for (int k = 0; k < s.seed_count; ++k) s.seeds.push_back(s.seed + static_cast<std::uint64_t>(k));
}

void validate(const Settings& s) {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (s.d < 1) fail("d must be >= 1");
  if (s.iters < 1) fail("iterations must be >= 1");
  if (s.batch < 1) fail("batch size must be >= 1");
  if (!(s.eta > 0.0) || !std::isfinite(s.eta)) fail("eta must be positive");
  if (!(s.decay_offset >= 1.0)) fail("decay offset must be >= 1");
  if (!(s.noise >= 0.0)) fail("noise scale must be non-negative");
  if (s.record_every < 1) fail("record stride must be >= 1");
  if (s.seeds.empty()) fail("at least one seed is required");
  if (s.trials < 1) fail("trials must be >= 1");
  if (s.starts < 1) fail("starts must be >= 1");
  if (s.points < 1) fail("points must be >= 1");
  parse_objective(s.objective);
  parse_sampler(s.sampler);
  parse_schedule(s.schedule);
  parse_fault(s.fault);
  if (s.command == "escape" && (s.support < 2 || s.support > s.d)) {
    fail("support must lie in [2, d]");
  }
  if (s.command == "verify" && s.d < 2) fail("verify needs d >= 2");
  if (s.command != "verify" && s.out.empty()) fail("no output directory");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Projected noisy SGD experiments on tensor decomposition and ICA"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const Settings&, std::ostream&, std::ostream&);
  };
  const Command commands[] = {
      {"decompose", "Tensor decomposition runs, one trace per seed", cmd_decompose},
      {"ica", "ICA runs with constant and 1/t learning rates on matched seeds", cmd_ica},
      {"verify", "Invariant battery; exit 0 iff every check passes", cmd_verify},
      {"escape", "Escape statistics from a balanced saddle", cmd_escape},
      {"minima", "Multi-start enumeration of local minima", cmd_minima},
  };

  std::vector<std::unique_ptr<FlagSet>> flags;
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    flags.push_back(std::make_unique<FlagSet>());
    auto& f = *flags.back();
    f.v = defaults_for(c.name);
    register_common(sub, f);
    if (std::string(c.name) == "escape") {
      f.add(sub, "--trials", &Settings::trials, "Independent trials");
      f.add(sub, "--support", &Settings::support, "Support size p of the balanced saddle");
    }
    if (std::string(c.name) == "minima") f.add(sub, "--starts", &Settings::starts, "Random starts");
    if (std::string(c.name) == "verify") {
      f.add(sub, "--points", &Settings::points, "Random points per derivative check");
      f.add(sub, "--inject-fault", &Settings::fault, "none | ica-sign");
    }
    subs.push_back(sub);
  }

  std::vector<std::string> storage(args);
  if (storage.empty()) storage.push_back("ssgd");
  std::vector<char*> argv;
  for (auto& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    auto& f = *flags[i];
    try {
      Settings s = defaults_for(commands[i].name);
      if (!f.config.empty()) {
        std::ifstream is(f.config);
        if (!is) throw IoError("cannot read config: " + f.config);
        apply_config(s, json::parse(is));
      }
      for (const auto& [opt, set] : f.setters) {
        if (opt->count() > 0) set(s);
      }
      resolve_seeds(s);
      if (s.out.empty() && s.command != "verify") s.out = default_out(s.command);
      validate(s);
      return commands[i].fn(s, out, err);
    } catch (const IoError& e) {
      err << "error: " << e.what() << '\n';
      return kExitIo;
    } catch (const json::exception& e) {
      err << "error: bad config: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitRunFailed;
    }
  }
  return kExitUsage;
}

}  // namespace ssgd_cli
