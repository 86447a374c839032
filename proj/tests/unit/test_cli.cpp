#include "../../tools/cli.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using ssgd_cli::run;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("ssgd_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const char* name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ssgd-run");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST(Cli, DefaultsPerCommand) {
  const auto ica = ssgd_cli::defaults_for("ica");
  EXPECT_EQ(ica.sampler, "ica");
  EXPECT_EQ(ica.batch, 100);
  const auto dec = ssgd_cli::defaults_for("decompose");
  EXPECT_EQ(dec.d, 10);
  EXPECT_EQ(dec.iters, 10000);
  EXPECT_EQ(dec.seed_count, 10);
  EXPECT_FALSE(dec.timing);
}

TEST(Cli, SeedResolution) {
  ssgd_cli::Settings s;
  s.seed = 5;
  s.seed_count = 3;
  ssgd_cli::resolve_seeds(s);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{5, 6, 7}));
  s.seed_count = 99;
  ssgd_cli::resolve_seeds(s);
  EXPECT_EQ(s.seeds.size(), 3u);
}

TEST(Cli, ValidationRejectsBadSettings) {
  auto s = ssgd_cli::defaults_for("decompose");
  s.out = "x";
  ssgd_cli::resolve_seeds(s);
  EXPECT_NO_THROW(ssgd_cli::validate(s));
  auto bad = s;
  bad.iters = 0;
  EXPECT_THROW(ssgd_cli::validate(bad), std::invalid_argument);
  bad = s;
  bad.decay_offset = 0.5;
  EXPECT_THROW(ssgd_cli::validate(bad), std::invalid_argument);
  bad = s;
  bad.objective = "bogus";
  EXPECT_THROW(ssgd_cli::validate(bad), std::invalid_argument);
}

TEST(Cli, NoSubcommandIsUsageError) {
  EXPECT_EQ(invoke({}).code, ssgd_cli::kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, ssgd_cli::kExitUsage);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(invoke({"--help"}).code, ssgd_cli::kExitOk); }

TEST(Cli, ZeroIterationsRejected) {
  TempDir t;
  const auto r = invoke({"decompose", "--iters", "0", "--out", t.sub("o")});
  EXPECT_EQ(r.code, ssgd_cli::kExitUsage);
  EXPECT_NE(r.err.find("iterations"), std::string::npos);
  EXPECT_FALSE(fs::exists(t.sub("o")));
}

TEST(Cli, DecomposeWritesTracesSummaryAndManifest) {
  TempDir t;
  const auto out = t.sub("dec");
  const auto r = invoke({"decompose", "--d", "4", "--iters", "500", "--seeds", "3", "--seed", "7",
                         "--record-every", "50", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = lines(slurp(fs::path(out) / "summary.csv"));
  ASSERT_EQ(summary.size(), 4u);
  EXPECT_EQ(summary[0].rfind("seed,status,steps,final_f,final_grad_norm,final_recon_error", 0), 0u);
  for (int s : {7, 8, 9}) {
    const auto trace = lines(slurp(fs::path(out) / ("trace_seed_" + std::to_string(s) + ".csv")));
    EXPECT_EQ(trace.size(), 12u);
  }
  const json m = json::parse(slurp(fs::path(out) / "manifest.json"));
  EXPECT_EQ(m["command"], "decompose");
  EXPECT_EQ(m["config"]["d"], 4);
  EXPECT_EQ(m["runs"].size(), 3u);
  std::vector<std::string> listed;
  for (const auto& f : m["outputs"]) listed.push_back(f.get<std::string>());
  for (const auto& run : m["runs"])
    for (const auto& f : run["outputs"]) listed.push_back(f.get<std::string>());
  std::sort(listed.begin(), listed.end());
  EXPECT_EQ(std::adjacent_find(listed.begin(), listed.end()), listed.end());
  for (const auto& e : fs::directory_iterator(out)) {
    const std::string name = e.path().filename().string();
    if (name == "manifest.json") continue;
    EXPECT_TRUE(std::binary_search(listed.begin(), listed.end(), name)) << name;
  }
}

TEST(Cli, SingleComponentReachesZeroError) {
  TempDir t;
  const auto out = t.sub("d1");
  ASSERT_EQ(invoke({"decompose", "--d", "1", "--iters", "5", "--seeds", "1", "--out", out}).code, 0);
  const auto summary = lines(slurp(fs::path(out) / "summary.csv"));
  ASSERT_EQ(summary.size(), 2u);
  std::vector<std::string> cells;
  std::istringstream is(summary[1]);
  for (std::string c; std::getline(is, c, ',');) cells.push_back(c);
  ASSERT_GE(cells.size(), 6u);
  EXPECT_LE(std::abs(std::stod(cells[5])), 1e-15);
}

TEST(Cli, ExistingOutputNeedsOverwrite) {
  TempDir t;
  const auto out = t.sub("again");
  const std::vector<std::string> args = {"decompose", "--d", "3", "--iters", "50", "--seeds", "1", "--out", out};
  ASSERT_EQ(invoke(args).code, 0);
  const auto before = slurp(fs::path(out) / "trace_seed_0.csv");
  const auto r = invoke(args);
  EXPECT_EQ(r.code, ssgd_cli::kExitUsage);
  EXPECT_NE(r.err.find("overwrite"), std::string::npos);
  auto with = args;
  with.push_back("--overwrite");
  ASSERT_EQ(invoke(with).code, 0);
  EXPECT_EQ(slurp(fs::path(out) / "trace_seed_0.csv"), before);
}

TEST(Cli, RerunsAreByteIdentical) {
  TempDir t;
  const std::vector<std::string> base = {"ica", "--d", "3", "--iters", "300", "--seeds", "2", "--batch", "10"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", t.sub("a")});
  b.insert(b.end(), {"--out", t.sub("b")});
  ASSERT_EQ(invoke(a).code, 0);
  ASSERT_EQ(invoke(b).code, 0);
  for (const auto& e : fs::directory_iterator(t.sub("a"))) {
    const std::string name = e.path().filename().string();
    if (name == "manifest.json") continue;
    EXPECT_EQ(slurp(e.path()), slurp(fs::path(t.sub("b")) / name)) << name;
  }
}

TEST(Cli, IcaWritesBothSchedulesPerSeed) {
  TempDir t;
  const auto out = t.sub("ica");
  ASSERT_EQ(invoke({"ica", "--d", "3", "--iters", "200", "--seeds", "2", "--batch", "1", "--out", out}).code, 0);
  for (int s : {0, 1}) {
    EXPECT_TRUE(fs::exists(fs::path(out) / ("ica_constant_seed_" + std::to_string(s) + ".csv")));
    EXPECT_TRUE(fs::exists(fs::path(out) / ("ica_inv_t_seed_" + std::to_string(s) + ".csv")));
  }
  const auto summary = lines(slurp(fs::path(out) / "summary.csv"));
  ASSERT_EQ(summary.size(), 3u);
  EXPECT_EQ(summary[0], "seed,constant_status,inv_t_status,plateau_mean,plateau_range,constant_final,inv_t_final");
}

TEST(Cli, ConfigFileThenFlags) {
  TempDir t;
  const auto cfg = t.sub("cfg.json");
  std::ofstream(cfg) << R"({"d": 3, "iters": 40, "seeds": [11, 13], "record_every": 10})";
  const auto out = t.sub("cfgrun");
  ASSERT_EQ(invoke({"decompose", "--config", cfg, "--iters", "20", "--out", out}).code, 0);
  const json m = json::parse(slurp(fs::path(out) / "manifest.json"));
  EXPECT_EQ(m["config"]["d"], 3);
  EXPECT_EQ(m["config"]["iters"], 20);
  EXPECT_EQ(m["config"]["seeds"], json::array({11, 13}));
  EXPECT_TRUE(fs::exists(fs::path(out) / "trace_seed_13.csv"));
}

TEST(Cli, UnknownConfigKeyRejected) {
  TempDir t;
  const auto cfg = t.sub("bad.json");
  std::ofstream(cfg) << R"({"dimension": 3})";
  const auto r = invoke({"decompose", "--config", cfg, "--out", t.sub("o")});
  EXPECT_EQ(r.code, ssgd_cli::kExitUsage);
}

TEST(Cli, MissingConfigIsIoError) {
  TempDir t;
  EXPECT_EQ(invoke({"decompose", "--config", t.sub("nope.json"), "--out", t.sub("o")}).code, ssgd_cli::kExitIo);
}

TEST(Cli, OutputRootFromEnvironment) {
  TempDir t;
  ::setenv(ssgd_cli::kOutputRootEnv, t.path.c_str(), 1);
  const auto r = invoke({"decompose", "--d", "2", "--iters", "10", "--seeds", "1"});
  ::unsetenv(ssgd_cli::kOutputRootEnv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(t.path / "decompose" / "manifest.json"));
}

TEST(Cli, VerifyPassesAndInjectedFaultFails) {
  const auto ok = invoke({"verify", "--d", "3", "--points", "5"});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);
  const auto bad = invoke({"verify", "--d", "3", "--points", "5", "--inject-fault", "ica-sign"});
  EXPECT_EQ(bad.code, ssgd_cli::kExitRunFailed);
  EXPECT_NE(bad.out.find("FAIL ica_gradient_unbiased"), std::string::npos);
}

TEST(Cli, VerifyWritesChecksOnlyWithOut) {
  TempDir t;
  const auto out = t.sub("v");
  ASSERT_EQ(invoke({"verify", "--d", "3", "--points", "3", "--out", out}).code, 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "checks.csv"));
  EXPECT_TRUE(fs::exists(fs::path(out) / "manifest.json"));
}

TEST(Cli, EscapeAndMinima) {
  TempDir t;
  const auto esc = t.sub("esc");
  ASSERT_EQ(invoke({"escape", "--d", "5", "--trials", "10", "--iters", "3000", "--out", esc}).code, 0);
  EXPECT_TRUE(fs::exists(fs::path(esc) / "escape.csv"));
  EXPECT_EQ(invoke({"escape", "--d", "5", "--support", "6", "--out", t.sub("e2")}).code, ssgd_cli::kExitUsage);

  const auto mins = t.sub("min");
  const auto r = invoke({"minima", "--starts", "60", "--out", mins});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(slurp(fs::path(mins) / "minima.csv"));
  EXPECT_EQ(rows.size(), 9u);
}
