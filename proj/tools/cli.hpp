#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ssgd_cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitRunFailed = 1,
  kExitUsage = 2,
  kExitIo = 3,
};

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "SSGD_OUTPUT_ROOT";

/// Fully resolved settings for one command: defaults, then the config file,
/// then command-line flags.
struct Settings {
  std::string command;
  int d = 10;
  std::string objective = "correlation";
  std::string sampler = "simple";
  std::string schedule = "constant";
  double eta = 0.005;
  long iters = 10000;
  int batch = 1;
  std::uint64_t seed = 0;
  int seed_count = 10;
  /// Explicit seed list from a config file; when empty the seeds are
  /// seed, seed + 1, ..., seed + seed_count - 1.
  std::vector<std::uint64_t> seeds;
  std::string out;
  bool overwrite = false;
  bool timing = false;
  double decay_offset = 1.0;
  double noise = 1.0;
  long record_every = 1;
  int trials = 100;
  int starts = 200;
  int support = 2;
  int workers = 0;
  int points = 20;
  std::string fault = "none";
};

Settings defaults_for(const std::string& command);

/// Fills `seeds` from seed and seed_count unless an explicit list is set.
void resolve_seeds(Settings& s);

/// Throws std::invalid_argument with a readable message.
void validate(const Settings& s);

/// Entry point shared by the executable and the tests; argv[0] is ignored.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssgd_cli
