#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace near {

// Parameters shared by the CLI commands. Populated by the argument parser in
// the tool binary; tests drive the commands directly.
struct RunConfig {
  std::string model_path;
  std::vector<std::string> data_paths;  // rank accepts several tables
  std::string labels_path;              // accepted, not used by scoring
  std::string out_path;                 // empty = stdout only
  int repetitions = 32;
  std::uint64_t seed = 0;
  double fraction = 0.005;
  std::vector<std::size_t> candidate_sizes;  // empty = default grid
  std::string standardize = "auto";          // on | off | auto
  std::uint64_t pairs = 1'000'000;
  int threads = 0;
  std::vector<std::string> activations;  // compare-hparams
  std::vector<std::string> inits;        // compare-hparams
  bool quiet = false;
};

// Each command writes a JSON report (to out_path when set, stdout otherwise),
// prints a short human summary, and returns 0 on success. On failure a
// single-line machine-readable error record {"error": code, "message": ...}
// goes to stdout and the exit code is non-zero.
int cmd_score(const RunConfig& config);
int cmd_estimate_sizes(const RunConfig& config);
int cmd_rank(const RunConfig& config);
int cmd_compare_hparams(const RunConfig& config);

}  // namespace near
