#include <CLI11.hpp>

#include "near/cli.hpp"

namespace {

void add_common(CLI::App* cmd, near::RunConfig& config) {
  cmd->add_option("--reps", config.repetitions, "Scoring repetitions")->capture_default_str();
  cmd->add_option("--seed", config.seed, "Base RNG seed")->capture_default_str();
  cmd->add_option("--out", config.out_path, "Report file (stdout when omitted)");
  cmd->add_option("--threads", config.threads, "Worker threads (0 = all cores)");
  cmd->add_flag("--quiet", config.quiet, "Suppress the human-readable summary");
}

void add_dataset(CLI::App* cmd, near::RunConfig& config) {
  cmd->add_option("--data", config.data_paths, "Dataset file (IDX or CSV)")->required();
  cmd->add_option("--standardize", config.standardize,
                  "Per-feature z-score: on, off, or auto (CSV on, IDX off)")
      ->capture_default_str();
  cmd->add_option("--labels", config.labels_path,
                  "Optional IDX labels file; scoring does not use labels");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-cost scoring of untrained networks via the effective rank "
               "of pre-/post-activation matrices"};
  app.require_subcommand(1);

  near::RunConfig config;

  auto* score = app.add_subcommand("score", "Compute the network score for a model spec");
  score->add_option("--model", config.model_path, "Model spec JSON")->required();
  add_dataset(score, config);
  add_common(score, config);

  auto* sizes = app.add_subcommand(
      "estimate-sizes", "Estimate hidden-layer sizes for a dense template");
  sizes->add_option("--model", config.model_path, "Template model spec JSON")->required();
  add_dataset(sizes, config);
  add_common(sizes, config);
  sizes->add_option("--fraction", config.fraction,
                    "Slope threshold as a fraction of the slope at size 1")
      ->capture_default_str();
  sizes->add_option("--candidate-sizes", config.candidate_sizes,
                    "Layer sizes to sweep (default: 16 log-spaced sizes)")
      ->delimiter(',');

  auto* rank = app.add_subcommand(
      "rank", "Correlate proxy scores with accuracies from CSV tables");
  rank->add_option("--data", config.data_paths, "CSV table(s) with an accuracy column")
      ->required();
  add_common(rank, config);
  rank->add_option("--pairs", config.pairs, "Monte-Carlo pairs for the win probability")
      ->capture_default_str();

  auto* compare = app.add_subcommand(
      "compare-hparams", "Score every activation/init combination of an architecture");
  compare->add_option("--model", config.model_path, "Model spec JSON")->required();
  add_dataset(compare, config);
  add_common(compare, config);
  compare->add_option("--activations", config.activations, "Activation functions")
      ->delimiter(',')
      ->required();
  compare->add_option("--inits", config.inits, "Weight initialization schemes")
      ->delimiter(',')
      ->required();

  CLI11_PARSE(app, argc, argv);

  if (score->parsed()) return near::cmd_score(config);
  if (sizes->parsed()) return near::cmd_estimate_sizes(config);
  if (rank->parsed()) return near::cmd_rank(config);
  return near::cmd_compare_hparams(config);
}
