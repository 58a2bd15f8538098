#include "near/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "near/dataset.hpp"
#include "near/errors.hpp"
#include "near/evalstats.hpp"
#include "near/model_io.hpp"
#include "near/scoring.hpp"
#include "near/sizing.hpp"

namespace near {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void validate_common(const RunConfig& config) {
  if (config.repetitions < 1) {
    throw std::invalid_argument("repetitions must be >= 1");
  }
  if (!(config.fraction > 0.0 && config.fraction < 1.0)) {
    throw std::invalid_argument("fraction must lie in (0, 1)");
  }
  if (config.standardize != "on" && config.standardize != "off" &&
      config.standardize != "auto") {
    throw std::invalid_argument("standardize must be on, off, or auto");
  }
}

bool sniff_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open " + path);
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  return b[0] == 0 && b[1] == 0 && b[2] == 0x08 && (b[3] == 1 || b[3] == 3);
}

// Loads the dataset by content (IDX magic, else CSV) and applies the
// standardization policy: "auto" standardizes tabular CSV features but
// leaves [0,1] image pixels untouched.
Dataset load_dataset(const std::string& path, const std::string& standardize) {
  const bool idx = sniff_idx(path);
  Dataset dataset = idx ? load_idx(path) : load_csv(path);
  const bool wanted = standardize == "on" || (standardize == "auto" && !idx);
  if (wanted) standardize_features(dataset);
  return dataset;
}

void emit_report(const json& report, const RunConfig& config) {
  const std::string text = report.dump(2) + "\n";
  if (config.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(config.out_path, std::ios::binary);
  if (!out) throw FileNotFound("cannot create " + config.out_path);
  out << text;
  if (!out) throw Error("failed to write " + config.out_path);
}

json dataset_summary(const Dataset& dataset) {
  json j = {{"name", dataset.name},
            {"samples", dataset.features.rows()},
            {"features", dataset.features.cols()},
            {"standardized", dataset.standardized}};
  if (dataset.image_shape) {
    j["image_shape"] = {{"width", dataset.image_shape->width},
                        {"height", dataset.image_shape->height},
                        {"channels", dataset.image_shape->channels}};
  }
  return j;
}

json near_report_to_json(const NearReport& report) {
  json per_layer = json::array();
  for (std::size_t l = 0; l < report.per_layer_eranks.size(); ++l) {
    per_layer.push_back({{"layer", l},
                         {"erank_pre", report.per_layer_eranks[l].first},
                         {"erank_post", report.per_layer_eranks[l].second}});
  }
  return {{"mean_score", report.mean_score},
          {"std_score", report.std_score},
          {"repetitions", report.repetitions},
          {"seed", report.seed},
          {"per_layer", per_layer}};
}

// Shared failure-to-record plumbing for all commands.
template <typename Fn>
int run_command(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::cout << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cout << json{{"error", "InvalidConfig"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

int cmd_score(const RunConfig& config) {
  return run_command([&] {
    validate_common(config);
    if (config.model_path.empty() || config.data_paths.size() != 1) {
      throw std::invalid_argument("score needs --model and exactly one --data");
    }

    const ModelSpec spec = load_model_spec(config.model_path);
    const Dataset dataset = load_dataset(config.data_paths.front(), config.standardize);
    if (!config.labels_path.empty()) {
      load_idx(config.labels_path);  // validated, then ignored: scoring needs no labels
    }

    ScoreOptions options{config.repetitions, config.seed, config.threads};
    const NearReport report =
        near_score(spec, dataset.features, dataset.image_shape, options);

    json j = near_report_to_json(report);
    j["schema_version"] = kSchemaVersion;
    j["command"] = "score";
    j["timestamp"] = utc_timestamp();
    j["model_digest"] = model_spec_digest(spec);
    j["dataset"] = dataset_summary(dataset);
    emit_report(j, config);

    if (!config.quiet) {
      std::cout << "score: " << report.mean_score << " +/- " << report.std_score
                << " (" << report.repetitions << " repetitions)\n";
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------
// estimate-sizes
// ---------------------------------------------------------------------------

int cmd_estimate_sizes(const RunConfig& config) {
  return run_command([&] {
    validate_common(config);
    if (config.model_path.empty() || config.data_paths.size() != 1) {
      throw std::invalid_argument("estimate-sizes needs --model and exactly one --data");
    }

    const ModelSpec tmpl = load_model_spec(config.model_path);
    const Dataset dataset = load_dataset(config.data_paths.front(), config.standardize);

    std::vector<std::size_t> candidates = config.candidate_sizes;
    if (candidates.empty()) {
      candidates = default_candidate_sizes(dataset.features.cols());
    }

    ScoreOptions options{config.repetitions, config.seed, config.threads};
    const SizingReport sizing =
        run_sizing(tmpl, dataset.features, candidates, options, config.fraction);

    json layers = json::array();
    for (const auto& layer : sizing.layers) {
      json points = json::array();
      for (const auto& p : layer.sweep.points) {
        points.push_back({{"layer_size", p.layer_size},
                          {"mean_score", p.mean_score},
                          {"relative_score", p.relative_score}});
      }
      layers.push_back({{"layer", layer.layer_index},
                        {"sweep", points},
                        {"fit", {{"alpha", layer.fit.alpha},
                                 {"beta", layer.fit.beta},
                                 {"gamma", layer.fit.gamma},
                                 {"sse", layer.fit.sse}}},
                        {"chosen_size", layer.chosen_size},
                        {"extrapolated", layer.extrapolated}});
    }

    json j = {{"schema_version", kSchemaVersion},
              {"command", "estimate-sizes"},
              {"timestamp", utc_timestamp()},
              {"model_digest", model_spec_digest(tmpl)},
              {"dataset", dataset_summary(dataset)},
              {"seed", config.seed},
              {"repetitions", config.repetitions},
              {"fraction", config.fraction},
              {"layers", layers},
              {"sizes", sizing.sizes()}};
    emit_report(j, config);

    if (!config.quiet) {
      for (const auto& layer : sizing.layers) {
        std::cout << "hidden layer " << layer.layer_index << ": size "
                  << layer.chosen_size << (layer.extrapolated ? " (extrapolated)" : "")
                  << "\n";
      }
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

namespace {

struct RankedTable {
  std::string name;
  std::map<std::string, double> tau;
  std::map<std::string, double> rho;
  std::map<std::string, double> win;
};

// A table holds one `accuracy` column, an optional `id` column, and one or
// more proxy-score columns (any other header).
RankedTable rank_one_table(const std::string& path, std::uint64_t pairs,
                           std::uint64_t seed) {
  const CsvTable table = load_csv_table(path);

  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    return s;
  };

  long accuracy_col = -1;
  std::vector<std::pair<std::string, std::size_t>> methods;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const std::string name = lower(table.columns[c]);
    if (name == "accuracy") {
      accuracy_col = static_cast<long>(c);
    } else if (name != "id") {
      methods.emplace_back(table.columns[c], c);
    }
  }
  if (accuracy_col < 0) throw Error(path + ": no 'accuracy' column");
  if (methods.empty()) throw Error(path + ": no score columns");

  const std::size_t n = table.values.rows();
  std::vector<double> accuracies(n);
  for (std::size_t r = 0; r < n; ++r) {
    accuracies[r] = table.values(r, static_cast<std::size_t>(accuracy_col));
  }

  RankedTable out;
  out.name = path;
  for (const auto& [name, col] : methods) {
    std::vector<double> scores(n);
    for (std::size_t r = 0; r < n; ++r) scores[r] = table.values(r, col);
    const PairedSample sample(std::move(scores), accuracies);
    out.tau[name] = kendall_tau(sample);
    out.rho[name] = spearman_rho(sample);
    out.win[name] = pairwise_win_probability(sample, pairs, seed);
  }
  return out;
}

}  // namespace

int cmd_rank(const RunConfig& config) {
  return run_command([&] {
    validate_common(config);
    if (config.data_paths.empty()) {
      throw std::invalid_argument("rank needs at least one --data table");
    }

    std::vector<RankedTable> tables;
    for (const auto& path : config.data_paths) {
      tables.push_back(rank_one_table(path, config.pairs, config.seed));
    }

    json per_table = json::array();
    for (const auto& t : tables) {
      json methods = json::array();
      for (const auto& [name, tau] : t.tau) {
        methods.push_back({{"method", name},
                           {"kendall_tau", tau},
                           {"spearman_rho", t.rho.at(name)},
                           {"pairwise_win_probability", t.win.at(name)}});
      }
      per_table.push_back({{"table", t.name}, {"methods", methods}});
    }

    json j = {{"schema_version", kSchemaVersion},
              {"command", "rank"},
              {"timestamp", utc_timestamp()},
              {"seed", config.seed},
              {"pairs", config.pairs},
              {"tables", per_table}};

    if (tables.size() > 1) {
      std::vector<std::map<std::string, double>> rho_tables;
      for (const auto& t : tables) rho_tables.push_back(t.rho);
      json avg = json::object();
      for (const auto& [method, rank] : average_rank(rho_tables)) avg[method] = rank;
      j["average_rank"] = avg;
    }
    emit_report(j, config);

    if (!config.quiet) {
      for (const auto& t : tables) {
        for (const auto& [name, tau] : t.tau) {
          std::cout << t.name << " " << name << ": tau=" << tau
                    << " rho=" << t.rho.at(name) << " win=" << t.win.at(name) << "\n";
        }
      }
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------
// compare-hparams
// ---------------------------------------------------------------------------

int cmd_compare_hparams(const RunConfig& config) {
  return run_command([&] {
    validate_common(config);
    if (config.model_path.empty() || config.data_paths.size() != 1) {
      throw std::invalid_argument("compare-hparams needs --model and exactly one --data");
    }
    if (config.activations.empty() || config.inits.empty()) {
      throw std::invalid_argument("compare-hparams needs --activations and --inits");
    }

    const ModelSpec base = load_model_spec(config.model_path);
    const Dataset dataset = load_dataset(config.data_paths.front(), config.standardize);
    ScoreOptions options{config.repetitions, config.seed, config.threads};

    struct Row {
      std::string activation;
      std::string init;
      double mean;
      double std;
    };
    std::vector<Row> rows;
    for (const auto& act_name : config.activations) {
      for (const auto& init_str : config.inits) {
        ModelSpec spec = base;
        spec.activation = activation_from_name(act_name);
        spec.init.kind = init_from_name(init_str);
        const NearReport report =
            near_score(spec, dataset.features, dataset.image_shape, options);
        rows.push_back({act_name, init_str, report.mean_score, report.std_score});
      }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.mean > b.mean; });

    json combos = json::array();
    for (const auto& r : rows) {
      combos.push_back({{"activation", r.activation},
                        {"init", r.init},
                        {"mean_score", r.mean},
                        {"std_score", r.std}});
    }

    json j = {{"schema_version", kSchemaVersion},
              {"command", "compare-hparams"},
              {"timestamp", utc_timestamp()},
              {"model_digest", model_spec_digest(base)},
              {"dataset", dataset_summary(dataset)},
              {"seed", config.seed},
              {"repetitions", config.repetitions},
              {"combinations", combos}};
    emit_report(j, config);

    if (!config.quiet) {
      for (const auto& r : rows) {
        std::cout << r.activation << ", " << r.init << ": " << r.mean << " +/- " << r.std
                  << "\n";
      }
    }
    return 0;
  });
}

}  // namespace near
