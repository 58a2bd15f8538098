#include "near/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "near/errors.hpp"

namespace near {

std::vector<std::size_t> SizingReport::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back(l.chosen_size);
  return out;
}

namespace {

// Re-raise the in-flight library error with a context prefix, keeping its
// concrete type (and therefore its machine-readable code).
template <typename E>
[[noreturn]] void rethrow_as(const E& e, const std::string& prefix) {
  throw E(prefix + e.what());
}

[[noreturn]] void annotate_and_rethrow(const std::string& prefix) {
  try {
    throw;
  } catch (const InsufficientSamples& e) {
    rethrow_as(e, prefix);
  } catch (const DegenerateLayer& e) {
    rethrow_as(e, prefix);
  } catch (const ShapeMismatch& e) {
    rethrow_as(e, prefix);
  } catch (const TooManyChannels& e) {
    rethrow_as(e, prefix);
  } catch (const FitDegenerate& e) {
    rethrow_as(e, prefix);
  } catch (const NoThreshold& e) {
    rethrow_as(e, prefix);
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

void require_dense_template(const ModelSpec& tmpl) {
  for (const auto& layer : tmpl.layers) {
    if (!std::holds_alternative<DenseSpec>(layer)) {
      throw std::invalid_argument("layer sizing supports dense-only templates");
    }
  }
  if (tmpl.layers.empty()) throw std::invalid_argument("empty template");
}

// Truncate the template after the swept layer and set its width. The swept
// layer becomes the last layer of the truncated model but keeps the hidden
// activation so its post-activation matches the full network's.
ModelSpec truncated_spec(const ModelSpec& tmpl, std::size_t layer_index,
                         std::size_t width) {
  ModelSpec spec = tmpl;
  spec.layers.resize(layer_index + 1);
  std::get<DenseSpec>(spec.layers[layer_index]).out = width;
  spec.final_activation = tmpl.activation;
  return spec;
}

}  // namespace

SizeSweep sweep_layer(const ModelSpec& tmpl, std::size_t layer_index,
                      std::span<const std::size_t> candidate_sizes, const Matrix& data,
                      const ScoreOptions& options) {
  require_dense_template(tmpl);
  if (layer_index >= tmpl.layers.size()) {
    throw std::invalid_argument("layer index out of range");
  }
  if (candidate_sizes.empty()) {
    throw std::invalid_argument("candidate sizes must be non-empty");
  }
  for (std::size_t i = 0; i < candidate_sizes.size(); ++i) {
    if (candidate_sizes[i] < 2) {
      throw std::invalid_argument("candidate sizes must be >= 2");
    }
    if (i > 0 && candidate_sizes[i] <= candidate_sizes[i - 1]) {
      throw std::invalid_argument("candidate sizes must be strictly increasing");
    }
  }

  SizeSweep sweep;
  sweep.points.reserve(candidate_sizes.size());
  for (const std::size_t n : candidate_sizes) {
    const ModelSpec spec = truncated_spec(tmpl, layer_index, n);
    try {
      const NearReport report = near_score(spec, data, std::nullopt, options);
      const auto& [pre, post] = report.per_layer_eranks.back();
      const double score = pre + post;
      sweep.points.push_back({n, score, score / static_cast<double>(n)});
    } catch (const Error&) {
      annotate_and_rethrow("candidate size " + std::to_string(n) + ": ");
    }
  }
  return sweep;
}

PowerFit fit_power(const SizeSweep& sweep) {
  const auto& pts = sweep.points;
  if (pts.size() < 4) {
    throw std::invalid_argument("power fit needs at least 4 sweep points");
  }

  double y_min = pts.front().relative_score;
  double y_max = y_min;
  for (const auto& p : pts) {
    y_min = std::min(y_min, p.relative_score);
    y_max = std::max(y_max, p.relative_score);
  }
  if (y_max - y_min <= 1e-10) {
    throw FitDegenerate("relative scores are constant; gamma is unidentifiable");
  }

  const double n = static_cast<double>(pts.size());
  PowerFit best;
  best.sse = std::numeric_limits<double>::infinity();

  // gamma in [-3.0, 0.99], step 0.005. Index arithmetic keeps the grid exact.
  for (int gi = 0; gi <= 798; ++gi) {
    const double gamma = -3.0 + 0.005 * gi;
    if (std::abs(gamma) < 1e-12) continue;  // n^0 is collinear with the intercept

    double su = 0.0, suu = 0.0, sy = 0.0, suy = 0.0;
    for (const auto& p : pts) {
      const double u = std::pow(static_cast<double>(p.layer_size), gamma);
      su += u;
      suu += u * u;
      sy += p.relative_score;
      suy += u * p.relative_score;
    }
    const double det = n * suu - su * su;
    if (!(std::abs(det) > 1e-12 * (n * suu + su * su + 1e-300))) continue;

    const double beta = (n * suy - su * sy) / det;
    const double alpha = (sy - beta * su) / n;

    double sse = 0.0;
    for (const auto& p : pts) {
      const double u = std::pow(static_cast<double>(p.layer_size), gamma);
      const double r = p.relative_score - alpha - beta * u;
      sse += r * r;
    }
    if (sse < best.sse) best = {alpha, beta, gamma, sse};
  }

  if (!std::isfinite(best.sse)) {
    throw FitDegenerate("no admissible gamma in the grid");
  }
  return best;
}

std::size_t threshold_size(const PowerFit& fit, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("fraction must lie in (0, 1]");
  }
  if (fit.gamma >= 1.0) {
    throw NoThreshold("slope does not decay for gamma >= 1");
  }
  if (fit.beta == 0.0) {
    throw std::invalid_argument("threshold undefined for beta = 0");
  }
  // |f'(n)| = |beta*gamma| * n^(gamma-1) falls to fraction*|f'(1)| at
  // n = fraction^(1/(gamma-1)); gamma - 1 < 0 makes the exponent negative.
  const double n_star = std::pow(fraction, 1.0 / (fit.gamma - 1.0));
  if (n_star > 0x1p62) {
    throw NoThreshold("threshold size " + std::to_string(n_star) +
                      " is not representable (gamma too close to 1)");
  }
  const double rounded = std::ceil(n_star - 1e-9);  // absorb ulp noise at integers
  return rounded < 1.0 ? 1 : static_cast<std::size_t>(rounded);
}

SizingReport run_sizing(const ModelSpec& tmpl, const Matrix& data,
                        std::span<const std::size_t> candidate_sizes,
                        const ScoreOptions& options, double fraction) {
  require_dense_template(tmpl);
  if (tmpl.layers.size() < 2) {
    throw std::invalid_argument("template needs at least one hidden layer plus an output layer");
  }

  ModelSpec working = tmpl;
  SizingReport report;
  const std::size_t hidden_count = tmpl.layers.size() - 1;

  for (std::size_t l = 0; l < hidden_count; ++l) {
    LayerSizing sizing;
    sizing.layer_index = l;
    try {
      sizing.sweep = sweep_layer(working, l, candidate_sizes, data, options);
      sizing.fit = fit_power(sizing.sweep);
      sizing.chosen_size = threshold_size(sizing.fit, fraction);
    } catch (const Error&) {
      annotate_and_rethrow("hidden layer " + std::to_string(l) + ": ");
    }
    sizing.extrapolated = sizing.chosen_size > candidate_sizes.back();

    // Freeze this layer's width before sweeping the next.
    std::get<DenseSpec>(working.layers[l]).out = sizing.chosen_size;
    std::get<DenseSpec>(working.layers[l + 1]).in = sizing.chosen_size;
    report.layers.push_back(std::move(sizing));
  }
  return report;
}

std::vector<std::size_t> estimate_layer_sizes(const ModelSpec& tmpl, const Matrix& data,
                                              std::span<const std::size_t> candidate_sizes,
                                              const ScoreOptions& options, double fraction) {
  return run_sizing(tmpl, data, candidate_sizes, options, fraction).sizes();
}

std::vector<std::size_t> default_candidate_sizes(std::size_t input_dim) {
  const double lo = 4.0;
  const double hi = std::max(lo, 4.0 * static_cast<double>(input_dim));
  std::vector<std::size_t> sizes;
  for (int i = 0; i < 16; ++i) {
    const double t = static_cast<double>(i) / 15.0;
    const double v = lo * std::pow(hi / lo, t);
    const auto s = static_cast<std::size_t>(std::llround(v));
    if (sizes.empty() || s > sizes.back()) sizes.push_back(s);
  }
  return sizes;
}

}  // namespace near
