#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "near/netdef.hpp"
#include "near/scoring.hpp"

namespace near {

// One scored candidate size: the swept layer's mean score (erank Z + erank H,
// averaged over repetitions) and the relative score, score / layer_size.
struct SweepPoint {
  std::size_t layer_size = 0;
  double mean_score = 0.0;
  double relative_score = 0.0;
};

struct SizeSweep {
  std::vector<SweepPoint> points;
};

// Least-squares parameters of f(n) = alpha + beta * n^gamma fitted to the
// relative scores, with gamma < 1.
struct PowerFit {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double sse = 0.0;
};

struct LayerSizing {
  std::size_t layer_index = 0;  // index into the template's layers
  SizeSweep sweep;
  PowerFit fit;
  std::size_t chosen_size = 0;
  bool extrapolated = false;  // chosen size beyond the largest swept candidate
};

struct SizingReport {
  std::vector<LayerSizing> layers;
  std::vector<std::size_t> sizes() const;
};

// Scores candidate widths for the dense layer at `layer_index`. Later layers
// are dropped (a layer's score depends only on what precedes it) and the
// swept layer keeps the hidden activation. Candidates must be strictly
// increasing and each >= 2; the template must be dense-only.
SizeSweep sweep_layer(const ModelSpec& tmpl, std::size_t layer_index,
                      std::span<const std::size_t> candidate_sizes, const Matrix& data,
                      const ScoreOptions& options);

// Grid search over gamma in [-3.0, 0.99] (step 0.005) with closed-form linear
// least squares for (alpha, beta) at each gamma; returns the grid optimum.
// Requires >= 4 points; throws FitDegenerate when every relative score is
// equal within 1e-10.
PowerFit fit_power(const SizeSweep& sweep);

// Smallest integer n >= 1 with |f'(n)| <= fraction * |f'(1)|. Since
// f'(n) = beta*gamma*n^(gamma-1) this is ceil(fraction^(1/(gamma-1))).
// fraction must lie in (0, 1]; throws NoThreshold when gamma >= 1.
std::size_t threshold_size(const PowerFit& fit, double fraction = 0.005);

// Sweep -> fit -> threshold per hidden layer, freezing each chosen size
// before the next layer is swept. Hidden layers are every dense layer except
// the last one.
SizingReport run_sizing(const ModelSpec& tmpl, const Matrix& data,
                        std::span<const std::size_t> candidate_sizes,
                        const ScoreOptions& options, double fraction = 0.005);

// The chosen sizes only.
std::vector<std::size_t> estimate_layer_sizes(const ModelSpec& tmpl, const Matrix& data,
                                              std::span<const std::size_t> candidate_sizes,
                                              const ScoreOptions& options,
                                              double fraction = 0.005);

// 16 log-spaced candidate sizes from 4 to 4 * input_dim (deduplicated).
std::vector<std::size_t> default_candidate_sizes(std::size_t input_dim);

}  // namespace near
