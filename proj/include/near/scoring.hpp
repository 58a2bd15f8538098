#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "near/linalg.hpp"
#include "near/netdef.hpp"
#include "near/rng.hpp"

namespace near {

// Per-layer pair of square pre-/post-activation matrices. For dense layers
// both are n_l x n_l with rows taken from the first n_l batch samples; for
// conv layers both are C' x C' blocks cut from the flattened feature maps of
// the first batch sample (same block for pre and post, so post = sigma(pre)
// holds there as well).
struct ActivationCapture {
  struct LayerPair {
    std::size_t layer_index;  // index into ModelSpec::layers
    Matrix pre;
    Matrix post;
  };
  std::vector<LayerPair> layers;
};

// Mean/std score over repetitions plus per-layer effective ranks.
struct NearReport {
  double mean_score = 0.0;
  double std_score = 0.0;
  int repetitions = 0;
  // Averaged over repetitions, one entry per scored layer: (erank of Z_l,
  // erank of H_l).
  std::vector<std::pair<double, double>> per_layer_eranks;
  std::uint64_t seed = 0;
};

// Flattens each feature map into a column, row-major: the full
// (W'*H') x C' activation matrix.
Matrix conv_full_matrix(const Tensor3& feature_maps);

// The C' x C' block of conv_full_matrix starting at row `start`. Valid starts
// keep the block's first row inside the top row of the feature maps:
// start in {0, ..., min(W', W'*H' - C' + 1) - 1}.
Matrix conv_submatrix_at(const Tensor3& feature_maps, std::size_t start);

// Draws the block start uniformly from the valid range. Throws
// TooManyChannels when W'*H' < C'.
Matrix conv_submatrix(const Tensor3& feature_maps, Rng& rng);

std::size_t conv_submatrix_start_count(const Tensor3& feature_maps);

// Runs the forward pass on the whole batch and captures (Z_l, H_l) per
// weighted layer. Dense layers keep the first n_l rows; conv layers build
// their block from the first sample's feature maps using `rng` for the block
// start. `image_shape` is required when the first layer is convolutional.
// Throws InsufficientSamples when samples.rows() < max_layer_width(spec).
ActivationCapture capture_activations(const NetworkInstance& net, const Matrix& samples,
                                      const std::optional<ImageShape>& image_shape,
                                      Rng& rng);

struct ScoreOptions {
  int repetitions = 32;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

// The score: sum over layers of erank(Z_l) + erank(H_l), averaged over
// repetitions. Repetition r draws max_layer_width(spec) dataset rows without
// replacement using the substream seed ^ r, so the report is a pure function
// of (spec, data, repetitions, seed). A layer whose pre- or post-activation
// matrix is identically zero raises DegenerateLayer naming the layer.
NearReport near_score(const ModelSpec& spec, const Matrix& data,
                      const std::optional<ImageShape>& image_shape,
                      const ScoreOptions& options);

}  // namespace near
