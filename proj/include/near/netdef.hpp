#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "near/linalg.hpp"
#include "near/rng.hpp"

namespace near {

// ---------------------------------------------------------------------------
// Activation functions
// ---------------------------------------------------------------------------

enum class ActivationKind {
  Identity,
  ReLU,
  Tanh,
  STanh,       // 1.59223 * tanh(x)
  SiLU,        // x * sigmoid(x)
  Tanhshrink,  // x - tanh(x)
  Sigmoid,
  GELU,        // 0.5 * x * (1 + erf(x / sqrt(2)))
};

double apply_activation(ActivationKind kind, double x);
Matrix apply_activation(ActivationKind kind, const Matrix& x);

const char* activation_name(ActivationKind kind);
ActivationKind activation_from_name(const std::string& name);

// ---------------------------------------------------------------------------
// Weight initialization
// ---------------------------------------------------------------------------

// Uniform weight initialization schemes. Bounds:
//   XavierUniform : [-b, b) with b = sqrt(6 / (fan_in + fan_out))
//   KaimingUniform: [-b, b) with b = gain * sqrt(3 / fan_in), gain = sqrt(2)
//   Uniform01     : [0, 1)
//   Custom        : per weighted layer [lo_i, hi_i) supplied by the caller
struct InitScheme {
  enum class Kind { XavierUniform, KaimingUniform, Uniform01, Custom };
  Kind kind = Kind::XavierUniform;
  std::vector<std::pair<double, double>> custom_bounds;  // indexed by weighted-layer ordinal

  static InitScheme xavier() { return {Kind::XavierUniform, {}}; }
  static InitScheme kaiming() { return {Kind::KaimingUniform, {}}; }
  static InitScheme uniform01() { return {Kind::Uniform01, {}}; }
  static InitScheme custom(std::vector<std::pair<double, double>> bounds) {
    return {Kind::Custom, std::move(bounds)};
  }
};

const char* init_name(InitScheme::Kind kind);
InitScheme::Kind init_from_name(const std::string& name);

// ---------------------------------------------------------------------------
// Layers and model specification
// ---------------------------------------------------------------------------

struct DenseSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  bool bias = true;
};

struct Conv2dSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  bool bias = true;
};

struct FlattenSpec {};

using LayerSpec = std::variant<DenseSpec, Conv2dSpec, FlattenSpec>;

// W x H x C image dimensions for convolutional inputs.
struct ImageShape {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::size_t pixel_count() const { return width * height * channels; }
};

// Declarative description of an untrained network. `activation` is applied
// after every layer except the last, which uses `final_activation`
// (Identity by default, matching regression/logit outputs).
struct ModelSpec {
  std::vector<LayerSpec> layers;
  ActivationKind activation = ActivationKind::ReLU;
  ActivationKind final_activation = ActivationKind::Identity;
  InitScheme init;
  std::uint64_t seed = 0;
};

// 3-D activation tensor for convolutional layers, stored as C contiguous
// row-major W x H planes: index(c, y, x) = (c * height + y) * width + x.
struct Tensor3 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(std::size_t w, std::size_t h, std::size_t c)
      : width(w), height(h), channels(c), data(w * h * c, 0.0) {}

  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * height + y) * width + x];
  }
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * height + y) * width + x];
  }
};

Tensor3 apply_activation(ActivationKind kind, const Tensor3& x);

// Instantiated untrained network. Weight matrices per layer: Dense layers
// store W as out x in; Conv2D layers store out_channels x (in_channels*k*k)
// with each row holding one filter, laid out (channel, ky, kx) row-major.
// Flatten layers hold an empty matrix. Immutable by convention after
// initialize().
struct NetworkInstance {
  ModelSpec spec;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Draws all weights for `spec`. Deterministic: layer l uses the SplitMix64
// substream seeded with spec.seed ^ l (l is the 0-based index into
// spec.layers). Per layer the weight entries are drawn first, row-major, then
// the bias entries. Biases are zero for Xavier/Kaiming/Custom and U[0,1)
// draws for Uniform01. Throws ShapeMismatch on incompatible consecutive
// layers.
NetworkInstance initialize(const ModelSpec& spec);

// Static shape validation (Dense chains, Conv channel chains, Flatten
// placement). Spatial dimensions are validated at forward time when the
// input shape is known.
void validate_spec(const ModelSpec& spec);

// Pre-activation of a dense layer: input * W^T + bias. input is batch x in,
// weight is out x in. Throws ShapeMismatch.
Matrix forward_dense(const Matrix& weight, const std::vector<double>& bias,
                     const Matrix& input);

// Cross-correlation with zero padding. Output spatial dims must be positive
// integers: W' = (W - k + 2*padding) / stride + 1 and likewise for H'.
// Throws ShapeMismatch.
Tensor3 forward_conv2d(const Conv2dSpec& layer, const Matrix& weight,
                       const std::vector<double>& bias, const Tensor3& input);

// Number of weight plus bias entries in the network.
std::uint64_t count_params(const ModelSpec& spec);

// Multiply-accumulate count per sample: Dense = 2*in*out,
// Conv2D = 2*k^2*C*C'*W'*H', Flatten = 0. `input_shape` is required whenever
// the spec contains convolutional layers.
std::uint64_t count_flops(const ModelSpec& spec,
                          const std::optional<ImageShape>& input_shape);

// Width of a layer for scoring purposes: Dense -> out, Conv2D -> out_channels,
// Flatten -> 0 (not scored).
std::size_t layer_width(const LayerSpec& layer);

// Largest scored-layer width in the spec (the sample batch size required by
// the scoring rules).
std::size_t max_layer_width(const ModelSpec& spec);

}  // namespace near
