#include "near/netdef.hpp"

#include <cmath>
#include <string>

#include "near/errors.hpp"

namespace near {

namespace {

constexpr double kSTanhScale = 1.59223;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double apply_activation(ActivationKind kind, double x) {
  switch (kind) {
    case ActivationKind::Identity:
      return x;
    case ActivationKind::ReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::STanh:
      return kSTanhScale * std::tanh(x);
    case ActivationKind::SiLU:
      return x * sigmoid(x);
    case ActivationKind::Tanhshrink:
      return x - std::tanh(x);
    case ActivationKind::Sigmoid:
      return sigmoid(x);
    case ActivationKind::GELU:
      return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2));
  }
  throw Error("unknown activation kind");
}

Matrix apply_activation(ActivationKind kind, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  const auto& in = x.data();
  auto& o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = apply_activation(kind, in[i]);
  return out;
}

Tensor3 apply_activation(ActivationKind kind, const Tensor3& x) {
  Tensor3 out(x.width, x.height, x.channels);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    out.data[i] = apply_activation(kind, x.data[i]);
  }
  return out;
}

const char* activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Identity:   return "identity";
    case ActivationKind::ReLU:       return "relu";
    case ActivationKind::Tanh:       return "tanh";
    case ActivationKind::STanh:      return "stanh";
    case ActivationKind::SiLU:       return "silu";
    case ActivationKind::Tanhshrink: return "tanhshrink";
    case ActivationKind::Sigmoid:    return "sigmoid";
    case ActivationKind::GELU:       return "gelu";
  }
  return "unknown";
}

ActivationKind activation_from_name(const std::string& name) {
  if (name == "identity")   return ActivationKind::Identity;
  if (name == "relu")       return ActivationKind::ReLU;
  if (name == "tanh")       return ActivationKind::Tanh;
  if (name == "stanh")      return ActivationKind::STanh;
  if (name == "silu")       return ActivationKind::SiLU;
  if (name == "tanhshrink") return ActivationKind::Tanhshrink;
  if (name == "sigmoid")    return ActivationKind::Sigmoid;
  if (name == "gelu")       return ActivationKind::GELU;
  throw Error("unknown activation: " + name);
}

const char* init_name(InitScheme::Kind kind) {
  switch (kind) {
    case InitScheme::Kind::XavierUniform:  return "xavier_uniform";
    case InitScheme::Kind::KaimingUniform: return "kaiming_uniform";
    case InitScheme::Kind::Uniform01:      return "uniform01";
    case InitScheme::Kind::Custom:         return "custom";
  }
  return "unknown";
}

InitScheme::Kind init_from_name(const std::string& name) {
  if (name == "xavier_uniform")  return InitScheme::Kind::XavierUniform;
  if (name == "kaiming_uniform") return InitScheme::Kind::KaimingUniform;
  if (name == "uniform01")       return InitScheme::Kind::Uniform01;
  if (name == "custom")          return InitScheme::Kind::Custom;
  throw Error("unknown init scheme: " + name);
}

// ---------------------------------------------------------------------------
// Spec validation
// ---------------------------------------------------------------------------

void validate_spec(const ModelSpec& spec) {
  if (spec.layers.empty()) throw ShapeMismatch("model has no layers");

  enum class Domain { Start, Features, Images };
  Domain domain = Domain::Start;
  std::size_t features = 0;  // current feature width, Features domain
  std::size_t channels = 0;  // current channel count, Images domain
  std::size_t weighted = 0;

  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& layer = spec.layers[l];
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      if (d->in < 1 || d->out < 1) {
        throw ShapeMismatch("dense layer " + std::to_string(l) + " has zero width");
      }
      if (domain == Domain::Images) {
        throw ShapeMismatch("dense layer " + std::to_string(l) +
                            " follows conv output without flatten");
      }
      if (domain == Domain::Features && d->in != features) {
        throw ShapeMismatch("dense layer " + std::to_string(l) + " expects " +
                            std::to_string(d->in) + " inputs but previous layer outputs " +
                            std::to_string(features));
      }
      features = d->out;
      domain = Domain::Features;
      ++weighted;
    } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
      if (c->kernel < 1 || c->out_channels < 1 || c->in_channels < 1 || c->stride < 1) {
        throw ShapeMismatch("conv layer " + std::to_string(l) + " has invalid parameters");
      }
      if (domain == Domain::Features) {
        throw ShapeMismatch("conv layer " + std::to_string(l) + " cannot follow dense output");
      }
      if (domain == Domain::Images && c->in_channels != channels) {
        throw ShapeMismatch("conv layer " + std::to_string(l) + " expects " +
                            std::to_string(c->in_channels) + " channels but gets " +
                            std::to_string(channels));
      }
      channels = c->out_channels;
      domain = Domain::Images;
      ++weighted;
    } else {
      if (domain != Domain::Images) {
        throw ShapeMismatch("flatten at layer " + std::to_string(l) +
                            " must follow a conv layer");
      }
      domain = Domain::Features;
      features = 0;  // width depends on spatial dims, checked at forward time
    }
  }

  if (spec.init.kind == InitScheme::Kind::Custom &&
      spec.init.custom_bounds.size() < weighted) {
    throw ShapeMismatch("custom init supplies " +
                        std::to_string(spec.init.custom_bounds.size()) +
                        " bounds for " + std::to_string(weighted) + " weighted layers");
  }
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

namespace {

struct Fans {
  std::size_t fan_in;
  std::size_t fan_out;
};

double uniform_bound(const InitScheme& init, std::size_t weighted_index, Fans f,
                     double* lo, double* hi) {
  switch (init.kind) {
    case InitScheme::Kind::XavierUniform: {
      const double b = std::sqrt(6.0 / static_cast<double>(f.fan_in + f.fan_out));
      *lo = -b;
      *hi = b;
      return b;
    }
    case InitScheme::Kind::KaimingUniform: {
      const double gain = std::sqrt(2.0);
      const double b = gain * std::sqrt(3.0 / static_cast<double>(f.fan_in));
      *lo = -b;
      *hi = b;
      return b;
    }
    case InitScheme::Kind::Uniform01:
      *lo = 0.0;
      *hi = 1.0;
      return 1.0;
    case InitScheme::Kind::Custom: {
      const auto& bounds = init.custom_bounds.at(weighted_index);
      *lo = bounds.first;
      *hi = bounds.second;
      return bounds.second;
    }
  }
  throw Error("unknown init scheme");
}

}  // namespace

NetworkInstance initialize(const ModelSpec& spec) {
  validate_spec(spec);

  NetworkInstance net;
  net.spec = spec;
  net.weights.reserve(spec.layers.size());
  net.biases.reserve(spec.layers.size());

  std::size_t weighted = 0;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    Rng rng(spec.seed ^ static_cast<std::uint64_t>(l));

    const auto& layer = spec.layers[l];
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      double lo = 0.0, hi = 0.0;
      uniform_bound(spec.init, weighted, {d->in, d->out}, &lo, &hi);

      Matrix w(d->out, d->in);
      for (double& v : w.data()) v = rng.uniform(lo, hi);

      std::vector<double> b(d->bias ? d->out : 0, 0.0);
      if (d->bias && spec.init.kind == InitScheme::Kind::Uniform01) {
        for (double& v : b) v = rng.uniform(0.0, 1.0);
      }
      net.weights.push_back(std::move(w));
      net.biases.push_back(std::move(b));
      ++weighted;
    } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
      const std::size_t receptive = c->kernel * c->kernel;
      double lo = 0.0, hi = 0.0;
      uniform_bound(spec.init, weighted,
                    {c->in_channels * receptive, c->out_channels * receptive}, &lo, &hi);

      Matrix w(c->out_channels, c->in_channels * receptive);
      for (double& v : w.data()) v = rng.uniform(lo, hi);

      std::vector<double> b(c->bias ? c->out_channels : 0, 0.0);
      if (c->bias && spec.init.kind == InitScheme::Kind::Uniform01) {
        for (double& v : b) v = rng.uniform(0.0, 1.0);
      }
      net.weights.push_back(std::move(w));
      net.biases.push_back(std::move(b));
      ++weighted;
    } else {
      net.weights.emplace_back();
      net.biases.emplace_back();
    }
  }
  return net;
}

// ---------------------------------------------------------------------------
// Forward passes
// ---------------------------------------------------------------------------

Matrix forward_dense(const Matrix& weight, const std::vector<double>& bias,
                     const Matrix& input) {
  if (input.cols() != weight.cols()) {
    throw ShapeMismatch("dense forward: input width " + std::to_string(input.cols()) +
                        " != layer fan-in " + std::to_string(weight.cols()));
  }
  if (!bias.empty() && bias.size() != weight.rows()) {
    throw ShapeMismatch("dense forward: bias length mismatch");
  }

  const std::size_t batch = input.rows();
  const std::size_t out_dim = weight.rows();
  const std::size_t in_dim = weight.cols();

  Matrix out(batch, out_dim);
  // Both operands are scanned along contiguous rows: out[b][o] is the dot
  // product of input row b and weight row o.
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = input.row(b).data();
    double* y = out.row(b).data();
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* w = weight.row(o).data();
      double acc = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += x[i] * w[i];
      y[o] = bias.empty() ? acc : acc + bias[o];
    }
  }
  return out;
}

Tensor3 forward_conv2d(const Conv2dSpec& layer, const Matrix& weight,
                       const std::vector<double>& bias, const Tensor3& input) {
  if (input.channels != layer.in_channels) {
    throw ShapeMismatch("conv forward: input has " + std::to_string(input.channels) +
                        " channels, layer expects " + std::to_string(layer.in_channels));
  }
  const std::size_t k = layer.kernel;
  const std::size_t span_w = input.width + 2 * layer.padding;
  const std::size_t span_h = input.height + 2 * layer.padding;
  if (span_w < k || span_h < k || (span_w - k) % layer.stride != 0 ||
      (span_h - k) % layer.stride != 0) {
    throw ShapeMismatch("conv forward: kernel/stride/padding do not tile the input");
  }
  const std::size_t out_w = (span_w - k) / layer.stride + 1;
  const std::size_t out_h = (span_h - k) / layer.stride + 1;

  Tensor3 out(out_w, out_h, layer.out_channels);
  const long pad = static_cast<long>(layer.padding);

  for (std::size_t oc = 0; oc < layer.out_channels; ++oc) {
    const double* filter = weight.row(oc).data();  // (c, ky, kx) row-major
    const double b = bias.empty() ? 0.0 : bias[oc];
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        double acc = b;
        for (std::size_t c = 0; c < input.channels; ++c) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            const long iy = static_cast<long>(oy * layer.stride + ky) - pad;
            if (iy < 0 || iy >= static_cast<long>(input.height)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long ix = static_cast<long>(ox * layer.stride + kx) - pad;
              if (ix < 0 || ix >= static_cast<long>(input.width)) continue;
              acc += filter[(c * k + ky) * k + kx] *
                     input.at(c, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix));
            }
          }
        }
        out.at(oc, oy, ox) = acc;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

std::uint64_t count_params(const ModelSpec& spec) {
  std::uint64_t total = 0;
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      total += static_cast<std::uint64_t>(d->in) * d->out + (d->bias ? d->out : 0);
    } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
      total += static_cast<std::uint64_t>(c->kernel) * c->kernel * c->in_channels *
                   c->out_channels +
               (c->bias ? c->out_channels : 0);
    }
  }
  return total;
}

std::uint64_t count_flops(const ModelSpec& spec,
                          const std::optional<ImageShape>& input_shape) {
  std::uint64_t total = 0;
  std::optional<ImageShape> shape = input_shape;
  for (const auto& layer : spec.layers) {
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      total += 2ULL * d->in * d->out;
    } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
      if (!shape) {
        throw ShapeMismatch("count_flops: conv layer requires an input shape");
      }
      const std::size_t span_w = shape->width + 2 * c->padding;
      const std::size_t span_h = shape->height + 2 * c->padding;
      if (span_w < c->kernel || span_h < c->kernel) {
        throw ShapeMismatch("count_flops: kernel larger than padded input");
      }
      const std::size_t out_w = (span_w - c->kernel) / c->stride + 1;
      const std::size_t out_h = (span_h - c->kernel) / c->stride + 1;
      total += 2ULL * c->kernel * c->kernel * c->in_channels * c->out_channels * out_w * out_h;
      shape = ImageShape{out_w, out_h, c->out_channels};
    }
    // Flatten contributes nothing.
  }
  return total;
}

std::size_t layer_width(const LayerSpec& layer) {
  if (const auto* d = std::get_if<DenseSpec>(&layer)) return d->out;
  if (const auto* c = std::get_if<Conv2dSpec>(&layer)) return c->out_channels;
  return 0;
}

std::size_t max_layer_width(const ModelSpec& spec) {
  std::size_t w = 0;
  for (const auto& layer : spec.layers) w = std::max(w, layer_width(layer));
  return w;
}

}  // namespace near
