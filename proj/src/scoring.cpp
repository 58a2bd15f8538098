#include "near/scoring.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>

#include "near/errors.hpp"
#include "parallel.hpp"

namespace near {

// ---------------------------------------------------------------------------
// Conv activation matrices
// ---------------------------------------------------------------------------

Matrix conv_full_matrix(const Tensor3& maps) {
  const std::size_t pixels = maps.width * maps.height;
  Matrix out(pixels, maps.channels);
  for (std::size_t c = 0; c < maps.channels; ++c) {
    for (std::size_t y = 0; y < maps.height; ++y) {
      for (std::size_t x = 0; x < maps.width; ++x) {
        out(y * maps.width + x, c) = maps.at(c, y, x);
      }
    }
  }
  return out;
}

std::size_t conv_submatrix_start_count(const Tensor3& maps) {
  const std::size_t pixels = maps.width * maps.height;
  if (pixels < maps.channels) return 0;
  return std::min(maps.width, pixels - maps.channels + 1);
}

Matrix conv_submatrix_at(const Tensor3& maps, std::size_t start) {
  const std::size_t starts = conv_submatrix_start_count(maps);
  if (starts == 0) {
    throw TooManyChannels("feature maps hold " + std::to_string(maps.width * maps.height) +
                          " pixels but the layer has " + std::to_string(maps.channels) +
                          " channels");
  }
  if (start >= starts) {
    throw std::invalid_argument("conv submatrix start out of range");
  }
  const std::size_t side = maps.channels;
  Matrix out(side, side);
  for (std::size_t c = 0; c < side; ++c) {
    for (std::size_t r = 0; r < side; ++r) {
      const std::size_t pixel = start + r;  // row-major position in the map
      out(r, c) = maps.at(c, pixel / maps.width, pixel % maps.width);
    }
  }
  return out;
}

Matrix conv_submatrix(const Tensor3& maps, Rng& rng) {
  const std::size_t starts = conv_submatrix_start_count(maps);
  if (starts == 0) {
    throw TooManyChannels("feature maps hold " + std::to_string(maps.width * maps.height) +
                          " pixels but the layer has " + std::to_string(maps.channels) +
                          " channels");
  }
  return conv_submatrix_at(maps, starts == 1 ? 0 : rng.next_below(starts));
}

// ---------------------------------------------------------------------------
// Activation capture
// ---------------------------------------------------------------------------

namespace {

std::vector<Tensor3> rows_to_tensors(const Matrix& samples, const ImageShape& shape) {
  if (samples.cols() != shape.pixel_count()) {
    throw ShapeMismatch("sample width " + std::to_string(samples.cols()) +
                        " does not match image shape " + std::to_string(shape.width) + "x" +
                        std::to_string(shape.height) + "x" + std::to_string(shape.channels));
  }
  std::vector<Tensor3> batch;
  batch.reserve(samples.rows());
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    Tensor3 t(shape.width, shape.height, shape.channels);
    const auto row = samples.row(r);
    std::copy(row.begin(), row.end(), t.data.begin());
    batch.push_back(std::move(t));
  }
  return batch;
}

Matrix tensors_to_rows(const std::vector<Tensor3>& batch) {
  const std::size_t width = batch.front().data.size();
  Matrix out(batch.size(), width);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto& t = batch[r].data;
    std::copy(t.begin(), t.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

ActivationCapture capture_activations(const NetworkInstance& net, const Matrix& samples,
                                      const std::optional<ImageShape>& image_shape,
                                      Rng& rng) {
  const std::size_t required = max_layer_width(net.spec);
  if (samples.rows() < required) {
    throw InsufficientSamples("need " + std::to_string(required) + " samples, got " +
                              std::to_string(samples.rows()));
  }

  // The running representation is a feature matrix between dense layers and a
  // tensor batch between conv layers.
  Matrix features;
  std::vector<Tensor3> tensors;
  bool in_image_domain = std::holds_alternative<Conv2dSpec>(net.spec.layers.front());
  if (in_image_domain) {
    if (!image_shape) {
      throw ShapeMismatch("convolutional model requires an image-shaped dataset");
    }
    tensors = rows_to_tensors(samples, *image_shape);
  } else {
    features = samples;
  }

  ActivationCapture capture;
  const std::size_t last = net.spec.layers.size() - 1;

  for (std::size_t l = 0; l < net.spec.layers.size(); ++l) {
    const ActivationKind act =
        (l == last) ? net.spec.final_activation : net.spec.activation;
    const auto& layer = net.spec.layers[l];

    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      if (in_image_domain) throw ShapeMismatch("dense layer reached in image domain");
      Matrix z = forward_dense(net.weights[l], net.biases[l], features);
      Matrix h = apply_activation(act, z);
      capture.layers.push_back({l, z.top_rows(d->out), h.top_rows(d->out)});
      features = std::move(h);
    } else if (const auto* c = std::get_if<Conv2dSpec>(&layer)) {
      if (!in_image_domain) throw ShapeMismatch("conv layer reached in feature domain");
      std::vector<Tensor3> z_batch;
      z_batch.reserve(tensors.size());
      for (const auto& t : tensors) {
        z_batch.push_back(forward_conv2d(*c, net.weights[l], net.biases[l], t));
      }
      std::vector<Tensor3> h_batch;
      h_batch.reserve(z_batch.size());
      for (const auto& z : z_batch) h_batch.push_back(apply_activation(act, z));

      // One block position per layer, shared by pre and post so the captured
      // pair still satisfies post = sigma(pre).
      const Tensor3& z0 = z_batch.front();
      const std::size_t starts = conv_submatrix_start_count(z0);
      if (starts == 0) {
        throw TooManyChannels("layer " + std::to_string(l) + ": feature maps hold " +
                              std::to_string(z0.width * z0.height) +
                              " pixels for " + std::to_string(z0.channels) + " channels");
      }
      const std::size_t start = starts == 1 ? 0 : rng.next_below(starts);
      capture.layers.push_back({l, conv_submatrix_at(z0, start),
                                conv_submatrix_at(h_batch.front(), start)});
      tensors = std::move(h_batch);
    } else {
      if (!in_image_domain) throw ShapeMismatch("flatten reached in feature domain");
      features = tensors_to_rows(tensors);
      tensors.clear();
      in_image_domain = false;
      continue;
    }
    in_image_domain = std::holds_alternative<Conv2dSpec>(layer);
  }
  return capture;
}

// ---------------------------------------------------------------------------
// NEAR score
// ---------------------------------------------------------------------------

namespace {

// First k indices of a seeded partial Fisher-Yates shuffle of [0, n):
// a uniform draw of k distinct rows.
std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.next_below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

double erank_or_degenerate(const Matrix& m, std::size_t layer, const char* which) {
  try {
    return effective_rank(m);
  } catch (const ZeroMatrix&) {
    throw DegenerateLayer("layer " + std::to_string(layer) + " " + which +
                          "-activation matrix is identically zero");
  }
}

struct RepetitionResult {
  double score = 0.0;
  std::vector<std::pair<double, double>> eranks;
};

}  // namespace

NearReport near_score(const ModelSpec& spec, const Matrix& data,
                      const std::optional<ImageShape>& image_shape,
                      const ScoreOptions& options) {
  if (options.repetitions < 1) {
    throw std::invalid_argument("repetitions must be >= 1");
  }
  validate_spec(spec);

  const std::size_t required = max_layer_width(spec);
  if (data.rows() < required) {
    throw InsufficientSamples("dataset has " + std::to_string(data.rows()) +
                              " rows; the widest layer needs " + std::to_string(required));
  }

  const NetworkInstance net = initialize(spec);
  const std::size_t reps = static_cast<std::size_t>(options.repetitions);
  std::vector<RepetitionResult> results(reps);

  detail::parallel_for(reps, options.threads, [&](std::size_t r) {
    Rng rng(options.seed ^ static_cast<std::uint64_t>(r));
    const auto rows = draw_without_replacement(data.rows(), required, rng);

    Matrix block(required, data.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = data.row(rows[i]);
      std::copy(src.begin(), src.end(), block.row(i).begin());
    }

    const ActivationCapture capture = capture_activations(net, block, image_shape, rng);

    RepetitionResult& out = results[r];
    out.eranks.reserve(capture.layers.size());
    for (const auto& pair : capture.layers) {
      const double pre = erank_or_degenerate(pair.pre, pair.layer_index, "pre");
      const double post = erank_or_degenerate(pair.post, pair.layer_index, "post");
      out.eranks.emplace_back(pre, post);
      out.score += pre + post;
    }
  });

  NearReport report;
  report.repetitions = options.repetitions;
  report.seed = options.seed;

  const std::size_t n_layers = results.front().eranks.size();
  report.per_layer_eranks.assign(n_layers, {0.0, 0.0});

  double mean = 0.0;
  for (const auto& r : results) mean += r.score;
  mean /= static_cast<double>(reps);

  double ss = 0.0;
  for (const auto& r : results) ss += (r.score - mean) * (r.score - mean);
  report.mean_score = mean;
  report.std_score = reps > 1 ? std::sqrt(ss / static_cast<double>(reps - 1)) : 0.0;

  for (const auto& r : results) {
    for (std::size_t l = 0; l < n_layers; ++l) {
      report.per_layer_eranks[l].first += r.eranks[l].first;
      report.per_layer_eranks[l].second += r.eranks[l].second;
    }
  }
  for (auto& [pre, post] : report.per_layer_eranks) {
    pre /= static_cast<double>(reps);
    post /= static_cast<double>(reps);
  }
  return report;
}

}  // namespace near
