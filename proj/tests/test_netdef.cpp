#include <doctest.h>

#include <cmath>

#include "near/errors.hpp"
#include "near/model_io.hpp"
#include "near/netdef.hpp"
#include "oracles.hpp"

using namespace near;
using doctest::Approx;

namespace {

ModelSpec dense_chain(std::initializer_list<std::size_t> widths, bool bias = true) {
  ModelSpec spec;
  std::size_t prev = 0;
  for (std::size_t w : widths) {
    if (prev != 0) spec.layers.emplace_back(DenseSpec{prev, w, bias});
    prev = w;
  }
  return spec;
}

}  // namespace

TEST_CASE("activation functions") {
  CHECK(apply_activation(ActivationKind::ReLU, Matrix(1, 2, {-1.0, 2.0})).data() ==
        std::vector<double>{0.0, 2.0});
  CHECK(apply_activation(ActivationKind::STanh, 0.0) == 0.0);
  CHECK(apply_activation(ActivationKind::Tanhshrink, 1.0) ==
        Approx(1.0 - std::tanh(1.0)).epsilon(1e-15));
  CHECK(apply_activation(ActivationKind::Tanhshrink, 1.0) == Approx(0.2384).epsilon(5e-4));
  CHECK(apply_activation(ActivationKind::STanh, 2.0) ==
        Approx(1.59223 * std::tanh(2.0)).epsilon(1e-15));
  CHECK(apply_activation(ActivationKind::SiLU, 3.0) ==
        Approx(3.0 / (1.0 + std::exp(-3.0))).epsilon(1e-15));
  CHECK(apply_activation(ActivationKind::GELU, 1.0) ==
        Approx(0.5 * (1.0 + std::erf(1.0 / std::sqrt(2.0)))).epsilon(1e-15));
  CHECK(apply_activation(ActivationKind::Identity, -7.5) == -7.5);
}

TEST_CASE("relu is idempotent") {
  near::Rng rng(4);
  const auto x = oracles::random_matrix(5, 7, rng, -3.0, 3.0);
  const auto once = apply_activation(ActivationKind::ReLU, x);
  const auto twice = apply_activation(ActivationKind::ReLU, once);
  CHECK(once.data() == twice.data());
}

TEST_CASE("initialize") {
  SUBCASE("xavier bound for Dense{2,3}") {
    ModelSpec spec = dense_chain({2, 3});
    spec.init = InitScheme::xavier();
    spec.seed = 42;
    const auto net = initialize(spec);
    const double bound = std::sqrt(6.0 / 5.0);
    CHECK(bound == Approx(1.0954).epsilon(5e-5));
    for (double w : net.weights[0].data()) {
      CHECK(w >= -bound);
      CHECK(w < bound);
    }
    for (double b : net.biases[0]) CHECK(b == 0.0);
  }

  SUBCASE("same spec and seed give identical weights") {
    ModelSpec spec = dense_chain({5, 8, 3});
    spec.seed = 1234;
    const auto a = initialize(spec);
    const auto b = initialize(spec);
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
      CHECK(a.weights[l].data() == b.weights[l].data());
      CHECK(a.biases[l] == b.biases[l]);
    }
  }

  SUBCASE("incompatible chain raises ShapeMismatch") {
    ModelSpec spec;
    spec.layers.emplace_back(DenseSpec{2, 3, true});
    spec.layers.emplace_back(DenseSpec{4, 2, true});
    CHECK_THROWS_AS(initialize(spec), ShapeMismatch);
  }

  SUBCASE("kaiming bound") {
    ModelSpec spec = dense_chain({12, 4});
    spec.init = InitScheme::kaiming();
    const auto net = initialize(spec);
    const double bound = std::sqrt(2.0) * std::sqrt(3.0 / 12.0);
    for (double w : net.weights[0].data()) {
      CHECK(w >= -bound);
      CHECK(w < bound);
    }
  }

  SUBCASE("uniform01 weights and biases in [0,1)") {
    ModelSpec spec = dense_chain({3, 3});
    spec.init = InitScheme::uniform01();
    const auto net = initialize(spec);
    for (double w : net.weights[0].data()) {
      CHECK(w >= 0.0);
      CHECK(w < 1.0);
    }
    bool any_nonzero_bias = false;
    for (double b : net.biases[0]) {
      CHECK(b >= 0.0);
      CHECK(b < 1.0);
      any_nonzero_bias |= b != 0.0;
    }
    CHECK(any_nonzero_bias);
  }

  SUBCASE("custom per-layer bounds") {
    ModelSpec spec = dense_chain({2, 2, 2});
    spec.init = InitScheme::custom({{-0.1, 0.1}, {0.5, 0.6}});
    const auto net = initialize(spec);
    for (double w : net.weights[0].data()) CHECK(std::abs(w) <= 0.1);
    for (double w : net.weights[1].data()) {
      CHECK(w >= 0.5);
      CHECK(w < 0.6);
    }
  }

  SUBCASE("empirical init symmetry") {
    // 10^5 draws; the empirical mean must sit within 3 standard errors of the
    // distribution mean.
    ModelSpec spec = dense_chain({500, 200});
    spec.seed = 9;
    for (auto kind : {InitScheme::Kind::XavierUniform, InitScheme::Kind::KaimingUniform,
                      InitScheme::Kind::Uniform01}) {
      spec.init.kind = kind;
      const auto net = initialize(spec);
      const auto& w = net.weights[0].data();
      double mean = 0.0;
      for (double v : w) mean += v;
      mean /= static_cast<double>(w.size());

      double lo = 0.0, hi = 0.0;
      if (kind == InitScheme::Kind::XavierUniform) {
        hi = std::sqrt(6.0 / 700.0);
        lo = -hi;
      } else if (kind == InitScheme::Kind::KaimingUniform) {
        hi = std::sqrt(6.0 / 500.0);
        lo = -hi;
      } else {
        hi = 1.0;
      }
      const double expected = 0.5 * (lo + hi);
      const double stderr_bound = (hi - lo) / std::sqrt(12.0 * static_cast<double>(w.size()));
      CHECK(std::abs(mean - expected) <= 3.0 * stderr_bound);
    }
  }
}

TEST_CASE("forward_dense") {
  SUBCASE("identity weights pass input through") {
    Matrix w(3, 3);
    for (std::size_t i = 0; i < 3; ++i) w(i, i) = 1.0;
    const Matrix x(2, 3, {1, 2, 3, 4, 5, 6});
    const auto y = forward_dense(w, {}, x);
    CHECK(y.data() == x.data());
  }

  SUBCASE("hand arithmetic with bias") {
    const Matrix w(1, 2, {1, 1});
    const auto y = forward_dense(w, {1.0}, Matrix(1, 2, {2, 3}));
    CHECK(y(0, 0) == 6.0);
  }

  SUBCASE("matches the reference product on random layers") {
    near::Rng rng(15);
    ModelSpec spec = dense_chain({9, 6});
    spec.seed = 0;
    const auto net = initialize(spec);
    const auto x = oracles::random_matrix(4, 9, rng);

    // Oracle: x * W^T via the plain triple loop.
    Matrix wt(9, 6);
    for (std::size_t r = 0; r < 6; ++r) {
      for (std::size_t c = 0; c < 9; ++c) wt(c, r) = net.weights[0](r, c);
    }
    const auto expected = oracles::matmul(x, wt);
    const auto got = forward_dense(net.weights[0], net.biases[0], x);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(got.data()[i] == Approx(expected.data()[i]).epsilon(1e-13));
    }
  }

  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(forward_dense(Matrix(3, 4), {}, Matrix(2, 3)), ShapeMismatch);
  }
}

TEST_CASE("forward_conv2d") {
  SUBCASE("1x1 kernel with unit weight is the identity") {
    Conv2dSpec layer{1, 1, 1, 1, 0, false};
    Matrix w(1, 1, {1.0});
    Tensor3 in(4, 4, 1);
    for (std::size_t i = 0; i < in.data.size(); ++i) in.data[i] = static_cast<double>(i);
    const auto out = forward_conv2d(layer, w, {}, in);
    CHECK(out.data == in.data);
  }

  SUBCASE("4x4x3 input with 2x2x3 kernel gives a 3x3 feature map") {
    Conv2dSpec layer{3, 1, 2, 1, 0, false};
    near::Rng rng(2);
    const auto w = oracles::random_matrix(1, 12, rng);
    Tensor3 in(4, 4, 3);
    for (double& v : in.data) v = rng.uniform(-1.0, 1.0);
    const auto out = forward_conv2d(layer, w, {}, in);
    CHECK(out.width == 3);
    CHECK(out.height == 3);
    CHECK(out.channels == 1);
  }

  SUBCASE("all-ones 3x3 input, all-ones 2x2 kernel: every output is 4") {
    Conv2dSpec layer{1, 1, 2, 1, 0, false};
    Matrix w(1, 4, {1, 1, 1, 1});
    Tensor3 in(3, 3, 1);
    for (double& v : in.data) v = 1.0;
    const auto out = forward_conv2d(layer, w, {}, in);
    REQUIRE(out.data.size() == 4);
    for (double v : out.data) CHECK(v == 4.0);
  }

  SUBCASE("channel mismatch raises ShapeMismatch") {
    Conv2dSpec layer{2, 1, 1, 1, 0, false};
    CHECK_THROWS_AS(forward_conv2d(layer, Matrix(1, 2), {}, Tensor3(3, 3, 1)),
                    ShapeMismatch);
  }
}

TEST_CASE("count_params") {
  // The cited architecture counts: a plain dense stack, weights plus biases.
  CHECK(count_params(dense_chain({133, 102, 61, 44, 1})) == 22724);
  CHECK(count_params(dense_chain({133, 52, 58, 60, 1})) == 13643);
  // (The source architecture additionally learns 2 scaling parameters per
  // input feature, +266, which a plain MLP does not have.)
  CHECK(count_params(dense_chain({2, 3}, /*bias=*/false)) == 6);
}

TEST_CASE("count_flops") {
  CHECK(count_flops(dense_chain({2, 3}), std::nullopt) == 12);

  ModelSpec conv;
  conv.layers.emplace_back(Conv2dSpec{1, 1, 1, 1, 0, true});
  CHECK(count_flops(conv, ImageShape{4, 4, 1}) == 32);

  ModelSpec with_flatten;
  with_flatten.layers.emplace_back(Conv2dSpec{1, 2, 3, 1, 0, true});
  with_flatten.layers.emplace_back(FlattenSpec{});
  with_flatten.layers.emplace_back(DenseSpec{8, 4, true});
  // conv: 2*9*1*2*2*2 = 144, flatten: 0, dense: 2*8*4 = 64
  CHECK(count_flops(with_flatten, ImageShape{4, 4, 1}) == 208);
}

TEST_CASE("batch shape algebra") {
  ModelSpec spec = dense_chain({6, 9, 4, 2});
  spec.seed = 3;
  const auto net = initialize(spec);
  near::Rng rng(8);
  Matrix x = oracles::random_matrix(11, 6, rng);
  const std::size_t widths[] = {9, 4, 2};
  for (std::size_t l = 0; l < net.spec.layers.size(); ++l) {
    x = forward_dense(net.weights[l], net.biases[l], x);
    CHECK(x.rows() == 11);
    CHECK(x.cols() == widths[l]);
    x = apply_activation(spec.activation, x);
  }
}

TEST_CASE("model spec json round trip") {
  ModelSpec spec;
  spec.layers.emplace_back(Conv2dSpec{3, 8, 3, 1, 0, true});
  spec.layers.emplace_back(FlattenSpec{});
  spec.layers.emplace_back(DenseSpec{7200, 10, true});
  spec.activation = ActivationKind::SiLU;
  spec.final_activation = ActivationKind::Identity;
  spec.init = InitScheme::kaiming();
  spec.seed = 99;

  const auto j = model_spec_to_json(spec);
  const auto back = model_spec_from_json(j);
  CHECK(model_spec_to_json(back) == j);
  CHECK(model_spec_digest(back) == model_spec_digest(spec));

  ModelSpec other = spec;
  other.seed = 100;
  CHECK(model_spec_digest(other) != model_spec_digest(spec));
}
