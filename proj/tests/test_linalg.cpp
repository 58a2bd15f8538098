#include <doctest.h>

#include <cmath>
#include <vector>

#include "near/errors.hpp"
#include "near/linalg.hpp"
#include "near/rng.hpp"
#include "oracles.hpp"

using near::Matrix;
using doctest::Approx;

namespace {

Matrix identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("singular values of simple matrices") {
  SUBCASE("3x3 identity") {
    const auto s = near::singular_values(identity(3)).values;
    REQUIRE(s.size() == 3);
    for (double v : s) CHECK(v == Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("diagonal (3, 0)") {
    Matrix m(2, 2);
    m(0, 0) = 3.0;
    const auto s = near::singular_values(m).values;
    CHECK(s[0] == Approx(3.0).epsilon(1e-12));
    CHECK(s[1] == Approx(0.0).scale(1.0).epsilon(1e-12));
  }

  SUBCASE("[[1,2],[3,4]] against the characteristic-polynomial roots") {
    // A^T A has trace 30 and determinant 4, so the squared singular values
    // solve l^2 - 30 l + 4 = 0.
    const double l1 = (30.0 + std::sqrt(900.0 - 16.0)) / 2.0;
    const double l2 = (30.0 - std::sqrt(900.0 - 16.0)) / 2.0;
    const auto s = near::singular_values(Matrix(2, 2, {1, 2, 3, 4})).values;
    CHECK(s[0] == Approx(std::sqrt(l1)).epsilon(1e-12));
    CHECK(s[1] == Approx(std::sqrt(l2)).epsilon(1e-12));
    CHECK(s[0] == Approx(5.4650).epsilon(5e-5));
    CHECK(s[1] == Approx(0.3660).epsilon(5e-5));
  }

  SUBCASE("NaN entry raises NonFiniteInput") {
    Matrix m(2, 2);
    m(0, 1) = std::nan("");
    CHECK_THROWS_AS(near::singular_values(m), near::NonFiniteInput);
    CHECK_THROWS_AS(Matrix(1, 1, {INFINITY}), near::NonFiniteInput);
  }
}

TEST_CASE("singular values match the reference decomposition") {
  near::Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t rows = 1 + rng.next_below(40);
    const std::size_t cols = 1 + rng.next_below(40);
    const auto m = oracles::random_matrix(rows, cols, rng, -5.0, 5.0);

    const auto got = near::singular_values(m).values;
    const auto ref = oracles::reference_singular_values(m);
    REQUIRE(got.size() == ref.size());

    const double scale = std::max(ref.empty() ? 0.0 : ref.front(), 1e-30);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got[i] - ref[i]) <= 1e-9 * scale);
    }

    // Squared values sum to the squared Frobenius norm.
    double fro2 = 0.0;
    for (double v : m.data()) fro2 += v * v;
    double sum2 = 0.0;
    for (double v : got) sum2 += v * v;
    CHECK(std::abs(sum2 - fro2) <= 1e-8 * fro2);
  }
}

TEST_CASE("singular values are invariant under row permutation") {
  near::Rng rng(21);
  const auto m = oracles::random_matrix(7, 5, rng);
  Matrix permuted(7, 5);
  const std::size_t perm[7] = {3, 0, 6, 1, 5, 2, 4};
  for (std::size_t r = 0; r < 7; ++r) {
    for (std::size_t c = 0; c < 5; ++c) permuted(perm[r], c) = m(r, c);
  }
  const auto a = near::singular_values(m).values;
  const auto b = near::singular_values(permuted).values;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == Approx(b[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("shannon entropy") {
  CHECK(near::shannon_entropy(std::vector<double>{1.0, 0.0, 0.0}) == 0.0);
  CHECK(near::shannon_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) ==
        Approx(std::log(4.0)).epsilon(1e-12));

  const std::vector<double> p{0.5, 0.25, 0.25};
  CHECK(near::shannon_entropy(p) == Approx(oracles::entropy_direct(p)).epsilon(1e-15));
  CHECK(near::shannon_entropy(p) == Approx(1.0397).epsilon(5e-5));

  CHECK_THROWS_AS(near::shannon_entropy(std::vector<double>{-0.1, 1.1}),
                  near::InvalidDistribution);
  CHECK_THROWS_AS(near::shannon_entropy(std::vector<double>{0.5, 0.6}),
                  near::InvalidDistribution);
}

TEST_CASE("effective rank") {
  SUBCASE("identity is exactly n") {
    for (std::size_t n : {1, 2, 5, 17}) {
      CHECK(near::effective_rank(identity(n)) ==
            Approx(static_cast<double>(n)).epsilon(1e-9));
    }
  }

  SUBCASE("rank-1 outer product gives 1") {
    near::Rng rng(3);
    Matrix m(6, 4);
    std::vector<double> u(6), v(4);
    for (auto& x : u) x = rng.uniform(-2.0, 2.0);
    for (auto& x : v) x = rng.uniform(-2.0, 2.0);
    for (std::size_t r = 0; r < 6; ++r) {
      for (std::size_t c = 0; c < 4; ++c) m(r, c) = u[r] * v[c];
    }
    CHECK(near::effective_rank(m) == Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("spectrum (2,1,1) matches the entropy oracle") {
    Matrix m(3, 3);
    m(0, 0) = 2.0;
    m(1, 1) = 1.0;
    m(2, 2) = 1.0;
    CHECK(near::effective_rank(m) ==
          Approx(oracles::erank_from_sigma({2.0, 1.0, 1.0})).epsilon(1e-12));
    CHECK(near::effective_rank(m) == Approx(2.8284).epsilon(5e-5));
  }

  SUBCASE("zero matrix raises ZeroMatrix") {
    CHECK_THROWS_AS(near::effective_rank(Matrix(3, 3)), near::ZeroMatrix);
  }
}

TEST_CASE("effective rank invariances") {
  near::Rng rng(77);

  SUBCASE("scale invariance") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto m = oracles::random_matrix(1 + rng.next_below(20), 1 + rng.next_below(20), rng);
      const double base = near::effective_rank(m);
      for (double c : {-3.0, 0.01, 1e6}) {
        Matrix scaled(m.rows(), m.cols());
        for (std::size_t i = 0; i < m.size(); ++i) scaled.data()[i] = c * m.data()[i];
        CHECK(near::effective_rank(scaled) == Approx(base).epsilon(1e-9));
      }
    }
  }

  SUBCASE("orthogonal invariance") {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 2 + rng.next_below(16);
      const auto m = oracles::random_matrix(n, n, rng);
      const auto u = oracles::random_orthogonal(n, rng);
      const auto v = oracles::random_orthogonal(n, rng);
      const auto rotated = oracles::matmul(oracles::matmul(u, m), v);
      CHECK(near::effective_rank(rotated) ==
            Approx(near::effective_rank(m)).epsilon(1e-8));
    }
  }

  SUBCASE("bounds on random matrices") {
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t rows = 1 + rng.next_below(24);
      const std::size_t cols = 1 + rng.next_below(24);
      const auto m = oracles::random_matrix(rows, cols, rng);
      const double e = near::effective_rank(m);
      CHECK(e >= 1.0);
      CHECK(e <= static_cast<double>(std::min(rows, cols)));
    }
  }

  SUBCASE("duplicate row never beats an orthogonal row") {
    // Base 2x3 block; append either a copy of the first row or a row
    // orthogonal to both.
    const Matrix base(2, 3, {1, 0, 0, 0, 1, 0});
    Matrix with_dup(3, 3, {1, 0, 0, 0, 1, 0, 1, 0, 0});
    Matrix with_orth(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    CHECK(near::effective_rank(with_dup) < near::effective_rank(with_orth));

    // Same comparison on a generic base.
    near::Rng r2(5);
    const auto b = oracles::random_matrix(2, 3, r2);
    Matrix dup(3, 3), orth(3, 3);
    for (std::size_t c = 0; c < 3; ++c) {
      dup(0, c) = b(0, c);
      dup(1, c) = b(1, c);
      dup(2, c) = b(0, c);
      orth(0, c) = b(0, c);
      orth(1, c) = b(1, c);
    }
    // Cross product of the two base rows is orthogonal to both.
    orth(2, 0) = b(0, 1) * b(1, 2) - b(0, 2) * b(1, 1);
    orth(2, 1) = b(0, 2) * b(1, 0) - b(0, 0) * b(1, 2);
    orth(2, 2) = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    CHECK(near::effective_rank(dup) <= near::effective_rank(orth));
  }
}
