#include "near/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "near/errors.hpp"

namespace near {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeMismatch("matrix data length " + std::to_string(data_.size()) +
                        " does not match " + std::to_string(rows_) + "x" +
                        std::to_string(cols_));
  }
  if (!all_finite()) throw NonFiniteInput("matrix contains NaN or Inf");
}

Matrix Matrix::top_rows(std::size_t n) const {
  Matrix out(n, cols_);
  std::copy(data_.begin(), data_.begin() + n * cols_, out.data_.begin());
  return out;
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

// One-sided Jacobi (Hestenes) SVD, singular values only. The columns of the
// working copy are orthogonalized pairwise; on convergence the column norms
// are the singular values. Quadratic convergence near the end; sweeps stop
// once every off-diagonal |a_p . a_q| <= tol * ||a_p|| ||a_q||.
//
// Operates on a column-major copy so the inner loops run over contiguous
// memory. Input is transposed first when rows < cols (singular values are
// transpose-invariant).
std::vector<double> jacobi_singular_values(const Matrix& m) {
  const bool transpose = m.rows() < m.cols();
  const std::size_t rows = transpose ? m.cols() : m.rows();
  const std::size_t cols = transpose ? m.rows() : m.cols();

  std::vector<double> a(rows * cols);  // column-major, a[c * rows + r]
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (transpose) {
        a[r * rows + c] = v;
      } else {
        a[c * rows + r] = v;
      }
    }
  }

  std::vector<double> sq_norm(cols);
  auto recompute_norms = [&] {
    for (std::size_t c = 0; c < cols; ++c) {
      const double* col = a.data() + c * rows;
      double s = 0.0;
      for (std::size_t r = 0; r < rows; ++r) s += col[r] * col[r];
      sq_norm[c] = s;
    }
  };
  recompute_norms();

  constexpr double tol = 1e-15;
  constexpr int max_sweeps = 60;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Kill accumulated drift in the cached norms once per sweep.
    recompute_norms();
    bool rotated = false;

    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double* cp = a.data() + p * rows;
        double* cq = a.data() + q * rows;

        double dot = 0.0;
        for (std::size_t r = 0; r < rows; ++r) dot += cp[r] * cq[r];

        const double app = sq_norm[p];
        const double aqq = sq_norm[q];
        if (std::abs(dot) <= tol * std::sqrt(app * aqq)) continue;

        // Rotation angle zeroing the off-diagonal of [[app, dot], [dot, aqq]].
        const double zeta = (aqq - app) / (2.0 * dot);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;

        for (std::size_t r = 0; r < rows; ++r) {
          const double vp = cp[r];
          const double vq = cq[r];
          cp[r] = cs * vp - sn * vq;
          cq[r] = sn * vp + cs * vq;
        }
        sq_norm[p] = std::max(0.0, app - t * dot);
        sq_norm[q] = std::max(0.0, aqq + t * dot);
        rotated = true;
      }
    }
    if (!rotated) break;
  }

  recompute_norms();
  std::vector<double> sigma(cols);
  for (std::size_t c = 0; c < cols; ++c) sigma[c] = std::sqrt(sq_norm[c]);
  std::sort(sigma.begin(), sigma.end(), std::greater<double>());
  return sigma;
}

}  // namespace

SingularSpectrum singular_values(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw ShapeMismatch("singular_values requires a non-empty matrix");
  }
  if (!m.all_finite()) throw NonFiniteInput("singular_values: NaN or Inf entry");
  return SingularSpectrum{jacobi_singular_values(m)};
}

double shannon_entropy(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) throw InvalidDistribution("negative probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
  }
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  // Mathematically h >= 0; round-off can leave a tiny negative residue.
  return std::max(h, 0.0);
}

double effective_rank(const SingularSpectrum& spectrum) {
  const auto& sigma = spectrum.values;
  if (sigma.empty()) throw ZeroMatrix("empty spectrum");
  const double sigma_max = sigma.front();
  if (sigma_max <= 0.0) throw ZeroMatrix("all singular values are zero");

  const double floor = kSingularValueFloor * sigma_max;
  double total = 0.0;
  for (double s : sigma) {
    if (s > floor) total += s;
  }

  std::vector<double> p;
  p.reserve(sigma.size());
  for (double s : sigma) p.push_back(s > floor ? s / total : 0.0);

  const double erank = std::exp(shannon_entropy(p));
  // exp(H) lies in [1, Q] exactly; clamp round-off at the boundaries.
  return std::clamp(erank, 1.0, static_cast<double>(sigma.size()));
}

double effective_rank(const Matrix& m) { return effective_rank(singular_values(m)); }

}  // namespace near
