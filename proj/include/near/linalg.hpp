#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace near {

// Dense real matrix, row-major. Entries must be finite; the data-taking
// constructor enforces this.
class Matrix {
 public:
  Matrix() = default;

  // Zero-initialized rows x cols matrix.
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  // Takes ownership of row-major data; throws ShapeMismatch if the length is
  // not rows*cols and NonFiniteInput if any entry is NaN or infinite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // First n rows as a new matrix.
  Matrix top_rows(std::size_t n) const;

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Singular values in non-increasing order, length Q = min(rows, cols).
struct SingularSpectrum {
  std::vector<double> values;
};

// All Q = min(rows, cols) singular values of m, non-increasing. Computed by
// one-sided Jacobi rotations; each value carries near machine-precision
// accuracy relative to the largest singular value. Throws NonFiniteInput.
SingularSpectrum singular_values(const Matrix& m);

// Shannon entropy -sum p_k log p_k in nats, with 0*log(0) = 0. The input must
// be a probability distribution: p_k >= 0 and sum p_k = 1 within 1e-12,
// otherwise InvalidDistribution.
double shannon_entropy(std::span<const double> p);

// Effective rank: exp of the Shannon entropy of the normalized singular
// values p_k = sigma_k / sum_i sigma_i. Lies in [1, Q]. Singular values below
// 1e-12 * sigma_max are treated as exact zeros before normalization so that
// floating-point tails do not inflate the entropy. Throws ZeroMatrix when all
// singular values vanish.
double effective_rank(const Matrix& m);

// Effective rank computed from an already-available spectrum.
double effective_rank(const SingularSpectrum& spectrum);

// Relative magnitude below which singular values are clamped to zero.
inline constexpr double kSingularValueFloor = 1e-12;

}  // namespace near
