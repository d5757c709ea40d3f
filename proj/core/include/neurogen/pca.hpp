#pragma once

#include <iosfwd>
#include <vector>

#include "neurogen/matrix.hpp"

namespace neurogen {

struct PcaBasis {
  Matrix mean;                      // 1 x c_raw
  Matrix components;                // c_raw x c, column k = k-th eigenvector
  std::vector<double> eigenvalues;  // all c_raw covariance eigenvalues, non-increasing

  std::size_t input_dim() const noexcept { return components.rows(); }
  std::size_t output_dim() const noexcept { return components.cols(); }
  /// Fraction of total variance captured by each kept component.
  std::vector<double> explained_variance_ratio() const;

  void write(std::ostream& os) const;
  static PcaBasis read(std::istream& is);
};

/// Fits on the rows of `train_rows` (sample covariance, divisor N - 1).
PcaBasis fit_pca(const Matrix& train_rows, std::size_t c);

/// (x - mean) * components.
Matrix pca_project(const PcaBasis& basis, const Matrix& x);
/// reduced * components^T + mean.
Matrix pca_reconstruct(const PcaBasis& basis, const Matrix& reduced);

}  // namespace neurogen
