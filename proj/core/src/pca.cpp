#include "neurogen/pca.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "neurogen/errors.hpp"
#include "neurogen/linalg.hpp"

namespace neurogen {

std::vector<double> PcaBasis::explained_variance_ratio() const {
  double total = 0.0;
  for (double v : eigenvalues) total += std::max(v, 0.0);
  std::vector<double> out;
  for (std::size_t k = 0; k < output_dim(); ++k) {
    out.push_back(total > 0.0 ? std::max(eigenvalues[k], 0.0) / total : 0.0);
  }
  return out;
}

void PcaBasis::write(std::ostream& os) const {
  write_binary(os, mean);
  write_binary(os, components);
  write_binary(os, Matrix(1, eigenvalues.size(), eigenvalues));
}

PcaBasis PcaBasis::read(std::istream& is) {
  PcaBasis b;
  b.mean = read_binary(is);
  b.components = read_binary(is);
  b.eigenvalues = read_binary(is).values();
  if (b.mean.cols() != b.components.rows() || b.eigenvalues.size() != b.components.rows()) {
    throw DataError("PCA basis blocks have inconsistent shapes");
  }
  return b;
}

PcaBasis fit_pca(const Matrix& train_rows, std::size_t c) {
  const std::size_t n = train_rows.rows();
  const std::size_t raw = train_rows.cols();
  if (c == 0 || c > n || c > raw) {
    throw ArgumentError("PCA: cannot keep " + std::to_string(c) + " components from " +
                        shape_string(train_rows) + " training rows");
  }
  if (n < 2) throw ArgumentError("PCA needs at least two training rows");
  PcaBasis b;
  b.mean = column_mean(train_rows);
  const SymmetricEigen eig = symmetric_eigen(covariance(train_rows, b.mean));
  b.eigenvalues = eig.values;
  b.components = Matrix(raw, c);
  for (std::size_t k = 0; k < c; ++k) {
    // Sign convention: the largest-magnitude loading of each component is positive.
    std::size_t arg = 0;
    for (std::size_t r = 1; r < raw; ++r) {
      if (std::abs(eig.vectors(r, k)) > std::abs(eig.vectors(arg, k))) arg = r;
    }
    const double sign = eig.vectors(arg, k) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < raw; ++r) b.components(r, k) = sign * eig.vectors(r, k);
  }
  return b;
}

Matrix pca_project(const PcaBasis& basis, const Matrix& x) {
  if (x.cols() != basis.input_dim()) {
    throw DimensionError("PCA: input " + shape_string(x) + " vs basis " +
                         shape_string(basis.components));
  }
  Matrix centered = x;
  for (std::size_t i = 0; i < centered.rows(); ++i) {
    for (std::size_t j = 0; j < centered.cols(); ++j) centered(i, j) -= basis.mean(0, j);
  }
  return matmul(centered, basis.components);
}

Matrix pca_reconstruct(const PcaBasis& basis, const Matrix& reduced) {
  if (reduced.cols() != basis.output_dim()) {
    throw DimensionError("PCA: reduced " + shape_string(reduced) + " vs basis " +
                         shape_string(basis.components));
  }
  Matrix out = matmul_nt(reduced, basis.components);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += basis.mean(0, j);
  }
  return out;
}

}  // namespace neurogen
