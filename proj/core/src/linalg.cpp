#include "neurogen/linalg.hpp"

#include <Eigen/Dense>

#include "neurogen/errors.hpp"

namespace neurogen {
namespace {

using Dense = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const Dense> view(const Matrix& m) { return {m.data(), Eigen::Index(m.rows()), Eigen::Index(m.cols())}; }

Matrix from_eigen(const Eigen::MatrixXd& e) {
  Matrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index r = 0; r < e.rows(); ++r) {
    for (Eigen::Index c = 0; c < e.cols(); ++c) out(r, c) = e(r, c);
  }
  return out;
}

}  // namespace

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw DimensionError("solve_spd: A" + shape_string(a) + " B" + shape_string(b));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Eigen::MatrixXd(view(a)));
  if (llt.info() != Eigen::Success) throw NumericError("solve_spd: matrix is not positive definite");
  return from_eigen(llt.solve(Eigen::MatrixXd(view(b))));
}

SymmetricEigen symmetric_eigen(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("symmetric_eigen: " + shape_string(a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(view(a)));
  if (solver.info() != Eigen::Success) throw NumericError("symmetric_eigen: solver failed");
  // Eigen returns ascending order.
  const Eigen::Index n = solver.eigenvalues().size();
  SymmetricEigen out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = n - 1 - k;
    out.values[static_cast<std::size_t>(k)] = solver.eigenvalues()(src);
    for (Eigen::Index r = 0; r < n; ++r) out.vectors(r, k) = solver.eigenvectors()(r, src);
  }
  return out;
}

Matrix column_mean(const Matrix& x) {
  Matrix mean(1, x.cols());
  if (x.rows() == 0) return mean;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) mean(0, c) += x(r, c);
  }
  for (auto& v : mean.values()) v /= static_cast<double>(x.rows());
  return mean;
}

Matrix covariance(const Matrix& x, const Matrix& mean) {
  if (x.rows() < 2) throw ArgumentError("covariance needs at least two rows");
  Matrix centered = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) centered(r, c) -= mean(0, c);
  }
  Matrix cov = matmul_tn(centered, centered);
  for (auto& v : cov.values()) v /= static_cast<double>(x.rows() - 1);
  return cov;
}

}  // namespace neurogen
