#pragma once

#include <vector>

#include "neurogen/matrix.hpp"

// Dense solvers backed by Eigen.
namespace neurogen {

/// Solves A X = B for symmetric positive-definite A.
Matrix solve_spd(const Matrix& a, const Matrix& b);

struct SymmetricEigen {
  std::vector<double> values;  // non-increasing
  Matrix vectors;              // column k pairs with values[k]
};

SymmetricEigen symmetric_eigen(const Matrix& a);

/// Column means as a 1 x cols row.
Matrix column_mean(const Matrix& x);

/// Sample covariance (divisor n - 1) of the rows of x.
Matrix covariance(const Matrix& x, const Matrix& mean);

}  // namespace neurogen
