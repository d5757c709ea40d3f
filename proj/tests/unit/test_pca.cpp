#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "neurogen/errors.hpp"
#include "neurogen/pca.hpp"
#include "test_support.hpp"

using namespace neurogen;
using neurogen::testing::random_matrix;

namespace {

// Cyclic Jacobi eigenvalue iteration; returns (values, vectors as columns),
// sorted by decreasing eigenvalue.
std::pair<std::vector<double>, Matrix> jacobi_eigen(Matrix a) {
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-26) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  std::vector<double> values;
  Matrix vectors(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    values.push_back(a(order[k], order[k]));
    for (std::size_t r = 0; r < n; ++r) vectors(r, k) = v(r, order[k]);
  }
  return {values, vectors};
}

Matrix sample_covariance(const Matrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  std::vector<double> mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) mean[j] += x(i, j) / static_cast<double>(n);
  }
  Matrix c(p, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < p; ++b) {
        c(a, b) += (x(i, a) - mean[a]) * (x(i, b) - mean[b]) / static_cast<double>(n - 1);
      }
    }
  }
  return c;
}

}  // namespace

TEST(Pca, RankCDataReconstructsExactly) {
  Rng rng(1);
  const Matrix coeff = random_matrix(50, 3, rng), basis = random_matrix(3, 8, rng);
  Matrix x = matmul(coeff, basis);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < 8; ++j) x(i, j) += static_cast<double>(j);
  }
  const PcaBasis pca = fit_pca(x, 3);
  EXPECT_LT(max_abs_diff(pca_reconstruct(pca, pca_project(pca, x)), x), 1e-9);
}

TEST(Pca, VarianceFractionsNonIncreasing) {
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const PcaBasis pca = fit_pca(random_matrix(40, 10, rng), 6);
    const auto ratio = pca.explained_variance_ratio();
    ASSERT_EQ(ratio.size(), 6u);
    for (std::size_t k = 1; k < ratio.size(); ++k) EXPECT_LE(ratio[k], ratio[k - 1] + 1e-15);
    for (std::size_t k = 1; k < pca.eigenvalues.size(); ++k) {
      EXPECT_LE(pca.eigenvalues[k], pca.eigenvalues[k - 1]);
    }
  }
}

TEST(Pca, MatchesJacobiOracleUpToSign) {
  Rng rng(3);
  Matrix x = random_matrix(60, 7, rng);
  for (std::size_t i = 0; i < 60; ++i) {
    x(i, 0) *= 5.0;
    x(i, 3) *= 3.0;
    x(i, 5) += 0.5 * x(i, 0);
  }
  const PcaBasis pca = fit_pca(x, 4);
  const auto [values, vectors] = jacobi_eigen(sample_covariance(x));
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(pca.eigenvalues[k], values[k], 1e-9 * std::max(1.0, values[k]));
    double dot = 0.0;
    for (std::size_t r = 0; r < 7; ++r) dot += pca.components(r, k) * vectors(r, k);
    const double sign = dot >= 0 ? 1.0 : -1.0;
    for (std::size_t r = 0; r < 7; ++r) {
      EXPECT_NEAR(pca.components(r, k), sign * vectors(r, k), 1e-8);
    }
  }
}

TEST(Pca, TooManyComponentsThrows) {
  Rng rng(4);
  EXPECT_THROW(fit_pca(random_matrix(5, 10, rng), 6), ArgumentError);
  EXPECT_THROW(fit_pca(random_matrix(20, 4, rng), 5), ArgumentError);
}

TEST(Pca, ProjectionIsCentredOnTrainingMean) {
  Rng rng(5);
  const Matrix x = random_matrix(30, 5, rng, 2.0);
  const PcaBasis pca = fit_pca(x, 3);
  const Matrix z = pca_project(pca, x);
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < 30; ++i) s += z(i, k);
    EXPECT_NEAR(s, 0.0, 1e-10);
  }
}

TEST(Pca, SerialisationRoundTrip) {
  Rng rng(6);
  const PcaBasis pca = fit_pca(random_matrix(30, 5, rng), 3);
  std::stringstream ss;
  pca.write(ss);
  const PcaBasis back = PcaBasis::read(ss);
  EXPECT_EQ(back.mean, pca.mean);
  EXPECT_EQ(back.components, pca.components);
  EXPECT_EQ(back.eigenvalues, pca.eigenvalues);
}
