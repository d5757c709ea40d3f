#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "neurogen/errors.hpp"
#include "neurogen/gradcheck.hpp"
#include "neurogen/layers.hpp"
#include "test_support.hpp"

using namespace neurogen;
using neurogen::testing::random_matrix;

namespace {

Matrix triple_loop(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix out(x.rows(), w.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double acc = b(0, j);
      for (std::size_t k = 0; k < x.cols(); ++k) acc += x(i, k) * w(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

TEST(Affine, IdentityPassesThrough) {
  Parameter w("w", Matrix::identity(2));
  Parameter b("b", Matrix(1, 2));
  EXPECT_EQ(affine(Matrix::identity(2), w, b), Matrix::identity(2));
}

TEST(Affine, HandSum) {
  Parameter w("w", Matrix::from_rows({{1}, {1}}));
  Parameter b("b", Matrix::from_rows({{3}}));
  const Matrix out = affine(Matrix::from_rows({{1, 2}}), w, b);
  ASSERT_EQ(out.rows(), 1u);
  EXPECT_DOUBLE_EQ(out(0, 0), 6.0);
}

TEST(Affine, MatchesTripleLoop) {
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix x = random_matrix(3, 4, rng);
    Parameter w("w", random_matrix(4, 2, rng));
    Parameter b("b", random_matrix(1, 2, rng));
    EXPECT_LT(max_abs_diff(affine(x, w, b), triple_loop(x, w.value, b.value)), 1e-12);
  }
}

TEST(Affine, ShapeMismatchNamesBothShapes) {
  Parameter w("w", Matrix(3, 2));
  Parameter b("b", Matrix(1, 2));
  try {
    affine(Matrix(2, 4), w, b);
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2x4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3x2"), std::string::npos) << msg;
  }
}

TEST(Affine, BackwardPassesGradientCheckForAllShapes) {
  Rng rng(2);
  const std::pair<std::size_t, std::size_t> shapes[] = {{1, 1}, {4, 3}, {8, 8}, {32, 64}};
  for (auto [p, q] : shapes) {
    const Matrix x = random_matrix(3, p, rng);
    const Matrix target = random_matrix(3, q, rng);
    Parameter w("w", random_matrix(p, q, rng));
    Parameter b("b", random_matrix(1, q, rng));
    auto loss = [&] {
      const Matrix y = affine(x, w, b);
      double l = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) l += 0.5 * std::pow(y.values()[i] - target.values()[i], 2);
      return l;
    };
    w.zero_grad();
    b.zero_grad();
    Matrix dy = affine(x, w, b);
    for (std::size_t i = 0; i < dy.size(); ++i) dy.values()[i] -= target.values()[i];
    affine_backward(x, dy, w, b);
    std::vector<Parameter*> params{&w, &b};
    GradCheckOptions opt;
    opt.coords_per_param = 40;
    EXPECT_LT(finite_difference_check(loss, params, opt).max_rel_error, 1e-4);
  }
}

TEST(Affine, FrozenParametersKeepZeroGradient) {
  Rng rng(3);
  Parameter w("w", random_matrix(3, 2, rng), false);
  Parameter b("b", random_matrix(1, 2, rng), false);
  const Matrix x = random_matrix(4, 3, rng);
  affine_backward(x, random_matrix(4, 2, rng), w, b);
  EXPECT_EQ(w.grad, Matrix(3, 2));
  EXPECT_EQ(b.grad, Matrix(1, 2));
}

TEST(Relu, Examples) {
  EXPECT_EQ(relu(Matrix::from_rows({{-1, 0, 2}})), Matrix::from_rows({{0, 0, 2}}));
  EXPECT_EQ(relu(Matrix::from_rows({{-1, -2}, {-3, -0.5}})), Matrix(2, 2));
  EXPECT_EQ(relu_backward(Matrix::from_rows({{3, -3}}), Matrix::from_rows({{1, 1}})),
            Matrix::from_rows({{1, 0}}));
}

TEST(Relu, SubgradientAtZeroIsZero) {
  EXPECT_EQ(relu_backward(Matrix::from_rows({{0.0}}), Matrix::from_rows({{5.0}})), Matrix(1, 1));
}

TEST(Softmax, Examples) {
  const Matrix a = softmax_row(Matrix::from_rows({{0, 0}}));
  EXPECT_DOUBLE_EQ(a(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(a(0, 1), 0.5);
  const Matrix big = softmax_row(Matrix::from_rows({{1000, 1000}}));
  EXPECT_DOUBLE_EQ(big(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(big(0, 1), 0.5);
  const Matrix logs = softmax_row(Matrix::from_rows({{std::log(1.0), std::log(2.0), std::log(3.0)}}));
  EXPECT_NEAR(logs(0, 0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(logs(0, 1), 2.0 / 6.0, 1e-15);
  EXPECT_NEAR(logs(0, 2), 3.0 / 6.0, 1e-15);
}

TEST(Softmax, NonFiniteInputThrows) {
  EXPECT_THROW(softmax_row(Matrix::from_rows({{0, NAN}})), NumericError);
  EXPECT_THROW(softmax_row(Matrix::from_rows({{INFINITY, 0}})), NumericError);
}

TEST(Softmax, SumsToOneAndIsShiftInvariant) {
  Rng rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t v = 1 + rng.below(50);
    Matrix x = random_matrix(1, v, rng, 1.0 + 20.0 * rng.uniform());
    const Matrix p = softmax_row(x);
    double sum = 0.0;
    for (double e : p.values()) {
      EXPECT_GT(e, 0.0);
      sum += e;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    const double shift = rng.uniform(-100.0, 100.0);
    for (double& e : x.values()) e += shift;
    EXPECT_LT(max_abs_diff(softmax_row(x), p), 1e-12);
  }
}

TEST(Gelu, BackwardMatchesFiniteDifference) {
  Rng rng(5);
  Parameter x("x", random_matrix(3, 5, rng, 2.0));
  auto loss = [&] {
    const Matrix y = gelu(x.value);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += y.values()[i] * static_cast<double>(i % 3 + 1);
    return l;
  };
  Matrix up(3, 5);
  for (std::size_t i = 0; i < up.size(); ++i) up.values()[i] = static_cast<double>(i % 3 + 1);
  x.grad = gelu_backward(x.value, up);
  std::vector<Parameter*> params{&x};
  EXPECT_LT(finite_difference_check(loss, params).max_rel_error, 1e-7);
}

TEST(LayerNorm, BackwardMatchesFiniteDifference) {
  Rng rng(6);
  Parameter x("x", random_matrix(4, 6, rng));
  Parameter gain("g", random_matrix(1, 6, rng));
  Parameter bias("b", random_matrix(1, 6, rng));
  const Matrix weights = random_matrix(4, 6, rng);
  auto loss = [&] {
    const Matrix y = layer_norm(x.value, gain, bias);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += y.values()[i] * weights.values()[i];
    return l;
  };
  LayerNormCache cache;
  layer_norm(x.value, gain, bias, &cache);
  gain.zero_grad();
  bias.zero_grad();
  x.grad = layer_norm_backward(cache, weights, gain, bias);
  std::vector<Parameter*> params{&x, &gain, &bias};
  EXPECT_LT(finite_difference_check(loss, params).max_rel_error, 1e-6);
}

TEST(LayerNorm, RowsAreNormalised) {
  Rng rng(7);
  Parameter gain("g", Matrix(1, 16, 1.0));
  Parameter bias("b", Matrix(1, 16));
  const Matrix y = layer_norm(random_matrix(5, 16, rng, 3.0), gain, bias);
  for (std::size_t r = 0; r < 5; ++r) {
    double mean = 0.0, sq = 0.0;
    for (double v : y.row(r)) mean += v;
    mean /= 16.0;
    for (double v : y.row(r)) sq += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sq / 16.0, 1.0, 1e-3);
  }
}

TEST(MatrixIo, BinaryLayoutIsLittleEndianDimsThenValues) {
  const Matrix m = Matrix::from_rows({{1.5, -2.0, 3.25}, {0.0, 1e-300, -7.0}});
  std::ostringstream os;
  write_binary(os, m);
  const std::string bytes = os.str();
  ASSERT_EQ(bytes.size(), binary_block_size(2, 3));
  ASSERT_EQ(bytes.size(), 16u + 6u * 8u);
  std::uint64_t rows = 0, cols = 0;
  for (int i = 7; i >= 0; --i) rows = (rows << 8) | static_cast<unsigned char>(bytes[i]);
  for (int i = 15; i >= 8; --i) cols = (cols << 8) | static_cast<unsigned char>(bytes[i]);
  EXPECT_EQ(rows, 2u);
  EXPECT_EQ(cols, 3u);
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 16, 8);
  EXPECT_EQ(first, 1.5);
  std::istringstream is(bytes);
  EXPECT_EQ(read_binary(is), m);
}

TEST(MatrixIo, CsvRoundTripIsExact) {
  Rng rng(8);
  const Matrix m = random_matrix(3, 4, rng);
  std::stringstream ss;
  write_csv(ss, m);
  EXPECT_EQ(read_csv(ss), m);
}

TEST(MatrixIo, TruncatedBinaryThrows) {
  std::ostringstream os;
  write_binary(os, Matrix(3, 3, 1.0));
  std::string bytes = os.str();
  bytes.resize(bytes.size() - 5);
  std::istringstream is(bytes);
  EXPECT_THROW(read_binary(is), Error);
}

TEST(Matrix, ConstructionChecksValueCount) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
}
