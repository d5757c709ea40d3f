#include "neurogen/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neurogen/errors.hpp"

namespace neurogen {

Matrix affine(const Matrix& x, const Parameter& w, const Parameter& b) {
  if (x.cols() != w.value.rows() || b.value.rows() != 1 || b.value.cols() != w.value.cols()) {
    throw DimensionError("affine: x" + shape_string(x) + " W" + shape_string(w.value) + " b" +
                         shape_string(b.value));
  }
  Matrix out = matmul(x, w.value);
  const std::size_t q = out.cols();
  const double* bias = b.value.data();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* row = out.data() + i * q;
    for (std::size_t j = 0; j < q; ++j) row[j] += bias[j];
  }
  return out;
}

Matrix affine_backward(const Matrix& x, const Matrix& d_out, const Matrix& w, Matrix* d_w,
                       Matrix* d_b) {
  if (d_out.rows() != x.rows() || d_out.cols() != w.cols() || x.cols() != w.rows()) {
    throw DimensionError("affine_backward: x" + shape_string(x) + " dy" + shape_string(d_out) +
                         " W" + shape_string(w));
  }
  if (d_w) matmul_tn_accumulate(x, d_out, *d_w);
  if (d_b) {
    double* g = d_b->data();
    for (std::size_t i = 0; i < d_out.rows(); ++i) {
      const double* row = d_out.data() + i * d_out.cols();
      for (std::size_t j = 0; j < d_out.cols(); ++j) g[j] += row[j];
    }
  }
  return matmul_nt(d_out, w);
}

Matrix affine_backward(const Matrix& x, const Matrix& d_out, Parameter& w, Parameter& b) {
  return affine_backward(x, d_out, w.value, w.trainable ? &w.grad : nullptr,
                         b.trainable ? &b.grad : nullptr);
}

Matrix affine_backward_input(const Matrix& d_out, const Parameter& w) {
  return matmul_nt(d_out, w.value);
}

Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix relu_backward(const Matrix& x, const Matrix& d_out) {
  require_same_shape(x, d_out, "relu_backward");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.values()[i] = x.values()[i] > 0.0 ? d_out.values()[i] : 0.0;
  }
  return out;
}

Matrix gelu(const Matrix& x) {
  Matrix out = x;
  for (auto& v : out.values()) v = 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
  return out;
}

Matrix gelu_backward(const Matrix& x, const Matrix& d_out) {
  require_same_shape(x, d_out, "gelu_backward");
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.values()[i];
    const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
    out.values()[i] = d_out.values()[i] * (cdf + v * pdf);
  }
  return out;
}

void softmax_inplace(std::span<double> row) {
  if (row.empty()) return;
  const double mx = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (auto& v : row) {
    v = std::exp(v - mx);
    sum += v;
  }
  const double inv = 1.0 / sum;
  for (auto& v : row) v *= inv;
}

double log_sum_exp(std::span<const double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double v : row) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

Matrix softmax_row(const Matrix& x) {
  if (x.rows() != 1 || x.cols() == 0) {
    throw DimensionError("softmax_row expects a non-empty 1xV row, got " + shape_string(x));
  }
  if (!all_finite(x)) throw NumericError("softmax_row: non-finite logit");
  Matrix out = x;
  softmax_inplace(out.row(0));
  return out;
}

Matrix layer_norm(const Matrix& x, const Parameter& gain, const Parameter& bias,
                  LayerNormCache* cache) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (gain.value.cols() != d || bias.value.cols() != d) {
    throw DimensionError("layer_norm: x" + shape_string(x) + " gain" + shape_string(gain.value));
  }
  Matrix out(n, d);
  if (cache) {
    cache->normalized = Matrix(n, d);
    cache->inv_std.assign(n, 0.0);
  }
  const double* g = gain.value.data();
  const double* b = bias.value.data();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t j = 0; j < d; ++j) {
      const double xh = (row[j] - mean) * inv;
      if (cache) cache->normalized(i, j) = xh;
      out(i, j) = xh * g[j] + b[j];
    }
    if (cache) cache->inv_std[i] = inv;
  }
  return out;
}

Matrix layer_norm_backward(const LayerNormCache& cache, const Matrix& d_out, const Matrix& gain,
                           Matrix* d_gain, Matrix* d_bias) {
  const Matrix& xh = cache.normalized;
  require_same_shape(xh, d_out, "layer_norm_backward");
  const std::size_t n = xh.rows();
  const std::size_t d = xh.cols();
  Matrix dx(n, d);
  const double* g = gain.data();
  std::vector<double> dxh(d);
  for (std::size_t i = 0; i < n; ++i) {
    double mean_dxh = 0.0;
    double mean_dxh_xh = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double dy = d_out(i, j);
      if (d_gain) (*d_gain)(0, j) += dy * xh(i, j);
      if (d_bias) (*d_bias)(0, j) += dy;
      dxh[j] = dy * g[j];
      mean_dxh += dxh[j];
      mean_dxh_xh += dxh[j] * xh(i, j);
    }
    mean_dxh /= static_cast<double>(d);
    mean_dxh_xh /= static_cast<double>(d);
    const double inv = cache.inv_std[i];
    for (std::size_t j = 0; j < d; ++j) {
      dx(i, j) = inv * (dxh[j] - mean_dxh - xh(i, j) * mean_dxh_xh);
    }
  }
  return dx;
}

Matrix layer_norm_backward(const LayerNormCache& cache, const Matrix& d_out, Parameter& gain,
                           Parameter& bias) {
  return layer_norm_backward(cache, d_out, gain.value, gain.trainable ? &gain.grad : nullptr,
                             bias.trainable ? &bias.grad : nullptr);
}

}  // namespace neurogen
