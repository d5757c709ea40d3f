#pragma once

#include "neurogen/matrix.hpp"

// Hand-written forward/backward kernels. Forward functions are pure; the
// caller keeps whatever activations the matching backward needs.
namespace neurogen {

/// out[i,j] = sum_k x[i,k] * w[k,j] + b[j]
Matrix affine(const Matrix& x, const Parameter& w, const Parameter& b);

/// Returns dL/dx and accumulates dL/dw, dL/db into trainable parameters.
Matrix affine_backward(const Matrix& x, const Matrix& d_out, Parameter& w, Parameter& b);

/// Input-gradient only; parameters untouched.
Matrix affine_backward_input(const Matrix& d_out, const Parameter& w);

Matrix relu(const Matrix& x);
/// Gradient is passed where x > 0 and blocked elsewhere (0 at the kink).
Matrix relu_backward(const Matrix& x, const Matrix& d_out);

/// Exact (erf) GELU.
Matrix gelu(const Matrix& x);
Matrix gelu_backward(const Matrix& x, const Matrix& d_out);

/// Stable softmax of a 1xV row. Throws NumericError on non-finite input.
Matrix softmax_row(const Matrix& x);
/// Row-wise in-place softmax over the first `len` entries of a row.
void softmax_inplace(std::span<double> row);
/// log-sum-exp of a row with max subtraction.
double log_sum_exp(std::span<const double> row);

struct LayerNormCache {
  Matrix normalized;  // (x - mean) / std
  std::vector<double> inv_std;
};

inline constexpr double kLayerNormEps = 1e-5;

Matrix layer_norm(const Matrix& x, const Parameter& gain, const Parameter& bias,
                  LayerNormCache* cache = nullptr);
Matrix layer_norm_backward(const LayerNormCache& cache, const Matrix& d_out, Parameter& gain,
                           Parameter& bias);
/// Gradient sinks may be null; the gain value is read-only.
Matrix layer_norm_backward(const LayerNormCache& cache, const Matrix& d_out, const Matrix& gain,
                           Matrix* d_gain, Matrix* d_bias);

/// Affine backward with optional gradient sinks for W and b.
Matrix affine_backward(const Matrix& x, const Matrix& d_out, const Matrix& w, Matrix* d_w,
                       Matrix* d_b);

}  // namespace neurogen
