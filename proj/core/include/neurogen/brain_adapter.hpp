#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "neurogen/matrix.hpp"

namespace neurogen {

/// Maps a t x c recording to t rows in the language model's embedding
/// space: row i = mlp(pos_i + b_i), mlp = affine -> relu -> affine -> relu
/// -> affine (c -> c -> c -> d). Also owns the two sentinel rows that
/// delimit the brain block in the model input.
class BrainAdapter {
 public:
  struct Trace {
    Matrix x0;  // pos + recording
    Matrix h1_pre, h1;
    Matrix h2_pre, h2;
  };

  BrainAdapter() = default;
  /// pos ~ U(-0.1, 0.1); MLP weights ~ U(+-sqrt(6 / fan_in)); biases zero;
  /// sentinels ~ U(embed_lo, embed_hi).
  BrainAdapter(std::size_t c, std::size_t d, std::size_t t, std::uint64_t seed,
               std::pair<double, double> embedding_range);

  std::size_t channels() const noexcept { return c_; }
  std::size_t width() const noexcept { return d_; }
  std::size_t frames() const noexcept { return t_; }

  Matrix adapt(const Matrix& recording, Trace* trace = nullptr) const;
  /// Accumulates parameter gradients from d(output); returns d(recording).
  Matrix backward(const Trace& trace, const Matrix& d_out);

  Parameter& pos() noexcept { return pos_; }
  Parameter& sentinel_open() noexcept { return open_; }
  Parameter& sentinel_close() noexcept { return close_; }
  const Parameter& sentinel_open() const noexcept { return open_; }
  const Parameter& sentinel_close() const noexcept { return close_; }
  Parameter& layer_weight(std::size_t k) { return w_.at(k); }
  Parameter& layer_bias(std::size_t k) { return b_.at(k); }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void zero_grad();

  void save(const std::filesystem::path& path) const;
  static BrainAdapter load(const std::filesystem::path& path);

 private:
  std::size_t c_ = 0, d_ = 0, t_ = 0;
  Parameter pos_;
  std::vector<Parameter> w_;  // 3 layers
  std::vector<Parameter> b_;
  Parameter open_, close_;
};

/// Trainable scalar count: t*c + 2*(c^2 + c) + (c*d + d) + 2*d.
std::uint64_t adapter_param_count(std::uint64_t c, std::uint64_t d, std::uint64_t t) noexcept;
std::uint64_t adapter_param_count(const BrainAdapter& adapter);

}  // namespace neurogen
