#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "neurogen/layers.hpp"
#include "neurogen/matrix.hpp"
#include "neurogen/vocabulary.hpp"

namespace neurogen {

struct LMConfig {
  std::size_t vocab_size = 2000;
  std::size_t d_model = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t context_len = 128;
  std::size_t ffn_mult = 4;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t head_dim() const { return d_model / heads; }
};

/// Decoder-only causal transformer (pre-LN, learned absolute positions,
/// GELU feed-forward, untied output head).
///
/// Every entry point takes raw embedding rows rather than token ids so that
/// non-token rows (brain embeddings, sentinels) can be injected anywhere in
/// the sequence. Token ids only enter through embed_tokens().
class LanguageModel {
 public:
  struct Block {
    Parameter ln1_gain, ln1_bias;
    Parameter qkv_w, qkv_b;
    Parameter proj_w, proj_b;
    Parameter ln2_gain, ln2_bias;
    Parameter fc1_w, fc1_b;
    Parameter fc2_w, fc2_b;
  };

  struct BlockTrace {
    LayerNormCache ln1;
    Matrix ln1_out;
    Matrix qkv;
    std::vector<Matrix> probs;  // one LxL lower-triangular matrix per head
    Matrix attn;                // concatenated head outputs before projection
    LayerNormCache ln2;
    Matrix ln2_out;
    Matrix fc1_pre;
    Matrix fc1_act;
  };

  /// Activations of one forward pass, consumed by the backward pass.
  struct Trace {
    std::vector<BlockTrace> blocks;
    LayerNormCache final_norm;
    Matrix hidden;  // L x d after the final layer norm
  };

  /// Key/value cache for incremental decoding.
  struct DecodeState {
    std::vector<std::vector<double>> keys;    // per layer, length * d
    std::vector<std::vector<double>> values;  // per layer, length * d
    std::size_t length = 0;
  };

  explicit LanguageModel(const LMConfig& config);

  const LMConfig& config() const noexcept { return config_; }
  std::size_t d_model() const noexcept { return config_.d_model; }
  std::size_t vocab_size() const noexcept { return config_.vocab_size; }

  /// Row i equals the embedding-table row of ids[i].
  Matrix embed_tokens(std::span<const TokenId> ids) const;

  /// Distribution over the token following the L input rows (1 x V).
  Matrix next_token_distribution(const Matrix& inputs) const;

  /// Teacher-forced sum of log P(m_i | inputs, m_<i).
  double sequence_log_likelihood(const Matrix& inputs, std::span<const TokenId> continuation) const;

  /// Negative log-likelihood of `continuation` after `prefix` rows.
  double continuation_nll(const Matrix& prefix, std::span<const TokenId> continuation) const;

  /// As continuation_nll, and writes d(scale * nll)/d(prefix) into
  /// `d_prefix`. Trainable model parameters accumulate their gradients,
  /// including embedding rows consumed by the teacher-forced continuation.
  double continuation_nll_backward(const Matrix& prefix, std::span<const TokenId> continuation,
                                   double scale, Matrix& d_prefix);

  /// Input-gradient only; model parameters are never written.
  double continuation_nll_input_gradient(const Matrix& prefix,
                                         std::span<const TokenId> continuation, double scale,
                                         Matrix& d_prefix) const;

  Trace forward(const Matrix& inputs) const;
  /// Backpropagates d(hidden) to d(inputs). When `sink` is non-null, its
  /// trainable parameters accumulate weight gradients.
  Matrix backward(const Trace& trace, const Matrix& d_hidden, LanguageModel* sink) const;

  /// Log-probabilities over the vocabulary for one final hidden row.
  std::vector<double> log_probs_from_hidden(std::span<const double> hidden_row) const;

  /// Runs the prefix and returns the cache plus log-probs of the next token.
  DecodeState prefill(const Matrix& inputs, std::vector<double>& log_probs) const;
  /// Appends one input row to the cache and returns next-token log-probs.
  void extend(DecodeState& state, std::span<const double> input_row,
              std::vector<double>& log_probs) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;
  void set_trainable(bool trainable);
  void zero_grad();
  /// FNV-1a digest over all parameter values (freeze checks).
  std::uint64_t checksum() const;
  /// Min and max entry of the token-embedding table.
  std::pair<double, double> embedding_range() const;

  Parameter& embedding() noexcept { return embed_; }
  const Parameter& embedding() const noexcept { return embed_; }
  Parameter& head_weight() noexcept { return head_w_; }
  Parameter& head_bias() noexcept { return head_b_; }

  void save(const std::filesystem::path& path) const;
  static LanguageModel load(const std::filesystem::path& path);

 private:
  double nll_impl(const Matrix& prefix, std::span<const TokenId> continuation, double scale,
                  Matrix* d_prefix, LanguageModel* sink) const;
  void check_length(std::size_t rows) const;

  LMConfig config_;
  Parameter embed_;
  Parameter pos_;
  std::vector<Block> blocks_;
  Parameter final_gain_, final_bias_;
  Parameter head_w_, head_b_;
};

}  // namespace neurogen
