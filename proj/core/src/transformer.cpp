#include "neurogen/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "neurogen/checksum.hpp"
#include "neurogen/errors.hpp"
#include "neurogen/random.hpp"

namespace neurogen {
namespace {

Matrix normal_matrix(Rng& rng, std::size_t r, std::size_t c, double stddev) {
  Matrix m(r, c);
  for (auto& v : m.values()) v = stddev * rng.normal();
  return m;
}

Matrix uniform_matrix(Rng& rng, std::size_t r, std::size_t c, double bound) {
  Matrix m(r, c);
  for (auto& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

// Causal multi-head attention over a packed [Q | K | V] matrix.
Matrix attention_forward(const Matrix& qkv, std::size_t heads, std::vector<Matrix>& probs) {
  const std::size_t len = qkv.rows();
  const std::size_t d = qkv.cols() / 3;
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix out(len, d);
  probs.assign(heads, Matrix(len, len));
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t qo = h * dh;
    const std::size_t ko = d + h * dh;
    const std::size_t vo = 2 * d + h * dh;
    Matrix& p = probs[h];
    for (std::size_t i = 0; i < len; ++i) {
      const double* q = qkv.data() + i * qkv.cols() + qo;
      double* prow = p.data() + i * len;
      for (std::size_t j = 0; j <= i; ++j) {
        const double* k = qkv.data() + j * qkv.cols() + ko;
        double s = 0.0;
        for (std::size_t t = 0; t < dh; ++t) s += q[t] * k[t];
        prow[j] = s * scale;
      }
      softmax_inplace(std::span<double>(prow, i + 1));
      double* o = out.data() + i * d + qo;
      for (std::size_t j = 0; j <= i; ++j) {
        const double* v = qkv.data() + j * qkv.cols() + vo;
        const double w = prow[j];
        for (std::size_t t = 0; t < dh; ++t) o[t] += w * v[t];
      }
    }
  }
  return out;
}

Matrix attention_backward(const Matrix& qkv, const std::vector<Matrix>& probs,
                          const Matrix& d_out, std::size_t heads) {
  const std::size_t len = qkv.rows();
  const std::size_t d = qkv.cols() / 3;
  const std::size_t dh = d / heads;
  const std::size_t stride = qkv.cols();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix d_qkv(len, stride);
  std::vector<double> dp(len);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t qo = h * dh;
    const std::size_t ko = d + h * dh;
    const std::size_t vo = 2 * d + h * dh;
    const Matrix& p = probs[h];
    for (std::size_t i = 0; i < len; ++i) {
      const double* dout = d_out.data() + i * d + qo;
      const double* prow = p.data() + i * len;
      double dot = 0.0;
      for (std::size_t j = 0; j <= i; ++j) {
        const double* v = qkv.data() + j * stride + vo;
        double s = 0.0;
        for (std::size_t t = 0; t < dh; ++t) s += dout[t] * v[t];
        dp[j] = s;
        dot += s * prow[j];
        double* dv = d_qkv.data() + j * stride + vo;
        for (std::size_t t = 0; t < dh; ++t) dv[t] += prow[j] * dout[t];
      }
      const double* q = qkv.data() + i * stride + qo;
      double* dq = d_qkv.data() + i * stride + qo;
      for (std::size_t j = 0; j <= i; ++j) {
        const double ds = prow[j] * (dp[j] - dot) * scale;
        if (ds == 0.0) continue;
        const double* k = qkv.data() + j * stride + ko;
        double* dk = d_qkv.data() + j * stride + ko;
        for (std::size_t t = 0; t < dh; ++t) {
          dq[t] += ds * k[t];
          dk[t] += ds * q[t];
        }
      }
    }
  }
  return d_qkv;
}

Matrix* sink_grad(LanguageModel::Block* blk, Parameter LanguageModel::Block::*member) {
  if (!blk) return nullptr;
  Parameter& p = blk->*member;
  return p.trainable ? &p.grad : nullptr;
}

Matrix* sink_grad(Parameter* p) { return p && p->trainable ? &p->grad : nullptr; }

const char* kCheckpointMagic = "neurogen-lm 1";

}  // namespace

void LMConfig::validate() const {
  if (vocab_size < Vocabulary::kReserved) {
    throw ConfigError("LMConfig: vocab_size must cover the reserved ids");
  }
  if (d_model == 0 || heads == 0 || layers == 0 || context_len == 0 || ffn_mult == 0) {
    throw ConfigError("LMConfig: dimensions must be positive");
  }
  if (d_model % heads != 0) {
    throw ConfigError("LMConfig: d_model " + std::to_string(d_model) +
                      " not divisible by heads " + std::to_string(heads));
  }
}

LanguageModel::LanguageModel(const LMConfig& config) : config_(config) {
  config_.validate();
  const std::size_t d = config_.d_model;
  const std::size_t ff = d * config_.ffn_mult;
  Rng rng(mix_seed(config_.seed, 0x1A));
  const double bound_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double bound_ff = 1.0 / std::sqrt(static_cast<double>(ff));

  embed_ = Parameter("embed", normal_matrix(rng, config_.vocab_size, d, 0.1));
  pos_ = Parameter("pos", normal_matrix(rng, config_.context_len, d, 0.02));
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string pre = "block" + std::to_string(l) + ".";
    Block b;
    b.ln1_gain = Parameter(pre + "ln1_gain", Matrix(1, d, 1.0));
    b.ln1_bias = Parameter(pre + "ln1_bias", Matrix(1, d));
    b.qkv_w = Parameter(pre + "qkv_w", uniform_matrix(rng, d, 3 * d, bound_d));
    b.qkv_b = Parameter(pre + "qkv_b", uniform_matrix(rng, 1, 3 * d, bound_d));
    b.proj_w = Parameter(pre + "proj_w", uniform_matrix(rng, d, d, bound_d));
    b.proj_b = Parameter(pre + "proj_b", uniform_matrix(rng, 1, d, bound_d));
    b.ln2_gain = Parameter(pre + "ln2_gain", Matrix(1, d, 1.0));
    b.ln2_bias = Parameter(pre + "ln2_bias", Matrix(1, d));
    b.fc1_w = Parameter(pre + "fc1_w", uniform_matrix(rng, d, ff, bound_d));
    b.fc1_b = Parameter(pre + "fc1_b", uniform_matrix(rng, 1, ff, bound_d));
    b.fc2_w = Parameter(pre + "fc2_w", uniform_matrix(rng, ff, d, bound_ff));
    b.fc2_b = Parameter(pre + "fc2_b", uniform_matrix(rng, 1, d, bound_ff));
    blocks_.push_back(std::move(b));
  }
  final_gain_ = Parameter("final_gain", Matrix(1, d, 1.0));
  final_bias_ = Parameter("final_bias", Matrix(1, d));
  head_w_ = Parameter("head_w", uniform_matrix(rng, d, config_.vocab_size, bound_d));
  head_b_ = Parameter("head_b", uniform_matrix(rng, 1, config_.vocab_size, bound_d));
}

void LanguageModel::check_length(std::size_t rows) const {
  if (rows > config_.context_len) {
    throw ContextLengthError("sequence of " + std::to_string(rows) +
                             " rows exceeds context length " +
                             std::to_string(config_.context_len));
  }
}

Matrix LanguageModel::embed_tokens(std::span<const TokenId> ids) const {
  const std::size_t d = config_.d_model;
  Matrix out(ids.size(), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const TokenId id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw VocabularyError("token id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(config_.vocab_size));
    }
    out.set_row(i, embed_.value.row(static_cast<std::size_t>(id)));
  }
  return out;
}

LanguageModel::Trace LanguageModel::forward(const Matrix& inputs) const {
  if (inputs.cols() != config_.d_model) {
    throw DimensionError("LanguageModel: input rows have width " + std::to_string(inputs.cols()) +
                         ", model width is " + std::to_string(config_.d_model));
  }
  if (inputs.rows() == 0) throw ArgumentError("LanguageModel: empty input sequence");
  check_length(inputs.rows());

  const std::size_t len = inputs.rows();
  Matrix x = inputs;
  for (std::size_t i = 0; i < len; ++i) {
    double* row = x.data() + i * config_.d_model;
    const double* p = pos_.value.data() + i * config_.d_model;
    for (std::size_t j = 0; j < config_.d_model; ++j) row[j] += p[j];
  }

  Trace trace;
  trace.blocks.resize(blocks_.size());
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const Block& b = blocks_[l];
    BlockTrace& bt = trace.blocks[l];
    bt.ln1_out = layer_norm(x, b.ln1_gain, b.ln1_bias, &bt.ln1);
    bt.qkv = affine(bt.ln1_out, b.qkv_w, b.qkv_b);
    bt.attn = attention_forward(bt.qkv, config_.heads, bt.probs);
    add_inplace(x, affine(bt.attn, b.proj_w, b.proj_b));
    bt.ln2_out = layer_norm(x, b.ln2_gain, b.ln2_bias, &bt.ln2);
    bt.fc1_pre = affine(bt.ln2_out, b.fc1_w, b.fc1_b);
    bt.fc1_act = gelu(bt.fc1_pre);
    add_inplace(x, affine(bt.fc1_act, b.fc2_w, b.fc2_b));
  }
  trace.hidden = layer_norm(x, final_gain_, final_bias_, &trace.final_norm);
  return trace;
}

Matrix LanguageModel::backward(const Trace& trace, const Matrix& d_hidden,
                               LanguageModel* sink) const {
  Matrix dx = layer_norm_backward(trace.final_norm, d_hidden, final_gain_.value,
                                  sink_grad(sink ? &sink->final_gain_ : nullptr),
                                  sink_grad(sink ? &sink->final_bias_ : nullptr));
  using B = Block;
  for (std::size_t l = blocks_.size(); l-- > 0;) {
    const Block& b = blocks_[l];
    const BlockTrace& bt = trace.blocks[l];
    Block* sb = sink ? &sink->blocks_[l] : nullptr;

    Matrix d_act = affine_backward(bt.fc1_act, dx, b.fc2_w.value, sink_grad(sb, &B::fc2_w),
                                   sink_grad(sb, &B::fc2_b));
    Matrix d_pre = gelu_backward(bt.fc1_pre, d_act);
    Matrix d_ln2 = affine_backward(bt.ln2_out, d_pre, b.fc1_w.value, sink_grad(sb, &B::fc1_w),
                                   sink_grad(sb, &B::fc1_b));
    add_inplace(dx, layer_norm_backward(bt.ln2, d_ln2, b.ln2_gain.value,
                                        sink_grad(sb, &B::ln2_gain), sink_grad(sb, &B::ln2_bias)));

    Matrix d_attn = affine_backward(bt.attn, dx, b.proj_w.value, sink_grad(sb, &B::proj_w),
                                    sink_grad(sb, &B::proj_b));
    Matrix d_qkv = attention_backward(bt.qkv, bt.probs, d_attn, config_.heads);
    Matrix d_ln1 = affine_backward(bt.ln1_out, d_qkv, b.qkv_w.value, sink_grad(sb, &B::qkv_w),
                                   sink_grad(sb, &B::qkv_b));
    add_inplace(dx, layer_norm_backward(bt.ln1, d_ln1, b.ln1_gain.value,
                                        sink_grad(sb, &B::ln1_gain), sink_grad(sb, &B::ln1_bias)));
  }
  if (sink && sink->pos_.trainable) {
    for (std::size_t i = 0; i < dx.size(); ++i) sink->pos_.grad.values()[i] += dx.values()[i];
  }
  return dx;
}

std::vector<double> LanguageModel::log_probs_from_hidden(std::span<const double> hidden_row) const {
  const std::size_t d = config_.d_model;
  const std::size_t v = config_.vocab_size;
  std::vector<double> logits(head_b_.value.values());
  for (std::size_t k = 0; k < d; ++k) {
    const double h = hidden_row[k];
    const double* w = head_w_.value.data() + k * v;
    for (std::size_t j = 0; j < v; ++j) logits[j] += h * w[j];
  }
  const double lse = log_sum_exp(logits);
  for (auto& x : logits) x -= lse;
  return logits;
}

Matrix LanguageModel::next_token_distribution(const Matrix& inputs) const {
  const Trace trace = forward(inputs);
  const auto lp = log_probs_from_hidden(trace.hidden.row(trace.hidden.rows() - 1));
  Matrix out(1, lp.size());
  for (std::size_t j = 0; j < lp.size(); ++j) out(0, j) = std::exp(lp[j]);
  return out;
}

double LanguageModel::nll_impl(const Matrix& prefix, std::span<const TokenId> continuation,
                               double scale, Matrix* d_prefix, LanguageModel* sink) const {
  if (continuation.empty()) throw ArgumentError("likelihood of an empty continuation");
  if (prefix.rows() == 0) throw ArgumentError("likelihood needs at least one prefix row");
  const std::size_t plen = prefix.rows();
  const std::size_t k = continuation.size();
  const std::size_t v = config_.vocab_size;
  for (TokenId id : continuation) {
    if (id < 0 || static_cast<std::size_t>(id) >= v) {
      throw VocabularyError("continuation token " + std::to_string(id) + " outside vocabulary");
    }
  }

  const Matrix teacher = embed_tokens(continuation.first(k - 1));
  const Matrix parts[2] = {prefix, teacher};
  const Matrix inputs = vstack(parts);
  const Trace trace = forward(inputs);
  const Matrix hid = trace.hidden.slice_rows(plen - 1, k);
  Matrix logits = affine(hid, head_w_, head_b_);

  double nll = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    auto row = logits.row(i);
    const double lse = log_sum_exp(row);
    const auto target = static_cast<std::size_t>(continuation[i]);
    nll += lse - row[target];
    if (d_prefix) {
      for (auto& x : row) x = scale * std::exp(x - lse);
      row[target] -= scale;
    }
  }
  if (!std::isfinite(nll)) throw NumericError("non-finite likelihood");
  if (!d_prefix) return nll;

  // `logits` now holds d(scale * nll)/d(logits).
  Matrix d_hid = affine_backward(hid, logits, head_w_.value,
                                 sink_grad(sink ? &sink->head_w_ : nullptr),
                                 sink_grad(sink ? &sink->head_b_ : nullptr));
  Matrix d_hidden(inputs.rows(), config_.d_model);
  for (std::size_t i = 0; i < k; ++i) d_hidden.set_row(plen - 1 + i, d_hid.row(i));
  Matrix dx = backward(trace, d_hidden, sink);
  *d_prefix = dx.slice_rows(0, plen);
  if (sink && sink->embed_.trainable) {
    for (std::size_t i = 0; i + 1 < k; ++i) {
      auto g = sink->embed_.grad.row(static_cast<std::size_t>(continuation[i]));
      const auto src = dx.row(plen + i);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] += src[j];
    }
  }
  return nll;
}

double LanguageModel::continuation_nll(const Matrix& prefix,
                                       std::span<const TokenId> continuation) const {
  return nll_impl(prefix, continuation, 1.0, nullptr, nullptr);
}

double LanguageModel::continuation_nll_backward(const Matrix& prefix,
                                                std::span<const TokenId> continuation,
                                                double scale, Matrix& d_prefix) {
  return nll_impl(prefix, continuation, scale, &d_prefix, this);
}

double LanguageModel::continuation_nll_input_gradient(const Matrix& prefix,
                                                      std::span<const TokenId> continuation,
                                                      double scale, Matrix& d_prefix) const {
  return nll_impl(prefix, continuation, scale, &d_prefix, nullptr);
}

double LanguageModel::sequence_log_likelihood(const Matrix& inputs,
                                              std::span<const TokenId> continuation) const {
  return -continuation_nll(inputs, continuation);
}

LanguageModel::DecodeState LanguageModel::prefill(const Matrix& inputs,
                                                  std::vector<double>& log_probs) const {
  const Trace trace = forward(inputs);
  const std::size_t d = config_.d_model;
  DecodeState state;
  state.length = inputs.rows();
  state.keys.resize(blocks_.size());
  state.values.resize(blocks_.size());
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const Matrix& qkv = trace.blocks[l].qkv;
    auto& keys = state.keys[l];
    auto& vals = state.values[l];
    keys.reserve(config_.context_len * d);
    vals.reserve(config_.context_len * d);
    for (std::size_t i = 0; i < qkv.rows(); ++i) {
      const double* row = qkv.data() + i * qkv.cols();
      keys.insert(keys.end(), row + d, row + 2 * d);
      vals.insert(vals.end(), row + 2 * d, row + 3 * d);
    }
  }
  log_probs = log_probs_from_hidden(trace.hidden.row(trace.hidden.rows() - 1));
  return state;
}

void LanguageModel::extend(DecodeState& state, std::span<const double> input_row,
                           std::vector<double>& log_probs) const {
  const std::size_t d = config_.d_model;
  if (input_row.size() != d) {
    throw DimensionError("extend: row width " + std::to_string(input_row.size()) + " vs " +
                         std::to_string(d));
  }
  check_length(state.length + 1);
  const std::size_t p = state.length;
  const std::size_t heads = config_.heads;
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix x(1, d);
  for (std::size_t j = 0; j < d; ++j) x(0, j) = input_row[j] + pos_.value(p, j);
  std::vector<double> scores(p + 1);
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const Block& b = blocks_[l];
    const Matrix h = layer_norm(x, b.ln1_gain, b.ln1_bias);
    const Matrix qkv = affine(h, b.qkv_w, b.qkv_b);
    auto& keys = state.keys[l];
    auto& vals = state.values[l];
    keys.insert(keys.end(), qkv.data() + d, qkv.data() + 2 * d);
    vals.insert(vals.end(), qkv.data() + 2 * d, qkv.data() + 3 * d);
    Matrix attn(1, d);
    for (std::size_t hh = 0; hh < heads; ++hh) {
      const double* q = qkv.data() + hh * dh;
      for (std::size_t j = 0; j <= p; ++j) {
        const double* k = keys.data() + j * d + hh * dh;
        double s = 0.0;
        for (std::size_t t = 0; t < dh; ++t) s += q[t] * k[t];
        scores[j] = s * scale;
      }
      softmax_inplace(std::span<double>(scores.data(), p + 1));
      double* o = attn.data() + hh * dh;
      for (std::size_t j = 0; j <= p; ++j) {
        const double* v = vals.data() + j * d + hh * dh;
        for (std::size_t t = 0; t < dh; ++t) o[t] += scores[j] * v[t];
      }
    }
    add_inplace(x, affine(attn, b.proj_w, b.proj_b));
    const Matrix h2 = layer_norm(x, b.ln2_gain, b.ln2_bias);
    add_inplace(x, affine(gelu(affine(h2, b.fc1_w, b.fc1_b)), b.fc2_w, b.fc2_b));
  }
  const Matrix hidden = layer_norm(x, final_gain_, final_bias_);
  log_probs = log_probs_from_hidden(hidden.row(0));
  state.length = p + 1;
}

std::vector<Parameter*> LanguageModel::parameters() {
  std::vector<Parameter*> out{&embed_, &pos_};
  for (auto& b : blocks_) {
    for (Parameter* p : {&b.ln1_gain, &b.ln1_bias, &b.qkv_w, &b.qkv_b, &b.proj_w, &b.proj_b,
                         &b.ln2_gain, &b.ln2_bias, &b.fc1_w, &b.fc1_b, &b.fc2_w, &b.fc2_b}) {
      out.push_back(p);
    }
  }
  for (Parameter* p : {&final_gain_, &final_bias_, &head_w_, &head_b_}) out.push_back(p);
  return out;
}

std::vector<const Parameter*> LanguageModel::parameters() const {
  auto mut = const_cast<LanguageModel*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::size_t LanguageModel::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->size();
  return n;
}

void LanguageModel::set_trainable(bool trainable) {
  for (Parameter* p : parameters()) p->trainable = trainable;
}

void LanguageModel::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

std::uint64_t LanguageModel::checksum() const {
  const auto params = parameters();
  return checksum_parameters(params);
}

std::pair<double, double> LanguageModel::embedding_range() const {
  const auto& v = embed_.value.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

void LanguageModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << kCheckpointMagic << '\n'
      << "vocab_size=" << config_.vocab_size << '\n'
      << "d_model=" << config_.d_model << '\n'
      << "layers=" << config_.layers << '\n'
      << "heads=" << config_.heads << '\n'
      << "context_len=" << config_.context_len << '\n'
      << "ffn_mult=" << config_.ffn_mult << '\n'
      << "seed=" << config_.seed << '\n'
      << "end\n";
  for (const Parameter* p : parameters()) write_binary(out, p->value);
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

LanguageModel LanguageModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kCheckpointMagic) throw DataError(path.string() + " is not a language-model checkpoint");
  std::map<std::string, std::string> kv;
  while (std::getline(in, line) && line != "end") {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("malformed checkpoint header line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto num = [&](const char* key) -> std::uint64_t {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError(std::string("checkpoint header lacks ") + key);
    return std::stoull(it->second);
  };
  LMConfig cfg;
  cfg.vocab_size = num("vocab_size");
  cfg.d_model = num("d_model");
  cfg.layers = num("layers");
  cfg.heads = num("heads");
  cfg.context_len = num("context_len");
  cfg.ffn_mult = num("ffn_mult");
  cfg.seed = num("seed");
  LanguageModel model(cfg);
  for (Parameter* p : model.parameters()) {
    Matrix m = read_binary(in);
    if (m.rows() != p->value.rows() || m.cols() != p->value.cols()) {
      throw DataError("checkpoint block for " + p->name + " has shape " + shape_string(m) +
                      ", expected " + shape_string(p->value));
    }
    p->value = std::move(m);
  }
  return model;
}

}  // namespace neurogen
