#include "neurogen/pretrain.hpp"

#include <cmath>
#include <span>

#include "neurogen/adam.hpp"
#include "neurogen/errors.hpp"
#include "neurogen/random.hpp"

namespace neurogen {
namespace {

// Windows overlap by one token so every position except each document's
// leading BOS is predicted exactly once.
std::vector<std::vector<TokenId>> cut_windows(const std::vector<std::vector<TokenId>>& corpus,
                                              std::size_t window) {
  std::vector<std::vector<TokenId>> out;
  for (const auto& doc : corpus) {
    std::vector<TokenId> seq;
    seq.reserve(doc.size() + 1);
    seq.push_back(Vocabulary::kBos);
    seq.insert(seq.end(), doc.begin(), doc.end());
    for (std::size_t start = 0; start + 1 < seq.size(); start += window) {
      const std::size_t end = std::min(seq.size(), start + window + 1);
      out.emplace_back(seq.begin() + static_cast<std::ptrdiff_t>(start),
                       seq.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return out;
}

}  // namespace

PretrainResult train_base_lm(const std::vector<std::vector<TokenId>>& corpus,
                             const LMConfig& lm_config, const PretrainConfig& config) {
  if (corpus.empty()) throw DataError("train_base_lm: empty corpus");
  if (config.window + 1 > lm_config.context_len) {
    throw ConfigError("train_base_lm: window exceeds the model context");
  }
  auto windows = cut_windows(corpus, config.window);
  if (windows.empty()) throw DataError("train_base_lm: corpus has no predictable tokens");

  PretrainResult result{LanguageModel(lm_config), {}};
  LanguageModel& lm = result.model;
  lm.set_trainable(true);
  Adam adam(lm.parameters(), AdamConfig{.lr = config.lr});
  Rng rng(mix_seed(config.seed, 0x9E7));
  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Matrix d_prefix;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    std::size_t tokens = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += config.batch) {
      const std::size_t b1 = std::min(order.size(), b0 + config.batch);
      adam.zero_grad();
      const double batch_scale = 1.0 / static_cast<double>(b1 - b0);
      for (std::size_t k = b0; k < b1; ++k) {
        const auto& w = windows[order[k]];
        const std::span<const TokenId> ids(w);
        const Matrix prefix = lm.embed_tokens(ids.first(1));
        const std::span<const TokenId> cont = ids.subspan(1);
        const double scale = batch_scale / static_cast<double>(cont.size());
        const double nll = lm.continuation_nll_backward(prefix, cont, scale, d_prefix);
        auto g = lm.embedding().grad.row(static_cast<std::size_t>(ids[0]));
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += d_prefix(0, j);
        total += nll;
        tokens += cont.size();
      }
      adam.step();
    }
    const double mean = total / static_cast<double>(tokens);
    if (!std::isfinite(mean)) {
      throw NumericError("train_base_lm: non-finite loss in epoch " + std::to_string(epoch));
    }
    result.epoch_loss.push_back(mean);
  }
  lm.zero_grad();
  lm.set_trainable(false);
  return result;
}

double corpus_cross_entropy(const LanguageModel& model,
                            const std::vector<std::vector<TokenId>>& corpus, std::size_t window) {
  const auto windows = cut_windows(corpus, window);
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& w : windows) {
    const std::span<const TokenId> ids(w);
    total += model.continuation_nll(model.embed_tokens(ids.first(1)), ids.subspan(1));
    tokens += ids.size() - 1;
  }
  if (tokens == 0) throw DataError("corpus_cross_entropy: nothing to score");
  return total / static_cast<double>(tokens);
}

}  // namespace neurogen
