#pragma once

#include <cstdint>
#include <vector>

#include "neurogen/transformer.hpp"
#include "neurogen/vocabulary.hpp"

namespace neurogen {

struct PretrainConfig {
  double lr = 3e-3;
  std::size_t epochs = 8;
  std::size_t batch = 16;
  /// Predicted positions per training window.
  std::size_t window = 48;
  std::uint64_t seed = 11;
};

struct PretrainResult {
  LanguageModel model;
  /// Mean per-token cross-entropy (nats) of each epoch.
  std::vector<double> epoch_loss;
};

/// Next-token training on BOS-prefixed documents cut into fixed windows.
PretrainResult train_base_lm(const std::vector<std::vector<TokenId>>& corpus,
                             const LMConfig& lm_config, const PretrainConfig& config);

/// Mean per-token cross-entropy of `corpus` under `model`, window by window.
double corpus_cross_entropy(const LanguageModel& model,
                            const std::vector<std::vector<TokenId>>& corpus, std::size_t window);

}  // namespace neurogen
