#pragma once

#include <span>
#include <vector>

#include "neurogen/prompt.hpp"
#include "neurogen/transformer.hpp"

namespace neurogen {

struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  std::vector<double> step_log_probs;
};

/// Final beam, best first.
struct Beam {
  std::vector<Hypothesis> hypotheses;
  std::size_t width = 0;
  /// Text rows dropped from the front of the prompt to fit the context.
  std::size_t evicted_rows = 0;

  const Hypothesis& best() const { return hypotheses.front(); }
};

/// Length-synchronous beam search over the full vocabulary. Candidates are
/// ranked by cumulative log-probability, ties broken by lower token id and
/// then by lower parent rank. If the prompt plus generated tokens would
/// overflow the context, the oldest text rows are evicted; brain rows and
/// sentinels are never evicted.
Beam beam_search(const LanguageModel& lm, const PromptInput& input, std::size_t width,
                 std::size_t max_tokens);

/// First `budget` tokens.
std::vector<TokenId> truncate_to_budget(std::span<const TokenId> tokens, std::size_t budget);

}  // namespace neurogen
