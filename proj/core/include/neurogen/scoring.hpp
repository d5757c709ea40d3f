#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "neurogen/brain_adapter.hpp"
#include "neurogen/prompt.hpp"
#include "neurogen/stats.hpp"
#include "neurogen/text_metrics.hpp"
#include "neurogen/transformer.hpp"

namespace neurogen {

/// -sum log P(m_i | I, m_<i) in nats.
double surprise(const LanguageModel& lm, const PromptInput& input, Tokens continuation);

struct EvalConfig {
  std::size_t beam = 5;
  /// Tokens generated per sample before truncation to the TR budget.
  std::size_t max_new_tokens = 10;
  std::uint64_t permutation_seed = 11;
  /// Debug hook: PerBrainLLM receives each sample's own recording.
  bool identity_permutation = false;
  bool generate = true;
  double tie_eps = kTieEps;
  double fdr_q = 0.05;
};

struct ConditionScores {
  Condition condition = Condition::BrainLLM;
  std::vector<double> surprise;
  std::vector<double> bleu1, rouge1, rougel, wer;  // empty when generation is off
  std::vector<std::vector<TokenId>> generated;      // truncated to the TR budget
};

/// BrainLLM against one control condition over the same samples.
struct Comparison {
  Condition control = Condition::PerBrainLLM;
  WinStats win;
  double p_value = 1.0;     // one-sided sign test
  double p_adjusted = 1.0;  // BH over all comparisons of the report
  bool rejected = false;    // p_adjusted <= q
};

struct SampleInfo {
  std::uint64_t frame_id = 0;
  std::uint32_t story = 0;
  std::size_t prompt_len = 0;
  std::size_t tr_budget = 0;
  std::vector<TokenId> reference;
};

struct ScoreReport {
  std::vector<SampleInfo> samples;
  std::vector<ConditionScores> conditions;
  std::vector<Comparison> comparisons;
  PermutationPlan plan;
  double tie_eps = kTieEps;
  double fdr_q = 0.05;

  const ConditionScores& scores(Condition c) const;
  bool has(Condition c) const;
  bool generated() const;

  /// One row per sample. Columns: sample, frame_id, story, prompt_len,
  /// tr_budget, then per condition surprise_/bleu1_/rouge1_/rougel_/wer_
  /// (metric columns only when generation ran), then win_<control> for each
  /// comparison, then reference text and text_<condition>.
  void write_csv(std::ostream& os, const Vocabulary* vocab = nullptr) const;
  /// Aggregates, win/tie/loss counts, p-values and FDR flags.
  void write_json(std::ostream& os) const;
};

/// Scores `samples` under every requested condition. BrainLLM is always
/// evaluated; PerBrainLLM shares one derangement plan over the samples.
ScoreReport evaluate(const LanguageModel& lm, const BrainAdapter& adapter,
                     std::span<const DataSample> samples, std::span<const Condition> conditions,
                     const EvalConfig& config = {});

struct GroupSummary {
  std::size_t n = 0;
  WinStats win;  // BrainLLM vs PerBrainLLM
  double p_value = 1.0;
  double bleu1_brain = 0.0, bleu1_control = 0.0;
  double rouge1_brain = 0.0, rouge1_control = 0.0;
  double rougel_brain = 0.0, rougel_control = 0.0;
  double wer_brain = 0.0, wer_control = 0.0;
  double surprise_brain = 0.0, surprise_control = 0.0;
};

/// BrainLLM vs PerBrainLLM restricted to the listed sample indices.
GroupSummary summarize(const ScoreReport& report, std::span<const std::size_t> indices);

}  // namespace neurogen
