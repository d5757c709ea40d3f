#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neurogen/brain_adapter.hpp"
#include "neurogen/samples.hpp"
#include "neurogen/transformer.hpp"

namespace neurogen {

enum class Condition { BrainLLM, PerBrainLLM, StdLLM };

/// Accepts brainllm | perbrainllm | stdllm (case-insensitive).
Condition parse_condition(std::string_view name);
std::string condition_name(Condition c);

/// The mixed-modality model input. For brain conditions the layout is
/// [open; t brain rows; close; text rows]; for StdLLM it is the text rows
/// alone, or a single BOS row when the prompt is empty.
struct PromptInput {
  Matrix rows;
  Condition condition = Condition::BrainLLM;
  std::size_t brain_rows = 0;  // t for brain conditions, 0 for StdLLM
  std::size_t text_begin = 0;  // first text row
  bool bos = false;            // StdLLM with empty prompt

  std::size_t length() const noexcept { return rows.rows(); }
  std::size_t text_rows() const noexcept { return bos ? 0 : rows.rows() - text_begin; }
};

PromptInput build_input(const Matrix& brain, const Matrix& text, const Matrix& open,
                        const Matrix& close);
PromptInput build_text_input(const LanguageModel& lm, std::span<const TokenId> prompt);

struct PermutationPlan {
  std::vector<std::size_t> mapping;
  std::uint64_t seed = 0;

  /// Debug hook: every sample keeps its own recording.
  static PermutationPlan identity(std::size_t n);
};

/// Uniform random derangement by rejection sampling.
PermutationPlan plan_permutation(std::size_t n_samples, std::uint64_t seed);

/// Builds the input for samples[index] under `condition`. PerBrainLLM takes
/// the recording of samples[plan.mapping[index]]. When `trace` is given the
/// adapter activations are kept for a backward pass.
PromptInput assemble_condition(std::size_t index, std::span<const DataSample> samples,
                               const PermutationPlan* plan, Condition condition,
                               const BrainAdapter& adapter, const LanguageModel& lm,
                               BrainAdapter::Trace* trace = nullptr);

}  // namespace neurogen
