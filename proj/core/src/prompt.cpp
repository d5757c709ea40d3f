#include "neurogen/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "neurogen/errors.hpp"
#include "neurogen/random.hpp"

namespace neurogen {

Condition parse_condition(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "brainllm") return Condition::BrainLLM;
  if (lower == "perbrainllm") return Condition::PerBrainLLM;
  if (lower == "stdllm") return Condition::StdLLM;
  throw ConfigError("unknown condition '" + std::string(name) +
                    "' (expected brainllm, perbrainllm or stdllm)");
}

std::string condition_name(Condition c) {
  switch (c) {
    case Condition::BrainLLM: return "brainllm";
    case Condition::PerBrainLLM: return "perbrainllm";
    case Condition::StdLLM: return "stdllm";
  }
  return "?";
}

PromptInput build_input(const Matrix& brain, const Matrix& text, const Matrix& open,
                        const Matrix& close) {
  const std::size_t d = brain.cols();
  if (open.rows() != 1 || close.rows() != 1 || open.cols() != d || close.cols() != d ||
      (text.rows() > 0 && text.cols() != d)) {
    throw DimensionError("build_input: brain " + shape_string(brain) + ", text " +
                         shape_string(text) + ", sentinels " + shape_string(open) + "/" +
                         shape_string(close));
  }
  PromptInput in;
  in.condition = Condition::BrainLLM;
  in.brain_rows = brain.rows();
  in.text_begin = brain.rows() + 2;
  in.rows = Matrix(in.text_begin + text.rows(), d);
  in.rows.set_row(0, open.row(0));
  for (std::size_t i = 0; i < brain.rows(); ++i) in.rows.set_row(1 + i, brain.row(i));
  in.rows.set_row(brain.rows() + 1, close.row(0));
  for (std::size_t i = 0; i < text.rows(); ++i) in.rows.set_row(in.text_begin + i, text.row(i));
  return in;
}

PromptInput build_text_input(const LanguageModel& lm, std::span<const TokenId> prompt) {
  PromptInput in;
  in.condition = Condition::StdLLM;
  if (prompt.empty()) {
    const TokenId bos = Vocabulary::kBos;
    in.rows = lm.embed_tokens(std::span<const TokenId>(&bos, 1));
    in.bos = true;
  } else {
    in.rows = lm.embed_tokens(prompt);
  }
  return in;
}

PermutationPlan PermutationPlan::identity(std::size_t n) {
  PermutationPlan p;
  p.mapping.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.mapping[i] = i;
  return p;
}

PermutationPlan plan_permutation(std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw ArgumentError("a derangement needs at least two samples");
  PermutationPlan plan = PermutationPlan::identity(n_samples);
  plan.seed = seed;
  Rng rng(mix_seed(seed, 0xDE7));
  for (;;) {
    for (std::size_t i = 0; i < n_samples; ++i) plan.mapping[i] = i;
    rng.shuffle(std::span<std::size_t>(plan.mapping));
    bool fixed = false;
    for (std::size_t i = 0; i < n_samples && !fixed; ++i) fixed = plan.mapping[i] == i;
    if (!fixed) return plan;
  }
}

PromptInput assemble_condition(std::size_t index, std::span<const DataSample> samples,
                               const PermutationPlan* plan, Condition condition,
                               const BrainAdapter& adapter, const LanguageModel& lm,
                               BrainAdapter::Trace* trace) {
  if (index >= samples.size()) throw PlanError("sample index out of range");
  const DataSample& s = samples[index];
  if (condition == Condition::StdLLM) return build_text_input(lm, s.prompt);

  std::size_t source = index;
  if (condition == Condition::PerBrainLLM) {
    if (!plan || plan->mapping.size() != samples.size()) {
      throw PlanError("PerBrainLLM needs a permutation plan covering all " +
                      std::to_string(samples.size()) + " samples");
    }
    source = plan->mapping[index];
    if (source >= samples.size()) throw PlanError("permutation maps outside the sample set");
  }
  const Matrix brain = adapter.adapt(samples[source].recording, trace);
  const Matrix text = s.prompt.empty() ? Matrix(0, lm.d_model()) : lm.embed_tokens(s.prompt);
  PromptInput in =
      build_input(brain, text, adapter.sentinel_open().value, adapter.sentinel_close().value);
  in.condition = condition;
  return in;
}

}  // namespace neurogen
