#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neurogen/beam_search.hpp"
#include "neurogen/brain_adapter.hpp"
#include "neurogen/prompt.hpp"
#include "neurogen/samples.hpp"
#include "neurogen/word_rate.hpp"

namespace neurogen {

struct ReconstructionConfig {
  std::size_t window = 10;  // generated tokens carried as the next prompt
  std::size_t beam = 3;
};

struct FrameOutput {
  std::uint64_t frame_id = 0;
  std::size_t predicted_rate = 0;
  std::vector<TokenId> context;  // text prompt used for this frame
  std::vector<TokenId> tokens;
};

struct Reconstruction {
  std::vector<FrameOutput> frames;
  std::vector<TokenId> tokens() const;
};

/// Frame 0 is generated from the brain block alone; frame k is conditioned
/// on its brain block plus the last `window` generated tokens. Each frame
/// emits exactly WR(own recording) tokens, whatever the condition, so the
/// brain and control runs share word rates. StdLLM runs omit the brain block
/// (the "Null" reconstruction); PerBrainLLM takes recordings from `plan`.
Reconstruction reconstruct_full_text(const LanguageModel& lm, const BrainAdapter& adapter,
                                     std::span<const DataSample> frames,
                                     const WordRateModel& word_rate,
                                     const ReconstructionConfig& config,
                                     Condition condition = Condition::BrainLLM,
                                     const PermutationPlan* plan = nullptr);

}  // namespace neurogen
