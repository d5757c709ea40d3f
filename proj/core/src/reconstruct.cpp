#include "neurogen/reconstruct.hpp"

#include "neurogen/errors.hpp"

namespace neurogen {

std::vector<TokenId> Reconstruction::tokens() const {
  std::vector<TokenId> out;
  for (const auto& f : frames) out.insert(out.end(), f.tokens.begin(), f.tokens.end());
  return out;
}

Reconstruction reconstruct_full_text(const LanguageModel& lm, const BrainAdapter& adapter,
                                     std::span<const DataSample> frames,
                                     const WordRateModel& word_rate,
                                     const ReconstructionConfig& config, Condition condition,
                                     const PermutationPlan* plan) {
  if (frames.empty()) throw DataError("reconstruction needs at least one frame");
  if (config.window == 0) throw ConfigError("reconstruction window must be >= 1");
  if (config.beam == 0) throw ConfigError("reconstruction beam must be >= 1");

  Reconstruction out;
  std::vector<TokenId> generated;
  std::vector<DataSample> step(frames.begin(), frames.end());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    FrameOutput f;
    f.frame_id = frames[k].frame_id;
    f.predicted_rate = word_rate.predict(frames[k].recording);
    const std::size_t ctx = std::min(config.window, generated.size());
    f.context.assign(generated.end() - static_cast<std::ptrdiff_t>(ctx), generated.end());
    if (f.predicted_rate > 0) {
      step[k].prompt = f.context;
      const PromptInput in = assemble_condition(k, step, plan, condition, adapter, lm);
      const Beam beam = beam_search(lm, in, config.beam, f.predicted_rate);
      f.tokens = beam.best().tokens;
      generated.insert(generated.end(), f.tokens.begin(), f.tokens.end());
    }
    out.frames.push_back(std::move(f));
  }
  return out;
}

}  // namespace neurogen
