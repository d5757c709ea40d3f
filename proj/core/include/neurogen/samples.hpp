#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "neurogen/matrix.hpp"
#include "neurogen/vocabulary.hpp"

namespace neurogen {

/// One generation target: text prompt W, perceived continuation M and the
/// t x c recording of the frame in which M was presented.
struct DataSample {
  std::uint64_t frame_id = 0;
  std::uint32_t story = 0;
  std::vector<TokenId> prompt;
  std::vector<TokenId> continuation;
  Matrix recording;
  std::size_t tr_budget = 0;  // |continuation|
};

/// A stimulus unit: the tokens shown during one frame (continuous mode) or
/// one sentence (sentencewise mode), with its recording.
struct StimulusUnit {
  std::uint64_t frame_id = 0;
  std::uint32_t story = 0;
  std::uint32_t index_in_story = 0;
  std::vector<TokenId> tokens;
  Matrix recording;
};

/// Continuous regime: each frame yields up to three samples whose prompts
/// are the 1, 2 and 3 preceding frames of the same story. Windows that would
/// reach before the story start collapse onto the shorter one, so the first
/// frame yields a single empty-prompt sample.
std::vector<DataSample> build_samples_continuous(std::span<const StimulusUnit> frames,
                                                 std::size_t max_window = 3);

struct SentencewiseResult {
  std::vector<DataSample> samples;
  std::size_t skipped = 0;  // sentences shorter than three tokens
};

/// Sizes of the three pieces of an n-token sentence; the remainder goes to
/// the earliest pieces.
std::array<std::size_t, 3> thirds(std::size_t n);

/// Sentencewise regime: (first third -> second third) and (first two
/// thirds -> last third) per sentence.
SentencewiseResult build_samples_sentencewise(std::span<const StimulusUnit> sentences);

struct SplitSpec {
  double train = 3.0;
  double valid = 1.0;
  double test = 1.0;
  std::uint64_t seed = 3;

  void validate() const;
};

struct SplitResult {
  std::vector<DataSample> train, valid, test;
};

/// Frame counts per split by largest remainder over the normalised fractions.
std::array<std::size_t, 3> split_counts(std::size_t frames, const SplitSpec& spec);

/// Shuffles distinct frame ids and assigns whole frames to splits, so no
/// frame's continuation or recording appears in two splits. Sample order
/// within a split follows the input order.
SplitResult split_dataset(std::span<const DataSample> samples, const SplitSpec& spec);

}  // namespace neurogen
