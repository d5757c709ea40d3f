#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "neurogen/corpus.hpp"
#include "neurogen/encoder.hpp"
#include "neurogen/pca.hpp"
#include "neurogen/samples.hpp"
#include "neurogen/transformer.hpp"

namespace neurogen {

enum class SampleMode { Continuous, Sentencewise };

SampleMode parse_sample_mode(const std::string& name);
std::string sample_mode_name(SampleMode m);

struct DataConfig {
  GrammarSpec grammar;
  std::size_t stimulus_stories = 40;
  std::size_t story_len = 170;
  std::uint64_t stimulus_seed = 99;
  std::size_t heldout_len = 170;
  std::uint64_t heldout_seed = 4242;
  EncoderSpec encoder;
  std::size_t pca_dim = 32;
  SampleMode mode = SampleMode::Continuous;
  std::size_t window = 3;
  SplitSpec split;
};

struct Dataset {
  Vocabulary vocab;
  std::vector<DataSample> train, valid, test;
  /// Frames of a separately generated story, for full-text reconstruction.
  std::vector<DataSample> heldout;
  PcaBasis pca;
  EncoderSpec encoder;
  SampleMode mode = SampleMode::Continuous;
  std::size_t skipped_sentences = 0;

  std::size_t frames() const noexcept { return encoder.frames(); }
  std::size_t channels() const noexcept { return pca.output_dim(); }
};

/// Stimulus stories -> recordings -> samples -> frame-level split -> PCA fit
/// on training rows -> projection of every recording.
Dataset build_dataset(const DataConfig& config, const StoryGrammar& grammar,
                      const LanguageModel& lm);

/// Distinct frames of `samples` (first sample of each frame, in order).
std::vector<const DataSample*> distinct_frames(const std::vector<DataSample>& samples);

/// Writes {train,valid,test,heldout}.jsonl, features.bin, pca.bin,
/// vocab.txt and manifest.json (with FNV-1a checksums of every file).
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
/// Verifies every checksum in the manifest before parsing.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace neurogen
