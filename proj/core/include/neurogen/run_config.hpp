#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "neurogen/dataset_io.hpp"
#include "neurogen/pretrain.hpp"
#include "neurogen/prompt.hpp"
#include "neurogen/reconstruct.hpp"
#include "neurogen/scoring.hpp"
#include "neurogen/trainer.hpp"
#include "neurogen/transformer.hpp"

namespace neurogen {

/// Everything a run depends on. Component seeds left unset in the config
/// file are derived from `seed`, so `--seed` re-seeds the whole run.
struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out = "run";

  LMConfig lm;  // vocab_size is taken from the grammar
  std::size_t lm_stories = 300;
  std::size_t lm_story_len = 170;
  std::uint64_t lm_corpus_seed = 0;
  PretrainConfig pretrain;

  DataConfig data;
  std::uint64_t adapter_seed = 0;
  TrainConfig train;
  EvalConfig eval;
  std::vector<Condition> conditions{Condition::BrainLLM, Condition::PerBrainLLM,
                                    Condition::StdLLM};
  ReconstructionConfig reconstruct;

  std::vector<double> data_fractions{0.25, 0.5, 0.75, 1.0};
  std::vector<double> snr_sigmas{0.05, 0.2, 1.0, 5.0};
  std::size_t surprise_bins = 5;
  /// Adapter used by the no-prompt experiment: "shared" evaluates the main
  /// adapter with empty prompts, "retrain" fits a second adapter on
  /// empty-prompt samples of the same training frames.
  std::string no_prompt_adapter = "shared";

  /// Parses key = value lines ('#' comments). Unknown keys and malformed
  /// values raise ConfigError.
  static RunConfig parse(std::istream& in, const std::string& origin = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  /// Applies `key = value` on top of the current values.
  void set(const std::string& key, const std::string& value);
  /// Re-derives every seed that was not given explicitly.
  void reseed(std::uint64_t base);
  void validate() const;

  /// Fully resolved key = value text; parse(write()) reproduces the config.
  std::string write() const;

 private:
  std::map<std::string, bool> explicit_seeds_;
};

}  // namespace neurogen
