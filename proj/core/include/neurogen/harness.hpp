#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "neurogen/experiments.hpp"
#include "neurogen/reconstruct.hpp"
#include "neurogen/run_config.hpp"
#include "neurogen/word_rate.hpp"

namespace neurogen {

/// Output layout under RunConfig::out.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.txt"; }
  std::filesystem::path data() const { return root / "data"; }
  std::filesystem::path lm() const { return root / "lm" / "lm.ckpt"; }
  std::filesystem::path lm_trace() const { return root / "lm" / "pretrain.csv"; }
  std::filesystem::path train() const { return root / "train"; }
  std::filesystem::path adapter() const { return root / "train" / "adapter.ckpt"; }
  std::filesystem::path eval() const { return root / "eval"; }
  std::filesystem::path experiment(const std::string& name) const {
    return root / "experiments" / name;
  }
  std::filesystem::path reconstruct() const { return root / "reconstruct"; }
};

/// Trains the base LM on its own synthetic corpus and writes it, then
/// builds the stimulus dataset with that LM's embeddings.
void cmd_gen_data(const RunConfig& config, Log log = nullptr);

/// Warm-up and main training; writes adapter.ckpt, trace.csv, summary.json.
TrainTrace cmd_train(const RunConfig& config, Log log = nullptr);

/// Scores the test split under config.conditions; writes scores.csv and
/// summary.json.
ScoreReport cmd_eval(const RunConfig& config, Log log = nullptr);

ExperimentResult cmd_experiment(const std::string& name, const RunConfig& config,
                                Log log = nullptr);

struct ReconstructionScores {
  double bleu1 = 0.0;
  double wer = 0.0;
  double meteor = 0.0;
};

struct ReconstructOutcome {
  std::vector<TokenId> reference;
  Reconstruction brain;
  Reconstruction null;  // StdLLM inputs, same word rates
  ReconstructionScores brain_scores;
  ReconstructionScores null_scores;
  WordRateSelection word_rate;
};

/// Full-text reconstruction of the held-out story with BrainLLM and with the
/// no-brain control.
ReconstructOutcome cmd_reconstruct(const RunConfig& config, Log log = nullptr);

/// Collects whatever summaries exist under the output root into a text
/// table written to `os` and to report.txt.
void cmd_report(const RunConfig& config, std::ostream& os);

/// Loading helpers with errors naming the missing path.
Dataset load_run_dataset(const RunPaths& paths);
LanguageModel load_run_lm(const RunPaths& paths);
BrainAdapter load_run_adapter(const RunPaths& paths, const Dataset& data, const LanguageModel& lm);

}  // namespace neurogen
