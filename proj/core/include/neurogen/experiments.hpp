#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "neurogen/dataset_io.hpp"
#include "neurogen/run_config.hpp"
#include "neurogen/scoring.hpp"

namespace neurogen {

struct ExperimentRow {
  std::string group;
  double value = 0.0;  // numeric grouping variable (bin, n, fraction, sigma)
  GroupSummary summary;
};

struct ExperimentResult {
  std::string name;
  std::string group_by;
  std::vector<ExperimentRow> rows;
  /// Experiment-level statistics (correlations), in insertion order.
  std::vector<std::pair<std::string, double>> stats;

  double stat(const std::string& key) const;
  const ExperimentRow& row(const std::string& group) const;

  /// group,value,n,wins,ties,losses,win_rate,sign_test_p, then
  /// brain/perbrain pairs for surprise, bleu1, rouge1, rougel and wer.
  void write_csv(std::ostream& os) const;
  void write_json(std::ostream& os) const;
};

inline const std::vector<std::string> kExperimentNames = {
    "surprise-bins", "prompt-length", "data-size", "no-prompt", "snr-sweep"};

/// Equal-count bins of PerBrainLLM surprise (ties in rank broken by sample
/// order), plus the correlation between that surprise and the win indicator.
ExperimentResult surprise_bins(const ScoreReport& report, std::size_t bins = 5);

/// One group per prompt length n, plus the correlation between n and the
/// win indicator.
ExperimentResult prompt_length(const ScoreReport& report);

/// One sample per distinct frame with the prompt removed.
std::vector<DataSample> without_prompts(std::span<const DataSample> samples);

/// Samples of the first round(fraction * F) frames of a seeded shuffle of
/// the F distinct frames; smaller fractions are nested in larger ones.
std::vector<DataSample> frame_subset(std::span<const DataSample> samples, double fraction,
                                     std::uint64_t seed);

using Log = std::ostream*;

/// Trains a fresh adapter (seed from the config) on `train`, validating on
/// `valid`. The LM must already be frozen.
BrainAdapter fit_adapter(const RunConfig& config, const LanguageModel& lm, const Dataset& data,
                         std::span<const DataSample> warmup_train,
                         std::span<const DataSample> train, std::span<const DataSample> valid,
                         TrainTrace* trace = nullptr, Log log = nullptr);

/// Runs an experiment. Evaluation-only experiments reuse `adapter`; sweeps
/// retrain per point and, when `dir` is non-empty, write each point's
/// per-sample scores to dir/<group>/scores.csv.
ExperimentResult run_experiment(const std::string& name, const RunConfig& config,
                                const LanguageModel& lm, const Dataset& data,
                                const BrainAdapter& adapter, const std::filesystem::path& dir,
                                Log log = nullptr);

}  // namespace neurogen
