#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "neurogen/brain_adapter.hpp"
#include "neurogen/samples.hpp"
#include "neurogen/transformer.hpp"

namespace neurogen {

struct TrainConfig {
  double lr = 1e-4;
  std::size_t batch = 8;
  std::size_t warmup_epochs = 10;
  std::size_t patience = 10;
  std::size_t max_epochs = 200;
  std::uint64_t seed = 7;

  void validate() const;
};

struct EpochRecord {
  std::string stage;  // "warmup" or "main"
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double seconds = 0.0;
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
  /// Index into the main-stage epochs of the restored parameters.
  std::size_t best_epoch = 0;
  double best_valid = 0.0;
  std::uint64_t lm_checksum_before = 0;
  std::uint64_t lm_checksum_after = 0;

  std::vector<EpochRecord> stage(const std::string& name) const;
  /// stage,epoch,train_loss,valid_loss (wall-clock is left out so traces
  /// from identical runs compare byte-for-byte).
  void write_csv(std::ostream& os) const;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// (1/t) * sum_i ||v_i - mean_j(w_j)||^2 for one sample with a non-empty prompt.
double warmup_loss(const BrainAdapter& adapter, const LanguageModel& lm, const DataSample& s);
/// Accumulates d(scale * loss) into the adapter; returns the loss.
double warmup_loss_backward(BrainAdapter& adapter, const LanguageModel& lm, const DataSample& s,
                            double scale);

/// Per-token negative log-likelihood of the continuation under BrainLLM input.
double main_loss(const BrainAdapter& adapter, const LanguageModel& lm, const DataSample& s);
double main_loss_backward(BrainAdapter& adapter, const LanguageModel& lm, const DataSample& s,
                          double scale);

/// Mean per-sample main loss (no gradients).
double mean_main_loss(const BrainAdapter& adapter, const LanguageModel& lm,
                      std::span<const DataSample> samples);

/// Stage 1: exactly warmup_epochs epochs of the alignment loss over samples
/// with non-empty prompts.
TrainTrace warmup(BrainAdapter& adapter, const LanguageModel& lm,
                  std::span<const DataSample> train, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Stage 2: likelihood training with early stopping on validation loss;
/// the best-validation parameters are restored before returning.
TrainTrace train_main(BrainAdapter& adapter, const LanguageModel& lm,
                      std::span<const DataSample> train, std::span<const DataSample> valid,
                      const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Both stages; the returned trace holds warm-up rows followed by main rows.
TrainTrace train_adapter(BrainAdapter& adapter, const LanguageModel& lm,
                         std::span<const DataSample> train, std::span<const DataSample> valid,
                         const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace neurogen
