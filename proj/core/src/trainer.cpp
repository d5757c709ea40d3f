#include "neurogen/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "neurogen/adam.hpp"
#include "neurogen/errors.hpp"
#include "neurogen/prompt.hpp"
#include "neurogen/random.hpp"

namespace neurogen {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Matrix prompt_mean(const LanguageModel& lm, const DataSample& s) {
  const Matrix text = lm.embed_tokens(s.prompt);
  Matrix mean(1, text.cols());
  for (std::size_t i = 0; i < text.rows(); ++i) {
    for (std::size_t j = 0; j < text.cols(); ++j) mean(0, j) += text(i, j);
  }
  for (auto& v : mean.values()) v /= static_cast<double>(text.rows());
  return mean;
}

double warmup_impl(BrainAdapter* grad_sink, const BrainAdapter& adapter, const LanguageModel& lm,
                   const DataSample& s, double scale) {
  if (s.prompt.empty()) throw ArgumentError("warm-up loss is undefined for an empty prompt");
  BrainAdapter::Trace trace;
  const Matrix out = adapter.adapt(s.recording, &trace);
  const Matrix target = prompt_mean(lm, s);
  const double t = static_cast<double>(out.rows());
  Matrix d_out(out.rows(), out.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      const double diff = out(i, j) - target(0, j);
      loss += diff * diff;
      d_out(i, j) = 2.0 * diff * scale / t;
    }
  }
  if (grad_sink) grad_sink->backward(trace, d_out);
  return loss / t;
}

double main_impl(BrainAdapter* grad_sink, const BrainAdapter& adapter, const LanguageModel& lm,
                 const DataSample& s, double scale) {
  const std::span<const DataSample> one(&s, 1);
  if (!grad_sink) {
    const PromptInput in = assemble_condition(0, one, nullptr, Condition::BrainLLM, adapter, lm);
    return lm.continuation_nll(in.rows, s.continuation) /
           static_cast<double>(s.continuation.size());
  }
  BrainAdapter::Trace trace;
  const PromptInput in =
      assemble_condition(0, one, nullptr, Condition::BrainLLM, adapter, lm, &trace);
  const double per_token = 1.0 / static_cast<double>(s.continuation.size());
  Matrix d_prefix;
  const double nll =
      lm.continuation_nll_input_gradient(in.rows, s.continuation, scale * per_token, d_prefix);
  const std::size_t t = in.brain_rows;
  if (grad_sink->sentinel_open().trainable) add_inplace(grad_sink->sentinel_open().grad, d_prefix.slice_rows(0, 1));
  if (grad_sink->sentinel_close().trainable) {
    add_inplace(grad_sink->sentinel_close().grad, d_prefix.slice_rows(t + 1, 1));
  }
  grad_sink->backward(trace, d_prefix.slice_rows(1, t));
  return nll * per_token;
}

using Snapshot = std::vector<Matrix>;

Snapshot snapshot(BrainAdapter& a) {
  Snapshot s;
  for (const Parameter* p : a.parameters()) s.push_back(p->value);
  return s;
}

void restore(BrainAdapter& a, const Snapshot& s) {
  auto params = a.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = s[k];
}

void check_finite(BrainAdapter& a, const std::string& where) {
  for (const Parameter* p : a.parameters()) {
    if (!all_finite(p->value)) throw NumericError("non-finite adapter parameter " + p->name + " after " + where);
  }
}

template <typename LossFn>
double run_epoch(BrainAdapter& adapter, Adam& adam, std::span<const DataSample> samples,
                 std::vector<std::size_t>& order, Rng& rng, std::size_t batch,
                 const std::string& stage, std::size_t epoch, LossFn loss_fn) {
  rng.shuffle(std::span<std::size_t>(order));
  double total = 0.0;
  std::size_t batch_id = 0;
  for (std::size_t b0 = 0; b0 < order.size(); b0 += batch, ++batch_id) {
    const std::size_t b1 = std::min(order.size(), b0 + batch);
    const double scale = 1.0 / static_cast<double>(b1 - b0);
    adam.zero_grad();
    double batch_loss = 0.0;
    for (std::size_t k = b0; k < b1; ++k) {
      try {
        batch_loss += loss_fn(adapter, samples[order[k]], scale);
      } catch (const NumericError& e) {
        throw NumericError(stage + " epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(batch_id) + ": " + e.what());
      }
    }
    const std::string where = stage + " epoch " + std::to_string(epoch) + " batch " + std::to_string(batch_id);
    if (!std::isfinite(batch_loss)) throw NumericError(where + ": loss is " + std::to_string(batch_loss));
    for (const Parameter* p : adapter.parameters()) {
      if (!all_finite(p->grad)) throw NumericError(where + ": non-finite gradient in " + p->name);
    }
    adam.step();
    total += batch_loss;
  }
  check_finite(adapter, stage + " epoch " + std::to_string(epoch));
  return total / static_cast<double>(order.size());
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
  if (batch == 0) throw ConfigError("train: batch must be >= 1");
  if (patience == 0) throw ConfigError("train: patience must be >= 1");
  if (max_epochs == 0) throw ConfigError("train: max_epochs must be >= 1");
}

std::vector<EpochRecord> TrainTrace::stage(const std::string& name) const {
  std::vector<EpochRecord> out;
  for (const auto& e : epochs) {
    if (e.stage == name) out.push_back(e);
  }
  return out;
}

void TrainTrace::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "stage,epoch,train_loss,valid_loss\n";
  for (const auto& e : epochs) {
    os << e.stage << ',' << e.epoch << ',' << e.train_loss << ',' << e.valid_loss << '\n';
  }
  os.precision(old);
}

double warmup_loss(const BrainAdapter& adapter, const LanguageModel& lm, const DataSample& s) {
  return warmup_impl(nullptr, adapter, lm, s, 0.0);
}

double warmup_loss_backward(BrainAdapter& adapter, const LanguageModel& lm, const DataSample& s,
                            double scale) {
  return warmup_impl(&adapter, adapter, lm, s, scale);
}

double main_loss(const BrainAdapter& adapter, const LanguageModel& lm, const DataSample& s) {
  return main_impl(nullptr, adapter, lm, s, 0.0);
}

double main_loss_backward(BrainAdapter& adapter, const LanguageModel& lm, const DataSample& s,
                          double scale) {
  return main_impl(&adapter, adapter, lm, s, scale);
}

double mean_main_loss(const BrainAdapter& adapter, const LanguageModel& lm,
                      std::span<const DataSample> samples) {
  if (samples.empty()) throw DataError("mean_main_loss: no samples");
  double total = 0.0;
  for (const auto& s : samples) total += main_loss(adapter, lm, s);
  return total / static_cast<double>(samples.size());
}

TrainTrace warmup(BrainAdapter& adapter, const LanguageModel& lm,
                  std::span<const DataSample> train, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (!train[i].prompt.empty()) usable.push_back(i);
  }
  if (usable.empty() && config.warmup_epochs > 0) throw DataError("warm-up: no training sample has a text prompt");

  TrainTrace trace;
  trace.lm_checksum_before = lm.checksum();
  Adam adam(adapter.parameters(), AdamConfig{.lr = config.lr});
  Rng rng(mix_seed(config.seed, 0x3A1));
  auto loss_fn = [&lm](BrainAdapter& a, const DataSample& s, double scale) {
    return warmup_loss_backward(a, lm, s, scale);
  };
  for (std::size_t epoch = 0; epoch < config.warmup_epochs; ++epoch) {
    const auto t0 = Clock::now();
    EpochRecord rec;
    rec.stage = "warmup";
    rec.epoch = epoch;
    rec.train_loss = run_epoch(adapter, adam, train, usable, rng, config.batch, "warm-up", epoch, loss_fn);
    rec.valid_loss = std::numeric_limits<double>::quiet_NaN();
    rec.seconds = seconds_since(t0);
    trace.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  adapter.zero_grad();
  trace.lm_checksum_after = lm.checksum();
  return trace;
}

TrainTrace train_main(BrainAdapter& adapter, const LanguageModel& lm,
                      std::span<const DataSample> train, std::span<const DataSample> valid,
                      const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (train.empty()) throw DataError("train_main: empty training set");
  if (valid.empty()) throw DataError("train_main: empty validation set");

  TrainTrace trace;
  trace.lm_checksum_before = lm.checksum();
  Adam adam(adapter.parameters(), AdamConfig{.lr = config.lr});
  Rng rng(mix_seed(config.seed, 0x3A2));
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto loss_fn = [&lm](BrainAdapter& a, const DataSample& s, double scale) {
    return main_loss_backward(a, lm, s, scale);
  };

  Snapshot best = snapshot(adapter);
  double best_valid = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto t0 = Clock::now();
    EpochRecord rec;
    rec.stage = "main";
    rec.epoch = epoch;
    rec.train_loss = run_epoch(adapter, adam, train, order, rng, config.batch, "main", epoch, loss_fn);
    rec.valid_loss = mean_main_loss(adapter, lm, valid);
    if (!std::isfinite(rec.valid_loss)) {
      throw NumericError("main epoch " + std::to_string(epoch) + ": validation loss is not finite");
    }
    rec.seconds = seconds_since(t0);
    trace.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.valid_loss < best_valid) {
      best_valid = rec.valid_loss;
      trace.best_epoch = epoch;
      best = snapshot(adapter);
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  restore(adapter, best);
  adapter.zero_grad();
  trace.best_valid = best_valid;
  trace.lm_checksum_after = lm.checksum();
  return trace;
}

TrainTrace train_adapter(BrainAdapter& adapter, const LanguageModel& lm,
                         std::span<const DataSample> train, std::span<const DataSample> valid,
                         const TrainConfig& config, const EpochCallback& on_epoch) {
  TrainTrace out = warmup(adapter, lm, train, config, on_epoch);
  TrainTrace main = train_main(adapter, lm, train, valid, config, on_epoch);
  out.epochs.insert(out.epochs.end(), main.epochs.begin(), main.epochs.end());
  out.best_epoch = main.best_epoch;
  out.best_valid = main.best_valid;
  out.lm_checksum_after = main.lm_checksum_after;
  return out;
}

}  // namespace neurogen
