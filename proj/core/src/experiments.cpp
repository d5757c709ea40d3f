#include "neurogen/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "neurogen/csv.hpp"
#include "neurogen/errors.hpp"
#include "neurogen/random.hpp"

namespace neurogen {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> win_indicators(const ScoreReport& report) {
  const auto& b = report.scores(Condition::BrainLLM).surprise;
  const auto& p = report.scores(Condition::PerBrainLLM).surprise;
  std::vector<double> out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = win_indicator(b[i], p[i], report.tie_eps);
  return out;
}

// Correlation statistics, or NaN when either side is constant.
void add_correlation(ExperimentResult& r, const std::string& prefix, std::span<const double> x,
                     std::span<const double> y) {
  try {
    const auto t = pearson_test(x, y);
    r.stats.emplace_back(prefix + "_r", t.r);
    r.stats.emplace_back(prefix + "_p_greater", t.p_greater);
    r.stats.emplace_back(prefix + "_p_two_sided", t.p_two_sided);
  } catch (const NumericError&) {
    r.stats.emplace_back(prefix + "_r", kNaN);
    r.stats.emplace_back(prefix + "_p_greater", kNaN);
    r.stats.emplace_back(prefix + "_p_two_sided", kNaN);
  }
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

void log_line(Log log, const std::string& msg) {
  if (log) *log << msg << std::endl;
}

std::string group_label(double v) { return format_double(v); }

void write_scores(const std::filesystem::path& dir, const ScoreReport& report,
                  const Vocabulary& vocab) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "scores.csv");
  report.write_csv(csv, &vocab);
  std::ofstream json(dir / "summary.json");
  report.write_json(json);
  if (!csv || !json) throw IoError("cannot write scores under " + dir.string());
}

std::vector<Condition> perbrain_only() { return {Condition::PerBrainLLM}; }

}  // namespace

double ExperimentResult::stat(const std::string& key) const {
  for (const auto& [k, v] : stats) {
    if (k == key) return v;
  }
  throw ArgumentError("experiment " + name + " has no statistic " + key);
}

const ExperimentRow& ExperimentResult::row(const std::string& group) const {
  for (const auto& r : rows) {
    if (r.group == group) return r;
  }
  throw ArgumentError("experiment " + name + " has no group " + group);
}

void ExperimentResult::write_csv(std::ostream& os) const {
  os << csv_row({group_by, "value", "n", "wins", "ties", "losses", "win_rate", "sign_test_p",
                 "surprise_brainllm", "surprise_perbrainllm", "bleu1_brainllm",
                 "bleu1_perbrainllm", "rouge1_brainllm", "rouge1_perbrainllm",
                 "rougel_brainllm", "rougel_perbrainllm", "wer_brainllm", "wer_perbrainllm"})
     << '\n';
  for (const auto& r : rows) {
    const auto& g = r.summary;
    const auto f = [](double v) { return format_double(v); };
    os << csv_row({r.group, f(r.value), std::to_string(g.n), std::to_string(g.win.wins),
                   std::to_string(g.win.ties), std::to_string(g.win.losses), f(g.win.rate),
                   f(g.p_value), f(g.surprise_brain), f(g.surprise_control), f(g.bleu1_brain),
                   f(g.bleu1_control), f(g.rouge1_brain), f(g.rouge1_control), f(g.rougel_brain),
                   f(g.rougel_control), f(g.wer_brain), f(g.wer_control)})
       << '\n';
  }
}

void ExperimentResult::write_json(std::ostream& os) const {
  nlohmann::ordered_json j;
  j["experiment"] = name;
  j["group_by"] = group_by;
  for (const auto& [k, v] : stats) {
    if (std::isnan(v)) {
      j["stats"][k] = nullptr;
    } else {
      j["stats"][k] = v;
    }
  }
  for (const auto& r : rows) {
    nlohmann::ordered_json e;
    e["group"] = r.group;
    e["n"] = r.summary.n;
    e["win_rate"] = r.summary.win.rate;
    e["sign_test_p"] = r.summary.p_value;
    j["groups"].push_back(e);
  }
  os << j.dump(2) << '\n';
}

ExperimentResult surprise_bins(const ScoreReport& report, std::size_t bins) {
  if (bins == 0) throw ArgumentError("surprise_bins: bins must be >= 1");
  const auto& sp = report.scores(Condition::PerBrainLLM).surprise;
  const std::size_t n = sp.size();
  if (n < bins) throw DataError("surprise_bins: fewer samples than bins");
  auto order = all_indices(n);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sp[a] < sp[b]; });

  ExperimentResult r;
  r.name = "surprise-bins";
  r.group_by = "surprise_bin";
  for (std::size_t k = 0; k < bins; ++k) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(k * n / bins),
                                 order.begin() + static_cast<std::ptrdiff_t>((k + 1) * n / bins));
    std::sort(idx.begin(), idx.end());
    r.rows.push_back({"q" + std::to_string(k + 1), static_cast<double>(k + 1), summarize(report, idx)});
  }
  add_correlation(r, "surprise_win", sp, win_indicators(report));
  return r;
}

ExperimentResult prompt_length(const ScoreReport& report) {
  std::map<std::size_t, std::vector<std::size_t>> groups;
  std::vector<double> lengths;
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    groups[report.samples[i].prompt_len].push_back(i);
    lengths.push_back(static_cast<double>(report.samples[i].prompt_len));
  }
  ExperimentResult r;
  r.name = "prompt-length";
  r.group_by = "prompt_len";
  for (const auto& [len, idx] : groups) {
    r.rows.push_back({std::to_string(len), static_cast<double>(len), summarize(report, idx)});
  }
  add_correlation(r, "length_win", lengths, win_indicators(report));
  return r;
}

std::vector<DataSample> without_prompts(std::span<const DataSample> samples) {
  std::vector<DataSample> out;
  std::set<std::uint64_t> seen;
  for (const auto& s : samples) {
    if (!seen.insert(s.frame_id).second) continue;
    out.push_back(s);
    out.back().prompt.clear();
  }
  return out;
}

std::vector<DataSample> frame_subset(std::span<const DataSample> samples, double fraction,
                                     std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ArgumentError("frame_subset: fraction must lie in (0, 1]");
  }
  std::vector<std::uint64_t> ids;
  std::set<std::uint64_t> seen;
  for (const auto& s : samples) {
    if (seen.insert(s.frame_id).second) ids.push_back(s.frame_id);
  }
  Rng rng(mix_seed(seed, 0xF7AC));
  rng.shuffle(std::span<std::uint64_t>(ids));
  const auto keep_n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size()))));
  const std::set<std::uint64_t> keep(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep_n));
  std::vector<DataSample> out;
  for (const auto& s : samples) {
    if (keep.count(s.frame_id)) out.push_back(s);
  }
  return out;
}

BrainAdapter fit_adapter(const RunConfig& config, const LanguageModel& lm, const Dataset& data,
                         std::span<const DataSample> warmup_train,
                         std::span<const DataSample> train, std::span<const DataSample> valid,
                         TrainTrace* trace, Log log) {
  BrainAdapter adapter(data.channels(), lm.d_model(), data.frames(), config.adapter_seed,
                       lm.embedding_range());
  EpochCallback cb;
  if (log) {
    cb = [log](const EpochRecord& e) {
      *log << e.stage << " epoch " << e.epoch << " train " << e.train_loss;
      if (e.stage == "main") *log << " valid " << e.valid_loss;
      *log << std::endl;
    };
  }
  TrainTrace out = warmup(adapter, lm, warmup_train, config.train, cb);
  TrainTrace main = train_main(adapter, lm, train, valid, config.train, cb);
  out.epochs.insert(out.epochs.end(), main.epochs.begin(), main.epochs.end());
  out.best_epoch = main.best_epoch;
  out.best_valid = main.best_valid;
  out.lm_checksum_after = main.lm_checksum_after;
  if (out.lm_checksum_before != out.lm_checksum_after) {
    throw DeterminismError("language model parameters changed during adapter training");
  }
  if (trace) *trace = std::move(out);
  return adapter;
}

ExperimentResult run_experiment(const std::string& name, const RunConfig& config,
                                const LanguageModel& lm, const Dataset& data,
                                const BrainAdapter& adapter, const std::filesystem::path& dir,
                                Log log) {
  const auto sub = [&dir](const std::string& g) {
    return dir.empty() ? std::filesystem::path{} : dir / g;
  };
  const auto conds = perbrain_only();

  if (name == "surprise-bins" || name == "prompt-length") {
    log_line(log, "evaluating test split");
    const auto report = evaluate(lm, adapter, data.test, conds, config.eval);
    write_scores(sub("test"), report, data.vocab);
    return name == "surprise-bins" ? surprise_bins(report, config.surprise_bins)
                                   : prompt_length(report);
  }

  ExperimentResult r;
  r.name = name;
  if (name == "no-prompt") {
    r.group_by = "prompt";
    const auto with = evaluate(lm, adapter, data.test, conds, config.eval);
    write_scores(sub("with-prompt"), with, data.vocab);
    r.rows.push_back({"with-prompt", 1.0, summarize(with, all_indices(with.samples.size()))});

    const auto test0 = without_prompts(data.test);
    const BrainAdapter* used = &adapter;
    BrainAdapter retrained;
    if (config.no_prompt_adapter == "retrain") {
      log_line(log, "training empty-prompt adapter");
      retrained = fit_adapter(config, lm, data, data.train, without_prompts(data.train),
                              without_prompts(data.valid), nullptr, log);
      used = &retrained;
    }
    const auto without = evaluate(lm, *used, test0, conds, config.eval);
    write_scores(sub("no-prompt"), without, data.vocab);
    r.rows.push_back({"no-prompt", 0.0, summarize(without, all_indices(without.samples.size()))});
    return r;
  }

  if (name == "data-size") {
    r.group_by = "train_fraction";
    const auto subset_seed = mix_seed(config.seed, 0xDA7A);
    for (double f : config.data_fractions) {
      const auto train = frame_subset(data.train, f, subset_seed);
      log_line(log, "fraction " + format_double(f) + ": " + std::to_string(train.size()) +
                        " training samples");
      const auto a = fit_adapter(config, lm, data, train, train, data.valid, nullptr, log);
      const auto report = evaluate(lm, a, data.test, conds, config.eval);
      const auto label = group_label(f);
      write_scores(sub(label), report, data.vocab);
      r.rows.push_back({label, f, summarize(report, all_indices(report.samples.size()))});
    }
    return r;
  }

  if (name == "snr-sweep") {
    r.group_by = "noise_sigma";
    const StoryGrammar grammar(config.data.grammar);
    for (double sigma : config.snr_sigmas) {
      DataConfig dc = config.data;
      dc.encoder.noise_sigma = sigma;
      log_line(log, "noise_sigma " + format_double(sigma));
      const auto d = build_dataset(dc, grammar, lm);
      const auto a = fit_adapter(config, lm, d, d.train, d.train, d.valid, nullptr, log);
      const auto report = evaluate(lm, a, d.test, conds, config.eval);
      const auto label = group_label(sigma);
      write_scores(sub(label), report, d.vocab);
      r.rows.push_back({label, sigma, summarize(report, all_indices(report.samples.size()))});
    }
    return r;
  }

  throw ConfigError("unknown experiment '" + name + "' (expected surprise-bins, prompt-length, "
                    "data-size, no-prompt or snr-sweep)");
}

}  // namespace neurogen
