#include "neurogen/scoring.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "neurogen/beam_search.hpp"
#include "neurogen/csv.hpp"
#include "neurogen/errors.hpp"

namespace neurogen {
namespace {

double mean_or_nan(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : mean(v);
}

std::string token_text(const std::vector<TokenId>& ids, const Vocabulary* vocab) {
  if (vocab) return detokenize(ids, *vocab);
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(ids[i]);
  }
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v.at(i));
  return out;
}

}  // namespace

double surprise(const LanguageModel& lm, const PromptInput& input, Tokens continuation) {
  return lm.continuation_nll(input.rows, continuation);
}

const ConditionScores& ScoreReport::scores(Condition c) const {
  for (const auto& s : conditions) {
    if (s.condition == c) return s;
  }
  throw ArgumentError("report has no " + condition_name(c) + " scores");
}

bool ScoreReport::has(Condition c) const {
  return std::any_of(conditions.begin(), conditions.end(),
                     [c](const ConditionScores& s) { return s.condition == c; });
}

bool ScoreReport::generated() const {
  return !conditions.empty() && !conditions.front().bleu1.empty();
}

ScoreReport evaluate(const LanguageModel& lm, const BrainAdapter& adapter,
                     std::span<const DataSample> samples, std::span<const Condition> conditions,
                     const EvalConfig& config) {
  if (samples.empty()) throw DataError("evaluate: no samples");
  std::vector<Condition> conds{Condition::BrainLLM};
  for (Condition c : {Condition::PerBrainLLM, Condition::StdLLM}) {
    if (std::find(conditions.begin(), conditions.end(), c) != conditions.end()) conds.push_back(c);
  }

  ScoreReport report;
  report.tie_eps = config.tie_eps;
  report.fdr_q = config.fdr_q;
  report.plan = config.identity_permutation ? PermutationPlan::identity(samples.size())
                                            : plan_permutation(samples.size(), config.permutation_seed);
  for (const auto& s : samples) {
    report.samples.push_back({s.frame_id, s.story, s.prompt.size(), s.tr_budget, s.continuation});
  }
  for (Condition c : conds) {
    ConditionScores cs;
    cs.condition = c;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const DataSample& s = samples[i];
      const PromptInput in = assemble_condition(i, samples, &report.plan, c, adapter, lm);
      cs.surprise.push_back(surprise(lm, in, s.continuation));
      if (!config.generate) continue;
      const Beam beam = beam_search(lm, in, config.beam, config.max_new_tokens);
      auto gen = truncate_to_budget(beam.best().tokens, s.tr_budget);
      cs.bleu1.push_back(bleu1(gen, s.continuation));
      cs.rouge1.push_back(rouge_n(gen, s.continuation, 1));
      cs.rougel.push_back(rouge_l(gen, s.continuation));
      cs.wer.push_back(wer(gen, s.continuation));
      cs.generated.push_back(std::move(gen));
    }
    report.conditions.push_back(std::move(cs));
  }

  const auto& brain = report.scores(Condition::BrainLLM).surprise;
  std::vector<double> ps;
  for (std::size_t k = 1; k < report.conditions.size(); ++k) {
    Comparison cmp;
    cmp.control = report.conditions[k].condition;
    cmp.win = win_rate(brain, report.conditions[k].surprise, config.tie_eps);
    cmp.p_value = cmp.win.wins + cmp.win.losses == 0
                      ? 1.0
                      : sign_test_one_sided(cmp.win.wins, cmp.win.ties, cmp.win.losses);
    ps.push_back(cmp.p_value);
    report.comparisons.push_back(cmp);
  }
  const auto adj = bh_adjust(ps);
  const auto rej = bh_fdr(ps, config.fdr_q);
  for (std::size_t k = 0; k < report.comparisons.size(); ++k) {
    report.comparisons[k].p_adjusted = adj[k];
    report.comparisons[k].rejected = rej[k];
  }
  return report;
}

void ScoreReport::write_csv(std::ostream& os, const Vocabulary* vocab) const {
  const bool gen = generated();
  std::vector<std::string> header{"sample", "frame_id", "story", "prompt_len", "tr_budget"};
  for (const auto& c : conditions) {
    const std::string n = condition_name(c.condition);
    header.push_back("surprise_" + n);
    if (gen) {
      for (const char* m : {"bleu1_", "rouge1_", "rougel_", "wer_"}) header.push_back(m + n);
    }
  }
  for (const auto& cmp : comparisons) header.push_back("win_" + condition_name(cmp.control));
  if (gen) {
    header.push_back("reference");
    for (const auto& c : conditions) header.push_back("text_" + condition_name(c.condition));
  }
  os << csv_row(header) << '\n';

  const auto& brain = scores(Condition::BrainLLM).surprise;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SampleInfo& s = samples[i];
    std::vector<std::string> row{std::to_string(i), std::to_string(s.frame_id),
                                 std::to_string(s.story), std::to_string(s.prompt_len),
                                 std::to_string(s.tr_budget)};
    for (const auto& c : conditions) {
      row.push_back(format_double(c.surprise[i]));
      if (gen) {
        for (const auto* v : {&c.bleu1, &c.rouge1, &c.rougel, &c.wer}) row.push_back(format_double((*v)[i]));
      }
    }
    for (const auto& cmp : comparisons) {
      row.push_back(format_double(win_indicator(brain[i], scores(cmp.control).surprise[i], tie_eps)));
    }
    if (gen) {
      row.push_back(token_text(s.reference, vocab));
      for (const auto& c : conditions) row.push_back(token_text(c.generated[i], vocab));
    }
    os << csv_row(row) << '\n';
  }
}

void ScoreReport::write_json(std::ostream& os) const {
  nlohmann::ordered_json j;
  j["samples"] = samples.size();
  j["tie_eps"] = tie_eps;
  j["fdr_q"] = fdr_q;
  j["permutation_seed"] = plan.seed;
  for (const auto& c : conditions) {
    auto& e = j["conditions"][condition_name(c.condition)];
    e["mean_surprise"] = mean(c.surprise);
    if (generated()) {
      e["mean_bleu1"] = mean_or_nan(c.bleu1);
      e["mean_rouge1"] = mean_or_nan(c.rouge1);
      e["mean_rougel"] = mean_or_nan(c.rougel);
      e["mean_wer"] = mean_or_nan(c.wer);
    }
  }
  for (const auto& cmp : comparisons) {
    auto& e = j["comparisons"]["brainllm_vs_" + condition_name(cmp.control)];
    e["win_rate"] = cmp.win.rate;
    e["wins"] = cmp.win.wins;
    e["ties"] = cmp.win.ties;
    e["losses"] = cmp.win.losses;
    e["sign_test_p"] = cmp.p_value;
    e["bh_adjusted_p"] = cmp.p_adjusted;
    e["bh_rejected"] = cmp.rejected;
  }
  os << j.dump(2) << '\n';
}

GroupSummary summarize(const ScoreReport& report, std::span<const std::size_t> indices) {
  GroupSummary g;
  g.n = indices.size();
  if (indices.empty()) return g;
  const auto& b = report.scores(Condition::BrainLLM);
  const auto& p = report.scores(Condition::PerBrainLLM);
  const auto sb = pick(b.surprise, indices);
  const auto sp = pick(p.surprise, indices);
  g.win = win_rate(sb, sp, report.tie_eps);
  g.p_value = g.win.wins + g.win.losses == 0 ? 1.0
                                             : sign_test_one_sided(g.win.wins, g.win.ties, g.win.losses);
  g.surprise_brain = mean(sb);
  g.surprise_control = mean(sp);
  if (report.generated()) {
    g.bleu1_brain = mean(pick(b.bleu1, indices));
    g.bleu1_control = mean(pick(p.bleu1, indices));
    g.rouge1_brain = mean(pick(b.rouge1, indices));
    g.rouge1_control = mean(pick(p.rouge1, indices));
    g.rougel_brain = mean(pick(b.rougel, indices));
    g.rougel_control = mean(pick(p.rougel, indices));
    g.wer_brain = mean(pick(b.wer, indices));
    g.wer_control = mean(pick(p.wer, indices));
  }
  return g;
}

}  // namespace neurogen
