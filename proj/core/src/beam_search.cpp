#include "neurogen/beam_search.hpp"

#include <algorithm>
#include <cmath>

#include "neurogen/errors.hpp"

namespace neurogen {
namespace {

struct Live {
  Hypothesis hyp;
  LanguageModel::DecodeState state;
  std::vector<double> next;  // log-probs of the following token
};

struct Candidate {
  double score;
  TokenId token;
  std::size_t parent;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.token != b.token) return a.token < b.token;
  return a.parent < b.parent;
}

Matrix fit_context(const LanguageModel& lm, const PromptInput& input, std::size_t max_tokens,
                   std::size_t& evicted) {
  const std::size_t ctx = lm.config().context_len;
  const std::size_t need = input.length() + max_tokens - 1;
  evicted = 0;
  if (need <= ctx) return input.rows;
  const std::size_t excess = need - ctx;
  const std::size_t evictable = input.bos ? 0 : input.text_rows();
  // A StdLLM prompt must keep at least one row.
  const std::size_t floor_rows = input.brain_rows == 0 ? 1 : 0;
  if (excess + floor_rows > evictable) {
    throw ContextLengthError("prompt of " + std::to_string(input.length()) + " rows plus " +
                             std::to_string(max_tokens) + " tokens cannot fit context " +
                             std::to_string(ctx));
  }
  evicted = excess;
  Matrix rows(input.length() - excess, input.rows.cols());
  std::size_t r = 0;
  for (std::size_t i = 0; i < input.length(); ++i) {
    if (i >= input.text_begin && i < input.text_begin + excess) continue;
    rows.set_row(r++, input.rows.row(i));
  }
  return rows;
}

}  // namespace

Beam beam_search(const LanguageModel& lm, const PromptInput& input, std::size_t width,
                 std::size_t max_tokens) {
  if (width == 0) throw ArgumentError("beam width must be >= 1");
  if (max_tokens == 0) throw ArgumentError("max_tokens must be >= 1");
  Beam beam;
  beam.width = width;
  const Matrix rows = fit_context(lm, input, max_tokens, beam.evicted_rows);

  std::vector<Live> live(1);
  live[0].state = lm.prefill(rows, live[0].next);
  const std::size_t vocab = lm.vocab_size();
  std::vector<Candidate> cands;
  for (std::size_t step = 0; step < max_tokens; ++step) {
    cands.clear();
    for (std::size_t p = 0; p < live.size(); ++p) {
      for (std::size_t v = 0; v < vocab; ++v) {
        cands.push_back({live[p].hyp.log_prob + live[p].next[v], static_cast<TokenId>(v), p});
      }
    }
    const std::size_t keep = std::min(width, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep),
                      cands.end(), better);
    const bool last = step + 1 == max_tokens;
    std::vector<Live> next_live;
    next_live.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
      const Candidate& c = cands[k];
      const Live& parent = live[c.parent];
      Live child;
      child.hyp = parent.hyp;
      const double lp = parent.next[static_cast<std::size_t>(c.token)];
      child.hyp.tokens.push_back(c.token);
      child.hyp.step_log_probs.push_back(lp);
      child.hyp.log_prob = c.score;
      if (!last) {
        child.state = parent.state;
        const Matrix emb = lm.embed_tokens(std::span<const TokenId>(&c.token, 1));
        lm.extend(child.state, emb.row(0), child.next);
      }
      next_live.push_back(std::move(child));
    }
    live = std::move(next_live);
  }
  for (auto& l : live) beam.hypotheses.push_back(std::move(l.hyp));
  return beam;
}

std::vector<TokenId> truncate_to_budget(std::span<const TokenId> tokens, std::size_t budget) {
  const std::size_t n = std::min(budget, tokens.size());
  return {tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace neurogen
