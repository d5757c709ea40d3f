#include "neurogen/text_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "neurogen/errors.hpp"

namespace neurogen {
namespace {

void require_reference(Tokens reference, const char* metric) {
  if (reference.empty()) throw ArgumentError(std::string(metric) + ": empty reference");
}

std::size_t clipped_unigram_matches(Tokens candidate, Tokens reference) {
  std::map<TokenId, std::size_t> ref;
  for (TokenId t : reference) ++ref[t];
  std::size_t hits = 0;
  for (TokenId t : candidate) {
    auto it = ref.find(t);
    if (it != ref.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return hits;
}

using Alignment = std::vector<std::pair<std::size_t, std::size_t>>;  // (cand, ref)

std::size_t count_chunks(Alignment a) {
  if (a.empty()) return 0;
  std::sort(a.begin(), a.end());
  std::size_t chunks = 1;
  for (std::size_t k = 1; k < a.size(); ++k) {
    if (a[k].first != a[k - 1].first + 1 || a[k].second != a[k - 1].second + 1) ++chunks;
  }
  return chunks;
}

// Branch and bound over candidate positions. Each position is matched to an
// unused reference occurrence of its word or skipped; only alignments with
// the maximum match count are scored.
struct ExactAligner {
  Tokens cand, ref;
  std::size_t target = 0;
  std::vector<std::vector<std::size_t>> options;  // ref positions per cand position
  std::vector<bool> used;
  Alignment current;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> remaining_possible;  // upper bound on matches from position i on

  // Chunks so far given the partial alignment ordered by candidate position.
  std::size_t partial_chunks() const {
    std::size_t chunks = 0;
    for (std::size_t k = 0; k < current.size(); ++k) {
      if (k == 0 || current[k].first != current[k - 1].first + 1 ||
          current[k].second != current[k - 1].second + 1) {
        ++chunks;
      }
    }
    return chunks;
  }

  void search(std::size_t i) {
    if (current.size() + remaining_possible[i] < target) return;
    if (partial_chunks() >= best) return;
    if (current.size() == target) {
      best = std::min(best, partial_chunks());
      return;
    }
    if (i == cand.size()) return;
    for (std::size_t r : options[i]) {
      if (used[r]) continue;
      used[r] = true;
      current.emplace_back(i, r);
      search(i + 1);
      current.pop_back();
      used[r] = false;
    }
    search(i + 1);
  }
};

std::size_t greedy_chunks(Tokens cand, Tokens ref) {
  std::vector<bool> cu(cand.size(), false), ru(ref.size(), false);
  Alignment a;
  for (;;) {
    std::size_t best_len = 0, best_c = 0, best_r = 0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (cu[i]) continue;
      for (std::size_t j = 0; j < ref.size(); ++j) {
        std::size_t len = 0;
        while (i + len < cand.size() && j + len < ref.size() && !cu[i + len] && !ru[j + len] &&
               cand[i + len] == ref[j + len]) {
          ++len;
        }
        if (len > best_len) {
          best_len = len;
          best_c = i;
          best_r = j;
        }
      }
    }
    if (best_len == 0) break;
    for (std::size_t k = 0; k < best_len; ++k) {
      cu[best_c + k] = ru[best_r + k] = true;
      a.emplace_back(best_c + k, best_r + k);
    }
  }
  return count_chunks(a);
}

constexpr double kExactSearchBudget = 2e5;

}  // namespace

std::size_t edit_distance(Tokens a, Tokens b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t lcs_length(Tokens a, Tokens b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double bleu1(Tokens candidate, Tokens reference) {
  require_reference(reference, "bleu1");
  if (candidate.empty()) return 0.0;
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double precision = static_cast<double>(clipped_unigram_matches(candidate, reference)) / c;
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * precision;
}

double bleu1_literal(Tokens candidate, Tokens reference) {
  require_reference(reference, "bleu1_literal");
  if (candidate.empty()) return 0.0;
  const double matches = static_cast<double>(clipped_unigram_matches(candidate, reference));
  if (matches == 0.0) return 0.0;
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = r < c ? 1.0 : std::exp(1.0 - r / c);
  const double ratio = reference.size() == 1 ? 1.0 : std::log(matches) / std::log(r);
  return bp / (bp + (1.0 - bp) * (1.0 - std::exp(-ratio)));
}

double wer(Tokens candidate, Tokens reference) {
  require_reference(reference, "wer");
  return static_cast<double>(edit_distance(candidate, reference)) /
         static_cast<double>(reference.size());
}

double rouge_n(Tokens candidate, Tokens reference, std::size_t n) {
  if (n == 0) throw ArgumentError("rouge_n: n must be >= 1");
  if (reference.size() < n) {
    throw ArgumentError("rouge_n: reference has fewer than " + std::to_string(n) + " tokens");
  }
  std::map<std::vector<TokenId>, std::size_t> ref;
  for (std::size_t i = 0; i + n <= reference.size(); ++i) {
    ++ref[std::vector<TokenId>(reference.begin() + static_cast<std::ptrdiff_t>(i),
                               reference.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
    auto it = ref.find(std::vector<TokenId>(candidate.begin() + static_cast<std::ptrdiff_t>(i),
                                            candidate.begin() + static_cast<std::ptrdiff_t>(i + n)));
    if (it != ref.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(reference.size() - n + 1);
}

double rouge_l(Tokens candidate, Tokens reference) {
  require_reference(reference, "rouge_l");
  return static_cast<double>(lcs_length(candidate, reference)) /
         static_cast<double>(reference.size());
}

MeteorDetail meteor_detail(Tokens candidate, Tokens reference) {
  require_reference(reference, "meteor");
  MeteorDetail d;
  d.matches = clipped_unigram_matches(candidate, reference);
  if (d.matches == 0) return d;

  double space = 1.0;
  std::map<TokenId, std::vector<std::size_t>> positions;
  for (std::size_t j = 0; j < reference.size(); ++j) positions[reference[j]].push_back(j);
  for (TokenId t : candidate) {
    auto it = positions.find(t);
    space *= 1.0 + (it == positions.end() ? 0.0 : static_cast<double>(it->second.size()));
    if (space > kExactSearchBudget) break;
  }
  if (space <= kExactSearchBudget) {
    ExactAligner al{candidate, reference, d.matches, {}, {}, {}, std::numeric_limits<std::size_t>::max(), {}};
    al.used.assign(reference.size(), false);
    al.remaining_possible.assign(candidate.size() + 1, 0);
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      auto it = positions.find(candidate[i]);
      al.options.push_back(it == positions.end() ? std::vector<std::size_t>{} : it->second);
    }
    for (std::size_t i = candidate.size(); i-- > 0;) {
      al.remaining_possible[i] = al.remaining_possible[i + 1] + (al.options[i].empty() ? 0 : 1);
    }
    al.search(0);
    d.chunks = al.best;
  } else {
    d.chunks = greedy_chunks(candidate, reference);
    d.exact_search = false;
  }

  const double m = static_cast<double>(d.matches);
  d.precision = m / static_cast<double>(candidate.size());
  d.recall = m / static_cast<double>(reference.size());
  d.fmean = 10.0 * d.precision * d.recall / (d.recall + 9.0 * d.precision);
  const double frag = static_cast<double>(d.chunks) / m;
  d.penalty = 0.5 * frag * frag * frag;
  d.score = d.fmean * (1.0 - d.penalty);
  return d;
}

double meteor(Tokens candidate, Tokens reference) {
  return meteor_detail(candidate, reference).score;
}

}  // namespace neurogen
