#pragma once

#include <span>

#include "neurogen/vocabulary.hpp"

namespace neurogen {

using Tokens = std::span<const TokenId>;

/// Clipped unigram precision times the brevity penalty
/// (1 if |cand| >= |ref|, else e^(1 - |ref|/|cand|)). Empty candidate -> 0.
double bleu1(Tokens candidate, Tokens reference);

/// The printed alternative form, kept for comparison runs:
/// BP / (BP + (1 - BP) * (1 - e^(-ln(r) / ln(m)))), where r is the clipped
/// unigram match count, m the reference length, and BP = 1 if |ref| < |cand|
/// else e^(1 - |ref|/|cand|). Zero matches give 0; for m = 1 the log ratio
/// is taken as 1.
double bleu1_literal(Tokens candidate, Tokens reference);

/// Word-level Levenshtein distance divided by the reference length.
double wer(Tokens candidate, Tokens reference);

/// Clipped n-gram matches divided by the number of reference n-grams.
double rouge_n(Tokens candidate, Tokens reference, std::size_t n = 1);

/// LCS length divided by the reference length.
double rouge_l(Tokens candidate, Tokens reference);

struct MeteorDetail {
  double score = 0.0;
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  bool exact_search = true;  // false when the greedy aligner was used
};

/// Exact-match unigram METEOR: Fmean = 10PR / (R + 9P), penalty =
/// 0.5 * (chunks / matches)^3, score = Fmean * (1 - penalty). Among
/// alignments with the maximum number of matches the one with the fewest
/// chunks is used; small inputs are searched exhaustively, larger ones use
/// greedy longest-block alignment.
MeteorDetail meteor_detail(Tokens candidate, Tokens reference);
double meteor(Tokens candidate, Tokens reference);

std::size_t edit_distance(Tokens a, Tokens b);
std::size_t lcs_length(Tokens a, Tokens b);

}  // namespace neurogen
