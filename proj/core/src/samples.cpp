#include "neurogen/samples.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "neurogen/errors.hpp"
#include "neurogen/random.hpp"

namespace neurogen {

std::vector<DataSample> build_samples_continuous(std::span<const StimulusUnit> frames,
                                                 std::size_t max_window) {
  if (max_window == 0) throw ArgumentError("continuous samples need a window of at least 1");
  std::vector<DataSample> out;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const StimulusUnit& f = frames[k];
    if (f.tokens.empty()) throw DataError("frame " + std::to_string(f.frame_id) + " is empty");
    // Preceding frames of the same story, nearest first.
    std::size_t available = 0;
    while (available < max_window && available < k &&
           frames[k - available - 1].story == f.story &&
           frames[k - available - 1].index_in_story + available + 1 == f.index_in_story) {
      ++available;
    }
    const std::size_t windows = std::max<std::size_t>(available, 1);
    for (std::size_t w = 1; w <= windows; ++w) {
      DataSample s;
      s.frame_id = f.frame_id;
      s.story = f.story;
      for (std::size_t j = std::min(w, available); j > 0; --j) {
        const auto& prev = frames[k - j].tokens;
        s.prompt.insert(s.prompt.end(), prev.begin(), prev.end());
      }
      s.continuation = f.tokens;
      s.recording = f.recording;
      s.tr_budget = f.tokens.size();
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::array<std::size_t, 3> thirds(std::size_t n) {
  std::array<std::size_t, 3> sizes{n / 3, n / 3, n / 3};
  for (std::size_t i = 0; i < n % 3; ++i) ++sizes[i];
  return sizes;
}

SentencewiseResult build_samples_sentencewise(std::span<const StimulusUnit> sentences) {
  SentencewiseResult result;
  for (const StimulusUnit& s : sentences) {
    if (s.tokens.size() < 3) {
      ++result.skipped;
      continue;
    }
    const auto sz = thirds(s.tokens.size());
    const auto begin = s.tokens.begin();
    const auto cut1 = begin + static_cast<std::ptrdiff_t>(sz[0]);
    const auto cut2 = cut1 + static_cast<std::ptrdiff_t>(sz[1]);
    DataSample a;
    a.frame_id = s.frame_id;
    a.story = s.story;
    a.prompt.assign(begin, cut1);
    a.continuation.assign(cut1, cut2);
    a.recording = s.recording;
    a.tr_budget = a.continuation.size();
    DataSample b = a;
    b.prompt.assign(begin, cut2);
    b.continuation.assign(cut2, s.tokens.end());
    b.tr_budget = b.continuation.size();
    result.samples.push_back(std::move(a));
    result.samples.push_back(std::move(b));
  }
  return result;
}

void SplitSpec::validate() const {
  if (!(train > 0.0 && valid > 0.0 && test > 0.0) || !std::isfinite(train + valid + test)) {
    throw ConfigError("split fractions must be positive");
  }
}

std::array<std::size_t, 3> split_counts(std::size_t frames, const SplitSpec& spec) {
  spec.validate();
  const double total = spec.train + spec.valid + spec.test;
  const double share[3] = {spec.train / total, spec.valid / total, spec.test / total};
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = share[i] * static_cast<double>(frames);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    rem[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < frames; ++k, ++assigned) ++counts[order[k % 3]];
  return counts;
}

SplitResult split_dataset(std::span<const DataSample> samples, const SplitSpec& spec) {
  std::vector<std::uint64_t> ids;
  for (const auto& s : samples) ids.push_back(s.frame_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  Rng rng(mix_seed(spec.seed, 0x5B17));
  rng.shuffle(std::span<std::uint64_t>(ids));
  const auto counts = split_counts(ids.size(), spec);
  std::map<std::uint64_t, int> where;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    where[ids[i]] = i < counts[0] ? 0 : (i < counts[0] + counts[1] ? 1 : 2);
  }
  SplitResult out;
  std::vector<DataSample>* dest[3] = {&out.train, &out.valid, &out.test};
  for (const auto& s : samples) dest[where.at(s.frame_id)]->push_back(s);
  return out;
}

}  // namespace neurogen
