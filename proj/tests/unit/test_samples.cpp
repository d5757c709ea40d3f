#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "neurogen/errors.hpp"
#include "neurogen/samples.hpp"
#include "test_support.hpp"

using namespace neurogen;

namespace {

std::vector<StimulusUnit> story_frames(std::uint32_t story, std::size_t n, std::uint64_t first_id,
                                       Rng& rng) {
  std::vector<StimulusUnit> out;
  for (std::size_t i = 0; i < n; ++i) {
    StimulusUnit u;
    u.frame_id = first_id + i;
    u.story = story;
    u.index_in_story = static_cast<std::uint32_t>(i);
    u.tokens = neurogen::testing::random_tokens(3 + rng.below(8), 50, rng);
    u.recording = neurogen::testing::random_matrix(4, 3, rng);
    out.push_back(u);
  }
  return out;
}

}  // namespace

TEST(Continuous, WindowsPerFrame) {
  Rng rng(1);
  const auto frames = story_frames(0, 6, 0, rng);
  const auto samples = build_samples_continuous(frames, 3);
  std::map<std::uint64_t, std::vector<const DataSample*>> by_frame;
  for (const auto& s : samples) by_frame[s.frame_id].push_back(&s);
  EXPECT_EQ(by_frame[0].size(), 1u);
  EXPECT_TRUE(by_frame[0][0]->prompt.empty());
  EXPECT_EQ(by_frame[1].size(), 1u);
  EXPECT_EQ(by_frame[2].size(), 2u);
  for (std::uint64_t f = 3; f < 6; ++f) EXPECT_EQ(by_frame[f].size(), 3u);
}

TEST(Continuous, PromptsArePrecedingFrames) {
  Rng rng(2);
  const auto frames = story_frames(0, 8, 100, rng);
  for (const auto& s : build_samples_continuous(frames, 3)) {
    const std::size_t k = s.frame_id - 100;
    EXPECT_EQ(s.continuation, frames[k].tokens);
    EXPECT_EQ(s.recording, frames[k].recording);
    EXPECT_EQ(s.tr_budget, s.continuation.size());
    // The prompt is a suffix of the concatenated preceding frames that
    // starts on a frame boundary.
    std::vector<TokenId> tail;
    bool matched = s.prompt.empty() && k == 0;
    for (std::size_t j = k; j-- > 0 && !matched;) {
      tail.insert(tail.begin(), frames[j].tokens.begin(), frames[j].tokens.end());
      matched = tail == s.prompt;
    }
    EXPECT_TRUE(matched) << "frame " << k;
  }
}

TEST(Continuous, StoriesDoNotBleed) {
  Rng rng(3);
  auto frames = story_frames(0, 4, 0, rng);
  const auto second = story_frames(1, 4, 4, rng);
  frames.insert(frames.end(), second.begin(), second.end());
  std::size_t first_of_second = 0;
  for (const auto& s : build_samples_continuous(frames, 3)) {
    if (s.frame_id == 4) {
      ++first_of_second;
      EXPECT_TRUE(s.prompt.empty());
    }
  }
  EXPECT_EQ(first_of_second, 1u);
}

TEST(Thirds, Sizes) {
  EXPECT_EQ(thirds(4), (std::array<std::size_t, 3>{2, 1, 1}));
  EXPECT_EQ(thirds(9), (std::array<std::size_t, 3>{3, 3, 3}));
  EXPECT_EQ(thirds(5), (std::array<std::size_t, 3>{2, 2, 1}));
  for (std::size_t n = 3; n < 60; ++n) {
    const auto t = thirds(n);
    EXPECT_EQ(t[0] + t[1] + t[2], n);
    EXPECT_LE(*std::max_element(t.begin(), t.end()) - *std::min_element(t.begin(), t.end()), 1u);
  }
}

TEST(Sentencewise, NineTokens) {
  StimulusUnit u;
  u.tokens = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  u.recording = Matrix(4, 2);
  const StimulusUnit units[] = {u};
  const auto r = build_samples_sentencewise(units);
  ASSERT_EQ(r.samples.size(), 2u);
  EXPECT_EQ(r.samples[0].prompt, (std::vector<TokenId>{1, 2, 3}));
  EXPECT_EQ(r.samples[0].continuation, (std::vector<TokenId>{4, 5, 6}));
  EXPECT_EQ(r.samples[1].prompt, (std::vector<TokenId>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(r.samples[1].continuation, (std::vector<TokenId>{7, 8, 9}));
}

TEST(Sentencewise, TwoSamplesPerSentence) {
  Rng rng(4);
  std::vector<StimulusUnit> units;
  for (std::size_t i = 0; i < 627; ++i) {
    StimulusUnit u;
    u.frame_id = i;
    u.tokens = neurogen::testing::random_tokens(3 + rng.below(20), 30, rng);
    u.recording = Matrix(4, 2);
    units.push_back(u);
  }
  EXPECT_EQ(build_samples_sentencewise(units).samples.size(), 1254u);
}

TEST(Sentencewise, ShortSentencesAreCounted) {
  StimulusUnit a, b;
  a.tokens = {1, 2};
  b.tokens = {1, 2, 3};
  const StimulusUnit units[] = {a, b};
  const auto r = build_samples_sentencewise(units);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.samples.size(), 2u);
}

TEST(Split, FiveFrames) {
  SplitSpec spec;
  EXPECT_EQ(split_counts(5, spec), (std::array<std::size_t, 3>{3, 1, 1}));
}

TEST(Split, FrameCountsWithinOneOfTarget) {
  SplitSpec spec;
  for (std::size_t n = 1; n < 300; ++n) {
    const auto c = split_counts(n, spec);
    EXPECT_EQ(c[0] + c[1] + c[2], n);
    EXPECT_LE(std::abs(static_cast<double>(c[0]) - 0.6 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(c[1]) - 0.2 * n), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(c[2]) - 0.2 * n), 1.0);
  }
}

TEST(Split, FramesLandInExactlyOneSplit) {
  Rng rng(5);
  std::vector<StimulusUnit> frames;
  for (std::uint32_t s = 0; s < 6; ++s) {
    const auto f = story_frames(s, 12, s * 100, rng);
    frames.insert(frames.end(), f.begin(), f.end());
  }
  const auto samples = build_samples_continuous(frames, 3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SplitSpec spec;
    spec.seed = seed;
    const auto split = split_dataset(samples, spec);
    EXPECT_EQ(split.train.size() + split.valid.size() + split.test.size(), samples.size());
    std::map<std::uint64_t, int> where;
    auto mark = [&](const std::vector<DataSample>& part, int id) {
      for (const auto& s : part) {
        auto [it, fresh] = where.emplace(s.frame_id, id);
        EXPECT_EQ(it->second, id) << "frame " << s.frame_id << " in two splits";
      }
    };
    mark(split.train, 0);
    mark(split.valid, 1);
    mark(split.test, 2);
    std::set<std::vector<TokenId>> train_conts;
    for (const auto& s : split.train) train_conts.insert(s.continuation);
    for (const auto& s : split.test) {
      EXPECT_EQ(train_conts.count(s.continuation), 0u);
    }
    const auto counts = split_counts(where.size(), spec);
    std::array<std::size_t, 3> got{};
    for (const auto& [f, id] : where) ++got[static_cast<std::size_t>(id)];
    EXPECT_EQ(got, counts);
  }
}

TEST(SplitSpec, RejectsNonPositiveFractions) {
  SplitSpec s;
  s.valid = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
}
