#include <gtest/gtest.h>

#include <cmath>

#include "neurogen/corpus.hpp"
#include "neurogen/encoder.hpp"
#include "neurogen/errors.hpp"
#include "neurogen/linalg.hpp"
#include "test_support.hpp"

using namespace neurogen;

TEST(Corpus, FramesHoldThreeToTenWords) {
  const StoryGrammar g;
  for (const Story& s : synth_corpus(g, 3, 30, 150)) {
    ASSERT_FALSE(s.frames.empty());
    for (const auto& f : s.frames) {
      EXPECT_GE(f.size(), kMinFrameWords);
      EXPECT_LE(f.size(), kMaxFrameWords);
      for (TokenId id : f) {
        EXPECT_GE(id, static_cast<TokenId>(Vocabulary::kReserved));
        EXPECT_LT(static_cast<std::size_t>(id), g.vocabulary().size());
      }
    }
  }
}

TEST(Corpus, SentencesCoverTheSameText) {
  const StoryGrammar g;
  for (const Story& s : synth_corpus(g, 4, 10, 120)) {
    std::vector<TokenId> a, b;
    for (const auto& f : s.frames) a.insert(a.end(), f.begin(), f.end());
    for (const auto& f : s.sentences) b.insert(b.end(), f.begin(), f.end());
    ASSERT_LE(a.size(), b.size());
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(Corpus, FixedSeedIsReproducible) {
  const StoryGrammar g;
  const auto a = story_documents(synth_corpus(g, 9, 5, 100));
  const auto b = story_documents(synth_corpus(g, 9, 5, 100));
  const auto c = story_documents(synth_corpus(g, 10, 5, 100));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Corpus, UnigramEntropyBelowUniform) {
  const StoryGrammar g;
  const auto stories = synth_corpus(g, 1, 50, 170);
  const double h = unigram_entropy(stories);
  EXPECT_GT(h, 0.0);
  EXPECT_LT(h, std::log(static_cast<double>(g.vocabulary().size())));
}

TEST(Encoder, NoiselessSingleFrameResponse) {
  const LanguageModel lm(neurogen::testing::tiny_lm_config(20, 8, 1, 2, 40));
  EncoderSpec spec;
  spec.c_raw = 10;
  spec.h = {1.0, 0.0, 0.0, 0.0};
  spec.noise_sigma = 0.0;
  const BrainEncoder enc(spec, 8, 1.0);
  const TokenId m[] = {4, 9, 11};
  const Matrix r = enc.encode(m, lm, 7);
  const auto sem = semantic_vector(lm, m);
  for (std::size_t k = 0; k < 10; ++k) {
    double want = 0.0;
    for (std::size_t j = 0; j < 8; ++j) want += enc.projection()(k, j) * sem[j];
    EXPECT_NEAR(r(0, k), want, 1e-12);
    for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(r(i, k), 0.0);
  }
}

TEST(Encoder, SemanticVectorIsMeanEmbedding) {
  const LanguageModel lm(neurogen::testing::tiny_lm_config(20, 8, 1, 2, 40));
  const TokenId m[] = {4, 5};
  const auto sem = semantic_vector(lm, m);
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_NEAR(sem[j], 0.5 * (lm.embedding().value(4, j) + lm.embedding().value(5, j)), 1e-15);
  }
}

TEST(Encoder, NoiseIsDeterministicPerFrame) {
  const LanguageModel lm(neurogen::testing::tiny_lm_config(20, 8, 1, 2, 40));
  const BrainEncoder enc(EncoderSpec{}, 8, 1.0);
  const TokenId m[] = {4, 5, 6};
  EXPECT_EQ(enc.encode(m, lm, 3), enc.encode(m, lm, 3));
  EXPECT_NE(enc.encode(m, lm, 3), enc.encode(m, lm, 4));
}

TEST(Encoder, NoiseDominatesAtLargeSigma) {
  const LanguageModel lm(neurogen::testing::tiny_lm_config(40, 8, 1, 2, 40));
  EncoderSpec spec;
  spec.c_raw = 16;
  spec.noise_sigma = 1e6;
  const BrainEncoder enc(spec, 8, 1.0);
  Rng rng(1);
  // Correlation between the noiseless signal and the emitted features.
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::uint64_t f = 0; f < 400; ++f) {
    const auto m = neurogen::testing::random_tokens(5, 40, rng);
    const auto sem = semantic_vector(lm, m);
    const Matrix r = enc.encode(m, lm, f);
    for (std::size_t k = 0; k < 16; ++k) {
      double sig = 0.0;
      for (std::size_t j = 0; j < 8; ++j) sig += enc.projection()(k, j) * sem[j];
      sig *= spec.h[1];
      sxy += sig * r(1, k);
      sxx += sig * sig;
      syy += r(1, k) * r(1, k);
    }
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 0.05);
}

TEST(Encoder, RidgeDecodingRecoversSemanticsAtLowNoise) {
  const StoryGrammar g;
  const LanguageModel lm([&] {
    LMConfig c;
    c.vocab_size = g.vocabulary().size();
    c.d_model = 16;
    c.heads = 2;
    c.layers = 1;
    return c;
  }());
  std::vector<std::vector<TokenId>> units;
  for (const Story& s : synth_corpus(g, 2, 60, 100)) {
    for (const auto& f : s.frames) units.push_back(f);
  }
  ASSERT_GT(units.size(), 600u);
  EncoderSpec spec;
  spec.c_raw = 48;
  spec.noise_sigma = 0.1;
  const BrainEncoder enc(spec, 16, semantic_rms(lm, units));

  const std::size_t n_train = 500, n_test = units.size() - n_train, p = 4 * 48, d = 16;
  Matrix x(units.size(), p), y(units.size(), d);
  for (std::size_t i = 0; i < units.size(); ++i) {
    const Matrix r = enc.encode(units[i], lm, i);
    std::copy(r.values().begin(), r.values().end(), x.row(i).begin());
    const auto sem = semantic_vector(lm, units[i]);
    std::copy(sem.begin(), sem.end(), y.row(i).begin());
  }
  // Closed-form ridge on the first n_train rows: (X'X + lambda I) W = X'Y.
  const Matrix xt = x.slice_rows(0, n_train), yt = y.slice_rows(0, n_train);
  Matrix gram = matmul_tn(xt, xt);
  for (std::size_t i = 0; i < p; ++i) gram(i, i) += 1e-3;
  const Matrix w = solve_spd(gram, matmul_tn(xt, yt));
  const Matrix pred = matmul(x.slice_rows(n_train, n_test), w);
  const Matrix truth = y.slice_rows(n_train, n_test);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n_test; ++i) mean += truth(i, j);
    mean /= static_cast<double>(n_test);
    for (std::size_t i = 0; i < n_test; ++i) {
      ss_res += std::pow(truth(i, j) - pred(i, j), 2);
      ss_tot += std::pow(truth(i, j) - mean, 2);
    }
  }
  EXPECT_GT(1.0 - ss_res / ss_tot, 0.9);
}

TEST(EncoderSpec, Validation) {
  EncoderSpec s;
  s.noise_sigma = -1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = EncoderSpec{};
  s.h = {0.5, 0.6};
  EXPECT_THROW(s.validate(), ConfigError);
  s.h = {0.5, -0.5, 1.0};
  EXPECT_THROW(s.validate(), ConfigError);
}
