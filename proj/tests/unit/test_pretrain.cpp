#include <gtest/gtest.h>

#include <cmath>

#include "neurogen/corpus.hpp"
#include "neurogen/errors.hpp"
#include "neurogen/pretrain.hpp"
#include "test_support.hpp"

using namespace neurogen;

TEST(Pretrain, MemorisesOneSentence) {
  const std::vector<std::vector<TokenId>> corpus{{3, 4, 5, 6, 7, 8, 9, 4, 10}};
  LMConfig lc = neurogen::testing::tiny_lm_config(12, 16, 1, 2, 24);
  PretrainConfig pc;
  pc.epochs = 300;
  pc.batch = 1;
  pc.window = 16;
  pc.lr = 1e-2;
  const auto result = train_base_lm(corpus, lc, pc);
  EXPECT_LT(result.epoch_loss.back(), 0.05);
  EXPECT_LT(corpus_cross_entropy(result.model, corpus, 16), 0.05);

  // Greedy next token at every position reproduces the sentence.
  std::vector<TokenId> seq{Vocabulary::kBos};
  for (TokenId expected : corpus[0]) {
    const Matrix p = result.model.next_token_distribution(result.model.embed_tokens(seq));
    std::size_t best = 0;
    for (std::size_t v = 1; v < p.cols(); ++v) {
      if (p(0, v) > p(0, best)) best = v;
    }
    EXPECT_EQ(static_cast<TokenId>(best), expected);
    seq.push_back(expected);
  }
}

TEST(Pretrain, HeldOutPerplexityBeatsUniform) {
  const StoryGrammar grammar;
  const auto train = story_documents(synth_corpus(grammar, 1, 40, 120));
  const auto held = story_documents(synth_corpus(grammar, 2, 5, 120));
  LMConfig lc;
  lc.vocab_size = grammar.vocabulary().size();
  lc.d_model = 32;
  lc.layers = 1;
  lc.context_len = 64;
  PretrainConfig pc;
  pc.epochs = 2;
  const auto result = train_base_lm(train, lc, pc);
  const double ce = corpus_cross_entropy(result.model, held, pc.window);
  EXPECT_LT(std::exp(ce), static_cast<double>(lc.vocab_size));
  EXPECT_LT(result.epoch_loss.back(), result.epoch_loss.front());
}

TEST(Pretrain, DeterministicUnderSeed) {
  const std::vector<std::vector<TokenId>> corpus{{3, 4, 5, 6}, {7, 8, 9, 3, 4}};
  const LMConfig lc = neurogen::testing::tiny_lm_config();
  PretrainConfig pc;
  pc.epochs = 3;
  pc.window = 8;
  pc.batch = 1;
  const auto a = train_base_lm(corpus, lc, pc);
  const auto b = train_base_lm(corpus, lc, pc);
  EXPECT_EQ(a.model.checksum(), b.model.checksum());
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
}

TEST(Pretrain, ResultIsFrozen) {
  const std::vector<std::vector<TokenId>> corpus{{3, 4, 5, 6}};
  PretrainConfig pc;
  pc.epochs = 1;
  pc.window = 8;
  const auto r = train_base_lm(corpus, neurogen::testing::tiny_lm_config(), pc);
  for (const Parameter* p : r.model.parameters()) EXPECT_FALSE(p->trainable) << p->name;
}

TEST(Pretrain, EmptyCorpusIsADataError) {
  EXPECT_THROW(train_base_lm({}, neurogen::testing::tiny_lm_config(), {}), DataError);
}
