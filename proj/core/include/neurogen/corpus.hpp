#pragma once

#include <cstdint>
#include <vector>

#include "neurogen/random.hpp"
#include "neurogen/vocabulary.hpp"

namespace neurogen {

struct GrammarSpec {
  std::uint64_t seed = 1;
  std::size_t topics = 8;
  std::size_t nouns = 20;       // per topic
  std::size_t verbs = 10;       // per topic
  std::size_t adjectives = 8;   // per topic
  std::size_t names = 20;
};

struct Story {
  std::uint32_t topic = 0;
  /// Consecutive frames of 3-10 words; together they cover the story text
  /// up to a short tail that is dropped.
  std::vector<std::vector<TokenId>> frames;
  /// The same text cut at template boundaries.
  std::vector<std::vector<TokenId>> sentences;
};

/// Topic grammar over pseudo-words. Each story picks a topic, a cast of
/// two names and five recurring nouns, then fills sentence templates.
class StoryGrammar {
 public:
  explicit StoryGrammar(const GrammarSpec& spec = {});

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  Story generate(Rng& rng, std::size_t story_len) const;

 private:
  struct Topic {
    std::vector<TokenId> nouns, verbs, adjectives;
  };
  GrammarSpec spec_;
  Vocabulary vocab_;
  std::vector<Topic> topics_;
  std::vector<TokenId> names_;
};

inline constexpr std::size_t kMinFrameWords = 3;
inline constexpr std::size_t kMaxFrameWords = 10;

std::vector<Story> synth_corpus(const StoryGrammar& grammar, std::uint64_t seed,
                                std::size_t n_stories, std::size_t story_len);

/// Concatenated frame tokens of each story (LM training documents).
std::vector<std::vector<TokenId>> story_documents(const std::vector<Story>& stories);

/// Unigram entropy (nats) of the frame tokens.
double unigram_entropy(const std::vector<Story>& stories);

}  // namespace neurogen
