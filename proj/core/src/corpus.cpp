#include "neurogen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "neurogen/errors.hpp"

namespace neurogen {
namespace {

const char* const kSyllables[] = {"ka", "lo", "mi", "ten", "dor", "sa", "vu", "rel", "pi", "nar",
                                  "gos", "tu", "bel", "xi", "mor", "fa", "qui", "zen", "ho", "ral"};

const char* const kFunctionWords[] = {"the", "a",    "and",  "of",   "to", "in",  "on",
                                      "was", "were", "with", "by",   "near", "from", "at",
                                      "saw", "had",  "for",  "then"};

// N = cast name, X = story noun, V = topic verb, A = topic adjective.
const char* const kTemplates[] = {
    "N V the A X",   "the X V near the X",        "N and N V a X",       "in the A X N V",
    "the X was A and A", "N saw the X by the X",  "then N V the X with the X",
    "a A X V to N",  "N had a A X",               "the X of N V"};

std::string pseudo_word(Rng& rng, std::set<std::string>& used) {
  for (;;) {
    const std::size_t syl = rng.below(3) == 2 ? 3 : 2;
    std::string w;
    for (std::size_t i = 0; i < syl; ++i) w += kSyllables[rng.below(std::size(kSyllables))];
    if (used.insert(w).second) return w;
  }
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

}  // namespace

StoryGrammar::StoryGrammar(const GrammarSpec& spec) : spec_(spec) {
  if (spec.topics == 0 || spec.nouns < 5 || spec.verbs == 0 || spec.adjectives == 0 ||
      spec.names < 2) {
    throw ConfigError("grammar needs >=1 topic, >=5 nouns, >=1 verb/adjective and >=2 names");
  }
  Rng rng(mix_seed(spec.seed, 0x6A));
  std::set<std::string> used(std::begin(kFunctionWords), std::end(kFunctionWords));
  std::vector<std::vector<std::string>> words(spec.topics * 3);
  for (std::size_t z = 0; z < spec.topics; ++z) {
    for (std::size_t i = 0; i < spec.nouns; ++i) words[3 * z].push_back(pseudo_word(rng, used));
    for (std::size_t i = 0; i < spec.verbs; ++i) words[3 * z + 1].push_back(pseudo_word(rng, used));
    for (std::size_t i = 0; i < spec.adjectives; ++i) {
      words[3 * z + 2].push_back(pseudo_word(rng, used));
    }
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < spec.names; ++i) names.push_back(pseudo_word(rng, used));

  const std::vector<std::string> sorted(used.begin(), used.end());
  vocab_ = Vocabulary(sorted);
  auto ids = [&](const std::vector<std::string>& ws) {
    std::vector<TokenId> out;
    for (const auto& w : ws) out.push_back(vocab_.id(w));
    return out;
  };
  for (std::size_t z = 0; z < spec.topics; ++z) {
    topics_.push_back({ids(words[3 * z]), ids(words[3 * z + 1]), ids(words[3 * z + 2])});
  }
  names_ = ids(names);
}

Story StoryGrammar::generate(Rng& rng, std::size_t story_len) const {
  Story story;
  story.topic = static_cast<std::uint32_t>(rng.below(topics_.size()));
  const Topic& topic = topics_[story.topic];
  const std::vector<TokenId> cast{pick(rng, names_), pick(rng, names_)};
  std::vector<TokenId> nouns = topic.nouns;
  rng.shuffle(std::span<TokenId>(nouns));
  const std::vector<TokenId> entities(nouns.begin(), nouns.begin() + 5);

  std::vector<TokenId> words;
  while (words.size() < story_len) {
    std::istringstream tpl(kTemplates[rng.below(std::size(kTemplates))]);
    std::vector<TokenId> sentence;
    std::string slot;
    while (tpl >> slot) {
      if (slot == "N") {
        sentence.push_back(rng.uniform() < 0.85 ? pick(rng, cast) : pick(rng, names_));
      } else if (slot == "X") {
        const double u = rng.uniform();
        if (u < 0.6) {
          sentence.push_back(pick(rng, entities));
        } else if (u < 0.92) {
          sentence.push_back(pick(rng, topic.nouns));
        } else {
          sentence.push_back(pick(rng, topics_[rng.below(topics_.size())].nouns));
        }
      } else if (slot == "V") {
        sentence.push_back(pick(rng, topic.verbs));
      } else if (slot == "A") {
        sentence.push_back(pick(rng, topic.adjectives));
      } else {
        sentence.push_back(vocab_.id(slot));
      }
    }
    words.insert(words.end(), sentence.begin(), sentence.end());
    story.sentences.push_back(std::move(sentence));
  }

  std::size_t i = 0;
  while (i + kMinFrameWords <= words.size()) {
    const auto len = static_cast<std::size_t>(rng.between(kMinFrameWords, kMaxFrameWords));
    const std::size_t end = std::min(words.size(), i + len);
    story.frames.emplace_back(words.begin() + static_cast<std::ptrdiff_t>(i),
                              words.begin() + static_cast<std::ptrdiff_t>(end));
    i = end;
  }
  return story;
}

std::vector<Story> synth_corpus(const StoryGrammar& grammar, std::uint64_t seed,
                                std::size_t n_stories, std::size_t story_len) {
  if (n_stories == 0) throw ArgumentError("synth_corpus: need at least one story");
  Rng rng(mix_seed(seed, 0xC0));
  std::vector<Story> out;
  out.reserve(n_stories);
  for (std::size_t s = 0; s < n_stories; ++s) out.push_back(grammar.generate(rng, story_len));
  return out;
}

std::vector<std::vector<TokenId>> story_documents(const std::vector<Story>& stories) {
  std::vector<std::vector<TokenId>> docs;
  for (const auto& s : stories) {
    std::vector<TokenId> doc;
    for (const auto& f : s.frames) doc.insert(doc.end(), f.begin(), f.end());
    docs.push_back(std::move(doc));
  }
  return docs;
}

double unigram_entropy(const std::vector<Story>& stories) {
  std::map<TokenId, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& s : stories) {
    for (const auto& f : s.frames) {
      for (TokenId id : f) {
        ++counts[id];
        ++total;
      }
    }
  }
  double h = 0.0;
  for (const auto& [id, n] : counts) {
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace neurogen
