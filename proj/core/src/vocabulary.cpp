#include "neurogen/vocabulary.hpp"

#include <cctype>
#include <fstream>

#include "neurogen/errors.hpp"

namespace neurogen {

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<bos>");
  add("<unk>");
}

Vocabulary::Vocabulary(std::span<const std::string> words) : Vocabulary() {
  for (const auto& w : words) {
    if (!index_.contains(w)) add(w);
  }
}

void Vocabulary::add(const std::string& word) {
  index_.emplace(word, static_cast<TokenId>(words_.size()));
  words_.push_back(word);
}

bool Vocabulary::contains(std::string_view word) const {
  return index_.contains(std::string(word));
}

TokenId Vocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw VocabularyError("token id " + std::to_string(id) + " outside vocabulary of size " +
                          std::to_string(words_.size()));
  }
  return words_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  for (const auto& w : words_) out << w << '\n';
  if (!out) throw IoError("failed writing vocabulary " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read vocabulary " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (lines.size() < kReserved || lines[0] != "<pad>" || lines[1] != "<bos>" ||
      lines[2] != "<unk>") {
    throw DataError("vocabulary " + path.string() + " lacks the reserved header tokens");
  }
  Vocabulary v;
  for (std::size_t i = kReserved; i < lines.size(); ++i) {
    if (v.index_.contains(lines[i])) {
      throw DataError("duplicate vocabulary entry '" + lines[i] + "'");
    }
    v.add(lines[i]);
  }
  return v;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      flush();
    } else if (std::isalnum(uc) || uc >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
      out.emplace_back(1, ch);
    }
  }
  flush();
  return out;
}

std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  for (const auto& w : split_words(text)) ids.push_back(vocab.id(w));
  return ids;
}

std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += vocab.word(ids[i]);
  }
  return out;
}

}  // namespace neurogen
