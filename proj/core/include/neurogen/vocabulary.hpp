#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace neurogen {

using TokenId = std::int32_t;

/// Word-level vocabulary. Ids 0..2 are reserved for PAD, BOS and UNK.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kUnk = 2;
  static constexpr std::size_t kReserved = 3;

  Vocabulary();
  /// Appends words after the reserved ids; duplicates keep their first id.
  explicit Vocabulary(std::span<const std::string> words);

  std::size_t size() const noexcept { return words_.size(); }
  bool contains(std::string_view word) const;
  /// Unknown words map to kUnk.
  TokenId id(std::string_view word) const;
  const std::string& word(TokenId id) const;
  std::span<const std::string> words() const noexcept { return words_; }

  /// One token per line; line number is the id.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  void add(const std::string& word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Lowercases, splits on whitespace and emits each punctuation character as
/// its own piece.
std::vector<std::string> split_words(std::string_view text);
std::vector<TokenId> tokenize(std::string_view text, const Vocabulary& vocab);
std::string detokenize(std::span<const TokenId> ids, const Vocabulary& vocab);

}  // namespace neurogen
