#ifndef TATN_CORPUS_HPP
#define TATN_CORPUS_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tatn/common.hpp"

namespace tatn {

// Reserved vocabulary ids.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kNumSpecials = 4;

inline constexpr const char* kPadTok = "<pad>";
inline constexpr const char* kBosTok = "<s>";
inline constexpr const char* kEosTok = "</s>";
inline constexpr const char* kUnkTok = "<unk>";

// Validates UTF-8; on failure reports the byte offset of the first bad byte.
bool utf8_valid(std::string_view s, std::size_t* bad_pos = nullptr);

// Splits a valid UTF-8 string into code-point substrings.
std::vector<std::string> utf8_split(std::string_view s);

// Whitespace tokenization (runs of spaces/tabs collapse; no empty tokens).
std::vector<std::string> split_tokens(std::string_view line);
std::string join_tokens(const std::vector<std::string>& toks);

// Reads a corpus file line by line, validating UTF-8; errors name the line.
std::vector<std::string> read_lines(const std::string& path);
std::vector<std::vector<std::string>> read_token_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

class Vocabulary {
 public:
  // Specials only.
  Vocabulary();

  // Words ordered by descending frequency, ties lexicographic, truncated to
  // max_size (which includes the specials); words below min_count dropped.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::int64_t max_size, std::int64_t min_count);

  int id(const std::string& word) const;  // kUnkId when absent
  bool contains(const std::string& word) const;
  const std::string& word(int id) const;
  std::int64_t count(int id) const;
  int size() const { return static_cast<int>(words_.size()); }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  void push(const std::string& word, std::int64_t count);

  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, int> ids_;
};

// Maps tokens to ids (OOV -> UNK) and appends the sentence-end id.
std::vector<int> encode(const std::vector<std::string>& tokens, const Vocabulary& v);

// Maps ids back to words, dropping pad/begin/end markers.
std::vector<std::string> decode(const std::vector<int>& ids, const Vocabulary& v);

}  // namespace tatn

#endif
