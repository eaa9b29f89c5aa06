#ifndef TATN_SUBWORD_HPP
#define TATN_SUBWORD_HPP

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "tatn/common.hpp"

namespace tatn {

inline constexpr const char* kEow = "</w>";

struct MergeTable {
  // Pairs in learning order (highest priority first).
  std::vector<std::pair<std::string, std::string>> merges;
  std::string eow = kEow;

  // rank[a + " " + b] = position in merges; rebuilt on load/learn.
  std::unordered_map<std::string, int> rank;

  void index();
  void save(const std::string& path) const;
  static MergeTable load(const std::string& path);
};

// Learns num_merges merges from word frequencies. Each word starts as its
// code points followed by a separate end-of-word symbol; the most frequent
// adjacent pair is merged each round (lexicographic tie-break on (a,b));
// stops early when no pair occurs at least twice.
MergeTable learn_bpe(const std::map<std::string, std::int64_t>& word_freq,
                     std::int64_t num_merges);

// Raw symbol sequence after exhaustively applying merges; the end-of-word
// marker may survive as its own trailing symbol.
std::vector<std::string> segment_symbols(const std::string& token, const MergeTable& table);

// Subword units for one token: segment_symbols with a bare trailing marker
// fused onto the preceding symbol, so the last unit always carries the eow.
std::vector<std::string> apply_bpe(const std::string& token, const MergeTable& table);

// Applies apply_bpe to every token of a sentence.
std::vector<std::string> apply_bpe_line(const std::vector<std::string>& tokens,
                                        const MergeTable& table);

// Rejoins subword units into words, splitting at eow markers. A dangling
// tail without a marker becomes a final word.
std::vector<std::string> undo_bpe(const std::vector<std::string>& subwords,
                                  const std::string& eow = kEow);

}  // namespace tatn

#endif
