#include "tatn/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace tatn {

bool utf8_valid(std::string_view s, std::size_t* bad_pos) {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  std::size_t n = s.size(), i = 0;
  while (i < n) {
    unsigned char c = p[i];
    std::size_t len;
    std::uint32_t cp, min;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2; cp = c & 0x1F; min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3; cp = c & 0x0F; min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4; cp = c & 0x07; min = 0x10000;
    } else {
      if (bad_pos) *bad_pos = i;
      return false;
    }
    if (i + len > n) {
      if (bad_pos) *bad_pos = i;
      return false;
    }
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) {
        if (bad_pos) *bad_pos = i;
        return false;
      }
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      if (bad_pos) *bad_pos = i;
      return false;
    }
    i += len;
  }
  return true;
}

std::vector<std::string> utf8_split(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0, n = s.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : 4;
    if (i + len > n) len = n - i;
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string> split_tokens(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0, n = line.size();
  while (i < n) {
    while (i < n && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < n && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t bad = 0;
    if (!utf8_valid(line, &bad))
      throw DataError(path + ":" + std::to_string(lineno) + ": invalid UTF-8 at byte " +
                      std::to_string(bad));
    lines.push_back(std::move(line));
  }
  return lines;
}

std::vector<std::vector<std::string>> read_token_lines(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  for (const std::string& line : read_lines(path)) out.push_back(split_tokens(line));
  return out;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const std::string& l : lines) out << l << '\n';
  if (!out) throw DataError("write failed: " + path);
}

Vocabulary::Vocabulary() {
  push(kPadTok, 0);
  push(kBosTok, 0);
  push(kEosTok, 0);
  push(kUnkTok, 0);
}

void Vocabulary::push(const std::string& word, std::int64_t count) {
  ids_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(word);
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             std::int64_t max_size, std::int64_t min_count) {
  if (max_size < kNumSpecials + 1)
    throw ContractError("vocab max_size must be at least " + std::to_string(kNumSpecials + 1));
  std::map<std::string, std::int64_t> freq;
  for (const auto& sent : corpus)
    for (const auto& tok : sent) ++freq[tok];
  std::vector<std::pair<std::string, std::int64_t>> items(freq.begin(), freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [word, count] : items) {
    if (v.size() >= max_size) break;
    if (count < min_count) break;
    if (v.ids_.count(word)) continue;  // a special token appearing in text
    v.push(word, count);
  }
  return v;
}

int Vocabulary::id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(const std::string& word) const { return ids_.count(word) != 0; }

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= size()) throw ContractError("vocab id out of range: " + std::to_string(id));
  return words_[id];
}

std::int64_t Vocabulary::count(int id) const {
  if (id < 0 || id >= size()) throw ContractError("vocab id out of range: " + std::to_string(id));
  return counts_[id];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "#vocab v1\n";
  for (int i = 0; i < size(); ++i) out << words_[i] << '\t' << counts_[i] << '\n';
  if (!out) throw DataError("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0] != "#vocab v1")
    throw DataError(path + ": missing \"#vocab v1\" header");
  Vocabulary v;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::size_t tab = lines[i].find('\t');
    if (tab == std::string::npos)
      throw DataError(path + ":" + std::to_string(i + 1) + ": expected word<TAB>count");
    std::string word = lines[i].substr(0, tab);
    std::int64_t count = 0;
    try {
      count = std::stoll(lines[i].substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(i + 1) + ": bad count");
    }
    if (i <= kNumSpecials) {
      // Specials are created by the constructor; just verify the file agrees.
      if (word != v.words_[i - 1])
        throw DataError(path + ":" + std::to_string(i + 1) + ": expected special token " +
                        v.words_[i - 1]);
      v.counts_[i - 1] = count;
    } else {
      if (v.ids_.count(word))
        throw DataError(path + ":" + std::to_string(i + 1) + ": duplicate word " + word);
      v.push(word, count);
    }
  }
  return v;
}

std::vector<int> encode(const std::vector<std::string>& tokens, const Vocabulary& v) {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  for (const auto& t : tokens) ids.push_back(v.id(t));
  ids.push_back(kEosId);
  return ids;
}

std::vector<std::string> decode(const std::vector<int>& ids, const Vocabulary& v) {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == kPadId || id == kBosId || id == kEosId) continue;
    out.push_back(v.word(id));
  }
  return out;
}

}  // namespace tatn
