#include "tatn/subword.hpp"

#include <algorithm>
#include <fstream>

#include "tatn/corpus.hpp"

namespace tatn {

void MergeTable::index() {
  rank.clear();
  for (std::size_t i = 0; i < merges.size(); ++i)
    rank.emplace(merges[i].first + " " + merges[i].second, static_cast<int>(i));
}

void MergeTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "#bpe v1\n";
  for (const auto& [a, b] : merges) out << a << ' ' << b << '\n';
  if (!out) throw DataError("write failed: " + path);
}

MergeTable MergeTable::load(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0] != "#bpe v1")
    throw DataError(path + ": missing \"#bpe v1\" header");
  MergeTable t;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::size_t sp = lines[i].find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 == lines[i].size() ||
        lines[i].find(' ', sp + 1) != std::string::npos)
      throw DataError(path + ":" + std::to_string(i + 1) + ": expected \"a b\"");
    t.merges.emplace_back(lines[i].substr(0, sp), lines[i].substr(sp + 1));
  }
  t.index();
  return t;
}

namespace {

std::vector<std::string> initial_symbols(const std::string& token, const std::string& eow) {
  std::vector<std::string> syms = utf8_split(token);
  syms.push_back(eow);
  return syms;
}

void merge_in_place(std::vector<std::string>& syms, const std::string& a, const std::string& b) {
  std::vector<std::string> out;
  out.reserve(syms.size());
  std::size_t i = 0;
  while (i < syms.size()) {
    if (i + 1 < syms.size() && syms[i] == a && syms[i + 1] == b) {
      out.push_back(a + b);
      i += 2;
    } else {
      out.push_back(syms[i]);
      ++i;
    }
  }
  syms = std::move(out);
}

}  // namespace

MergeTable learn_bpe(const std::map<std::string, std::int64_t>& word_freq,
                     std::int64_t num_merges) {
  MergeTable table;
  std::vector<std::pair<std::vector<std::string>, std::int64_t>> words;
  words.reserve(word_freq.size());
  for (const auto& [word, freq] : word_freq) {
    if (word.empty() || freq <= 0) continue;
    words.emplace_back(initial_symbols(word, table.eow), freq);
  }
  for (std::int64_t round = 0; round < num_merges; ++round) {
    std::map<std::pair<std::string, std::string>, std::int64_t> counts;
    for (const auto& [syms, freq] : words)
      for (std::size_t i = 0; i + 1 < syms.size(); ++i)
        counts[{syms[i], syms[i + 1]}] += freq;
    const std::pair<std::string, std::string>* best = nullptr;
    std::int64_t best_count = 0;
    for (const auto& [pair, count] : counts) {
      // std::map iterates pairs in lexicographic order, so a strict '>' keeps
      // the lexicographically smallest pair among ties.
      if (count > best_count) {
        best = &pair;
        best_count = count;
      }
    }
    if (!best || best_count < 2) break;
    table.merges.push_back(*best);
    for (auto& [syms, freq] : words) merge_in_place(syms, best->first, best->second);
  }
  table.index();
  return table;
}

std::vector<std::string> segment_symbols(const std::string& token, const MergeTable& table) {
  if (token.empty()) throw ContractError("apply_bpe: empty token");
  std::vector<std::string> syms = initial_symbols(token, table.eow);
  if (table.merges.empty()) return syms;
  for (;;) {
    int best_rank = -1;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      auto it = table.rank.find(syms[i] + " " + syms[i + 1]);
      if (it != table.rank.end() && (best_rank < 0 || it->second < best_rank))
        best_rank = it->second;
    }
    if (best_rank < 0) break;
    merge_in_place(syms, table.merges[best_rank].first, table.merges[best_rank].second);
  }
  return syms;
}

std::vector<std::string> apply_bpe(const std::string& token, const MergeTable& table) {
  std::vector<std::string> syms = segment_symbols(token, table);
  if (syms.size() >= 2 && syms.back() == table.eow) {
    syms.pop_back();
    syms.back() += table.eow;
  }
  return syms;
}

std::vector<std::string> apply_bpe_line(const std::vector<std::string>& tokens,
                                        const MergeTable& table) {
  std::vector<std::string> out;
  for (const auto& tok : tokens) {
    std::vector<std::string> units = apply_bpe(tok, table);
    out.insert(out.end(), units.begin(), units.end());
  }
  return out;
}

std::vector<std::string> undo_bpe(const std::vector<std::string>& subwords,
                                  const std::string& eow) {
  std::vector<std::string> words;
  std::string cur;
  for (const std::string& s : subwords) {
    if (s.size() >= eow.size() && s.compare(s.size() - eow.size(), eow.size(), eow) == 0) {
      cur += s.substr(0, s.size() - eow.size());
      if (!cur.empty()) words.push_back(cur);
      cur.clear();
    } else {
      cur += s;
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

}  // namespace tatn
