#include "tatn/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_map>

namespace tatn {

namespace {

void sort_row(std::vector<std::pair<std::string, double>>& row) {
  std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
}

}  // namespace

void Lexicon::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "#lex v1\n";
  char buf[64];
  for (const auto& [src, row] : t)
    for (const auto& [tgt, p] : row) {
      std::snprintf(buf, sizeof buf, "%.17g", p);
      out << src << '\t' << tgt << '\t' << buf << '\n';
    }
  if (!out) throw DataError("write failed: " + path);
}

Lexicon Lexicon::load(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0] != "#lex v1")
    throw DataError(path + ": missing \"#lex v1\" header");
  Lexicon lex;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::size_t t1 = lines[i].find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos : lines[i].find('\t', t1 + 1);
    if (t2 == std::string::npos)
      throw DataError(path + ":" + std::to_string(i + 1) + ": expected src<TAB>tgt<TAB>prob");
    std::string src = lines[i].substr(0, t1);
    std::string tgt = lines[i].substr(t1 + 1, t2 - t1 - 1);
    double p = 0;
    try {
      p = std::stod(lines[i].substr(t2 + 1));
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(i + 1) + ": bad probability");
    }
    lex.t[src].emplace_back(tgt, p);
  }
  for (auto& [src, row] : lex.t) sort_row(row);
  return lex;
}

Lexicon train_model1(const std::vector<std::pair<std::vector<std::string>,
                                                 std::vector<std::string>>>& bitext,
                     int iterations, bool use_null) {
  if (iterations < 1) throw ContractError("model1 iterations must be >= 1");
  if (bitext.empty()) throw ContractError("model1 needs a non-empty bitext");

  Lexicon lex;
  std::vector<std::pair<std::vector<std::string>, const std::vector<std::string>*>> pairs;
  for (const auto& [src, tgt] : bitext) {
    if (src.empty() || tgt.empty()) {
      ++lex.skipped_pairs;
      continue;
    }
    std::vector<std::string> s = src;
    if (use_null) s.push_back(kNullTok);
    pairs.emplace_back(std::move(s), &tgt);
  }
  if (pairs.empty()) throw ContractError("model1: every pair had an empty side");

  // t[src][tgt], kept as ordered maps for deterministic iteration.
  std::map<std::string, std::map<std::string, double>> t;
  for (const auto& [src, tgt] : pairs)
    for (const auto& s : src)
      for (const auto& w : *tgt) t[s][w] = 1.0;
  for (auto& [s, row] : t) {
    double u = 1.0 / static_cast<double>(row.size());
    for (auto& [w, p] : row) p = u;
  }

  for (int it = 0; it < iterations; ++it) {
    std::map<std::string, std::map<std::string, double>> counts;
    for (const auto& [src, tgt] : pairs) {
      for (const auto& w : *tgt) {
        double z = 0;
        for (const auto& s : src) z += t[s][w];
        if (z <= 0) continue;
        for (const auto& s : src) counts[s][w] += t[s][w] / z;
      }
    }
    for (auto& [s, row] : counts) {
      double total = 0;
      for (const auto& [w, c] : row) total += c;
      if (total <= 0) continue;
      auto& trow = t[s];
      for (auto& [w, p] : trow) p = 0;
      for (const auto& [w, c] : row) trow[w] = c / total;
    }
  }

  for (auto& [s, row] : t) {
    std::vector<std::pair<std::string, double>> kept;
    double total = 0;
    for (const auto& [w, p] : row)
      if (p >= 1e-6) {
        kept.emplace_back(w, p);
        total += p;
      }
    if (kept.empty() || total <= 0) continue;
    for (auto& [w, p] : kept) p /= total;
    sort_row(kept);
    lex.t[s] = std::move(kept);
  }
  return lex;
}

double model1_log_likelihood(const std::vector<std::pair<std::vector<std::string>,
                                                         std::vector<std::string>>>& bitext,
                             const Lexicon& lex, bool use_null) {
  double ll = 0;
  for (const auto& [src0, tgt] : bitext) {
    if (src0.empty() || tgt.empty()) continue;
    std::vector<std::string> src = src0;
    if (use_null) src.push_back(kNullTok);
    for (const auto& w : tgt) {
      double z = 0;
      for (const auto& s : src) {
        auto it = lex.t.find(s);
        if (it == lex.t.end()) continue;
        for (const auto& [cand, p] : it->second)
          if (cand == w) z += p;
      }
      ll += std::log(std::max(z / static_cast<double>(src.size()), 1e-300));
    }
  }
  return ll;
}

std::vector<std::string> top_k_translations(const std::string& src, const Lexicon& lex, int k) {
  if (k < 1) throw ContractError("top_k_translations: k must be >= 1");
  auto it = lex.t.find(src);
  if (it == lex.t.end()) return {};
  std::vector<std::string> out;
  for (const auto& [tgt, p] : it->second) {
    if (static_cast<int>(out.size()) >= k) break;
    out.push_back(tgt);
  }
  return out;
}

std::vector<std::string> most_frequent_words(const std::vector<std::vector<std::string>>& corpus,
                                             std::size_t m) {
  std::map<std::string, std::int64_t> freq;
  for (const auto& sent : corpus)
    for (const auto& tok : sent) ++freq[tok];
  std::vector<std::pair<std::string, std::int64_t>> items(freq.begin(), freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (const auto& [w, c] : items) {
    if (out.size() >= m) break;
    out.push_back(w);
  }
  return out;
}

CandidateList build_candidate_list(const std::vector<std::vector<std::string>>& src_batch,
                                   const Lexicon& lex, const std::vector<std::string>& frequent,
                                   int k, const std::vector<std::vector<std::string>>* train_targets,
                                   const Vocabulary& tgt_vocab, std::size_t cap) {
  std::set<int> must = {kEosId, kUnkId};
  if (train_targets)
    for (const auto& sent : *train_targets)
      for (const auto& tok : sent) must.insert(tgt_vocab.id(tok));

  // Optional words in priority order: frequent list first, then batch-source
  // translations; only these are dropped when the cap binds.
  std::vector<int> optional;
  std::set<int> seen = must;
  auto offer = [&](const std::string& w) {
    if (!tgt_vocab.contains(w)) return;
    int id = tgt_vocab.id(w);
    if (seen.insert(id).second) optional.push_back(id);
  };
  for (const auto& w : frequent) offer(w);
  for (const auto& sent : src_batch)
    for (const auto& tok : sent)
      for (const auto& tr : top_k_translations(tok, lex, k)) offer(tr);

  CandidateList out;
  out.ids.assign(must.begin(), must.end());
  for (int id : optional) {
    if (cap && out.ids.size() >= cap) break;
    out.ids.push_back(id);
  }
  std::sort(out.ids.begin(), out.ids.end());
  return out;
}

}  // namespace tatn
