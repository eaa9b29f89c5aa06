#include "tatn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "tatn/corpus.hpp"

namespace tatn {

namespace {

std::map<std::vector<std::string>, std::int64_t> ngram_counts(const Sentence& s, int n) {
  std::map<std::vector<std::string>, std::int64_t> out;
  if (static_cast<int>(s.size()) < n) return out;
  for (std::size_t i = 0; i + n <= s.size(); ++i)
    ++out[std::vector<std::string>(s.begin() + i, s.begin() + i + n)];
  return out;
}

}  // namespace

BleuReport bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs, int max_n) {
  if (hyps.empty() || hyps.size() != refs.size())
    throw ContractError("bleu: need equal, non-zero hypothesis and reference counts");
  if (max_n < 1 || max_n > 4) throw ContractError("bleu: max_n must be in 1..4");

  BleuReport rep;
  std::array<std::int64_t, 4> match{}, total{};
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    rep.hyp_len += static_cast<std::int64_t>(hyps[i].size());
    rep.ref_len += static_cast<std::int64_t>(refs[i].size());
    for (int n = 1; n <= max_n; ++n) {
      auto hc = ngram_counts(hyps[i], n);
      auto rc = ngram_counts(refs[i], n);
      for (const auto& [g, c] : hc) {
        total[n - 1] += c;
        auto it = rc.find(g);
        if (it != rc.end()) match[n - 1] += std::min(c, it->second);
      }
    }
  }

  double log_prec_sum = 0;
  bool zero = false;
  for (int n = 1; n <= max_n; ++n) {
    double p = total[n - 1] > 0
                   ? static_cast<double>(match[n - 1]) / static_cast<double>(total[n - 1])
                   : 0.0;
    rep.precisions[n - 1] = p;
    if (p <= 0)
      zero = true;
    else
      log_prec_sum += std::log(p);
  }
  rep.bp = rep.hyp_len > rep.ref_len
               ? 1.0
               : std::exp(1.0 - static_cast<double>(rep.ref_len) /
                                    static_cast<double>(std::max<std::int64_t>(rep.hyp_len, 1)));
  rep.bleu = zero ? 0.0 : 100.0 * rep.bp * std::exp(log_prec_sum / max_n);
  return rep;
}

int levenshtein(const Sentence& a, const Sentence& b) {
  std::size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

namespace {

// Moves hyp[start, start+len) so the block begins at position dest of the
// remaining sequence.
Sentence apply_shift(const Sentence& hyp, std::size_t start, std::size_t len, std::size_t dest) {
  Sentence rest;
  rest.reserve(hyp.size());
  rest.insert(rest.end(), hyp.begin(), hyp.begin() + start);
  rest.insert(rest.end(), hyp.begin() + start + len, hyp.end());
  Sentence out;
  out.reserve(hyp.size());
  out.insert(out.end(), rest.begin(), rest.begin() + dest);
  out.insert(out.end(), hyp.begin() + start, hyp.begin() + start + len);
  out.insert(out.end(), rest.begin() + dest, rest.end());
  return out;
}

}  // namespace

int ter_edits(const Sentence& hyp, const Sentence& ref) {
  if (ref.empty()) throw ContractError("ter: empty reference");
  Sentence cur = hyp;
  int dist = levenshtein(cur, ref);
  int shifts = 0;
  while (shifts < 10 && dist > 0 && cur.size() > 1) {
    int best_gain = 0;
    std::size_t best_len = 0, best_start = 0, best_dest = 0;
    Sentence best_sent;
    std::size_t L = cur.size();
    for (std::size_t len = 1; len < L; ++len) {
      for (std::size_t start = 0; start + len <= L; ++start) {
        for (std::size_t dest = 0; dest <= L - len; ++dest) {
          if (dest == start) continue;
          Sentence cand = apply_shift(cur, start, len, dest);
          int gain = dist - levenshtein(cand, ref);
          // Ties prefer the smallest block, then leftmost start, then lowest
          // destination; the len/start/dest loop order encodes that, so only
          // a strictly larger gain replaces the incumbent.
          if (gain > best_gain) {
            best_gain = gain;
            best_len = len;
            best_start = start;
            best_dest = dest;
            best_sent = std::move(cand);
          }
        }
      }
    }
    (void)best_len;
    (void)best_start;
    (void)best_dest;
    if (best_gain < 1) break;
    cur = std::move(best_sent);
    dist -= best_gain;
    ++shifts;
  }
  return shifts + dist;
}

double ter(const Sentence& hyp, const Sentence& ref) {
  return static_cast<double>(ter_edits(hyp, ref)) / static_cast<double>(ref.size());
}

double corpus_ter(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs) {
  if (hyps.empty() || hyps.size() != refs.size())
    throw ContractError("ter: need equal, non-zero hypothesis and reference counts");
  std::int64_t edits = 0, words = 0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    edits += ter_edits(hyps[i], refs[i]);
    words += static_cast<std::int64_t>(refs[i].size());
  }
  return 100.0 * static_cast<double>(edits) / static_cast<double>(words);
}

double tb(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs) {
  return (corpus_ter(hyps, refs) - bleu(hyps, refs).bleu) / 2.0;
}

Prf alignment_prf(const AlignmentSet& machine, const AlignmentSet& gold) {
  std::size_t inter = 0;
  for (const auto& link : machine) inter += gold.count(link);
  Prf out;
  out.precision = machine.empty() ? 1.0 : static_cast<double>(inter) / machine.size();
  out.recall = gold.empty() ? 1.0 : static_cast<double>(inter) / gold.size();
  out.f1 = (out.precision + out.recall) > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

std::vector<AlignmentSet> read_alignments(const std::string& path) {
  std::vector<AlignmentSet> out;
  for (const std::string& line : read_lines(path)) {
    AlignmentSet set;
    for (const std::string& tok : split_tokens(line)) {
      std::size_t dash = tok.find('-');
      if (dash == std::string::npos || dash == 0 || dash + 1 == tok.size())
        throw DataError(path + ": bad alignment link \"" + tok + "\"");
      try {
        set.emplace(std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1)));
      } catch (const std::exception&) {
        throw DataError(path + ": bad alignment link \"" + tok + "\"");
      }
    }
    out.push_back(std::move(set));
  }
  return out;
}

void write_alignments(const std::string& path, const std::vector<AlignmentSet>& sets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  for (const AlignmentSet& set : sets) {
    bool first = true;
    for (const auto& [i, j] : set) {
      if (!first) out << ' ';
      out << i << '-' << j;
      first = false;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

namespace {

// Largest set of non-overlapping occurrences of a fixed-length pattern:
// greedy left-to-right is optimal.
int nonoverlapping_occurrences(const Sentence& s, const Sentence& g) {
  int count = 0;
  std::size_t i = 0, n = g.size();
  while (i + n <= s.size()) {
    if (std::equal(g.begin(), g.end(), s.begin() + i)) {
      ++count;
      i += n;
    } else {
      ++i;
    }
  }
  return count;
}

}  // namespace

RepetitionStats repetition_stats(const std::vector<Sentence>& hyps) {
  RepetitionStats stats;
  std::int64_t total_len = 0;
  for (const Sentence& s : hyps) {
    std::size_t L = s.size();
    // Repeated n-grams per length.
    std::map<std::size_t, std::set<Sentence>> repeated;
    for (std::size_t n = 2; 2 * n <= L; ++n) {
      std::set<Sentence> seen;
      for (std::size_t i = 0; i + n <= L; ++i) {
        Sentence g(s.begin() + i, s.begin() + i + n);
        if (!seen.insert(g).second) continue;
        if (nonoverlapping_occurrences(s, g) >= 2) repeated[n].insert(std::move(g));
      }
    }
    for (const auto& [n, grams] : repeated) {
      auto longer = repeated.find(n + 1);
      for (const Sentence& g : grams) {
        bool extended = false;
        if (longer != repeated.end()) {
          for (const Sentence& h : longer->second) {
            bool prefix = std::equal(g.begin(), g.end(), h.begin());
            bool suffix = std::equal(g.begin(), g.end(), h.begin() + 1);
            if (prefix || suffix) {
              extended = true;
              break;
            }
          }
        }
        if (!extended) {
          ++stats.count;
          total_len += static_cast<std::int64_t>(n);
        }
      }
    }
  }
  if (stats.count > 0) stats.avg_length = static_cast<double>(total_len) / stats.count;
  return stats;
}

}  // namespace tatn
