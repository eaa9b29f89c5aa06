#ifndef TATN_METRICS_HPP
#define TATN_METRICS_HPP

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tatn/common.hpp"

namespace tatn {

using Sentence = std::vector<std::string>;

struct BleuReport {
  double bleu = 0;  // 0..100
  double bp = 1;
  std::array<double, 4> precisions{};  // n = 1..4
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;
};

// Corpus-level BLEU with clipped n-gram precisions up to max_n, geometric
// mean, no smoothing; BP = 1 when the hypothesis corpus is longer than the
// reference, else exp(1 - R/H). Single reference per hypothesis.
BleuReport bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs,
                int max_n = 4);

// Word-level Levenshtein distance (unit costs).
int levenshtein(const Sentence& a, const Sentence& b);

// Translation edit rate: greedy block shifting (each shift costs one edit;
// the shift with the largest distance reduction is applied, ties prefer the
// smallest block, then the leftmost origin, then the lowest destination),
// capped at 10 shifts, plus the remaining Levenshtein distance.
int ter_edits(const Sentence& hyp, const Sentence& ref);
double ter(const Sentence& hyp, const Sentence& ref);  // edits per reference word

// Corpus TER on the 0..100 scale: total edits / total reference words * 100.
double corpus_ter(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs);

// (corpus TER% - corpus BLEU%) / 2.
double tb(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs);

using AlignmentSet = std::set<std::pair<int, int>>;  // (source pos, target pos)

struct Prf {
  double precision = 0, recall = 0, f1 = 0;
};

// P = |M∩G|/|M| (1 when M empty), R = |M∩G|/|G| (1 when G empty),
// F1 = 2PR/(P+R) (0 when P+R = 0).
Prf alignment_prf(const AlignmentSet& machine, const AlignmentSet& gold);

// Pharaoh format: per line, space-separated "i-j" pairs (0-based source-target
// indices); a blank line is an empty alignment.
std::vector<AlignmentSet> read_alignments(const std::string& path);
void write_alignments(const std::string& path, const std::vector<AlignmentSet>& sets);

struct RepetitionStats {
  std::int64_t count = 0;   // maximal repeated n-grams over the corpus
  double avg_length = 0;    // mean n over them, 0 when none
};

// A repetition is an n-gram (n >= 2) with at least two non-overlapping
// occurrences in a sentence, counted only when no containing (n+1)-gram also
// repeats.
RepetitionStats repetition_stats(const std::vector<Sentence>& hyps);

}  // namespace tatn

#endif
