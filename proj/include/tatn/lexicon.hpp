#ifndef TATN_LEXICON_HPP
#define TATN_LEXICON_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tatn/common.hpp"
#include "tatn/corpus.hpp"

namespace tatn {

struct Lexicon {
  // Per source word: (target word, probability), descending probability with
  // lexicographic target tie-break; rows sum to 1.
  std::map<std::string, std::vector<std::pair<std::string, double>>> t;
  std::size_t skipped_pairs = 0;

  void save(const std::string& path) const;
  static Lexicon load(const std::string& path);
};

// IBM Model-1 EM over sentence pairs. Initialization is uniform over the
// targets cooccurring with each source word; pairs with an empty side are
// skipped and counted. Probabilities below 1e-6 are pruned after the final
// iteration and rows renormalized.
Lexicon train_model1(const std::vector<std::pair<std::vector<std::string>,
                                                 std::vector<std::string>>>& bitext,
                     int iterations, bool use_null);

// Per-iteration training log-likelihood, exposed so monotonicity is testable.
double model1_log_likelihood(const std::vector<std::pair<std::vector<std::string>,
                                                         std::vector<std::string>>>& bitext,
                             const Lexicon& lex, bool use_null);

// The k most probable targets, fewer if the row is shorter; empty when the
// source word is unknown.
std::vector<std::string> top_k_translations(const std::string& src, const Lexicon& lex, int k);

struct CandidateList {
  std::vector<int> ids;  // sorted, unique
};

// Union of the frequent-target list, top-k translations of every batch source
// token, and (in training mode) all batch target tokens; sentence-end and UNK
// are always present. cap = 0 means unlimited; otherwise frequent words and
// translations are dropped (in that priority) to fit, never specials or
// target tokens.
CandidateList build_candidate_list(const std::vector<std::vector<std::string>>& src_batch,
                                   const Lexicon& lex, const std::vector<std::string>& frequent,
                                   int k, const std::vector<std::vector<std::string>>* train_targets,
                                   const Vocabulary& tgt_vocab, std::size_t cap = 0);

// The M most frequent in-vocabulary target words of a corpus (the "frequent"
// input above), by descending count then lexicographic.
std::vector<std::string> most_frequent_words(const std::vector<std::vector<std::string>>& corpus,
                                             std::size_t m);

inline constexpr const char* kNullTok = "<null>";

}  // namespace tatn

#endif
