#ifndef TATN_DECODING_HPP
#define TATN_DECODING_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "tatn/lexicon.hpp"
#include "tatn/seq2seq.hpp"

namespace tatn {

struct Hypothesis {
  std::vector<int> ids;  // emitted tokens; ends with sentence-end iff finished
  double logprob = 0;    // sum of chosen per-step log posteriors
  AttnMatrix attn;       // one row per emitted token
  bool finished = false;
};

struct DecodeOptions {
  int beam = 10;
  int max_len = 0;  // 0 means 2 * source length + 5
  bool len_norm = true;
  const std::vector<int>* candidates = nullptr;  // sorted target ids
};

namespace detail {

inline double final_score(const Hypothesis& h, bool len_norm) {
  if (!len_norm) return h.logprob;
  return h.logprob / static_cast<double>(std::max<std::size_t>(h.ids.size(), 1));
}

inline bool better_final(const Hypothesis& a, const Hypothesis& b, bool len_norm) {
  double sa = final_score(a, len_norm), sb = final_score(b, len_norm);
  if (sa != sb) return sa > sb;
  return a.ids < b.ids;  // ties: lexicographically lower token-id sequence
}

}  // namespace detail

// Beam search over one or more models with identical vocabularies; the
// per-step posterior of an ensemble is the arithmetic mean of the member
// posteriors and the dumped attention is the member mean. Each member (and
// each beam path) carries its own decoder and attention state.
inline Hypothesis ensemble_decode(const std::vector<const Model<float>*>& models,
                                  const std::vector<int>& src_ids, const DecodeOptions& opt) {
  if (models.empty()) throw ContractError("ensemble_decode: no models");
  if (opt.beam < 1) throw ContractError("ensemble_decode: beam must be >= 1");
  const ModelConfig& cfg0 = models[0]->cfg;
  for (const Model<float>* m : models) {
    if (m->cfg.src_vocab != cfg0.src_vocab || m->cfg.tgt_vocab != cfg0.tgt_vocab)
      throw ConfigError("ensemble members disagree on vocabulary sizes");
    if (m->cfg.variant != cfg0.variant)
      throw ConfigError("ensemble members disagree on the attention variant");
  }
  std::size_t nm = models.size();
  int max_len = opt.max_len > 0 ? opt.max_len
                                : 2 * static_cast<int>(src_ids.size()) + 5;

  // One tape per member, shared across all beam paths of this sentence.
  std::vector<std::unique_ptr<Tape<float>>> tapes;
  std::vector<typename Model<float>::Nodes> nodes;
  std::vector<typename Model<float>::EncCtx> ctxs;
  for (const Model<float>* m : models) {
    tapes.push_back(std::make_unique<Tape<float>>());
    nodes.push_back(m->make_nodes(*tapes.back()));
    ctxs.push_back(m->encode(*tapes.back(), nodes.back(), src_ids));
  }

  struct Beam {
    Hypothesis hyp;
    std::vector<NodeId> s;        // per member
    std::vector<AttnState> st;    // per member
  };
  Beam root;
  root.s.resize(nm);
  root.st.resize(nm);
  for (std::size_t i = 0; i < nm; ++i) {
    root.s[i] = ctxs[i].s0;
    root.st[i] = models[i]->init_state(*tapes[i], nodes[i], ctxs[i].l);
  }
  std::vector<Beam> live{std::move(root)};
  std::vector<Hypothesis> done;

  for (int step = 0; step < max_len && !live.empty(); ++step) {
    struct Expansion {
      std::size_t parent;
      int token;       // vocabulary id
      double score;    // accumulated logprob
      double step_lp;  // this step's log posterior
    };
    std::vector<Expansion> exps;
    std::vector<std::vector<NodeId>> next_s(live.size());
    std::vector<std::vector<AttnState>> next_st(live.size());
    std::vector<std::vector<double>> mean_alpha(live.size());

    for (std::size_t b = 0; b < live.size(); ++b) {
      Beam& hyp = live[b];
      int fed = hyp.hyp.ids.empty() ? kBosId : hyp.hyp.ids.back();
      std::vector<double> combined;  // mean posterior (ensemble) or log-probs
      next_s[b].resize(nm);
      next_st[b] = hyp.st;
      for (std::size_t i = 0; i < nm; ++i) {
        auto so = models[i]->step(*tapes[i], nodes[i], ctxs[i], next_st[b][i], hyp.s[i], fed,
                                  opt.candidates);
        next_s[b][i] = so.s_next;
        const Tensor<float>& lp = tapes[i]->value(so.log_probs);
        const Tensor<float>& al = tapes[i]->value(so.alpha);
        if (combined.empty()) combined.assign(lp.size(), 0.0);
        if (mean_alpha[b].empty()) mean_alpha[b].assign(al.size(), 0.0);
        for (std::int64_t c = 0; c < lp.size(); ++c)
          combined[c] += nm == 1 ? static_cast<double>(lp.data()[c])
                                 : std::exp(static_cast<double>(lp.data()[c])) /
                                       static_cast<double>(nm);
        for (std::int64_t j = 0; j < al.size(); ++j)
          mean_alpha[b][j] += static_cast<double>(al.data()[j]) / static_cast<double>(nm);
      }
      for (std::size_t c = 0; c < combined.size(); ++c) {
        double lp = nm == 1 ? combined[c] : std::log(std::max(combined[c], 1e-300));
        int tok = opt.candidates ? (*opt.candidates)[c] : static_cast<int>(c);
        exps.push_back({b, tok, hyp.hyp.logprob + lp, lp});
      }
    }

    std::sort(exps.begin(), exps.end(), [&](const Expansion& a, const Expansion& b) {
      if (a.score != b.score) return a.score > b.score;
      const auto& ia = live[a.parent].hyp.ids;
      const auto& ib = live[b.parent].hyp.ids;
      if (ia != ib) return ia < ib;
      return a.token < b.token;
    });

    std::vector<Beam> next;
    int slots = 0;  // finished paths occupy beam slots too
    for (const Expansion& e : exps) {
      if (slots >= opt.beam) break;
      ++slots;
      Beam nb;
      nb.hyp = live[e.parent].hyp;
      nb.hyp.ids.push_back(e.token);
      nb.hyp.logprob = e.score;
      nb.hyp.attn.push_back(mean_alpha[e.parent]);
      nb.s = next_s[e.parent];
      nb.st = next_st[e.parent];
      if (e.token == kEosId) {
        nb.hyp.finished = true;
        done.push_back(std::move(nb.hyp));
        continue;
      }
      next.push_back(std::move(nb));
    }
    live = std::move(next);
  }

  if (done.empty()) {
    if (live.empty()) throw NumericError("beam search produced no hypotheses");
    std::size_t best = 0;
    for (std::size_t b = 1; b < live.size(); ++b)
      if (detail::better_final(live[b].hyp, live[best].hyp, opt.len_norm)) best = b;
    return live[best].hyp;  // truncated at max_len, finished == false
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < done.size(); ++i)
    if (detail::better_final(done[i], done[best], opt.len_norm)) best = i;
  return done[best];
}

inline Hypothesis beam_search(const Model<float>& model, const std::vector<int>& src_ids,
                              const DecodeOptions& opt) {
  return ensemble_decode({&model}, src_ids, opt);
}

// Substitutes each UNK output token using the attention row's argmax source
// position: the lexicon's best translation of that source word, or the word
// itself when the lexicon has no entry. Positions past the real source
// tokens (the appended sentence-end) are excluded from the argmax.
inline std::vector<std::string> replace_unk(const std::vector<std::string>& tokens,
                                            const AttnMatrix& attn,
                                            const std::vector<std::string>& src_tokens,
                                            const Lexicon& lex) {
  if (attn.size() < tokens.size())
    throw ContractError("replace_unk: attention rows do not cover the output tokens");
  std::vector<std::string> out = tokens;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (out[t] != kUnkTok) continue;
    if (src_tokens.empty()) continue;
    std::size_t limit = std::min(attn[t].size(), src_tokens.size());
    int j = 0;
    for (std::size_t c = 1; c < limit; ++c)
      if (attn[t][c] > attn[t][j]) j = static_cast<int>(c);
    std::vector<std::string> tr = top_k_translations(src_tokens[j], lex, 1);
    out[t] = tr.empty() ? src_tokens[j] : tr[0];
  }
  return out;
}

// Attention dump: per sentence a block "SENT <n> T=<T> L=<l>" followed by T
// lines of l six-significant-digit weights; blocks are blank-line separated.
inline void write_attention_dump(std::ostream& os, const std::vector<AttnMatrix>& mats) {
  char buf[32];
  for (std::size_t n = 0; n < mats.size(); ++n) {
    if (n) os << '\n';
    const AttnMatrix& m = mats[n];
    std::size_t l = m.empty() ? 0 : m[0].size();
    os << "SENT " << n << " T=" << m.size() << " L=" << l << '\n';
    for (const auto& row : m) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.6g", row[j]);
        os << (j ? " " : "") << buf;
      }
      os << '\n';
    }
  }
}

}  // namespace tatn

#endif
