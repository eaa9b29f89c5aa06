#ifndef TATN_TRAINING_HPP
#define TATN_TRAINING_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "tatn/checkpoint.hpp"
#include "tatn/decoding.hpp"
#include "tatn/lexicon.hpp"
#include "tatn/metrics.hpp"
#include "tatn/rng.hpp"
#include "tatn/seq2seq.hpp"

namespace tatn {

template <typename T>
using ParamMap = std::map<std::string, Tensor<T>>;

template <typename T>
double global_grad_norm(const ParamMap<T>& grads) {
  double sq = 0;
  for (const auto& [name, g] : grads)
    for (std::int64_t i = 0; i < g.size(); ++i) {
      double v = static_cast<double>(g.data()[i]);
      sq += v * v;
    }
  return std::sqrt(sq);
}

template <typename T>
bool grads_finite(const ParamMap<T>& grads) {
  for (const auto& [name, g] : grads)
    if (!g.all_finite()) return false;
  return true;
}

struct StepStats {
  bool applied = true;
  double grad_norm = 0;
};

// Clips to the global norm, then p <- p - lr * g. Non-finite gradients skip
// the step.
template <typename T>
StepStats sgd_step(ParamMap<T>& params, const ParamMap<T>& grads, double lr, double clip_norm) {
  if (lr <= 0) throw ContractError("sgd: learning rate must be positive");
  StepStats st;
  if (!grads_finite(grads)) {
    st.applied = false;
    return st;
  }
  st.grad_norm = global_grad_norm(grads);
  double scale = (clip_norm > 0 && st.grad_norm > clip_norm) ? clip_norm / st.grad_norm : 1.0;
  for (auto& [name, p] : params) {
    const Tensor<T>& g = grads.at(name);
    for (std::int64_t i = 0; i < p.size(); ++i)
      p.data()[i] -= static_cast<T>(lr * scale * static_cast<double>(g.data()[i]));
  }
  return st;
}

template <typename T>
struct AdaDeltaState {
  ParamMap<T> eg2, ed2;  // running E[g^2], E[dx^2]
  double rho = 0.95;
  double eps = 1e-6;

  static AdaDeltaState zeros_like(const ParamMap<T>& params, double rho, double eps) {
    AdaDeltaState s;
    s.rho = rho;
    s.eps = eps;
    for (const auto& [name, p] : params) {
      s.eg2.emplace(name, Tensor<T>(p.rows(), p.cols()));
      s.ed2.emplace(name, Tensor<T>(p.rows(), p.cols()));
    }
    return s;
  }
};

// E[g2] <- rho E[g2] + (1-rho) g^2; dx = -sqrt(E[dx2]+eps)/sqrt(E[g2]+eps) g;
// E[dx2] <- rho E[dx2] + (1-rho) dx^2; p <- p + dx. Clips like sgd_step.
template <typename T>
StepStats adadelta_step(ParamMap<T>& params, const ParamMap<T>& grads, AdaDeltaState<T>& state,
                        double clip_norm = 0) {
  StepStats st;
  if (!grads_finite(grads)) {
    st.applied = false;
    return st;
  }
  st.grad_norm = global_grad_norm(grads);
  double scale = (clip_norm > 0 && st.grad_norm > clip_norm) ? clip_norm / st.grad_norm : 1.0;
  for (auto& [name, p] : params) {
    const Tensor<T>& g = grads.at(name);
    Tensor<T>& eg2 = state.eg2.at(name);
    Tensor<T>& ed2 = state.ed2.at(name);
    for (std::int64_t i = 0; i < p.size(); ++i) {
      double gi = scale * static_cast<double>(g.data()[i]);
      double e2 = state.rho * static_cast<double>(eg2.data()[i]) + (1 - state.rho) * gi * gi;
      double dx = -std::sqrt(static_cast<double>(ed2.data()[i]) + state.eps) /
                  std::sqrt(e2 + state.eps) * gi;
      eg2.data()[i] = static_cast<T>(e2);
      ed2.data()[i] = static_cast<T>(state.rho * static_cast<double>(ed2.data()[i]) +
                                     (1 - state.rho) * dx * dx);
      p.data()[i] += static_cast<T>(dx);
    }
  }
  return st;
}

// Partitions sentence indices into batches. Bucketed: stable sort by source
// length, slice consecutively, shuffle the batch order; otherwise shuffle
// the sentences and slice. Every index appears exactly once.
inline std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& lengths,
                                                          int batch_size, bool bucket,
                                                          std::mt19937_64& rng) {
  if (batch_size < 1) throw ContractError("batch size must be >= 1");
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  if (bucket) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  } else {
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    std::size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + i, order.begin() + end);
  }
  if (bucket) std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

using IdPair = std::pair<std::vector<int>, std::vector<int>>;

struct TrainConfig {
  ModelConfig model;
  std::string optimizer = "adadelta";  // or "sgd"
  double lr = 0.5;                     // sgd
  double clip_norm = 1.0;
  double rho = 0.95;
  double ada_eps = 1e-6;
  int batch_size = 80;
  int max_epochs = 10;
  std::uint64_t seed = 1;
  bool bucket = true;
  std::string select = "nll";  // dev selection metric: "nll" or "bleu"
  int beam = 10;               // dev bleu decoding
  bool use_candidates = false;
  int cand_frequent = 2000;
  int cand_k = 10;
  std::size_t cand_cap = 0;
};

struct TrainData {
  std::vector<IdPair> pairs;  // encoded, targets end with sentence-end
  // Token forms, parallel to `pairs`; required only with candidate lists.
  std::vector<std::vector<std::string>> src_tokens;
  std::vector<std::vector<std::string>> tgt_tokens;
};

struct TrainResult {
  double best_metric = 0;
  int best_epoch = 0;
  int skipped_steps = 0;
  double initial_dev_nll = 0;  // per token
};

// Mean per-token NLL over a corpus.
inline double dev_nll(const Model<float>& m, const std::vector<IdPair>& dev) {
  double total = 0;
  std::int64_t tokens = 0;
  for (const auto& [src, tgt] : dev) {
    total += m.encode_decode_loss(src, tgt).first;
    tokens += static_cast<std::int64_t>(tgt.size());
  }
  if (tokens == 0) throw ContractError("dev corpus has no tokens");
  return total / static_cast<double>(tokens);
}

inline double dev_bleu(const Model<float>& m, const std::vector<IdPair>& dev,
                       const Vocabulary& tgt_vocab, int beam) {
  std::vector<Sentence> hyps, refs;
  DecodeOptions opt;
  opt.beam = beam;
  for (const auto& [src, tgt] : dev) {
    Hypothesis h = beam_search(m, src, opt);
    hyps.push_back(decode(h.ids, tgt_vocab));
    refs.push_back(decode(tgt, tgt_vocab));
    if (hyps.back().empty()) hyps.back().push_back(kUnkTok);  // keep BLEU defined
  }
  return bleu(hyps, refs).bleu;
}

// Epoch loop: per-batch candidate lists (training mode), one optimizer step
// per batch on gradients normalized by the batch token count, dev evaluation
// each epoch, best checkpoint retained at checkpoint_path. Aborts when the
// dev NLL exceeds 10x its initial value.
inline TrainResult train(const TrainConfig& tc, const TrainData& data,
                         const std::vector<IdPair>& dev, const Vocabulary& tgt_vocab,
                         const Lexicon* lex, const std::string& checkpoint_path,
                         std::ostream& log) {
  if (data.pairs.empty()) throw ContractError("train: empty training corpus");
  if (dev.empty()) throw ContractError("train: empty dev corpus");
  bool select_bleu = tc.select == "bleu";
  if (!select_bleu && tc.select != "nll")
    throw ConfigError("unknown selection metric \"" + tc.select + "\"");
  if (tc.use_candidates && (!lex || data.src_tokens.size() != data.pairs.size() ||
                            data.tgt_tokens.size() != data.pairs.size()))
    throw ContractError("train: candidate lists need a lexicon and token-form corpora");

  Model<float> model = Model<float>::seeded(tc.model, tc.seed);
  AdaDeltaState<float> ada = AdaDeltaState<float>::zeros_like(model.params, tc.rho, tc.ada_eps);
  bool use_sgd = tc.optimizer == "sgd";
  if (!use_sgd && tc.optimizer != "adadelta")
    throw ConfigError("unknown optimizer \"" + tc.optimizer + "\"");

  std::vector<std::string> frequent;
  if (tc.use_candidates)
    frequent = most_frequent_words(data.tgt_tokens, static_cast<std::size_t>(tc.cand_frequent));

  std::mt19937_64 batch_rng = make_rng(tc.seed, "batching");
  std::vector<std::size_t> lengths(data.pairs.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) lengths[i] = data.pairs[i].first.size();

  TrainResult result;
  result.initial_dev_nll = dev_nll(model, dev);
  double best = select_bleu ? -1.0 : std::numeric_limits<double>::infinity();
  char line[160];

  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    auto batches = make_batches(lengths, tc.batch_size, tc.bucket, batch_rng);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      Tape<float> tape;
      auto nodes = model.make_nodes(tape);

      const std::vector<int>* cand = nullptr;
      std::vector<int> cand_ids;
      if (tc.use_candidates) {
        std::vector<std::vector<std::string>> bsrc, btgt;
        for (std::size_t idx : batches[bi]) {
          bsrc.push_back(data.src_tokens[idx]);
          btgt.push_back(data.tgt_tokens[idx]);
        }
        cand_ids = build_candidate_list(bsrc, *lex, frequent, tc.cand_k, &btgt, tgt_vocab,
                                        tc.cand_cap)
                       .ids;
        cand = &cand_ids;
      }

      NodeId total = -1;
      std::int64_t tokens = 0;
      for (std::size_t idx : batches[bi]) {
        auto ln = model.loss(tape, nodes, data.pairs[idx].first, data.pairs[idx].second, cand);
        total = total < 0 ? ln.nll : ad::add(tape, total, ln.nll);
        tokens += ln.steps;
      }
      double batch_nll = static_cast<double>(tape.value(total)(0, 0)) /
                         static_cast<double>(tokens);
      NodeId scaled = ad::scalar_mul(tape, total, 1.0f / static_cast<float>(tokens));
      std::vector<Tensor<float>> all_grads = tape.backward(scaled);
      ParamMap<float> grads;
      for (const auto& [name, leaf] : nodes.leaf) grads.emplace(name, all_grads[leaf]);

      StepStats st = use_sgd ? sgd_step(model.params, grads, tc.lr, tc.clip_norm)
                             : adadelta_step(model.params, grads, ada, tc.clip_norm);
      if (!st.applied) ++result.skipped_steps;

      std::snprintf(line, sizeof line, "epoch=%d batch=%zu nll=%.6f", epoch, bi + 1, batch_nll);
      log << line << '\n';
    }

    double nll = dev_nll(model, dev);
    double metric = select_bleu ? dev_bleu(model, dev, tgt_vocab, tc.beam) : nll;
    std::snprintf(line, sizeof line, "dev epoch=%d metric=%.6f", epoch, metric);
    log << line << '\n';
    if (nll > 10.0 * result.initial_dev_nll)
      throw NumericError("training diverged: dev nll " + std::to_string(nll) +
                         " exceeds 10x the initial " + std::to_string(result.initial_dev_nll));
    bool improved = select_bleu ? metric > best : metric < best;
    if (improved) {
      best = metric;
      result.best_metric = metric;
      result.best_epoch = epoch;
      if (!checkpoint_path.empty()) save_checkpoint(checkpoint_path, model, tc.seed);
    }
  }
  return result;
}

}  // namespace tatn

#endif
