#ifndef TATN_SEQ2SEQ_HPP
#define TATN_SEQ2SEQ_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tatn/attention.hpp"
#include "tatn/corpus.hpp"
#include "tatn/layers.hpp"
#include "tatn/metrics.hpp"
#include "tatn/rng.hpp"
#include "tatn/tape.hpp"

namespace tatn {

struct ModelConfig {
  int src_vocab = 0;
  int tgt_vocab = 0;
  int emb = 32;
  int hidden = 64;
  int attn = 64;
  int readout = 64;
  int cov_dim = 16;
  double local_d = 10;     // local-attention window half-width
  int history_window = 0;  // 0 = unlimited accumulation
  Variant variant = Variant::Global;
};

// Tensor names and shapes, in initialization order. Names are the stable
// save/load identity of every parameter.
inline std::vector<std::pair<std::string, std::pair<int, int>>> param_shapes(
    const ModelConfig& c) {
  std::vector<std::pair<std::string, std::pair<int, int>>> s;
  auto gru = [&s](const std::string& prefix, int in, int hid) {
    for (const char* gate : {"z", "r", "h"}) {
      s.push_back({prefix + ".W_" + gate, {in, hid}});
      s.push_back({prefix + ".U_" + gate, {hid, hid}});
      s.push_back({prefix + ".b_" + gate, {1, hid}});
    }
  };
  s.push_back({"src_emb", {c.src_vocab, c.emb}});
  s.push_back({"tgt_emb", {c.tgt_vocab, c.emb}});
  gru("enc_fwd", c.emb, c.hidden);
  gru("enc_bwd", c.emb, c.hidden);
  gru("dec", c.emb + 2 * c.hidden, c.hidden);
  s.push_back({"init.W", {c.hidden, c.hidden}});
  s.push_back({"attn.W_a", {c.hidden, c.attn}});
  s.push_back({"attn.U_a", {2 * c.hidden, c.attn}});
  s.push_back({"attn.v_a", {c.attn, 1}});
  if (c.variant == Variant::Coverage) {
    gru("cov", 1 + c.emb, c.cov_dim);
    s.push_back({"cov.U", {c.cov_dim, c.attn}});
  }
  if (c.variant == Variant::Local) {
    s.push_back({"local.W_p", {c.hidden, c.attn}});
    s.push_back({"local.v_p", {c.attn, 1}});
  }
  s.push_back({"read.W_s", {c.hidden, c.readout}});
  s.push_back({"read.W_y", {c.emb, c.readout}});
  s.push_back({"read.W_c", {2 * c.hidden, c.readout}});
  s.push_back({"read.b", {1, c.readout}});
  s.push_back({"read.W_o", {c.tgt_vocab, c.readout}});
  s.push_back({"read.b_o", {c.tgt_vocab, 1}});
  return s;
}

template <typename T>
std::map<std::string, Tensor<T>> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.src_vocab < kNumSpecials || cfg.tgt_vocab < kNumSpecials)
    throw ConfigError("model vocab sizes must cover the special tokens");
  std::mt19937_64 rng = make_rng(seed, "init");
  std::uniform_real_distribution<double> dist(-0.08, 0.08);
  std::map<std::string, Tensor<T>> params;
  for (const auto& [name, shape] : param_shapes(cfg)) {
    Tensor<T> t(shape.first, shape.second);
    for (std::int64_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<T>(dist(rng));
    params.emplace(name, std::move(t));
  }
  return params;
}

using AttnMatrix = std::vector<std::vector<double>>;

template <typename T>
struct Model {
  ModelConfig cfg;
  std::map<std::string, Tensor<T>> params;

  Model() = default;
  Model(ModelConfig c, std::map<std::string, Tensor<T>> p) : cfg(c), params(std::move(p)) {
    audit_shapes();
  }
  static Model seeded(ModelConfig c, std::uint64_t seed) {
    return Model(c, init_params<T>(c, seed));
  }

  void audit_shapes() const {
    auto expected = param_shapes(cfg);
    if (expected.size() != params.size())
      throw DataError("parameter count mismatch: expected " + std::to_string(expected.size()) +
                      ", got " + std::to_string(params.size()));
    for (const auto& [name, shape] : expected) {
      auto it = params.find(name);
      if (it == params.end()) throw DataError("missing parameter tensor \"" + name + "\"");
      if (it->second.rows() != shape.first || it->second.cols() != shape.second)
        throw DataError("parameter \"" + name + "\" has shape " + it->second.shape_str() +
                        ", expected " + std::to_string(shape.first) + "x" +
                        std::to_string(shape.second));
    }
  }

  // Leaf ids for every parameter plus shared constants, on one tape. One
  // Nodes set serves a whole batch.
  struct Nodes {
    std::map<std::string, NodeId> leaf;
    GruNodes enc_fwd, enc_bwd, dec, cov;
    AttnNodes attn;
    ReadoutNodes read;
    NodeId init_W = -1;
    NodeId zero_h = -1, ones_h = -1, ones_cov = -1;
  };

  Nodes make_nodes(Tape<T>& t) const {
    std::map<std::string, NodeId> leaf;
    for (const auto& [name, tensor] : params) leaf[name] = t.leaf(tensor);
    return wire_nodes(t, cfg, std::move(leaf));
  }

  // Assembles the node set from existing parameter leaves (one per
  // param_shapes entry); gradient checks drive this with their own leaves.
  static Nodes wire_nodes(Tape<T>& t, const ModelConfig& cfg, std::map<std::string, NodeId> leaf) {
    Nodes n;
    n.leaf = std::move(leaf);
    auto at = [&n](const std::string& name) { return n.leaf.at(name); };
    auto gru = [&at](const std::string& p) {
      return GruNodes{at(p + ".W_z"), at(p + ".U_z"), at(p + ".b_z"),
                      at(p + ".W_r"), at(p + ".U_r"), at(p + ".b_r"),
                      at(p + ".W_h"), at(p + ".U_h"), at(p + ".b_h")};
    };
    n.enc_fwd = gru("enc_fwd");
    n.enc_bwd = gru("enc_bwd");
    n.dec = gru("dec");
    n.attn.W_a = at("attn.W_a");
    n.attn.U_a = at("attn.U_a");
    n.attn.v_a = at("attn.v_a");
    if (cfg.variant == Variant::Coverage) {
      n.cov = gru("cov");
      n.attn.U_cov = at("cov.U");
    }
    if (cfg.variant == Variant::Local) {
      n.attn.W_p = at("local.W_p");
      n.attn.v_p = at("local.v_p");
    }
    n.read = ReadoutNodes{at("read.W_s"), at("read.W_y"), at("read.W_c"),
                          at("read.b"),   at("read.W_o"), at("read.b_o")};
    n.init_W = at("init.W");
    Tensor<T> zero(1, cfg.hidden);
    Tensor<T> ones(1, cfg.hidden);
    ones.fill(static_cast<T>(1));
    n.zero_h = t.leaf(zero);
    n.ones_h = t.leaf(ones);
    if (cfg.variant == Variant::Coverage) {
      Tensor<T> oc(1, cfg.cov_dim);
      oc.fill(static_cast<T>(1));
      n.ones_cov = t.leaf(oc);
    }
    return n;
  }

  struct EncCtx {
    EncoderNodes enc;
    NodeId s0 = -1;
    NodeId ones_row_l = -1;    // 1 x l of ones (local variant)
    NodeId positions_row = -1; // 1 x l of 1..l (local variant)
    int l = 0;
  };

  EncCtx encode(Tape<T>& t, const Nodes& n, const std::vector<int>& src_ids) const {
    if (src_ids.empty()) throw ContractError("encode: empty source");
    for (int id : src_ids)
      if (id < 0 || id >= cfg.src_vocab)
        throw ContractError("encode: source id out of range: " + std::to_string(id));
    EncCtx ctx;
    ctx.l = static_cast<int>(src_ids.size());
    NodeId rows = ad::embedding(t, n.leaf.at("src_emb"), src_ids);
    ctx.enc = bidir_encode(t, rows, ctx.l, n.enc_fwd, n.enc_bwd, n.zero_h, n.ones_h);
    ctx.s0 = ad::tanh(t, ad::matmul(t, ctx.enc.bwd_first, n.init_W));
    if (cfg.variant == Variant::Local) {
      Tensor<T> ones(1, ctx.l), pos(1, ctx.l);
      for (int j = 0; j < ctx.l; ++j) {
        ones(0, j) = static_cast<T>(1);
        pos(0, j) = static_cast<T>(j + 1);
      }
      ctx.ones_row_l = t.leaf(ones);
      ctx.positions_row = t.leaf(pos);
    }
    return ctx;
  }

  AttnState init_state(Tape<T>& t, const Nodes& n, int l) const {
    (void)n;
    AttnState st;
    if (cfg.variant == Variant::Coverage) {
      Tensor<T> zeros(l, cfg.cov_dim);
      st.cov_rows = t.leaf(zeros);
    }
    return st;
  }

  struct StepOut {
    NodeId log_probs = -1;  // 1 x output-vocab (or candidate count)
    NodeId alpha = -1;      // 1 x l
    NodeId s_next = -1;
  };

  StepOut step(Tape<T>& t, const Nodes& n, const EncCtx& ctx, AttnState& st, NodeId s_prev,
               int fed_id, const std::vector<int>* candidates) const {
    if (fed_id < 0 || fed_id >= cfg.tgt_vocab)
      throw ContractError("step: target id out of range: " + std::to_string(fed_id));
    NodeId y_emb = ad::embedding(t, n.leaf.at("tgt_emb"), std::vector<int>{fed_id});
    NodeId e_col = attention_scores(t, s_prev, ctx.enc.annotations, n.attn,
                                    cfg.variant == Variant::Coverage ? st.cov_rows : -1);
    NodeId alpha = attention_weights(t, cfg.variant, e_col, st, ctx.l, s_prev, n.attn,
                                     cfg.local_d, cfg.history_window, ctx.ones_row_l,
                                     ctx.positions_row);
    NodeId context = ad::matmul(t, alpha, ctx.enc.annotations);
    NodeId x = ad::concat(t, {y_emb, context}, 1);
    NodeId s_next = gru_cell(t, x, s_prev, n.dec, n.ones_h);
    if (cfg.variant == Variant::Coverage) {
      std::vector<NodeId> rows(ctx.l);
      for (int j = 0; j < ctx.l; ++j) {
        NodeId a_j = ad::slice(t, alpha, 1, j, 1);
        NodeId c_prev = ad::slice(t, st.cov_rows, 0, j, 1);
        rows[j] = gru_cell(t, ad::concat(t, {a_j, y_emb}, 1), c_prev, n.cov, n.ones_cov);
      }
      st.cov_rows = ctx.l == 1 ? rows[0] : ad::concat(t, rows, 0);
    }
    StepOut out;
    out.log_probs = ad::log_softmax_row(
        t, readout(t, s_next, y_emb, context, n.read, candidates));
    out.alpha = alpha;
    out.s_next = s_next;
    return out;
  }

  struct LossNodes {
    NodeId nll = -1;  // 1 x 1 total over steps
    AttnMatrix attn;
    int steps = 0;
  };

  // Teacher-forced decode of one pair; tgt_ids must end with the
  // sentence-end id. When a candidate list is given every target id must be
  // in it.
  LossNodes loss(Tape<T>& t, const Nodes& n, const std::vector<int>& src_ids,
                 const std::vector<int>& tgt_ids, const std::vector<int>* candidates) const {
    if (tgt_ids.empty() || tgt_ids.back() != kEosId)
      throw ContractError("loss: target must end with the sentence-end id");
    for (int id : tgt_ids)
      if (id < 0 || id >= cfg.tgt_vocab)
        throw ContractError("loss: target id out of range: " + std::to_string(id));
    EncCtx ctx = encode(t, n, src_ids);
    AttnState st = init_state(t, n, ctx.l);
    NodeId s = ctx.s0;
    LossNodes out;
    out.steps = static_cast<int>(tgt_ids.size());
    for (int i = 0; i < out.steps; ++i) {
      int fed = i == 0 ? kBosId : tgt_ids[i - 1];
      StepOut so = step(t, n, ctx, st, s, fed, candidates);
      s = so.s_next;
      int pos = tgt_ids[i];
      if (candidates) {
        auto it = std::lower_bound(candidates->begin(), candidates->end(), tgt_ids[i]);
        if (it == candidates->end() || *it != tgt_ids[i])
          throw ContractError("loss: target id " + std::to_string(tgt_ids[i]) +
                              " missing from candidate list");
        pos = static_cast<int>(it - candidates->begin());
      }
      NodeId nll_i = ad::scalar_mul(t, ad::slice(t, so.log_probs, 1, pos, 1),
                                    static_cast<T>(-1));
      out.nll = i == 0 ? nll_i : ad::add(t, out.nll, nll_i);
      const Tensor<T>& a = t.value(so.alpha);
      std::vector<double> row(a.size());
      for (std::int64_t j = 0; j < a.size(); ++j) row[j] = static_cast<double>(a.data()[j]);
      out.attn.push_back(std::move(row));
    }
    return out;
  }

  // Value-level convenience: builds a private tape.
  std::pair<double, AttnMatrix> encode_decode_loss(const std::vector<int>& src_ids,
                                                   const std::vector<int>& tgt_ids,
                                                   const std::vector<int>* candidates
                                                   = nullptr) const {
    Tape<T> t;
    Nodes n = make_nodes(t);
    LossNodes ln = loss(t, n, src_ids, tgt_ids, candidates);
    return {static_cast<double>(t.value(ln.nll)(0, 0)), std::move(ln.attn)};
  }

  // Links (source pos, target pos) from the argmax of each attention row,
  // lowest index winning ties; the sentence-end row is skipped.
  AlignmentSet forced_decode_alignments(const std::vector<int>& src_ids,
                                        const std::vector<int>& tgt_ids) const {
    auto [nll, attn] = encode_decode_loss(src_ids, tgt_ids);
    (void)nll;
    AlignmentSet links;
    for (std::size_t ti = 0; ti + 1 < attn.size(); ++ti)
      links.emplace(argmax_lowest(attn[ti]), static_cast<int>(ti));
    return links;
  }
};

}  // namespace tatn

#endif
