#ifndef TATN_ATTENTION_HPP
#define TATN_ATTENTION_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tatn/common.hpp"
#include "tatn/tape.hpp"

namespace tatn {

enum class Variant { Global, Temporal, Coverage, Local };

inline Variant variant_from_string(const std::string& s) {
  if (s == "global") return Variant::Global;
  if (s == "temporal") return Variant::Temporal;
  if (s == "coverage") return Variant::Coverage;
  if (s == "local") return Variant::Local;
  throw ConfigError("unknown attention variant \"" + s + "\"");
}

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Global: return "global";
    case Variant::Temporal: return "temporal";
    case Variant::Coverage: return "coverage";
    case Variant::Local: return "local";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Plain double-precision reference forms of the normalization variants. The
// taped model mirrors these; tests cross-check the two paths.

inline std::vector<double> attend_global(const std::vector<double>& e) {
  if (e.empty()) throw ContractError("attend_global: empty scores");
  double m = e[0];
  for (double v : e) m = std::max(m, v);
  std::vector<double> a(e.size());
  double z = 0;
  for (std::size_t j = 0; j < e.size(); ++j) z += a[j] = std::exp(e[j] - m);
  for (double& v : a) v /= z;
  return a;
}

// Per-source-position running log of the summed exponentials of all scores
// seen so far this sentence; t is the 1-based next timestep.
struct TemporalHistory {
  std::vector<double> log_hist;
  int t = 1;
};

inline TemporalHistory reset_history(int l) {
  if (l < 1) throw ContractError("reset_history: source length must be >= 1");
  TemporalHistory h;
  h.log_hist.assign(l, 0.0);  // unused until t > 1
  h.t = 1;
  return h;
}

// At t=1 the weights are softmax(e); afterwards each score is discounted by
// the accumulated history before normalizing. The returned history includes
// the scores just attended.
inline std::vector<double> attend_temporal(const std::vector<double>& e, TemporalHistory& hist) {
  if (static_cast<int>(e.size()) != static_cast<int>(hist.log_hist.size()))
    throw ContractError("attend_temporal: score/history length mismatch");
  std::vector<double> a;
  if (hist.t == 1) {
    a = attend_global(e);
    hist.log_hist = e;
  } else {
    std::vector<double> logb(e.size());
    for (std::size_t j = 0; j < e.size(); ++j) logb[j] = e[j] - hist.log_hist[j];
    a = attend_global(logb);
    for (std::size_t j = 0; j < e.size(); ++j) {
      double hi = std::max(hist.log_hist[j], e[j]);
      hist.log_hist[j] =
          hi + std::log(std::exp(hist.log_hist[j] - hi) + std::exp(e[j] - hi));
    }
  }
  ++hist.t;
  return a;
}

// Gaussian window centered on the predicted position p_t (source positions
// are 1-based), sigma = D/2, multiplied into softmax(e) and renormalized.
inline std::vector<double> attend_local(const std::vector<double>& e, double p_t, double D) {
  if (D < 1) throw ContractError("attend_local: window half-width must be >= 1");
  std::vector<double> a = attend_global(e);
  double sigma = D / 2.0, z = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    double d = (static_cast<double>(j) + 1.0) - p_t;
    z += a[j] *= std::exp(-d * d / (2 * sigma * sigma));
  }
  if (z <= 0) throw NumericError("attend_local: weights vanished");
  for (double& v : a) v /= z;
  return a;
}

inline int argmax_lowest(const std::vector<double>& a) {
  int best = 0;
  for (std::size_t j = 1; j < a.size(); ++j)
    if (a[j] > a[best]) best = static_cast<int>(j);
  return best;
}

// ---------------------------------------------------------------------------
// Taped attention step shared by training and decoding.

struct AttnNodes {
  NodeId W_a = -1, U_a = -1, v_a = -1;  // hidden->a, 2*hidden->a, a x 1
  NodeId U_cov = -1;                    // cov-dim->a (coverage variant)
  NodeId W_p = -1, v_p = -1;            // hidden->a, a x 1 (local variant)
};

// Per-sentence, per-hypothesis attention state on a tape. For the temporal
// variant the raw score columns are kept so a history window can be applied;
// hist_col carries the running accumulation when the window is unlimited.
struct AttnState {
  int t = 1;                      // 1-based next timestep
  NodeId hist_col = -1;           // l x 1 running logsumexp of past scores
  std::vector<NodeId> e_cols;     // kept only when history_window > 0
  NodeId cov_rows = -1;           // l x cov-dim coverage rows
};

// Raw scores for every source position: column of e_{t,j} = v_a^T tanh(
// W_a s + U_a h_j [+ U_cov c_j]).
template <typename T>
NodeId attention_scores(Tape<T>& t, NodeId s_prev, NodeId annotations, const AttnNodes& p,
                        NodeId cov_rows = -1) {
  NodeId pre = ad::add(t, ad::matmul(t, annotations, p.U_a), ad::matmul(t, s_prev, p.W_a));
  if (cov_rows >= 0) pre = ad::add(t, pre, ad::matmul(t, cov_rows, p.U_cov));
  return ad::matmul(t, ad::tanh(t, pre), p.v_a);  // l x 1
}

// Applies the variant's normalization to a score column, returning the 1 x l
// weight row and updating the temporal state.
template <typename T>
NodeId attention_weights(Tape<T>& t, Variant variant, NodeId e_col, AttnState& st, int l,
                         NodeId s_prev, const AttnNodes& p, double window_D, int history_window,
                         NodeId ones_row_l, NodeId positions_row) {
  NodeId e_row = ad::transpose(t, e_col);
  switch (variant) {
    case Variant::Global:
    case Variant::Coverage: {
      st.t += 1;
      return ad::softmax_row(t, e_row);
    }
    case Variant::Temporal: {
      NodeId alpha;
      if (st.t == 1) {
        alpha = ad::softmax_row(t, e_row);
      } else {
        NodeId hist = st.hist_col;
        if (history_window > 0) {
          int k = std::min<int>(history_window, static_cast<int>(st.e_cols.size()));
          std::vector<NodeId> parts(st.e_cols.end() - k, st.e_cols.end());
          hist = k == 1 ? parts[0]
                        : ad::logsumexp_row(t, ad::concat(t, parts, 1));
        }
        alpha = ad::softmax_row(t, ad::sub(t, e_row, ad::transpose(t, hist)));
      }
      if (history_window > 0)
        st.e_cols.push_back(e_col);
      else
        st.hist_col = st.t == 1 ? e_col
                                : ad::logsumexp_row(t, ad::concat(t, {st.hist_col, e_col}, 1));
      st.t += 1;
      return alpha;
    }
    case Variant::Local: {
      NodeId pt = ad::scalar_mul(
          t, ad::sigmoid(t, ad::matmul(t, ad::tanh(t, ad::matmul(t, s_prev, p.W_p)), p.v_p)),
          static_cast<T>(l));
      NodeId pt_row = ad::matmul(t, pt, ones_row_l);
      NodeId d = ad::sub(t, positions_row, pt_row);
      double sigma = window_D / 2.0;
      NodeId g = ad::scalar_mul(t, ad::mul(t, d, d),
                                static_cast<T>(-1.0 / (2.0 * sigma * sigma)));
      st.t += 1;
      return ad::softmax_row(t, ad::add(t, e_row, g));
    }
  }
  throw ContractError("attention_weights: bad variant");
}

}  // namespace tatn

#endif
