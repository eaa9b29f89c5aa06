#ifndef TATN_LAYERS_HPP
#define TATN_LAYERS_HPP

#include <string>
#include <vector>

#include "tatn/tape.hpp"

// State vectors are 1 x n rows throughout the model; a linear map is
// matmul(x, W) with W of shape (input-dim x output-dim) and a 1 x n bias row.

namespace tatn {

// Node ids of the nine GRU tensors on some tape.
struct GruNodes {
  NodeId W_z, U_z, b_z;
  NodeId W_r, U_r, b_r;
  NodeId W_h, U_h, b_h;
};

// z = sigmoid(x W_z + h U_z + b_z); r = sigmoid(x W_r + h U_r + b_r);
// hc = tanh(x W_h + (r*h) U_h + b_h); h' = (1-z)*h + z*hc.
// `ones` is a constant 1 x hidden row of ones (shared per tape).
template <typename T>
NodeId gru_cell(Tape<T>& t, NodeId x, NodeId h_prev, const GruNodes& p, NodeId ones) {
  NodeId z = ad::sigmoid(t, ad::add(t, ad::add(t, ad::matmul(t, x, p.W_z),
                                               ad::matmul(t, h_prev, p.U_z)),
                                    p.b_z));
  NodeId r = ad::sigmoid(t, ad::add(t, ad::add(t, ad::matmul(t, x, p.W_r),
                                               ad::matmul(t, h_prev, p.U_r)),
                                    p.b_r));
  NodeId hc = ad::tanh(t, ad::add(t, ad::add(t, ad::matmul(t, x, p.W_h),
                                             ad::matmul(t, ad::mul(t, r, h_prev), p.U_h)),
                                  p.b_h));
  NodeId keep = ad::mul(t, ad::sub(t, ones, z), h_prev);
  return ad::add(t, keep, ad::mul(t, z, hc));
}

struct EncoderNodes {
  NodeId annotations;            // l x 2*hidden, row j = concat(fwd_j, bwd_j)
  NodeId bwd_first;              // 1 x hidden, backward state at position 0
  int length = 0;
};

// Bidirectional GRU over embedded source rows (l x emb). Both directions
// start from zero states.
template <typename T>
EncoderNodes bidir_encode(Tape<T>& t, NodeId src_rows, int length, const GruNodes& fwd,
                          const GruNodes& bwd, NodeId zero_h, NodeId ones_h) {
  if (length < 1) throw ContractError("bidir_encode: empty source");
  std::vector<NodeId> xs(length);
  for (int j = 0; j < length; ++j) xs[j] = ad::slice(t, src_rows, 0, j, 1);
  std::vector<NodeId> f(length), b(length);
  NodeId h = zero_h;
  for (int j = 0; j < length; ++j) h = f[j] = gru_cell(t, xs[j], h, fwd, ones_h);
  h = zero_h;
  for (int j = length - 1; j >= 0; --j) h = b[j] = gru_cell(t, xs[j], h, bwd, ones_h);
  std::vector<NodeId> rows(length);
  for (int j = 0; j < length; ++j) rows[j] = ad::concat(t, {f[j], b[j]}, 1);
  EncoderNodes out;
  out.annotations = length == 1 ? rows[0] : ad::concat(t, rows, 0);
  out.bwd_first = b[0];
  out.length = length;
  return out;
}

struct ReadoutNodes {
  NodeId W_s, W_y, W_c, b;  // hidden->r, emb->r, 2*hidden->r, 1 x r
  NodeId W_o, b_o;          // vocab x r (row-gatherable), vocab x 1
};

// logits = tanh(s W_s + y W_y + ctx W_c + b) W_o^T + b_o^T, optionally
// restricted to a sorted candidate id list by row-gathering W_o and b_o.
template <typename T>
NodeId readout(Tape<T>& t, NodeId s, NodeId y_emb, NodeId ctx, const ReadoutNodes& p,
               const std::vector<int>* candidates = nullptr) {
  NodeId r = ad::tanh(t, ad::add(t, ad::add(t, ad::add(t, ad::matmul(t, s, p.W_s),
                                                       ad::matmul(t, y_emb, p.W_y)),
                                            ad::matmul(t, ctx, p.W_c)),
                                 p.b));
  NodeId W_o = p.W_o, b_o = p.b_o;
  if (candidates) {
    W_o = ad::embedding(t, p.W_o, *candidates);
    b_o = ad::embedding(t, p.b_o, *candidates);
  }
  return ad::add(t, ad::matmul(t, r, W_o, false, true), ad::transpose(t, b_o));
}

}  // namespace tatn

#endif
