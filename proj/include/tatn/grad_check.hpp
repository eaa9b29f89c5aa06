#ifndef TATN_GRAD_CHECK_HPP
#define TATN_GRAD_CHECK_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tatn/tape.hpp"

namespace tatn {

// Compares backward-mode gradients against central finite differences
// (f(p+eps) - f(p-eps)) / 2eps for every entry of every parameter tensor and
// returns the worst relative error |a-b| / max(1e-8, |a|+|b|). Non-finite
// differences count as failures (reported as +inf).
//
// `build` receives a fresh tape plus one leaf id per parameter tensor and
// must return the id of a scalar loss node.
template <typename T, typename Builder>
double grad_check(Builder&& build, std::vector<Tensor<T>>& params, T eps) {
  auto eval = [&]() -> double {
    Tape<T> tape;
    std::vector<NodeId> leaves;
    leaves.reserve(params.size());
    for (const Tensor<T>& p : params) leaves.push_back(tape.leaf(p));
    NodeId loss = build(tape, leaves);
    return static_cast<double>(tape.value(loss)(0, 0));
  };

  Tape<T> tape;
  std::vector<NodeId> leaves;
  leaves.reserve(params.size());
  for (const Tensor<T>& p : params) leaves.push_back(tape.leaf(p));
  NodeId loss = build(tape, leaves);
  std::vector<Tensor<T>> grads = tape.backward(loss);

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor<T>& p = params[pi];
    const Tensor<T>& g = grads[leaves[pi]];
    for (std::int64_t i = 0; i < p.size(); ++i) {
      T saved = p.data()[i];
      p.data()[i] = saved + eps;
      double f_plus = eval();
      p.data()[i] = saved - eps;
      double f_minus = eval();
      p.data()[i] = saved;
      double fd = (f_plus - f_minus) / (2.0 * static_cast<double>(eps));
      double a = static_cast<double>(g.data()[i]);
      if (!std::isfinite(fd) || !std::isfinite(a))
        return std::numeric_limits<double>::infinity();
      double rel = std::fabs(a - fd) / std::max(1e-8, std::fabs(a) + std::fabs(fd));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace tatn

#endif
