#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "tatn/attention.hpp"
#include "tatn/grad_check.hpp"
#include "testutil.hpp"

using namespace tatn;

namespace {

std::vector<double> random_scores(std::mt19937_64& rng, int l, double lo = -10.0,
                                  double hi = 10.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> e(l);
  for (auto& v : e) v = d(rng);
  return e;
}

}  // namespace

TEST_CASE("global weights are a softmax") {
  std::vector<double> a = attend_global({2.0, 0.0});
  // exp(2)/(exp(2)+1) = sigmoid(2), to 18 digits
  CHECK(a[0] == doctest::Approx(0.880797077977882444).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(1.0 - 0.880797077977882444).epsilon(1e-12));
  CHECK(a[0] + a[1] == doctest::Approx(1.0).epsilon(1e-15));

  // max subtraction keeps huge scores finite
  std::vector<double> b = attend_global({1000.0, 999.0, 998.0});
  CHECK(std::isfinite(b[0]));
  CHECK(b[0] > b[1]);
  CHECK(b[0] + b[1] + b[2] == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(attend_global({}), ContractError);
}

TEST_CASE("global weights are shift invariant") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    auto e = random_scores(rng, 6);
    auto shifted = e;
    for (auto& v : shifted) v += 123.456;
    auto a1 = attend_global(e), a2 = attend_global(shifted);
    for (int j = 0; j < 6; ++j) CHECK(a2[j] == doctest::Approx(a1[j]).epsilon(1e-12));
  }
}

TEST_CASE("first-step temporal weights equal global weights bit for bit") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    int l = 1 + (int)(rng() % 12);
    auto e = random_scores(rng, l);
    auto want = attend_global(e);
    TemporalHistory h = reset_history(l);
    auto got = attend_temporal(e, h);
    CHECK(std::memcmp(got.data(), want.data(), l * sizeof(double)) == 0);
    CHECK(h.t == 2);
  }
}

TEST_CASE("the two-step worked example holds") {
  // e1 = [2,0]: alpha1 = [sigmoid(2), sigmoid(-2)].
  // e2 = [1,1]: discounting by the stored history gives softmax([-1, 1]) =
  // [sigmoid(-2), sigmoid(2)] - the weight mass flips to the unused position.
  TemporalHistory h = reset_history(2);
  auto a1 = attend_temporal({2.0, 0.0}, h);
  CHECK(a1[0] == doctest::Approx(0.880797077977882444).epsilon(1e-15));
  auto a2 = attend_temporal({1.0, 1.0}, h);
  CHECK(a2[0] == doctest::Approx(1.0 - 0.880797077977882444).epsilon(1e-12));
  CHECK(a2[1] == doctest::Approx(0.880797077977882444).epsilon(1e-15));
}

TEST_CASE("identical consecutive scores give exactly uniform second-step weights") {
  for (int l : {2, 3, 5, 7}) {
    std::mt19937_64 rng(43 + l);
    auto e = random_scores(rng, l);
    TemporalHistory h = reset_history(l);
    attend_temporal(e, h);
    auto a2 = attend_temporal(e, h);  // e - hist == 0 everywhere
    for (int j = 0; j < l; ++j) CHECK(a2[j] == 1.0 / l);
  }
}

TEST_CASE("repeating scores drains weight from attended positions while global stays put") {
  std::vector<double> e = {2.0, 0.0, -1.0};
  auto g1 = attend_global(e), g2 = attend_global(e);
  CHECK(g1 == g2);

  TemporalHistory h = reset_history(3);
  auto t1 = attend_temporal(e, h);
  auto t2 = attend_temporal(e, h);
  CHECK(t2[0] < t1[0]);  // position 0 got the most attention, so it is suppressed
  CHECK(t2[2] > t1[2]);
}

TEST_CASE("log-domain history matches direct extended-precision evaluation") {
  std::mt19937_64 rng(44);
  for (int rep = 0; rep < 30; ++rep) {
    int l = 2 + (int)(rng() % 8);
    int steps = 2 + (int)(rng() % 10);
    TemporalHistory h = reset_history(l);
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < steps; ++t) {
      rows.push_back(random_scores(rng, l));
      auto got = attend_temporal(rows.back(), h);
      auto want = testutil::temporal_reference(rows);
      for (int j = 0; j < l; ++j) {
        double rel = std::fabs(got[j] - want[j]) / std::max(1e-300, std::fabs(want[j]));
        CHECK(rel < 1e-12);
      }
    }
  }
}

TEST_CASE("history accumulates sums of exponentials") {
  std::mt19937_64 rng(45);
  int l = 5;
  TemporalHistory h = reset_history(l);
  std::vector<double> sums(l, 0.0);
  for (int t = 0; t < 6; ++t) {
    auto e = random_scores(rng, l, -3.0, 3.0);
    attend_temporal(e, h);
    for (int j = 0; j < l; ++j) sums[j] += std::exp(e[j]);
    for (int j = 0; j < l; ++j)
      CHECK(std::exp(h.log_hist[j]) == doctest::Approx(sums[j]).epsilon(1e-12));
  }
}

TEST_CASE("raising one historical score suppresses exactly that position") {
  std::mt19937_64 rng(46);
  for (int rep = 0; rep < 100; ++rep) {
    int l = 2 + (int)(rng() % 8);
    auto hist_scores = random_scores(rng, l, -5.0, 5.0);
    auto e = random_scores(rng, l, -5.0, 5.0);
    int target = (int)(rng() % l);

    auto run = [&](double bump) {
      TemporalHistory h = reset_history(l);
      auto past = hist_scores;
      past[target] += bump;
      attend_temporal(past, h);
      return attend_temporal(e, h);
    };
    auto base = run(0.0), bumped = run(1.0);
    CHECK(bumped[target] < base[target]);
    for (int j = 0; j < l; ++j)
      if (j != target) CHECK(bumped[j] > base[j]);
  }
}

TEST_CASE("local weights follow the frozen Gaussian-window values") {
  // uniform scores, l=5, p_t=2, D=10: weights proportional to
  // exp(-(j-2)^2/50), j = 1..5, computed at 30-digit precision.
  std::vector<double> a = attend_local({0, 0, 0, 0, 0}, 2.0, 10.0);
  const double want[5] = {0.207722729661428960, 0.211919007154605361, 0.207722729661428960,
                          0.195625899614442630, 0.177009633908094088};
  for (int j = 0; j < 5; ++j) CHECK(a[j] == doctest::Approx(want[j]).epsilon(1e-12));

  // the window center dominates for uniform scores
  for (int center = 1; center <= 5; ++center) {
    auto w = attend_local({0, 0, 0, 0, 0}, (double)center, 4.0);
    CHECK(argmax_lowest(w) == center - 1);
  }

  CHECK_THROWS_AS(attend_local({0, 0}, 1.0, 0.5), ContractError);
  CHECK_THROWS_AS(attend_local({0, 0}, 50.0, 1.0), NumericError);  // all weights underflow
}

TEST_CASE("argmax_lowest returns the first maximum") {
  CHECK(argmax_lowest({0.2, 0.5, 0.5, 0.1}) == 1);
  CHECK(argmax_lowest({0.9}) == 0);
}

TEST_CASE("contract violations are rejected") {
  CHECK_THROWS_AS(reset_history(0), ContractError);
  TemporalHistory h = reset_history(3);
  CHECK_THROWS_AS(attend_temporal({1.0, 2.0}, h), ContractError);
  CHECK_THROWS_AS(variant_from_string("softmaxish"), ConfigError);
  CHECK(variant_from_string("temporal") == Variant::Temporal);
  CHECK(std::string(variant_name(Variant::Coverage)) == "coverage");
}

// ---------------------------------------------------------------- taped path

namespace {

// Feeds score columns through the taped attention and returns the weight rows.
std::vector<std::vector<double>> taped_temporal(const std::vector<std::vector<double>>& rows,
                                                int history_window) {
  int l = (int)rows[0].size();
  Tape<double> t;
  Tensor<double> ones(1, l);
  ones.fill(1.0);
  NodeId ones_l = t.leaf(ones);
  AttnNodes p;
  AttnState st;
  std::vector<std::vector<double>> out;
  for (const auto& row : rows) {
    std::vector<double> col = row;
    NodeId e_col = t.leaf(Tensor<double>::column(std::move(col)));
    NodeId alpha = attention_weights(t, Variant::Temporal, e_col, st, l, -1, p, 0.0,
                                     history_window, ones_l, -1);
    const auto& v = t.value(alpha);
    out.emplace_back(v.data(), v.data() + l);
  }
  return out;
}

}  // namespace

TEST_CASE("taped temporal weights match the plain reference") {
  std::mt19937_64 rng(47);
  for (int rep = 0; rep < 20; ++rep) {
    int l = 2 + (int)(rng() % 6), steps = 1 + (int)(rng() % 6);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < steps; ++i) rows.push_back(random_scores(rng, l, -6.0, 6.0));

    TemporalHistory h = reset_history(l);
    auto taped = taped_temporal(rows, 0);
    for (int i = 0; i < steps; ++i) {
      auto want = attend_temporal(rows[i], h);
      for (int j = 0; j < l; ++j)
        CHECK(taped[i][j] == doctest::Approx(want[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("a one-step history window discounts only the previous scores") {
  std::mt19937_64 rng(48);
  int l = 4;
  std::vector<std::vector<double>> rows = {random_scores(rng, l), random_scores(rng, l),
                                           random_scores(rng, l)};
  auto taped = taped_temporal(rows, 1);
  // step 3 with window 1: softmax(e3 - e2), ignoring e1 entirely
  std::vector<double> diff(l);
  for (int j = 0; j < l; ++j) diff[j] = rows[2][j] - rows[1][j];
  auto want = attend_global(diff);
  for (int j = 0; j < l; ++j) CHECK(taped[2][j] == doctest::Approx(want[j]).epsilon(1e-12));
}

TEST_CASE("a wide history window reproduces the unlimited accumulation") {
  std::mt19937_64 rng(49);
  int l = 3;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 5; ++i) rows.push_back(random_scores(rng, l, -4.0, 4.0));
  auto capped = taped_temporal(rows, 100);
  auto unlimited = taped_temporal(rows, 0);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < l; ++j)
      CHECK(capped[i][j] == doctest::Approx(unlimited[i][j]).epsilon(1e-12));
}

TEST_CASE("taped local attention matches the reference given its own predicted center") {
  std::mt19937_64 rng(50);
  int l = 6, hidden = 3, adim = 4;
  Tape<double> t;
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  auto mk = [&](int r, int c) {
    Tensor<double> v(r, c);
    for (std::int64_t i = 0; i < v.size(); ++i) v.data()[i] = d(rng);
    return t.leaf(v);
  };
  AttnNodes p;
  p.W_p = mk(hidden, adim);
  p.v_p = mk(adim, 1);
  NodeId s_prev = mk(1, hidden);
  NodeId e_col = mk(l, 1);
  Tensor<double> ones(1, l), pos(1, l);
  ones.fill(1.0);
  for (int j = 0; j < l; ++j) pos(0, j) = j + 1.0;
  AttnState st;
  double D = 4.0;
  NodeId alpha =
      attention_weights(t, Variant::Local, e_col, st, l, s_prev, p, D, 0, t.leaf(ones),
                        t.leaf(pos));

  // recompute p_t by hand: l * sigmoid(v_p . tanh(s W_p))
  double dot = 0.0;
  for (int k = 0; k < adim; ++k) {
    double h = 0.0;
    for (int i = 0; i < hidden; ++i) h += t.value(s_prev)(0, i) * t.value(p.W_p)(i, k);
    dot += std::tanh(h) * t.value(p.v_p)(k, 0);
  }
  double p_t = l / (1.0 + std::exp(-dot));
  std::vector<double> e(l);
  for (int j = 0; j < l; ++j) e[j] = t.value(e_col)(j, 0);
  auto want = attend_local(e, p_t, D);
  for (int j = 0; j < l; ++j)
    CHECK(t.value(alpha)(0, j) == doctest::Approx(want[j]).epsilon(1e-12));
}

TEST_CASE("gradients flow through the temporal history") {
  // Two steps of scores from one leaf; the second step's weights depend on the
  // first step's scores only through the history, so a nonzero gradient there
  // proves the history path is differentiated.
  std::mt19937_64 rng(51);
  int l = 3;
  std::vector<Tensor<double>> params;
  Tensor<double> e_all(2, l);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (std::int64_t i = 0; i < e_all.size(); ++i) e_all.data()[i] = d(rng);
  params.push_back(e_all);

  for (int window : {0, 1}) {
    double worst = grad_check<double>(
        [&](Tape<double>& t, const std::vector<NodeId>& leaves) {
          Tensor<double> ones(1, l);
          ones.fill(1.0);
          NodeId ones_l = t.leaf(ones);
          AttnNodes p;
          AttnState st;
          NodeId a_last = -1;
          for (int step = 0; step < 2; ++step) {
            NodeId e_col = ad::transpose(t, ad::slice(t, leaves[0], 0, step, 1));
            a_last = attention_weights(t, Variant::Temporal, e_col, st, l, -1, p, 0.0, window,
                                       ones_l, -1);
          }
          // weighted sum with distinct coefficients so every entry matters
          Tensor<double> w(l, 1);
          for (int j = 0; j < l; ++j) w(j, 0) = 1.0 + j;
          return ad::matmul(t, a_last, t.leaf(w));
        },
        params, 1e-6);
    CHECK(worst < 1e-6);
  }
}
