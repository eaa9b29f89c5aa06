#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tatn/checkpoint.hpp"
#include "tatn/seq2seq.hpp"
#include "tatn/training.hpp"
#include "testutil.hpp"

using namespace tatn;

namespace {

template <typename T>
Model<T> zero_model(const ModelConfig& cfg) {
  std::map<std::string, Tensor<T>> params;
  for (const auto& [name, shape] : param_shapes(cfg))
    params.emplace(name, Tensor<T>(shape.first, shape.second));
  return Model<T>(cfg, std::move(params));
}

ModelConfig tiny_config(Variant v) {
  ModelConfig cfg;
  cfg.src_vocab = 8;
  cfg.tgt_vocab = 9;
  cfg.emb = 4;
  cfg.hidden = 5;
  cfg.attn = 4;
  cfg.readout = 6;
  cfg.cov_dim = 3;
  cfg.local_d = 3;
  cfg.variant = v;
  return cfg;
}

const Variant kAllVariants[] = {Variant::Global, Variant::Temporal, Variant::Coverage,
                                Variant::Local};

}  // namespace

TEST_CASE("a zero-parameter model scores every token uniformly") {
  std::vector<int> src = {4, 5, 6};
  std::vector<int> tgt = {5, 7, 4, kEosId};
  for (Variant v : kAllVariants) {
    CAPTURE(variant_name(v));
    Model<double> m = zero_model<double>(tiny_config(v));
    auto [nll, attn] = m.encode_decode_loss(src, tgt);
    // uniform posteriors: each step costs ln(vocab)
    CHECK(nll == doctest::Approx(4.0 * std::log(9.0)).epsilon(1e-12));
    REQUIRE(attn.size() == tgt.size());
    for (const auto& row : attn) {
      REQUIRE(row.size() == src.size());
      double sum = 0;
      for (double a : row) sum += a;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      // all scores are zero, so every variant except local is exactly uniform
      if (v != Variant::Local)
        for (double a : row) CHECK(a == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
  }
}

TEST_CASE("the full candidate list reproduces unrestricted losses bitwise") {
  std::vector<int> cand(9);
  for (int i = 0; i < 9; ++i) cand[i] = i;
  std::vector<int> src = {4, 5, 6, 7};
  std::vector<int> tgt = {8, 5, kEosId};
  for (Variant v : kAllVariants) {
    CAPTURE(variant_name(v));
    Model<double> m = Model<double>::seeded(tiny_config(v), 9);
    double full = m.encode_decode_loss(src, tgt).first;
    double restricted = m.encode_decode_loss(src, tgt, &cand).first;
    CHECK(full == restricted);
  }
}

TEST_CASE("candidate posteriors renormalize the full ones") {
  Model<double> m = Model<double>::seeded(tiny_config(Variant::Global), 10);
  std::vector<int> src = {3, 6, 4};
  std::vector<int> cand = {kEosId, kUnkId, 5, 7};

  Tape<double> t;
  auto nodes = m.make_nodes(t);
  auto ctx = m.encode(t, nodes, src);
  AttnState st_full = m.init_state(t, nodes, ctx.l);
  AttnState st_cand = m.init_state(t, nodes, ctx.l);
  auto full = m.step(t, nodes, ctx, st_full, ctx.s0, kBosId, nullptr);
  auto rest = m.step(t, nodes, ctx, st_cand, ctx.s0, kBosId, &cand);

  const Tensor<double>& lp_full = t.value(full.log_probs);
  const Tensor<double>& lp_rest = t.value(rest.log_probs);
  REQUIRE(lp_full.cols() == 9);
  REQUIRE(lp_rest.cols() == (std::int64_t)cand.size());
  double z = 0;
  for (int id : cand) z += std::exp(lp_full(0, id));
  for (std::size_t j = 0; j < cand.size(); ++j)
    CHECK(lp_rest(0, (int)j) ==
          doctest::Approx(lp_full(0, cand[j]) - std::log(z)).epsilon(1e-12));
}

TEST_CASE("a few gradient steps reduce the forced-decode loss") {
  std::vector<IdPair> pairs = {{{4, 5}, {5, 6, kEosId}},
                               {{6, 7}, {7, 4, kEosId}},
                               {{5, 4, 6}, {4, kEosId}}};
  for (Variant v : kAllVariants) {
    CAPTURE(variant_name(v));
    Model<float> m = Model<float>::seeded(tiny_config(v), 3);
    auto corpus_nll = [&]() {
      double total = 0;
      std::int64_t tokens = 0;
      for (const auto& [s, tg] : pairs) {
        total += m.encode_decode_loss(s, tg).first;
        tokens += (std::int64_t)tg.size();
      }
      return total / (double)tokens;
    };
    double before = corpus_nll();
    for (int it = 0; it < 12; ++it) {
      Tape<float> tape;
      auto nodes = m.make_nodes(tape);
      NodeId total = -1;
      std::int64_t tokens = 0;
      for (const auto& [s, tg] : pairs) {
        auto ln = m.loss(tape, nodes, s, tg, nullptr);
        total = total < 0 ? ln.nll : ad::add(tape, total, ln.nll);
        tokens += ln.steps;
      }
      NodeId scaled = ad::scalar_mul(tape, total, 1.0f / (float)tokens);
      auto all = tape.backward(scaled);
      ParamMap<float> grads;
      for (const auto& [name, leaf] : nodes.leaf) grads.emplace(name, all[leaf]);
      CHECK(sgd_step(m.params, grads, 0.5, 1.0).applied);
    }
    double after = corpus_nll();
    CHECK(after < before);
  }
}

TEST_CASE("losses replay identically and seeds control initialization") {
  ModelConfig cfg = tiny_config(Variant::Temporal);
  Model<float> a = Model<float>::seeded(cfg, 7);
  Model<float> b = Model<float>::seeded(cfg, 7);
  for (const auto& [name, t] : a.params) CHECK(t.vec() == b.params.at(name).vec());
  Model<float> c = Model<float>::seeded(cfg, 8);
  CHECK(a.params.at("src_emb").vec() != c.params.at("src_emb").vec());

  std::vector<int> src = {4, 6};
  std::vector<int> tgt = {5, kEosId};
  CHECK(a.encode_decode_loss(src, tgt).first == b.encode_decode_loss(src, tgt).first);
}

TEST_CASE("checkpoints round-trip the config and parameters bitwise") {
  testutil::TempDir dir;
  ModelConfig cfg = tiny_config(Variant::Coverage);
  cfg.history_window = 3;
  cfg.local_d = 7.5;
  Model<float> m = Model<float>::seeded(cfg, 21);
  std::string path = dir.file("model.ck");
  save_checkpoint(path, m, 21);

  Checkpoint ck = load_checkpoint(path);
  CHECK(ck.seed == 21);
  CHECK(ck.cfg.variant == Variant::Coverage);
  CHECK(ck.cfg.src_vocab == cfg.src_vocab);
  CHECK(ck.cfg.tgt_vocab == cfg.tgt_vocab);
  CHECK(ck.cfg.emb == cfg.emb);
  CHECK(ck.cfg.hidden == cfg.hidden);
  CHECK(ck.cfg.attn == cfg.attn);
  CHECK(ck.cfg.readout == cfg.readout);
  CHECK(ck.cfg.cov_dim == cfg.cov_dim);
  CHECK(ck.cfg.local_d == cfg.local_d);
  CHECK(ck.cfg.history_window == cfg.history_window);
  REQUIRE(ck.params.size() == m.params.size());
  for (const auto& [name, t] : m.params) CHECK(ck.params.at(name).vec() == t.vec());

  Model<float> back = model_from_checkpoint(path);
  std::vector<int> src = {4, 5};
  std::vector<int> tgt = {6, kEosId};
  CHECK(back.encode_decode_loss(src, tgt).first == m.encode_decode_loss(src, tgt).first);
}

TEST_CASE("corrupt checkpoints are rejected with the path in the message") {
  testutil::TempDir dir;
  Model<float> m = Model<float>::seeded(tiny_config(Variant::Global), 2);
  std::string path = dir.file("model.ck");
  save_checkpoint(path, m, 2);

  std::string bytes = testutil::read_file(path);
  testutil::write_file(dir.file("trunc.ck"), bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("trunc.ck")),
                       doctest::Contains("truncated"), DataError);

  testutil::write_file(dir.file("magic.ck"), "NOPE" + bytes.substr(4));
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("magic.ck")),
                       doctest::Contains("bad magic"), DataError);

  CHECK_THROWS_AS(load_checkpoint(dir.file("absent.ck")), DataError);

  // a parameter with the wrong shape fails the audit on model construction
  Checkpoint ck = load_checkpoint(path);
  ck.params.at("init.W") = Tensor<float>(1, 1);
  CHECK_THROWS_AS(Model<float>(ck.cfg, std::move(ck.params)), DataError);
}

TEST_CASE("model contracts reject malformed inputs") {
  Model<double> m = Model<double>::seeded(tiny_config(Variant::Global), 4);
  std::vector<int> src = {4, 5};
  CHECK_THROWS_AS(m.encode_decode_loss(src, {5, 6}), ContractError);  // no sentence-end
  CHECK_THROWS_AS(m.encode_decode_loss(src, {}), ContractError);
  CHECK_THROWS_AS(m.encode_decode_loss({}, {kEosId}), ContractError);      // empty source
  CHECK_THROWS_AS(m.encode_decode_loss({4, 99}, {kEosId}), ContractError); // id range
  CHECK_THROWS_AS(m.encode_decode_loss({-1}, {kEosId}), ContractError);
  CHECK_THROWS_AS(m.encode_decode_loss(src, {99, kEosId}), ContractError);

  // target id missing from the candidate list
  std::vector<int> cand = {kEosId, kUnkId, 7};
  CHECK_THROWS_AS(m.encode_decode_loss(src, {5, kEosId}, &cand), ContractError);

  ModelConfig bad = tiny_config(Variant::Global);
  bad.src_vocab = 2;  // cannot even hold the special tokens
  CHECK_THROWS_AS(init_params<double>(bad, 1), ConfigError);
}

TEST_CASE("forced-decode alignments take each row's first argmax and skip the end row") {
  Model<double> m = zero_model<double>(tiny_config(Variant::Global));
  // uniform rows: ties resolve to source position 0
  AlignmentSet links = m.forced_decode_alignments({4, 5, 6}, {5, 7, kEosId});
  AlignmentSet expect = {{0, 0}, {0, 1}};
  CHECK(links == expect);
}
