// tatn: attention-variant NMT toolkit. Subcommands cover the full pipeline:
// learn-bpe, apply-bpe, build-vocab, train-lexicon, train, translate, eval,
// align-eval, rep-stats, dump-attn. Exit codes: 0 success, 1 usage error,
// 2 data/config error.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tatn/checkpoint.hpp"
#include "tatn/config.hpp"
#include "tatn/corpus.hpp"
#include "tatn/decoding.hpp"
#include "tatn/lexicon.hpp"
#include "tatn/metrics.hpp"
#include "tatn/subword.hpp"
#include "tatn/training.hpp"

namespace {

using namespace tatn;

// Bridges a flat "key = value" config file onto CLI11 options: values fill
// options the user did not pass on the command line; unknown keys are
// rejected by name.
class ConfigKeys {
 public:
  explicit ConfigKeys(CLI::App* cmd) {
    cmd->add_option("--config", path_, "config file with key = value lines; flags override");
  }

  void track(const std::string& key, CLI::Option* opt, std::function<void(const Config&)> set) {
    keys_[key] = {opt, std::move(set)};
  }

  void apply() const {
    if (path_.empty()) return;
    Config cfg = Config::from_file(path_);
    for (const auto& [key, value] : cfg.entries()) {
      auto it = keys_.find(key);
      if (it == keys_.end()) throw ConfigError("unknown config key \"" + key + "\"");
      if (it->second.opt != nullptr && it->second.opt->count() > 0) continue;
      it->second.set(cfg);
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(const Config&)> set;
  };
  std::string path_;
  std::map<std::string, Entry> keys_;
};

template <typename V>
void track_value(ConfigKeys& ck, const std::string& key, CLI::Option* opt, V& target) {
  ck.track(key, opt, [&target, key](const Config& cfg) {
    if constexpr (std::is_same_v<V, bool>)
      target = cfg.get_bool(key, target);
    else if constexpr (std::is_integral_v<V>)
      target = static_cast<V>(cfg.get_int(key, target));
    else if constexpr (std::is_floating_point_v<V>)
      target = static_cast<V>(cfg.get_double(key, target));
    else
      target = cfg.get_str(key, target);
  });
}

std::map<std::string, std::int64_t> word_frequencies(const std::string& path) {
  std::map<std::string, std::int64_t> freq;
  for (const auto& sent : read_token_lines(path))
    for (const auto& tok : sent) ++freq[tok];
  return freq;
}

std::vector<IdPair> encode_bitext(const std::string& src_path, const std::string& tgt_path,
                                  const Vocabulary& sv, const Vocabulary& tv,
                                  std::vector<std::vector<std::string>>* src_tokens = nullptr,
                                  std::vector<std::vector<std::string>>* tgt_tokens = nullptr) {
  auto src = read_token_lines(src_path);
  auto tgt = read_token_lines(tgt_path);
  if (src.size() != tgt.size())
    throw DataError(src_path + " and " + tgt_path + " differ in line count (" +
                    std::to_string(src.size()) + " vs " + std::to_string(tgt.size()) + ")");
  std::vector<IdPair> pairs;
  pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    pairs.emplace_back(encode(src[i], sv), encode(tgt[i], tv));
    if (src_tokens) src_tokens->push_back(src[i]);
    if (tgt_tokens) tgt_tokens->push_back(tgt[i]);
  }
  return pairs;
}

Model<float> load_model_checked(const std::string& path, const Vocabulary& sv,
                                const Vocabulary& tv) {
  Model<float> m = model_from_checkpoint(path);
  if (m.cfg.src_vocab != sv.size() || m.cfg.tgt_vocab != tv.size())
    throw DataError(path + ": checkpoint vocab sizes (" + std::to_string(m.cfg.src_vocab) +
                    "," + std::to_string(m.cfg.tgt_vocab) + ") do not match the vocab files (" +
                    std::to_string(sv.size()) + "," + std::to_string(tv.size()) + ")");
  return m;
}

// The first n content words of a vocabulary, which build() ordered by
// descending frequency.
std::vector<std::string> frequent_from_vocab(const Vocabulary& v, int n) {
  std::vector<std::string> out;
  for (int id = kNumSpecials; id < v.size() && static_cast<int>(out.size()) < n; ++id)
    out.push_back(v.word(id));
  return out;
}

std::unique_ptr<std::ostream> open_output(const std::string& path) {
  if (path.empty() || path == "-") return nullptr;  // caller uses stdout
  auto out = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*out) throw DataError("cannot open " + path + " for writing");
  return out;
}

bool parse_on_off(const std::string& flag, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(flag + ": expected on or off, got \"" + v + "\"");
}

// "inf" = unlimited accumulation (stored as 0).
int parse_history_window(const std::string& v) {
  if (v == "inf") return 0;
  try {
    std::size_t used = 0;
    int n = std::stoi(v, &used);
    if (used == v.size() && n >= 0) return n;
  } catch (const std::exception&) {
  }
  throw ConfigError("--history-window: expected a non-negative integer or inf, got \"" + v +
                    "\"");
}

// ---------------------------------------------------------------- subcommands

void cmd_learn_bpe(CLI::App& app) {
  auto* cmd = app.add_subcommand("learn-bpe", "learn merge operations from a token file");
  struct Args {
    std::string input, output;
    std::int64_t merges = 8000;
  };
  auto o = std::make_shared<Args>();
  auto ck = std::make_shared<ConfigKeys>(cmd);
  track_value(*ck, "merges",
              cmd->add_option("--merges", o->merges, "number of merge operations"), o->merges);
  cmd->add_option("--input", o->input, "tokenized corpus")->required();
  cmd->add_option("--output", o->output, "merge-table file")->required();
  cmd->callback([o, ck]() {
    ck->apply();
    learn_bpe(word_frequencies(o->input), o->merges).save(o->output);
  });
}

void cmd_apply_bpe(CLI::App& app) {
  auto* cmd = app.add_subcommand("apply-bpe", "segment a token file with a merge table");
  struct Args {
    std::string input, output, table;
  };
  auto o = std::make_shared<Args>();
  cmd->add_option("--input", o->input, "tokenized corpus")->required();
  cmd->add_option("--output", o->output, "segmented output")->required();
  cmd->add_option("--table", o->table, "merge-table file")->required();
  cmd->callback([o]() {
    MergeTable table = MergeTable::load(o->table);
    std::vector<std::string> out;
    for (const auto& sent : read_token_lines(o->input))
      out.push_back(join_tokens(apply_bpe_line(sent, table)));
    write_lines(o->output, out);
  });
}

void cmd_build_vocab(CLI::App& app) {
  auto* cmd = app.add_subcommand("build-vocab", "build a frequency-ordered vocabulary");
  struct Args {
    std::string input, output;
    std::int64_t max_size = 50000, min_count = 1;
  };
  auto o = std::make_shared<Args>();
  auto ck = std::make_shared<ConfigKeys>(cmd);
  track_value(*ck, "max_size",
              cmd->add_option("--max-size", o->max_size, "vocabulary cap incl. specials"),
              o->max_size);
  track_value(*ck, "min_count",
              cmd->add_option("--min-count", o->min_count, "drop words rarer than this"),
              o->min_count);
  cmd->add_option("--input", o->input, "tokenized corpus")->required();
  cmd->add_option("--output", o->output, "vocab file")->required();
  cmd->callback([o, ck]() {
    ck->apply();
    Vocabulary::build(read_token_lines(o->input), o->max_size, o->min_count).save(o->output);
  });
}

void cmd_train_lexicon(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-lexicon", "EM word-translation table from a bitext");
  struct Args {
    std::string src, tgt, output;
    int iterations = 5;
    bool null_word = false;
  };
  auto o = std::make_shared<Args>();
  auto ck = std::make_shared<ConfigKeys>(cmd);
  track_value(*ck, "iterations",
              cmd->add_option("--iterations", o->iterations, "EM iterations"), o->iterations);
  track_value(*ck, "null_word",
              cmd->add_flag("--null", o->null_word, "include a NULL source word"),
              o->null_word);
  cmd->add_option("--src", o->src, "source side")->required();
  cmd->add_option("--tgt", o->tgt, "target side")->required();
  cmd->add_option("--output", o->output, "lexicon file")->required();
  cmd->callback([o, ck]() {
    ck->apply();
    auto src = read_token_lines(o->src);
    auto tgt = read_token_lines(o->tgt);
    if (src.size() != tgt.size())
      throw DataError(o->src + " and " + o->tgt + " differ in line count");
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> bitext;
    for (std::size_t i = 0; i < src.size(); ++i) bitext.emplace_back(src[i], tgt[i]);
    Lexicon lex = train_model1(bitext, o->iterations, o->null_word);
    if (lex.skipped_pairs)
      std::cerr << "warning: skipped " << lex.skipped_pairs << " pairs with an empty side\n";
    lex.save(o->output);
  });
}

struct TrainArgs {
  std::string train_src, train_tgt, dev_src, dev_tgt, src_vocab, tgt_vocab, output, lexicon;
  TrainConfig tc;
  std::string variant = "global";
  std::string history_window = "inf";
  std::int64_t cand_cap = 0;
};

void cmd_train(CLI::App& app) {
  auto* cmd = app.add_subcommand("train", "train a model");
  auto o = std::make_shared<TrainArgs>();
  auto ck = std::make_shared<ConfigKeys>(cmd);
  cmd->add_option("--train-src", o->train_src)->required();
  cmd->add_option("--train-tgt", o->train_tgt)->required();
  cmd->add_option("--dev-src", o->dev_src)->required();
  cmd->add_option("--dev-tgt", o->dev_tgt)->required();
  cmd->add_option("--src-vocab", o->src_vocab)->required();
  cmd->add_option("--tgt-vocab", o->tgt_vocab)->required();
  cmd->add_option("--output", o->output, "checkpoint path")->required();
  cmd->add_option("--lexicon", o->lexicon, "lexicon file (candidate lists)");
  auto t = [&](const char* key, CLI::Option* opt, auto& target) {
    track_value(*ck, key, opt, target);
  };
  t("variant", cmd->add_option("--variant", o->variant, "global|temporal|coverage|local"),
    o->variant);
  t("seed", cmd->add_option("--seed", o->tc.seed), o->tc.seed);
  t("epochs", cmd->add_option("--epochs", o->tc.max_epochs), o->tc.max_epochs);
  t("batch_size", cmd->add_option("--batch-size", o->tc.batch_size), o->tc.batch_size);
  t("optimizer", cmd->add_option("--optimizer", o->tc.optimizer, "adadelta|sgd"),
    o->tc.optimizer);
  t("lr", cmd->add_option("--lr", o->tc.lr, "sgd learning rate"), o->tc.lr);
  t("clip_norm", cmd->add_option("--clip-norm", o->tc.clip_norm), o->tc.clip_norm);
  t("emb", cmd->add_option("--emb", o->tc.model.emb), o->tc.model.emb);
  t("hidden", cmd->add_option("--hidden", o->tc.model.hidden), o->tc.model.hidden);
  t("attn_dim", cmd->add_option("--attn-dim", o->tc.model.attn), o->tc.model.attn);
  t("readout", cmd->add_option("--readout", o->tc.model.readout), o->tc.model.readout);
  t("cov_dim", cmd->add_option("--cov-dim", o->tc.model.cov_dim), o->tc.model.cov_dim);
  t("local_d", cmd->add_option("--local-d", o->tc.model.local_d), o->tc.model.local_d);
  t("history_window",
    cmd->add_option("--history-window", o->history_window, "temporal history span, N or inf"),
    o->history_window);
  t("select", cmd->add_option("--select", o->tc.select, "dev metric: nll|bleu"), o->tc.select);
  t("beam", cmd->add_option("--beam", o->tc.beam, "beam for dev bleu"), o->tc.beam);
  t("bucket", cmd->add_flag("--bucket,!--no-bucket", o->tc.bucket, "length-bucketed batches"),
    o->tc.bucket);
  t("candidates",
    cmd->add_flag("--candidates", o->tc.use_candidates, "candidate-list output restriction"),
    o->tc.use_candidates);
  t("cand_frequent", cmd->add_option("--cand-frequent", o->tc.cand_frequent),
    o->tc.cand_frequent);
  t("cand_k", cmd->add_option("--cand-k", o->tc.cand_k), o->tc.cand_k);
  t("cand_cap", cmd->add_option("--cand-cap", o->cand_cap), o->cand_cap);
  cmd->callback([o, ck]() {
    ck->apply();
    o->tc.cand_cap = static_cast<std::size_t>(o->cand_cap);
    o->tc.model.history_window = parse_history_window(o->history_window);
    o->tc.model.variant = variant_from_string(o->variant);
    Vocabulary sv = Vocabulary::load(o->src_vocab);
    Vocabulary tv = Vocabulary::load(o->tgt_vocab);
    o->tc.model.src_vocab = sv.size();
    o->tc.model.tgt_vocab = tv.size();
    TrainData data;
    data.pairs = encode_bitext(o->train_src, o->train_tgt, sv, tv, &data.src_tokens,
                               &data.tgt_tokens);
    std::vector<IdPair> dev = encode_bitext(o->dev_src, o->dev_tgt, sv, tv);
    Lexicon lex;
    if (o->tc.use_candidates) {
      if (o->lexicon.empty())
        throw ConfigError("--candidates requires --lexicon");
      lex = Lexicon::load(o->lexicon);
    }
    TrainResult r = train(o->tc, data, dev, tv, o->tc.use_candidates ? &lex : nullptr,
                          o->output, std::cout);
    char line[128];
    std::snprintf(line, sizeof line, "best epoch=%d metric=%.6f", r.best_epoch, r.best_metric);
    std::cout << line << '\n';
  });
}

struct TranslateArgs {
  std::string input, output, src_vocab, tgt_vocab, checkpoint, lexicon, dump_attn;
  std::string replace_unk_lex, len_norm = "on";
  std::vector<std::string> ensemble;
  int beam = 10, max_len = 0;
  bool use_candidates = false;
  int cand_frequent = 2000, cand_k = 10;
};

void cmd_translate(CLI::App& app) {
  auto* cmd = app.add_subcommand("translate", "beam-search decode a source file");
  auto o = std::make_shared<TranslateArgs>();
  auto ck = std::make_shared<ConfigKeys>(cmd);
  cmd->add_option("--input", o->input, "source token file")->required();
  cmd->add_option("--output", o->output, "translations ('-' or empty: stdout)");
  cmd->add_option("--src-vocab", o->src_vocab)->required();
  cmd->add_option("--tgt-vocab", o->tgt_vocab)->required();
  cmd->add_option("--checkpoint", o->checkpoint)->required();
  cmd->add_option("--ensemble", o->ensemble, "additional member checkpoints, comma-separated")
      ->delimiter(',');
  cmd->add_option("--replace-unk", o->replace_unk_lex,
                  "replace unknown tokens via attention and this lexicon");
  cmd->add_option("--lexicon", o->lexicon, "lexicon for --candidates");
  cmd->add_option("--dump-attn", o->dump_attn, "write attention matrices here");
  auto t = [&](const char* key, CLI::Option* opt, auto& target) {
    track_value(*ck, key, opt, target);
  };
  t("beam", cmd->add_option("--beam", o->beam), o->beam);
  t("max_len", cmd->add_option("--max-len", o->max_len, "0 = 2*source+5"), o->max_len);
  t("len_norm", cmd->add_option("--len-norm", o->len_norm, "on|off"), o->len_norm);
  t("candidates", cmd->add_flag("--candidates", o->use_candidates), o->use_candidates);
  t("cand_frequent", cmd->add_option("--cand-frequent", o->cand_frequent), o->cand_frequent);
  t("cand_k", cmd->add_option("--cand-k", o->cand_k), o->cand_k);
  cmd->callback([o, ck]() {
    ck->apply();
    Vocabulary sv = Vocabulary::load(o->src_vocab);
    Vocabulary tv = Vocabulary::load(o->tgt_vocab);
    std::vector<Model<float>> models;
    models.push_back(load_model_checked(o->checkpoint, sv, tv));
    for (const auto& path : o->ensemble) models.push_back(load_model_checked(path, sv, tv));
    std::vector<const Model<float>*> refs;
    for (const auto& m : models) refs.push_back(&m);

    bool do_replace_unk = !o->replace_unk_lex.empty();
    Lexicon unk_lex;
    if (do_replace_unk) unk_lex = Lexicon::load(o->replace_unk_lex);
    Lexicon cand_lex;
    std::vector<std::string> frequent;
    if (o->use_candidates) {
      if (o->lexicon.empty()) throw ConfigError("--candidates requires --lexicon");
      cand_lex = Lexicon::load(o->lexicon);
      frequent = frequent_from_vocab(tv, o->cand_frequent);
    }

    auto out_file = open_output(o->output);
    std::ostream& out = out_file ? *out_file : std::cout;
    std::vector<AttnMatrix> dumps;
    for (const auto& sent : read_token_lines(o->input)) {
      DecodeOptions opt;
      opt.beam = o->beam;
      opt.max_len = o->max_len;
      opt.len_norm = parse_on_off("--len-norm", o->len_norm);
      std::vector<int> cand_ids;
      if (o->use_candidates) {
        cand_ids = build_candidate_list({sent}, cand_lex, frequent, o->cand_k, nullptr, tv).ids;
        opt.candidates = &cand_ids;
      }
      Hypothesis hyp = ensemble_decode(refs, encode(sent, sv), opt);
      std::vector<std::string> words = decode(hyp.ids, tv);
      if (do_replace_unk) words = replace_unk(words, hyp.attn, sent, unk_lex);
      out << join_tokens(words) << '\n';
      if (!o->dump_attn.empty()) dumps.push_back(hyp.attn);
    }
    if (!out) throw DataError("write failed: " + o->output);
    if (!o->dump_attn.empty()) {
      auto dump_file = open_output(o->dump_attn);
      write_attention_dump(dump_file ? *dump_file : std::cout, dumps);
    }
  });
}

void cmd_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "BLEU / TER / TB of a hypothesis file");
  struct Args {
    std::string hyp, ref;
  };
  auto o = std::make_shared<Args>();
  cmd->add_option("--hyp", o->hyp, "hypothesis token file")->required();
  cmd->add_option("--ref", o->ref, "reference token file")->required();
  cmd->callback([o]() {
    auto hyps = read_token_lines(o->hyp);
    auto refs = read_token_lines(o->ref);
    if (hyps.size() != refs.size())
      throw DataError(o->hyp + " and " + o->ref + " differ in line count");
    BleuReport br = bleu(hyps, refs);
    double ter_pct = corpus_ter(hyps, refs);
    char line[128];
    std::snprintf(line, sizeof line, "BLEU=%.3f BP=%.3f TER=%.3f TB=%.3f", br.bleu, br.bp,
                  ter_pct, tb(hyps, refs));
    std::cout << line << '\n';
  });
}

struct ForcedDecodeArgs {
  std::string src, tgt, src_vocab, tgt_vocab, checkpoint;
};

std::pair<std::vector<AlignmentSet>, std::vector<AttnMatrix>> forced_decode_all(
    const ForcedDecodeArgs& o) {
  Vocabulary sv = Vocabulary::load(o.src_vocab);
  Vocabulary tv = Vocabulary::load(o.tgt_vocab);
  Model<float> m = load_model_checked(o.checkpoint, sv, tv);
  std::vector<AlignmentSet> sets;
  std::vector<AttnMatrix> mats;
  for (const auto& [src_ids, tgt_ids] : encode_bitext(o.src, o.tgt, sv, tv)) {
    auto [nll, attn] = m.encode_decode_loss(src_ids, tgt_ids);
    (void)nll;
    AlignmentSet links;
    for (std::size_t ti = 0; ti + 1 < attn.size(); ++ti)
      links.emplace(argmax_lowest(attn[ti]), static_cast<int>(ti));
    sets.push_back(std::move(links));
    mats.push_back(std::move(attn));
  }
  return {std::move(sets), std::move(mats)};
}

void add_forced_decode_options(CLI::App* cmd, ForcedDecodeArgs& o) {
  cmd->add_option("--src", o.src, "source token file")->required();
  cmd->add_option("--tgt", o.tgt, "target token file (forced)")->required();
  cmd->add_option("--src-vocab", o.src_vocab)->required();
  cmd->add_option("--tgt-vocab", o.tgt_vocab)->required();
  cmd->add_option("--checkpoint", o.checkpoint)->required();
}

void cmd_align_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("align-eval",
                                 "forced-decode alignments scored against a gold file");
  struct Args {
    ForcedDecodeArgs fd;
    std::string gold, alignment_out;
  };
  auto o = std::make_shared<Args>();
  add_forced_decode_options(cmd, o->fd);
  cmd->add_option("--gold", o->gold, "gold alignments (Pharaoh)")->required();
  cmd->add_option("--alignment-out", o->alignment_out, "write machine alignments here");
  cmd->callback([o]() {
    auto [machine, mats] = forced_decode_all(o->fd);
    (void)mats;
    std::vector<AlignmentSet> gold = read_alignments(o->gold);
    if (gold.size() != machine.size())
      throw DataError(o->gold + ": " + std::to_string(gold.size()) + " lines for " +
                      std::to_string(machine.size()) + " sentence pairs");
    if (!o->alignment_out.empty()) write_alignments(o->alignment_out, machine);
    std::size_t inter = 0, m_total = 0, g_total = 0;
    for (std::size_t i = 0; i < machine.size(); ++i) {
      for (const auto& link : machine[i]) inter += gold[i].count(link);
      m_total += machine[i].size();
      g_total += gold[i].size();
    }
    double p = m_total ? static_cast<double>(inter) / m_total : 1.0;
    double r = g_total ? static_cast<double>(inter) / g_total : 1.0;
    double f1 = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
    char line[96];
    std::snprintf(line, sizeof line, "P=%.4f R=%.4f F1=%.4f", p, r, f1);
    std::cout << line << '\n';
  });
}

void cmd_rep_stats(CLI::App& app) {
  auto* cmd = app.add_subcommand("rep-stats", "repetition statistics of a token file");
  struct Args {
    std::string input;
  };
  auto o = std::make_shared<Args>();
  cmd->add_option("--input", o->input, "token file")->required();
  cmd->callback([o]() {
    RepetitionStats st = repetition_stats(read_token_lines(o->input));
    char line[96];
    std::snprintf(line, sizeof line, "count=%lld avg_len=%.4f",
                  static_cast<long long>(st.count), st.avg_length);
    std::cout << line << '\n';
  });
}

void cmd_dump_attn(CLI::App& app) {
  auto* cmd = app.add_subcommand("dump-attn", "forced-decode attention matrices");
  struct Args {
    ForcedDecodeArgs fd;
    std::string output;
  };
  auto o = std::make_shared<Args>();
  add_forced_decode_options(cmd, o->fd);
  cmd->add_option("--output", o->output, "dump file ('-' or empty: stdout)");
  cmd->callback([o]() {
    auto [sets, mats] = forced_decode_all(o->fd);
    (void)sets;
    auto out_file = open_output(o->output);
    write_attention_dump(out_file ? *out_file : std::cout, mats);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attention-variant NMT toolkit"};
  app.require_subcommand(1);
  cmd_learn_bpe(app);
  cmd_apply_bpe(app);
  cmd_build_vocab(app);
  cmd_train_lexicon(app);
  cmd_train(app);
  cmd_translate(app);
  cmd_eval(app);
  cmd_align_eval(app);
  cmd_rep_stats(app);
  cmd_dump_attn(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const tatn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
