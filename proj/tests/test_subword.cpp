#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tatn/subword.hpp"
#include "testutil.hpp"

using namespace tatn;

TEST_CASE("merge learning follows pair frequencies with lexicographic ties") {
  // Frequencies chosen so the first rounds are decidable by hand:
  //   newest x6 and widest x3 share "e s", "s t", "t </w>" (count 9 each);
  //   the lexicographically smallest pair wins each tie.
  std::map<std::string, std::int64_t> freq = {
      {"low", 5}, {"lower", 2}, {"newest", 6}, {"widest", 3}};
  MergeTable tab = learn_bpe(freq, 10);
  std::vector<std::pair<std::string, std::string>> want = {
      {"e", "s"},         {"es", "t"},  {"est", "</w>"}, {"l", "o"},
      {"lo", "w"},        {"e", "w"},   {"ew", "est</w>"}, {"n", "ewest</w>"},
      {"low", "</w>"},    {"d", "est</w>"}};
  REQUIRE(tab.merges.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(tab.merges[i].first == want[i].first);
    CHECK(tab.merges[i].second == want[i].second);
  }

  CHECK(apply_bpe("newest", tab) == std::vector<std::string>{"newest</w>"});
  CHECK(apply_bpe("lowest", tab) == std::vector<std::string>{"low", "est</w>"});
  CHECK(apply_bpe("low", tab) == std::vector<std::string>{"low</w>"});
  CHECK(apply_bpe("wider", tab) ==
        std::vector<std::string>{"w", "i", "d", "e", "r</w>"});
}

TEST_CASE("learning stops when no pair repeats") {
  std::map<std::string, std::int64_t> freq = {{"abc", 1}, {"def", 1}};
  CHECK(learn_bpe(freq, 100).merges.empty());

  MergeTable tab = learn_bpe({{"ab", 2}}, 100);
  // "a b </w>" appears twice: merges (a,b) then (ab,</w>), nothing more
  REQUIRE(tab.merges.size() == 2);
  CHECK(tab.merges[0] == std::pair<std::string, std::string>{"a", "b"});
  CHECK(tab.merges[1] == std::pair<std::string, std::string>{"ab", "</w>"});
}

TEST_CASE("a single learned merge attaches the marker afterwards") {
  MergeTable tab;
  tab.merges = {{"a", "b"}};
  tab.index();
  CHECK(apply_bpe("ab", tab) == std::vector<std::string>{"ab</w>"});
  CHECK(segment_symbols("ab", tab) == std::vector<std::string>{"ab", "</w>"});
}

TEST_CASE("unknown characters pass through as single symbols") {
  MergeTable tab = learn_bpe({{"aa", 3}}, 5);
  auto units = apply_bpe("aqa", tab);  // 'q' never seen while learning
  CHECK(undo_bpe(units) == std::vector<std::string>{"aqa"});
}

TEST_CASE("multibyte code points are never split") {
  MergeTable empty;
  empty.index();
  auto units = apply_bpe("héllo", empty);
  std::string joined;
  for (const auto& u : units) joined += u;
  CHECK(joined == std::string("héllo") + kEow);
  for (const auto& u : units) {
    CHECK(!u.empty());
    // no unit may start with a UTF-8 continuation byte
    CHECK((static_cast<unsigned char>(u[0]) & 0xC0) != 0x80);
  }
}

TEST_CASE("segmentation round-trips over random corpora") {
  std::mt19937_64 rng(61);
  const std::string alphabet[] = {"a", "b", "c", "d", "é", "ß", "中"};
  std::map<std::string, std::int64_t> freq;
  std::vector<std::vector<std::string>> sentences;
  for (int s = 0; s < 120; ++s) {
    std::vector<std::string> sent;
    int len = 1 + (int)(rng() % 8);
    for (int i = 0; i < len; ++i) {
      std::string tok;
      int tl = 1 + (int)(rng() % 6);
      for (int k = 0; k < tl; ++k) tok += alphabet[rng() % 7];
      sent.push_back(tok);
      ++freq[tok];
    }
    sentences.push_back(std::move(sent));
  }
  MergeTable tab = learn_bpe(freq, 50);

  int tokens = 0;
  for (const auto& sent : sentences) {
    auto units = apply_bpe_line(sent, tab);
    CHECK(undo_bpe(units) == sent);
    tokens += (int)sent.size();
  }
  CHECK(tokens > 500);
}

TEST_CASE("each merge adds at most one distinct symbol") {
  std::mt19937_64 rng(62);
  std::map<std::string, std::int64_t> freq;
  for (int i = 0; i < 60; ++i) {
    std::string tok;
    int tl = 1 + (int)(rng() % 7);
    for (int k = 0; k < tl; ++k) tok += char('a' + rng() % 5);
    freq[tok] += 1 + (int)(rng() % 4);
  }
  std::set<std::string> chars;
  for (const auto& [w, c] : freq)
    for (char ch : w) chars.insert(std::string(1, ch));

  MergeTable tab = learn_bpe(freq, 30);
  std::set<std::string> symbols;
  for (const auto& [w, c] : freq)
    for (const auto& sym : segment_symbols(w, tab)) symbols.insert(sym);
  // initial inventory: characters plus the standalone marker
  CHECK(symbols.size() <= chars.size() + 1 + tab.merges.size());
}

TEST_CASE("undo handles dangling tails and empty input") {
  CHECK(undo_bpe({}) == std::vector<std::string>{});
  CHECK(undo_bpe({"ab</w>"}) == std::vector<std::string>{"ab"});
  CHECK(undo_bpe({"a", "b</w>", "c"}) == std::vector<std::string>{"ab", "c"});
  CHECK(undo_bpe({"a", "b"}) == std::vector<std::string>{"ab"});
}

TEST_CASE("merge tables save and load byte-identically") {
  testutil::TempDir dir;
  MergeTable tab = learn_bpe({{"low", 5}, {"lower", 2}, {"newest", 6}}, 12);
  std::string path = dir.file("merges.txt");
  tab.save(path);
  MergeTable back = MergeTable::load(path);
  CHECK(back.merges == tab.merges);
  CHECK(back.eow == tab.eow);
  // ranks rebuilt: application behaves the same
  CHECK(apply_bpe("lowest", back) == apply_bpe("lowest", tab));

  std::string again = dir.file("merges2.txt");
  back.save(again);
  CHECK(testutil::read_file(path) == testutil::read_file(again));

  CHECK_THROWS_AS(MergeTable::load(dir.file("missing.txt")), DataError);
  testutil::write_file(dir.file("bad.txt"), "#not a merge file\n");
  CHECK_THROWS_AS(MergeTable::load(dir.file("bad.txt")), DataError);
}
