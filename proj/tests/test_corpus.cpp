#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>
#include <vector>

#include "tatn/corpus.hpp"
#include "testutil.hpp"

using namespace tatn;

TEST_CASE("utf8 validation accepts well-formed text and locates bad bytes") {
  CHECK(utf8_valid(""));
  CHECK(utf8_valid("plain ascii"));
  CHECK(utf8_valid("héllo wörld"));
  CHECK(utf8_valid("中文 日本語 한국어"));
  CHECK(utf8_valid("emoji \xF0\x9F\x98\x80 ok"));

  std::size_t pos = 999;
  CHECK(!utf8_valid("ab\xC0zz", &pos));  // truncated 2-byte lead
  CHECK(pos == 2);
  CHECK(!utf8_valid("\x80", &pos));  // bare continuation byte
  CHECK(pos == 0);
  CHECK(!utf8_valid("ok\xE0\x80\x80", &pos));  // overlong encoding
  CHECK(pos == 2);
  CHECK(!utf8_valid("\xED\xA0\x80", &pos));  // UTF-16 surrogate range
  CHECK(pos == 0);
  CHECK(!utf8_valid("\xF5\x80\x80\x80", &pos));  // beyond U+10FFFF
  CHECK(pos == 0);
}

TEST_CASE("utf8 split yields one string per code point") {
  auto parts = utf8_split("aé中");
  REQUIRE(parts.size() == 3);
  CHECK(parts[0] == "a");
  CHECK(parts[1] == "é");
  CHECK(parts[2] == "中");
}

TEST_CASE("tokenization collapses whitespace runs") {
  CHECK(split_tokens("a b c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_tokens("  a\t\tb   c  ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_tokens("one\r") == std::vector<std::string>{"one"});
  CHECK(split_tokens("") == std::vector<std::string>{});
  CHECK(split_tokens("   \t ") == std::vector<std::string>{});
  CHECK(join_tokens({"a", "b", "c"}) == "a b c");
  CHECK(join_tokens({}) == "");
}

TEST_CASE("line reading validates encoding and names the offending line") {
  testutil::TempDir dir;
  std::string good = dir.file("good.txt");
  testutil::write_file(good, "first line\nsecond line\n");
  auto lines = read_lines(good);
  REQUIRE(lines.size() == 2);
  CHECK(lines[1] == "second line");

  std::string bad = dir.file("bad.txt");
  testutil::write_file(bad, "fine\nbro\xFFken\n");
  try {
    read_lines(bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find(bad) != std::string::npos);
    CHECK(msg.find(":2:") != std::string::npos);  // line number
    CHECK(msg.find("byte 3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_lines(dir.file("nope.txt")), DataError);
}

TEST_CASE("token lines round-trip through write_lines") {
  testutil::TempDir dir;
  std::string path = dir.file("c.txt");
  write_lines(path, {"a b", "", "c"});
  auto toks = read_token_lines(path);
  REQUIRE(toks.size() == 3);
  CHECK(toks[0] == std::vector<std::string>{"a", "b"});
  CHECK(toks[1].empty());
  CHECK(toks[2] == std::vector<std::string>{"c"});
}

TEST_CASE("a fresh vocabulary holds exactly the reserved entries") {
  Vocabulary v;
  REQUIRE(v.size() == kNumSpecials);
  CHECK(v.word(kPadId) == kPadTok);
  CHECK(v.word(kBosId) == kBosTok);
  CHECK(v.word(kEosId) == kEosTok);
  CHECK(v.word(kUnkId) == kUnkTok);
  CHECK(v.id("anything") == kUnkId);
}

TEST_CASE("vocabulary build orders by frequency then lexicographically") {
  std::vector<std::vector<std::string>> corpus = {
      {"b", "a", "b"}, {"c", "a", "b"}, {"d"}};
  // counts: b=3, a=2, c=1, d=1
  Vocabulary v = Vocabulary::build(corpus, 100, 1);
  REQUIRE(v.size() == kNumSpecials + 4);
  CHECK(v.word(kNumSpecials + 0) == "b");
  CHECK(v.word(kNumSpecials + 1) == "a");
  CHECK(v.word(kNumSpecials + 2) == "c");  // ties c/d break lexicographically
  CHECK(v.word(kNumSpecials + 3) == "d");
  CHECK(v.count(kNumSpecials + 0) == 3);
  CHECK(v.id("b") == kNumSpecials);
  CHECK(v.contains("d"));
  CHECK(!v.contains("z"));

  // max_size truncates after sorting; min_count filters first
  Vocabulary small = Vocabulary::build(corpus, kNumSpecials + 2, 1);
  CHECK(small.size() == kNumSpecials + 2);
  CHECK(small.id("c") == kUnkId);
  Vocabulary filtered = Vocabulary::build(corpus, 100, 2);
  CHECK(filtered.size() == kNumSpecials + 2);

  CHECK_THROWS_AS(Vocabulary::build(corpus, 3, 1), ContractError);  // below specials
}

TEST_CASE("encode appends the end marker and decode strips the specials") {
  Vocabulary v = Vocabulary::build({{"hello", "world"}}, 100, 1);
  auto ids = encode({"hello", "unknown", "world"}, v);
  REQUIRE(ids.size() == 4);
  CHECK(ids[1] == kUnkId);
  CHECK(ids[3] == kEosId);
  auto words = decode({kBosId, v.id("world"), kUnkId, kEosId, kPadId}, v);
  CHECK(words == std::vector<std::string>{"world", kUnkTok});
}

TEST_CASE("vocabularies save and load losslessly") {
  testutil::TempDir dir;
  Vocabulary v = Vocabulary::build({{"x", "y", "x"}, {"z"}}, 100, 1);
  std::string path = dir.file("vocab.txt");
  v.save(path);
  Vocabulary back = Vocabulary::load(path);
  REQUIRE(back.size() == v.size());
  for (int i = 0; i < v.size(); ++i) {
    CHECK(back.word(i) == v.word(i));
    CHECK(back.count(i) == v.count(i));
  }

  std::string again = dir.file("vocab2.txt");
  back.save(again);
  CHECK(testutil::read_file(path) == testutil::read_file(again));

  CHECK_THROWS_AS(Vocabulary::load(dir.file("absent.txt")), DataError);
  testutil::write_file(dir.file("corrupt.txt"), "#vocab v1\nnot-a-special\t1\n");
  CHECK_THROWS_AS(Vocabulary::load(dir.file("corrupt.txt")), DataError);
  testutil::write_file(dir.file("nohdr.txt"), "<pad>\t0\n");
  CHECK_THROWS_AS(Vocabulary::load(dir.file("nohdr.txt")), DataError);
}
