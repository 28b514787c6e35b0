#include "doctest.h"

#include <filesystem>

#include "dcmi/text/vocab.hpp"

using namespace dcmi::text;

TEST_CASE("split_tokens lowercases and splits on whitespace") {
  CHECK(split_tokens("  Good\tMOVIE\n ok ") == std::vector<std::string>{"good", "movie", "ok"});
  CHECK(split_tokens("").empty());
}

TEST_CASE("vocab ids start after the unknown token") {
  Vocab v({"a", "b"});
  CHECK(v.size() == 3);
  CHECK(v.id("a") == 1);
  CHECK(v.id("b") == 2);
  CHECK(v.id("zzz") == Vocab::kUnknown);
  CHECK(v.token(0) == Vocab::kUnknownToken);
  CHECK_THROWS(Vocab({"a", "a"}));
}

TEST_CASE("build_vocab keeps the most frequent tokens, ties lexicographic") {
  const auto v = build_vocab({"b a c", "a c", "a d"}, 3);
  CHECK(v.size() == 3);
  CHECK(v.id("a") == 1);
  CHECK(v.id("c") == 2);
  CHECK_FALSE(v.contains("b"));
  CHECK_THROWS_AS(build_vocab({}, 10), std::invalid_argument);
  CHECK_THROWS_AS(build_vocab({"a"}, 1), std::invalid_argument);
}

TEST_CASE("tokenize maps unknowns and truncates") {
  Vocab v({"x", "y"});
  CHECK(tokenize("x q y x", v, 3) == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("vocab round-trips through a file") {
  const auto path = std::filesystem::temp_directory_path() / "dcmi_test_vocab.txt";
  Vocab v({"one", "two", "three"});
  v.save(path);
  const auto back = Vocab::load(path);
  CHECK(back.size() == v.size());
  CHECK(back.id("three") == 3);
  std::filesystem::remove(path);
}
