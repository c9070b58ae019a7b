#include <gtest/gtest.h>

#include <sstream>

#include "swp/core/error.hpp"
#include "swp/core/jsonl.hpp"
#include "swp/core/rng.hpp"
#include "swp/core/types.hpp"
#include "support.hpp"

using namespace swp;

TEST(Tone, CanonicalizesAndValidates) {
  EXPECT_EQ(Tone::make("  Grateful ").text(), "grateful");
  EXPECT_EQ(Tone::make("well-meaning").text(), "well-meaning");
  for (const char* bad : {"", "  ", "gr8ful", "-happy", "two words", "happy!"}) {
    try {
      Tone::make(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_item);
    }
  }
}

TEST(Sentence, RequiresMoreThanFiveWords) {
  EXPECT_THROW(Sentence::make("one two three four five"), Error);
  const auto s = Sentence::make("  one two  three four five six ");
  EXPECT_EQ(s.word_count(), 6u);
  EXPECT_EQ(s.text(), "one two  three four five six");
}

TEST(ChainItem, JsonRoundTrip) {
  const ChainItem a = Tone::make("polite");
  const ChainItem b = Sentence::make("Thank you so much for helping me today");
  EXPECT_EQ(chain_item_from_json(to_json(a)), a);
  EXPECT_EQ(chain_item_from_json(to_json(b)), b);
  EXPECT_THROW(chain_item_from_json(json{{"color", "red"}}), Error);
}

TEST(Rng, DeterministicAndSplit) {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
  EXPECT_EQ(derive_seed(9, hash_string("x"), 4), derive_seed(9, hash_string("x"), 4));
}

TEST(Rng, UniformAndIndexRanges) {
  Rng r(1);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++hits[r.index(7)];
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
}

TEST(Rng, NormalMoments) {
  Rng r(3);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Jsonl, CorruptLineIsNamed) {
  std::istringstream in("{\"a\":1}\n\n{\"a\":2}\n{oops\n");
  int seen = 0;
  try {
    for_each_jsonl(in, [&](const json&, std::size_t) { ++seen; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::corrupt_state);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
  EXPECT_EQ(seen, 2);
}

TEST(Jsonl, WriterAppends) {
  const auto dir = test::scratch_dir("jsonl");
  {
    JsonlWriter w(dir / "log.jsonl");
    w.write({{"n", 1}});
  }
  {
    JsonlWriter w(dir / "log.jsonl");
    w.write({{"n", 2}});
  }
  std::vector<int> got;
  for_each_jsonl(dir / "log.jsonl", [&](const json& j, std::size_t) { got.push_back(j.at("n")); });
  EXPECT_EQ(got, (std::vector<int>{1, 2}));
}

TEST(Error, WhatCarriesCode) {
  const Error e(Errc::quota_exhausted, "done");
  EXPECT_STREQ(e.what(), "quota-exhausted: done");
}
