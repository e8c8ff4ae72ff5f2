#include <gtest/gtest.h>

#include <fstream>

#include "persona_lab/common/alias.hpp"
#include "persona_lab/common/clock.hpp"
#include "persona_lab/common/error.hpp"
#include "persona_lab/common/hash.hpp"
#include "persona_lab/common/random.hpp"
#include "persona_lab/common/records.hpp"
#include "persona_lab/common/text.hpp"
#include "test_support.hpp"

using namespace persona_lab;

TEST(Text, NormalizeLabel) {
  EXPECT_EQ(text::normalize_label("Coping / Constraint"), "coping constraint");
  EXPECT_EQ(text::normalize_label("  Value-Based!! "), "value based");
  EXPECT_EQ(text::collapse_whitespace("  a \n\t b  "), "a b");
}

TEST(Alias, Pattern) {
  EXPECT_TRUE(is_valid_alias("P01"));
  EXPECT_TRUE(is_valid_alias("P20"));
  EXPECT_FALSE(is_valid_alias("participant-1"));
  EXPECT_FALSE(is_valid_alias("P1"));
  EXPECT_FALSE(is_valid_alias("P001"));
  EXPECT_FALSE(is_valid_alias("p01"));
  try {
    require_valid_alias("participant-1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidAlias);
    EXPECT_EQ(e.token(), "INVALID_ALIAS");
  }
}

TEST(Hash, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(random_hex(8).size(), 16u);
}

TEST(Clock, Rfc3339RoundTrip) {
  auto t = parse_rfc3339("2026-01-02T03:04:05Z");
  EXPECT_EQ(to_rfc3339(t), "2026-01-02T03:04:05Z");
  EXPECT_EQ(to_rfc3339(fixed_clock(t)()), "2026-01-02T03:04:05Z");
}

TEST(Random, DeterministicAndBounded) {
  SeededRng a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    auto x = a.below(25);
    EXPECT_EQ(x, b.below(25));
    EXPECT_LT(x, 25u);
    differs |= (x != c.below(25));
  }
  EXPECT_TRUE(differs);
}

TEST(Records, CanonicalRoundTrip) {
  test_support::TempDir dir;
  const json rec = {{"zeta", 1}, {"alpha", {{"b", "ü"}, {"a", nullptr}}}};
  write_record_file(dir / "f", "thing", {rec});
  const std::string body = read_text_file(dir / "f");
  EXPECT_EQ(body, "persona-lab/v1 thing\n{\"alpha\":{\"a\":null,\"b\":\"ü\"},\"zeta\":1}\n");
  auto file = read_record_file(dir / "f", "thing");
  ASSERT_EQ(file.records.size(), 1u);
  EXPECT_EQ(canonical(file.records[0]), canonical(rec));
}

TEST(Records, TruncatedLineIsCorrupt) {
  test_support::TempDir dir;
  std::ofstream(dir / "f") << "persona-lab/v1 thing\n{\"a\":1}\n{\"a\":";
  try {
    read_record_file(dir / "f", "thing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
    EXPECT_EQ(e.details().at("line"), 3);
  }
}

TEST(Records, WrongHeaderRejected) {
  test_support::TempDir dir;
  std::ofstream(dir / "f") << "persona-lab/v1 other\n";
  EXPECT_THROW(read_record_file(dir / "f", "thing"), Error);
}

TEST(Records, InvalidUtf8Rejected) {
  EXPECT_THROW(canonical(json(std::string("\xff\xfe"))), Error);
}
