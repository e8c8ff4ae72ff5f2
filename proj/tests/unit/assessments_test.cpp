#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <random>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/assessments/bfi.hpp"
#include "persona_lab/assessments/mbti.hpp"
#include "persona_lab/assessments/responses.hpp"
#include "persona_lab/common/error.hpp"
#include "persona_lab/common/hash.hpp"
#include "persona_lab/common/records.hpp"
#include "persona_lab/interview/engine.hpp"
#include "test_support.hpp"

using namespace persona_lab;
using namespace persona_lab::assessments;

namespace {

const std::filesystem::path kData = PERSONA_LAB_DATA_DIR;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::NotFound;
}

std::string failed_rule(const Battery& b) {
  try {
    validate_battery(b);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BatteryShapeError);
    return e.details().at("rule");
  }
  return "";
}

Battery sample() { return load_battery(kData / "sample_battery.jsonl"); }

Bfi44Response uniform(int v) { return Bfi44Response{std::vector<int>(44, v)}; }

// Item-by-item oracle written independently of score_bfi44.
double oracle_score(const std::vector<int>& items, const std::vector<KeyEntry>& key, Trait t) {
  double raw = 0, n = 0;
  for (const auto& e : key) {
    if (e.trait != t) continue;
    int v = items[e.item - 1];
    if (e.reverse) v = 6 - v;
    raw += v;
    n += 1;
  }
  const double lo = n * 1, hi = n * 5;
  return 1 + 39 * (raw - lo) / (hi - lo);
}

}  // namespace

TEST(Bfi44Key, StandardKeyShape) {
  auto key = Bfi44Key::standard();
  EXPECT_EQ(key.entries().size(), 44u);
  EXPECT_EQ(key.items_for(Trait::E).size(), 8u);
  EXPECT_EQ(key.items_for(Trait::A).size(), 9u);
  EXPECT_EQ(key.items_for(Trait::C).size(), 9u);
  EXPECT_EQ(key.items_for(Trait::N).size(), 8u);
  EXPECT_EQ(key.items_for(Trait::O).size(), 10u);
  EXPECT_EQ(Bfi44Key::load(kData / "bfi44_key.jsonl").entries(), key.entries());
}

TEST(Bfi44Key, UnassignedOrDoubleAssigned) {
  auto entries = Bfi44Key::standard().entries();
  auto missing = entries;
  missing.pop_back();
  EXPECT_EQ(code_of([&] { Bfi44Key::from(missing); }), ErrorCode::InvalidKey);
  auto doubled = entries;
  doubled.push_back({1, Trait::O, false});
  EXPECT_EQ(code_of([&] { Bfi44Key::from(doubled); }), ErrorCode::InvalidKey);
}

TEST(ScoreBfi44, ExtremesAndMidpoint) {
  auto key = Bfi44Key::standard();
  // Minimal extraversion: forward items 1, reverse items 5.
  Bfi44Response r = uniform(3);
  for (const auto& e : key.items_for(Trait::E)) r.items[e.item - 1] = e.reverse ? 5 : 1;
  EXPECT_DOUBLE_EQ(score_bfi44(r, key)[Trait::E], 1.0);
  for (const auto& e : key.items_for(Trait::E)) r.items[e.item - 1] = e.reverse ? 1 : 5;
  EXPECT_DOUBLE_EQ(score_bfi44(r, key)[Trait::E], 40.0);
  // All 3s: raw is exactly the midpoint for every trait.
  auto mid = score_bfi44(uniform(3), key);
  for (Trait t : kTraits) EXPECT_DOUBLE_EQ(mid[t], 20.5);
}

TEST(ScoreBfi44, OutOfRange) {
  auto key = Bfi44Key::standard();
  auto r = uniform(3);
  r.items[10] = 6;
  EXPECT_EQ(code_of([&] { score_bfi44(r, key); }), ErrorCode::OutOfRangeItem);
  EXPECT_EQ(code_of([&] { score_bfi44(Bfi44Response{{1, 2, 3}}, key); }),
            ErrorCode::OutOfRangeItem);
}

TEST(ScoreBfi44, MatchesOracleOnRandomKeysAndResponses) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> perm(44);
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<KeyEntry> entries;
    for (int i = 0; i < 44; ++i) {
      // First five items guarantee each trait is present.
      Trait t = i < 5 ? kTraits[i] : kTraits[rng() % 5];
      entries.push_back({perm[i], t, rng() % 2 == 0});
    }
    auto key = Bfi44Key::from(entries);
    Bfi44Response r;
    for (int i = 0; i < 44; ++i) r.items.push_back(1 + static_cast<int>(rng() % 5));
    auto s = score_bfi44(r, key);
    for (Trait t : kTraits) EXPECT_NEAR(s[t], oracle_score(r.items, entries, t), 1e-9);
  }
}

TEST(ScoreBfi44, ForwardIncreaseNeverFlipsHighToLow) {
  auto key = Bfi44Key::standard();
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Bfi44Response r;
    for (int i = 0; i < 44; ++i) r.items.push_back(1 + static_cast<int>(rng() % 5));
    const auto before = binarize_bigfive(score_bfi44(r, key));
    const auto& e = key.entries()[rng() % 44];
    if (e.reverse || r.items[e.item - 1] == 5) continue;
    r.items[e.item - 1] += 1;
    const auto after = binarize_bigfive(score_bfi44(r, key));
    if (before[e.trait]) EXPECT_TRUE(after[e.trait]);
  }
}

TEST(Binarize, Bins) {
  EXPECT_FALSE(binarize_score(20));
  EXPECT_TRUE(binarize_score(21));
  EXPECT_TRUE(binarize_score(40));
  EXPECT_FALSE(binarize_score(1));
  EXPECT_FALSE(binarize_score(20.5));
  EXPECT_TRUE(binarize_score(20.51));
  EXPECT_FALSE(binarize_score(20.25));
}

TEST(Mbti, ParseAndFormat) {
  EXPECT_EQ(parse_mbti("INFP").types, std::vector<std::string>{"INFP"});
  EXPECT_EQ(parse_mbti("ENFP / INFP").types, (std::vector<std::string>{"ENFP", "INFP"}));
  EXPECT_EQ(parse_mbti("infp or enfp").types, (std::vector<std::string>{"ENFP", "INFP"}));
  EXPECT_EQ(parse_mbti("ENFP,INFP").types, (std::vector<std::string>{"ENFP", "INFP"}));
  EXPECT_EQ(code_of([] { parse_mbti("XNFP"); }), ErrorCode::InvalidMbti);
  EXPECT_EQ(code_of([] { parse_mbti("INFP/ENFP/ISTJ"); }), ErrorCode::InvalidMbti);
  EXPECT_EQ(code_of([] { parse_mbti(""); }), ErrorCode::InvalidMbti);
  EXPECT_EQ(mbti_hamming("INTJ", "ESFP"), 4);
  EXPECT_EQ(mbti_hamming("INTJ", "INTP"), 1);
}

TEST(Mbti, RoundTripAllPairs) {
  std::vector<std::string> all;
  for (char a : {'I', 'E'})
    for (char b : {'N', 'S'})
      for (char c : {'T', 'F'})
        for (char d : {'J', 'P'}) all.push_back({a, b, c, d});
  for (const auto& x : all) {
    for (const auto& y : all) {
      auto r = parse_mbti(x + " / " + y);
      EXPECT_EQ(parse_mbti(format_mbti(r)), r);
    }
  }
}

TEST(Battery, SampleIsValid) {
  auto b = sample();
  EXPECT_NO_THROW(validate_battery(b));
  int likert = 0, ranking = 0, choice = 0;
  for (const auto& i : b.items) {
    likert += i.qtype == QType::Likert;
    ranking += i.qtype == QType::Ranking;
    choice += i.qtype == QType::Choice;
  }
  EXPECT_EQ(likert, 7);
  EXPECT_EQ(ranking, 1);
  EXPECT_EQ(choice, 17);
  // The saved form is canonical, so the file hash equals the battery hash.
  EXPECT_EQ(battery_hash(b), sha256_hex(read_text_file(kData / "sample_battery.jsonl")));
}

TEST(Battery, EachRuleFailsWhenMutated) {
  {
    auto b = sample();
    b.items.pop_back();
    EXPECT_EQ(failed_rule(b), "item_count");
  }
  {
    auto b = sample();
    b.items[3].item_id = "Q26";
    EXPECT_EQ(failed_rule(b), "item_ids");
  }
  {
    auto b = sample();
    b.items[0].scale = LikertScale{};
    EXPECT_EQ(failed_rule(b), "item_shape");
  }
  {
    auto b = sample();
    b.items[8].probe_partner = "Q10";  // Q9 now points elsewhere
    EXPECT_EQ(failed_rule(b), "probe_symmetry");
  }
  {
    // Q8 <-> Q10 is symmetric but not a reference pair.
    auto b = sample();
    b.items[7].probe_partner = "Q10";
    b.items[9].probe_partner = "Q8";
    b.items[8].probe_partner.reset();
    b.items[8].probe_alignment.reset();
    EXPECT_EQ(failed_rule(b), "probe_pairs");
  }
  {
    auto b = sample();
    b.items[7].probe_alignment->map.erase("A");
    EXPECT_EQ(failed_rule(b), "probe_alignment");
  }
  {
    auto b = sample();
    b.items[3].category = Category::Value;
    EXPECT_EQ(failed_rule(b), "category_map");
  }
  {
    auto b = sample();
    b.items[0].qtype = QType::Ranking;
    b.items[0].options.clear();
    b.items[0].rank_items = {"x", "y"};
    EXPECT_EQ(failed_rule(b), "qtype_layout");
  }
}

TEST(Battery, ChecksCanBeRelaxed) {
  auto b = sample();
  b.items[3].category = Category::Value;
  EXPECT_NO_THROW(validate_battery(b, {true, false}));
}

TEST(Battery, SaveLoadRoundTrip) {
  test_support::TempDir dir;
  auto b = sample();
  save_battery(dir / "b.jsonl", b);
  EXPECT_EQ(load_battery(dir / "b.jsonl").items, b.items);
}

TEST(Answers, Validity) {
  auto b = sample();
  EXPECT_FALSE(answer_problem(b.at("Q1"), ChoiceAnswer{"B"}).has_value());
  EXPECT_TRUE(answer_problem(b.at("Q1"), ChoiceAnswer{"Z"}).has_value());
  EXPECT_TRUE(answer_problem(b.at("Q5"), LikertAnswer{6}).has_value());
  EXPECT_FALSE(answer_problem(b.at("Q16"), LikertAnswer{7}).has_value());
  EXPECT_TRUE(answer_problem(b.at("Q5"), ChoiceAnswer{"A"}).has_value());
  const auto& q17 = b.at("Q17");
  auto perm = q17.rank_items;
  EXPECT_FALSE(answer_problem(q17, RankingAnswer{perm}).has_value());
  perm[1] = perm[0];
  EXPECT_TRUE(answer_problem(q17, RankingAnswer{perm}).has_value());
}

TEST(Answers, ParseText) {
  auto b = sample();
  EXPECT_EQ(parse_answer_text(b.at("Q1"), "B"), Answer(ChoiceAnswer{"B"}));
  EXPECT_EQ(parse_answer_text(b.at("Q1"), "**b)** the closer job"), Answer(ChoiceAnswer{"B"}));
  EXPECT_EQ(parse_answer_text(b.at("Q1"), "Option C"), Answer(ChoiceAnswer{"C"}));
  EXPECT_EQ(parse_answer_text(b.at("Q1"), "The closer job with lower pay"),
            Answer(ChoiceAnswer{"B"}));
  EXPECT_EQ(parse_answer_text(b.at("Q5"), "4 (agree)"), Answer(LikertAnswer{4}));
  EXPECT_EQ(parse_answer_text(b.at("Q17"), "Health > family > Career > Friendships > Personal growth"),
            Answer(RankingAnswer{{"Health", "Family", "Career", "Friendships", "Personal growth"}}));
  EXPECT_EQ(code_of([&] { parse_answer_text(b.at("Q5"), "agree"); }), ErrorCode::InvalidAnswer);
}

TEST(Answers, ProbeAlignment) {
  auto b = sample();
  // Equal split: C in Q9 corresponds to A in Q8.
  EXPECT_EQ(align_partner_answer(b.at("Q8"), b.at("Q9"), ChoiceAnswer{"C"}),
            Answer(ChoiceAnswer{"A"}));
  EXPECT_EQ(align_partner_answer(b.at("Q11"), b.at("Q12"), LikertAnswer{2}),
            Answer(LikertAnswer{4}));
  EXPECT_EQ(align_partner_answer(b.at("Q19"), b.at("Q20"), LikertAnswer{5}),
            Answer(ChoiceAnswer{"A"}));
  EXPECT_EQ(code_of([&] { align_partner_answer(b.at("Q9"), b.at("Q8"), ChoiceAnswer{"A"}); }),
            ErrorCode::MissingAlignment);
}

TEST(Answers, JsonRoundTrip) {
  for (const Answer& a : {Answer(ChoiceAnswer{"A"}), Answer(LikertAnswer{3}),
                          Answer(RankingAnswer{{"x", "y"}})}) {
    EXPECT_EQ(answer_from_json(to_json(a)), a);
  }
}

TEST(RecordResponses, ValidationAndCompletion) {
  test_support::TempDir dir;
  store::SessionStore st(dir.path(), false);
  interview::InterviewEngine engine(st, interview::InterviewConfig{});
  engine.start_session("P01");
  auto b = sample();
  EXPECT_EQ(code_of([&] { record_responses(st, "P01", b, {{"Q5", LikertAnswer{6}}}, false, "t"); }),
            ErrorCode::InvalidAnswer);
  auto ranks = b.at("Q17").rank_items;
  ranks[1] = ranks[0];
  EXPECT_EQ(code_of([&] {
              record_responses(st, "P01", b, {{"Q17", RankingAnswer{ranks}}}, false, "t");
            }),
            ErrorCode::InvalidAnswer);

  ItemAnswers partial;
  for (const auto& item : b.items) {
    if (item.item_id == "Q25") continue;
    if (item.qtype == QType::Choice) partial[item.item_id] = ChoiceAnswer{"A"};
    if (item.qtype == QType::Likert) partial[item.item_id] = LikertAnswer{3};
    if (item.qtype == QType::Ranking) partial[item.item_id] = RankingAnswer{item.rank_items};
  }
  EXPECT_EQ(code_of([&] { record_responses(st, "P01", b, partial, true, "t"); }),
            ErrorCode::IncompleteSet);
  auto saved = record_responses(st, "P01", b, partial, false, "t");
  EXPECT_FALSE(saved.complete);
  auto done = record_responses(st, "P01", b, {{"Q25", ChoiceAnswer{"B"}}}, true, "t");
  EXPECT_TRUE(done.complete);
  EXPECT_EQ(done.answers.size(), 25u);
  EXPECT_EQ(load_responses(st, "P01"), done);
}

TEST(RecordAssessments, BfiAndMbtiPersisted) {
  test_support::TempDir dir;
  store::SessionStore st(dir.path(), false);
  interview::InterviewEngine engine(st, interview::InterviewConfig{});
  engine.start_session("P02");
  auto rec = record_bfi44(st, "P02", uniform(3), Bfi44Key::standard(), "t");
  EXPECT_DOUBLE_EQ(rec.scores[Trait::O], 20.5);
  auto loaded = load_bfi44(st, "P02");
  ASSERT_TRUE(loaded);
  EXPECT_EQ(loaded->scores, rec.scores);
  EXPECT_EQ(loaded->bits, rec.bits);
  record_mbti(st, "P02", parse_mbti("ENFP/INFP"), "t");
  EXPECT_EQ(load_mbti(st, "P02")->types, (std::vector<std::string>{"ENFP", "INFP"}));
}

TEST(ResponsesFile, TextAndRecordAnswers) {
  test_support::TempDir dir;
  std::ofstream(dir / "r.jsonl") << "persona-lab/v1 responses\n"
                                 << R"({"alias":"P01","item_id":"Q1","answer":"B"})" << "\n"
                                 << R"({"alias":"P01","item_id":"Q5","answer":{"likert":2}})" << "\n";
  auto m = read_responses_file(dir / "r.jsonl", sample());
  EXPECT_EQ(m.at("P01").at("Q1"), Answer(ChoiceAnswer{"B"}));
  EXPECT_EQ(m.at("P01").at("Q5"), Answer(LikertAnswer{2}));
}
