#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "persona_lab/common/error.hpp"
#include "persona_lab/interview/engine.hpp"
#include "persona_lab/interview/output_parser.hpp"
#include "test_support.hpp"

using namespace persona_lab;
using namespace persona_lab::interview;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::NotFound;
}

struct Fixture {
  test_support::TempDir dir;
  store::SessionStore store{dir.path(), false};
  InterviewEngine engine{store, InterviewConfig{},
                         fixed_clock(parse_rfc3339("2026-03-01T10:00:00Z"))};
};

SessionState answer_all_core(const InterviewEngine& engine, SessionState s) {
  for (const auto& q : std::vector<Question>(s.core_questions)) {
    s = engine.submit_answer(s, q.question_id, "Answer to " + q.question_id + " about my life.");
  }
  return s;
}

SessionState answer_all_followups(const InterviewEngine& engine, SessionState s) {
  for (const auto& q : std::vector<Question>(s.followup_questions)) {
    s = engine.submit_answer(s, q.question_id, "More detail for " + q.question_id + ".");
  }
  return s;
}

}  // namespace

TEST(Domains, DefaultsAreTheTenDomains) {
  auto reg = DomainRegistry::defaults();
  ASSERT_EQ(reg.size(), 10u);
  EXPECT_EQ(reg.at(1).name, "Behavioral priorities & trade-offs");
  EXPECT_EQ(reg.at(10).name, "Life narrative & sense of meaning");
  for (const auto& d : reg.domains()) EXPECT_FALSE(d.basis_note.empty());
}

TEST(Domains, FileRoundTripAndValidation) {
  test_support::TempDir dir;
  auto reg = DomainRegistry::defaults();
  reg.save(dir / "d.jsonl");
  EXPECT_EQ(DomainRegistry::load(dir / "d.jsonl"), reg);
  auto nine = reg.domains();
  nine.pop_back();
  EXPECT_THROW(DomainRegistry::from(nine), Error);
  auto dup = reg.domains();
  dup[9].domain_id = 1;
  EXPECT_THROW(DomainRegistry::from(dup), Error);
}

TEST(Config, DefaultsValidateAndRenderBounds) {
  InterviewConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.followups.min, 3);
  EXPECT_EQ(c.followups.max, 6);
  const auto prompt = c.render_meta_prompt();
  EXPECT_NE(prompt.find("Identify 3–6 aspects"), std::string::npos);
  EXPECT_EQ(prompt.find("{{"), std::string::npos);
  EXPECT_NE(prompt.find("Do not give analysis or labels before Stage 2"), std::string::npos);
}

TEST(Config, InvalidBoundsAndTemperature) {
  InterviewConfig c;
  c.followups = {5, 4};
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
  InterviewConfig t;
  t.interview_temperature = 0.2;
  EXPECT_EQ(code_of([&] { t.validate(); }), ErrorCode::InvalidConfig);
}

TEST(Config, SnapshotRoundTrip) {
  InterviewConfig c;
  c.followups = {5, 6};
  auto back = InterviewConfig::from_snapshot(c.snapshot());
  EXPECT_EQ(back.snapshot(), c.snapshot());
}

TEST(Parser, TenTaggedQuestions) {
  auto qs = parse_core_questions(test_support::core_reply(), DomainRegistry::defaults());
  ASSERT_EQ(qs.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(qs[i].question_id, core_question_id(i + 1));
    EXPECT_EQ(*qs[i].domain_id, i + 1);
    EXPECT_EQ(qs[i].text.find("[Domain"), std::string::npos);
  }
}

TEST(Parser, PositionalAndNamedTags) {
  std::string raw;
  for (int i = 1; i <= 10; ++i) {
    raw += "**" + std::to_string(i) + ")** ";
    if (i == 3) raw += "[Fears & Deep Motivation] ";
    raw += "What happened when question " + std::to_string(i) + " applied?\n";
  }
  auto qs = parse_core_questions(raw, DomainRegistry::defaults());
  EXPECT_EQ(*qs[2].domain_id, 3);
  EXPECT_EQ(qs[2].text, "What happened when question 3 applied?");
}

TEST(Parser, NineQuestionsMalformed) {
  try {
    parse_core_questions(test_support::core_reply(9), DomainRegistry::defaults());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedModelOutput);
    EXPECT_EQ(e.details().at("raw"), test_support::core_reply(9));
  }
}

TEST(Parser, DuplicateDomainMalformed) {
  std::string raw = test_support::core_reply();
  const auto pos = raw.find("[Domain 4]");
  raw.replace(pos, 10, "[Domain 3]");
  EXPECT_EQ(code_of([&] { parse_core_questions(raw, DomainRegistry::defaults()); }),
            ErrorCode::MalformedModelOutput);
}

TEST(Parser, FollowupsStripPurposeAndLinkReferences) {
  SessionState s;
  s.answers.push_back({"C02", "I always pick the safer option at work.", 3, ""});
  s.core_questions.push_back({"C02", QuestionStage::Core, 2, "q", {}});
  const std::string raw =
      "Stage 2 – Follow-Up Questions:\n"
      "F1. You said \"the safer option\" - what would make you take the risk? "
      "[purpose: probe risk tolerance]\n"
      "F2. Going back to Q2, who else was affected? (Purpose: relational impact)\n"
      "F3. What does rest look like for you?\n";
  auto qs = parse_followups(raw, FollowUpBounds{}, s);
  ASSERT_EQ(qs.size(), 3u);
  EXPECT_EQ(qs[0].question_id, "F1");
  EXPECT_EQ(qs[0].text, "You said \"the safer option\" - what would make you take the risk?");
  EXPECT_EQ(qs[0].referenced_answer_ids, std::vector<std::string>{"C02"});
  EXPECT_EQ(qs[1].text, "Going back to Q2, who else was affected?");
  EXPECT_EQ(qs[1].referenced_answer_ids, std::vector<std::string>{"C02"});
  EXPECT_TRUE(qs[2].referenced_answer_ids.empty());
  EXPECT_FALSE(qs[0].domain_id.has_value());
}

TEST(Parser, FollowupCountBounds) {
  SessionState s;
  FollowUpBounds b;
  EXPECT_EQ(code_of([&] { parse_followups(test_support::followup_reply(1), b, s); }),
            ErrorCode::MalformedModelOutput);
  EXPECT_EQ(code_of([&] { parse_followups(test_support::followup_reply(7), b, s); }),
            ErrorCode::MalformedModelOutput);
  EXPECT_EQ(parse_followups(test_support::followup_reply(6), b, s).size(), 6u);
}

TEST(Parser, SummarySectionsAndProse) {
  auto reg = DomainRegistry::defaults();
  auto full = parse_summary(test_support::summary_reply(), reg);
  ASSERT_EQ(full.per_domain_insights.size(), 10u);
  EXPECT_EQ(full.per_domain_insights.at(7), "insight number 7.");
  auto prose = parse_summary("A thoughtful, cautious person who values family.", reg);
  EXPECT_TRUE(prose.per_domain_insights.empty());
  EXPECT_FALSE(prose.full_text.empty());
  EXPECT_EQ(code_of([&] { parse_summary("  \n ", reg); }), ErrorCode::MalformedModelOutput);
}

TEST(Parser, SummaryHeadersWithNames) {
  auto reg = DomainRegistry::defaults();
  std::string raw;
  for (const auto& d : reg.domains()) {
    raw += "### Domain " + std::to_string(d.domain_id) + " – " + d.name + "\n";
    raw += "Line one for " + std::to_string(d.domain_id) + ".\nLine two.\n\n";
  }
  auto s = parse_summary(raw, reg);
  ASSERT_EQ(s.per_domain_insights.size(), 10u);
  EXPECT_EQ(s.per_domain_insights.at(2), "Line one for 2. Line two.");
}

TEST(Engine, StartSessionAndDuplicates) {
  Fixture f;
  auto s = f.engine.start_session("P01");
  EXPECT_EQ(s.stage, Stage::Created);
  EXPECT_EQ(s.participant_alias, "P01");
  EXPECT_FALSE(s.session_id.empty());
  EXPECT_EQ(s.config_snapshot.at("followups").at("max"), 6);
  EXPECT_EQ(code_of([&] { f.engine.start_session("P01"); }), ErrorCode::DuplicateAlias);
  EXPECT_EQ(code_of([&] { f.engine.start_session("participant-1"); }), ErrorCode::InvalidAlias);
  InterviewConfig bad;
  bad.followups = {0, 2};
  EXPECT_EQ(code_of([&] { f.engine.start_session("P02", bad); }), ErrorCode::InvalidConfig);
  EXPECT_NE(f.engine.start_session("P02").session_id, s.session_id);
}

TEST(Engine, FullInterviewFlow) {
  Fixture f;
  auto gw = test_support::scripted_gateway(test_support::interview_script(5));
  auto s = f.engine.start_session("P01");
  s = f.engine.generate_core_questions(s, *gw);
  EXPECT_EQ(s.stage, Stage::CoreAsked);
  ASSERT_EQ(s.core_questions.size(), 10u);
  std::vector<int> domains;
  for (const auto& q : s.core_questions) domains.push_back(*q.domain_id);
  std::sort(domains.begin(), domains.end());
  EXPECT_EQ(domains, (std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_EQ(s.pending_questions().size(), 10u);

  for (int i = 0; i < 9; ++i) {
    s = f.engine.submit_answer(s, s.core_questions[i].question_id, "answer");
  }
  EXPECT_EQ(s.stage, Stage::CoreAsked);
  s = f.engine.submit_answer(s, s.core_questions[9].question_id, "last answer");
  EXPECT_EQ(s.stage, Stage::CoreAnswered);

  EXPECT_EQ(code_of([&] { f.engine.generate_summary(s, *gw); }), ErrorCode::WrongStage);

  s = f.engine.generate_followups(s, *gw);
  EXPECT_EQ(s.stage, Stage::FollowUpsAsked);
  ASSERT_EQ(s.followup_questions.size(), 5u);
  EXPECT_EQ(s.pending_questions().size(), 5u);
  EXPECT_EQ(s.followup_questions[0].referenced_answer_ids, std::vector<std::string>{"C01"});

  EXPECT_EQ(code_of([&] { f.engine.submit_answer(s, "C01", "again"); }), ErrorCode::WrongStage);
  s = answer_all_followups(f.engine, s);
  EXPECT_EQ(s.stage, Stage::FollowUpsAnswered);
  EXPECT_TRUE(s.pending_questions().empty());

  s = f.engine.generate_summary(s, *gw);
  EXPECT_EQ(s.stage, Stage::Summarized);
  EXPECT_EQ(s.summary->per_domain_insights.size(), 10u);

  s = f.engine.close_session(s);
  EXPECT_EQ(s.stage, Stage::Closed);
  EXPECT_EQ(f.store.load_session("P01"), s);
}

TEST(Engine, SubmitAnswerGuards) {
  Fixture f;
  auto gw = test_support::scripted_gateway(test_support::interview_script());
  auto s = f.engine.start_session("P03");
  EXPECT_EQ(code_of([&] { f.engine.submit_answer(s, "C01", "x"); }), ErrorCode::WrongStage);
  s = f.engine.generate_core_questions(s, *gw);
  EXPECT_EQ(code_of([&] { f.engine.submit_answer(s, "C99", "x"); }),
            ErrorCode::UnknownQuestion);
  EXPECT_EQ(code_of([&] { f.engine.submit_answer(s, "C01", "  \n\t"); }),
            ErrorCode::EmptyAnswer);
  s = f.engine.submit_answer(s, "C01", "fine");
  EXPECT_EQ(code_of([&] { f.engine.submit_answer(s, "C01", "again"); }),
            ErrorCode::AlreadyAnswered);
}

TEST(Engine, StaleStateIsSeqConflict) {
  Fixture f;
  auto gw = test_support::scripted_gateway(test_support::interview_script());
  auto s = f.engine.start_session("P04");
  s = f.engine.generate_core_questions(s, *gw);
  auto stale = s;
  f.engine.submit_answer(s, "C01", "first writer");
  EXPECT_EQ(code_of([&] { f.engine.submit_answer(stale, "C02", "second"); }),
            ErrorCode::SeqConflict);
}

TEST(Engine, MalformedRetriedOnceThenFails) {
  Fixture f;
  // First reply short by one; the repair prompt gets a valid reply.
  auto backend = std::make_shared<gateway::ScriptedBackend>(
      std::vector<gateway::ScriptEntry>{
          {{"Begin Stage 1"}, false, test_support::core_reply(9), std::nullopt},
          {{"could not be used"}, false, test_support::core_reply(), std::nullopt}},
      true);
  gateway::ModelGateway gw(backend, test_support::no_sleep());
  auto s = f.engine.start_session("P05");
  s = f.engine.generate_core_questions(s, gw);
  EXPECT_EQ(s.stage, Stage::CoreAsked);
  EXPECT_TRUE(std::filesystem::exists(f.store.session_dir("P05") / "rejected" / "core-1.txt"));

  auto always_bad = test_support::scripted_gateway(
      {{{}, false, test_support::core_reply(9), std::nullopt}});
  auto p6 = f.engine.start_session("P06");
  EXPECT_EQ(code_of([&] { f.engine.generate_core_questions(p6, *always_bad); }),
            ErrorCode::MalformedModelOutput);
  EXPECT_EQ(always_bad->calls(), 2u);
  EXPECT_EQ(f.store.load_session("P06").stage, Stage::Created);
}

TEST(Engine, FollowupBoundsEnforced) {
  for (int n : {1, 7}) {
    Fixture f;
    auto gw = test_support::scripted_gateway(test_support::interview_script(n));
    auto s = f.engine.generate_core_questions(f.engine.start_session("P01"), *gw);
    s = answer_all_core(f.engine, s);
    EXPECT_EQ(code_of([&] { f.engine.generate_followups(s, *gw); }),
              ErrorCode::MalformedModelOutput)
        << n;
  }
}

TEST(Engine, InterviewPromptsUseSampledTemperature) {
  InterviewConfig c;
  auto req = InterviewEngine::core_prompt(c);
  EXPECT_EQ(req.decode_mode, gateway::DecodeMode::Sampled);
  EXPECT_TRUE(c.temperature.allows_interview(req.temperature));
  EXPECT_EQ(req.messages[0].role, gateway::Role::System);
}

TEST(Engine, FollowupPromptSeesAllTenAnswers) {
  Fixture f;
  auto gw = test_support::scripted_gateway(test_support::interview_script());
  auto s = f.engine.generate_core_questions(f.engine.start_session("P01"), *gw);
  s = answer_all_core(f.engine, s);
  auto req = InterviewEngine::followup_prompt(InterviewConfig{}, s);
  std::string all;
  for (const auto& m : req.messages) all += m.text;
  for (const auto& q : s.core_questions) {
    EXPECT_NE(all.find("Answer to " + q.question_id), std::string::npos);
  }
}

TEST(SliceContext, ConditionsAndSubset) {
  Fixture f;
  auto gw = test_support::scripted_gateway(test_support::interview_script(5));
  auto s = f.engine.generate_core_questions(f.engine.start_session("P01"), *gw);
  s = answer_all_core(f.engine, s);
  EXPECT_EQ(code_of([&] { slice_context(s, Condition::FullInterview); }),
            ErrorCode::StageTooEarly);
  s = answer_all_followups(f.engine, f.engine.generate_followups(s, *gw));

  auto full = slice_context(s, Condition::FullInterview);
  auto core = slice_context(s, Condition::Core10);
  ASSERT_EQ(full.turns.size(), 15u);
  ASSERT_EQ(core.turns.size(), 10u);
  for (std::size_t i = 1; i < full.turns.size(); ++i) {
    EXPECT_LT(full.turns[i - 1].seq, full.turns[i].seq);
  }
  for (const auto& t : core.turns) {
    EXPECT_EQ(t.stage, QuestionStage::Core);
    EXPECT_NE(std::find(full.turns.begin(), full.turns.end(), t), full.turns.end());
  }
  EXPECT_FALSE(core.summary_text.has_value());
  EXPECT_EQ(code_of([&] { slice_context(s, Condition::PersonalitySummary); }),
            ErrorCode::StageTooEarly);
  s = f.engine.generate_summary(s, *gw);
  auto summ = slice_context(s, Condition::PersonalitySummary);
  EXPECT_TRUE(summ.turns.empty());
  ASSERT_TRUE(summ.summary_text.has_value());
  EXPECT_EQ(slice_context(s, Condition::FullInterview), full);
}

TEST(SliceContext, ConditionTokens) {
  EXPECT_EQ(condition_from_token("core10"), Condition::Core10);
  EXPECT_EQ(condition_from_token("full"), Condition::FullInterview);
  EXPECT_EQ(condition_from_token("summary"), Condition::PersonalitySummary);
  EXPECT_FALSE(condition_from_token("everything").has_value());
}
