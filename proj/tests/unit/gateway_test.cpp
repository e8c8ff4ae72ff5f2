#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "persona_lab/common/error.hpp"
#include "persona_lab/gateway/backend.hpp"
#include "persona_lab/gateway/cassette.hpp"
#include "persona_lab/gateway/scripted_backend.hpp"
#include "persona_lab/gateway/structured.hpp"
#include "test_support.hpp"

using namespace persona_lab;
using namespace persona_lab::gateway;

namespace {

PromptRequest user_request(const std::string& text) {
  PromptRequest r;
  r.messages.push_back({Role::User, text});
  return r;
}

class FlakyBackend : public Backend {
 public:
  explicit FlakyBackend(int failures, ErrorCode code = ErrorCode::TransportError)
      : failures_(failures), code_(code) {}
  std::string name() const override { return "flaky"; }
  std::string generate(const PromptRequest&) override {
    ++calls;
    if (calls <= failures_) throw Error(code_, "simulated");
    return "ok";
  }
  int calls = 0;

 private:
  int failures_;
  ErrorCode code_;
};

RecordShape trace_shape() {
  RecordShape shape;
  shape.fields = {
      {"EXPLANATION", FieldKind::Text, false, {}, {}},
      {"EVIDENCE", FieldKind::Text, false, {}, {}},
      {"LOCATION", FieldKind::Enum, false, {}, evidence_location_aliases()},
      {"CATEGORY", FieldKind::Enum, false, {}, reasoning_category_aliases()},
  };
  return shape;
}

}  // namespace

TEST(PromptRequest, GreedyRequiresZeroTemperature) {
  auto r = user_request("hi");
  r.decode_mode = DecodeMode::Greedy;
  r.temperature = 0.5;
  try {
    r.validate();
    FAIL() << "expected InvalidRequest";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidRequest);
  }
}

TEST(PromptRequest, RejectedBeforeDispatch) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptEntry>{{{}, false, "x", {}}},
                                                   false);
  ModelGateway gw(backend, test_support::no_sleep());
  auto r = user_request("hi");
  r.temperature = 0.5;
  EXPECT_THROW(gw.complete(r), Error);
  EXPECT_EQ(backend->calls(), 0u);
}

TEST(PromptRequest, EmptyMessagesRejected) {
  PromptRequest r;
  EXPECT_THROW(r.validate(), Error);
}

TEST(PromptRequest, FingerprintStableAcrossCopies) {
  auto a = user_request("same");
  a.max_tokens = 64;
  auto b = a;
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  b.messages[0].text = "other";
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 64u);
}

TEST(PromptRequest, OptionalFieldsOmittedUnlessSet) {
  auto r = user_request("x");
  auto j = r.canonical_json();
  EXPECT_FALSE(j.contains("top_p"));
  EXPECT_FALSE(j.contains("max_tokens"));
  r.top_p = 0.9;
  EXPECT_TRUE(r.canonical_json().contains("top_p"));
}

TEST(TemperaturePolicy, Defaults) {
  TemperaturePolicy p;
  EXPECT_DOUBLE_EQ(p.interview_min, 0.8);
  EXPECT_DOUBLE_EQ(p.interview_max, 1.0);
  EXPECT_DOUBLE_EQ(p.prediction_temperature, 0.0);
  EXPECT_TRUE(p.allows_interview(0.9));
  EXPECT_FALSE(p.allows_interview(0.5));
}

TEST(ScriptedBackend, ReturnsCannedTextVerbatim) {
  auto gw = test_support::scripted_gateway({{{}, false, "  canned\ntext ", {}}});
  auto c = gw->complete(user_request("anything"));
  EXPECT_EQ(c.text, "  canned\ntext ");
  EXPECT_EQ(c.backend_name, "scripted");
  EXPECT_EQ(c.request_fingerprint, user_request("anything").fingerprint());
  EXPECT_GE(c.latency_ms, 0);
}

TEST(ScriptedBackend, StrictMismatchReportsExpectedAndActual) {
  auto gw = test_support::scripted_gateway({{{"alpha"}, false, "a", {}}}, true);
  try {
    gw->complete(user_request("beta"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendFailure);
    EXPECT_EQ(e.details().at("actual"), "beta");
    EXPECT_TRUE(e.details().contains("expected"));
  }
}

TEST(ScriptedBackend, StrictFollowsOrder) {
  auto backend = std::make_shared<ScriptedBackend>(
      std::vector<ScriptEntry>{{{"one"}, false, "1", {}}, {{"two"}, false, "2", {}}}, true);
  ModelGateway gw(backend, test_support::no_sleep());
  EXPECT_EQ(gw.complete(user_request("one")).text, "1");
  EXPECT_EQ(gw.complete(user_request("two")).text, "2");
  EXPECT_EQ(backend->remaining(), 0u);
  EXPECT_THROW(gw.complete(user_request("one")), Error);
}

TEST(ScriptedBackend, FromFile) {
  test_support::TempDir dir;
  std::ofstream(dir / "s.script")
      << "persona-lab/v1 script\n"
      << R"({"strict":false})" << "\n"
      << R"({"contains":["hello"],"response":"world"})" << "\n"
      << R"({"contains":["down"],"fail":"auth","response":""})" << "\n";
  auto backend = ScriptedBackend::from_file(dir / "s.script");
  ModelGateway gw(backend, test_support::no_sleep());
  EXPECT_EQ(gw.complete(user_request("hello there")).text, "world");
  try {
    gw.complete(user_request("down"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AuthFailure);
  }
}

TEST(ModelGateway, RetriesTransientThenSucceeds) {
  auto flaky = std::make_shared<FlakyBackend>(2);
  std::vector<std::chrono::milliseconds> sleeps;
  GatewayOptions o;
  o.retry.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  ModelGateway gw(flaky, o);
  EXPECT_EQ(gw.complete(user_request("x")).text, "ok");
  EXPECT_EQ(flaky->calls, 3);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_EQ(sleeps[0].count(), 1000);
  EXPECT_EQ(sleeps[1].count(), 2000);
}

TEST(ModelGateway, BackendFailureAfterAttemptsExhausted) {
  auto flaky = std::make_shared<FlakyBackend>(10);
  ModelGateway gw(flaky, test_support::no_sleep());
  try {
    gw.complete(user_request("x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendFailure);
  }
  EXPECT_EQ(flaky->calls, 3);
}

TEST(ModelGateway, TimeoutSurfacesAsTimeout) {
  auto flaky = std::make_shared<FlakyBackend>(10, ErrorCode::Timeout);
  ModelGateway gw(flaky, test_support::no_sleep());
  try {
    gw.complete(user_request("x"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Timeout);
  }
}

TEST(ModelGateway, AuthFailureNotRetried) {
  auto flaky = std::make_shared<FlakyBackend>(10, ErrorCode::AuthFailure);
  ModelGateway gw(flaky, test_support::no_sleep());
  EXPECT_THROW(gw.complete(user_request("x")), Error);
  EXPECT_EQ(flaky->calls, 1);
}

TEST(ModelGateway, InFlightCapHonoured) {
  class SlowBackend : public Backend {
   public:
    std::string name() const override { return "slow"; }
    std::string generate(const PromptRequest&) override {
      int now = ++active;
      int prev = peak.load();
      while (now > prev && !peak.compare_exchange_weak(prev, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      --active;
      return "done";
    }
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
  };
  auto slow = std::make_shared<SlowBackend>();
  GatewayOptions o = test_support::no_sleep();
  o.max_in_flight = 2;
  ModelGateway gw(slow, o);
  std::vector<std::thread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&, i] { gw.complete(user_request("q" + std::to_string(i))); });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(slow->peak.load(), 2);
  EXPECT_EQ(gw.calls(), 6u);
}

TEST(Structured, ParsesAllTraceFields) {
  const std::string reply =
      "**EXPLANATION:** She values loyalty.\n"
      "- EVIDENCE: \"I never leave a friend behind\"\n"
      "LOCATION: core interview\n"
      "CATEGORY: value-based\n";
  auto rec = parse_labeled(reply, trace_shape());
  EXPECT_EQ(rec.at("EXPLANATION"), "She values loyalty.");
  EXPECT_EQ(rec.at("EVIDENCE"), "\"I never leave a friend behind\"");
  EXPECT_EQ(rec.at("LOCATION"), "CoreInterview");
  EXPECT_EQ(rec.at("CATEGORY"), "ValueAbstraction");
}

TEST(Structured, AliasTableCoversSurfaceLabels) {
  const auto& cats = reasoning_category_aliases();
  EXPECT_EQ(resolve_alias(cats, "constraint-based"), "CopingConstraint");
  EXPECT_EQ(resolve_alias(cats, "Narrative"), "NarrativeReference");
  EXPECT_EQ(resolve_alias(cats, "generic"), "GenericNorm");
  const auto& locs = evidence_location_aliases();
  EXPECT_EQ(resolve_alias(locs, "follow-up"), "FollowUp");
  EXPECT_EQ(resolve_alias(locs, "Both"), "Both");
  EXPECT_EQ(resolve_alias(locs, "unclassified"), "Unclassified");
  EXPECT_FALSE(resolve_alias(cats, "astrology").has_value());
}

TEST(Structured, MissingFieldRepairedOnce) {
  const std::string missing = "EXPLANATION: x\nLOCATION: both\nCATEGORY: narrative\n";
  const std::string fixed = "EXPLANATION: x\nEVIDENCE: y\nLOCATION: both\nCATEGORY: narrative\n";
  auto backend = std::make_shared<ScriptedBackend>(
      std::vector<ScriptEntry>{{{"predict"}, false, missing, {}},
                               {{"could not be used"}, false, fixed, {}}},
      true);
  ModelGateway gw(backend, test_support::no_sleep());
  auto rec = complete_structured(gw, user_request("predict"), trace_shape());
  EXPECT_EQ(rec.at("EVIDENCE"), "y");
  EXPECT_EQ(backend->calls(), 2u);
}

TEST(Structured, MissingFieldTwiceIsMalformed) {
  const std::string missing = "EXPLANATION: x\nLOCATION: both\nCATEGORY: narrative\n";
  auto gw = test_support::scripted_gateway({{{}, false, missing, {}}});
  try {
    complete_structured(*gw, user_request("predict"), trace_shape());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedModelOutput);
    EXPECT_EQ(e.details().at("raw"), missing);
  }
  EXPECT_EQ(gw->calls(), 2u);
}

TEST(Cassette, RecordThenReplay) {
  test_support::TempDir dir;
  const auto path = dir / "c.cassette";
  auto live = std::make_shared<ScriptedBackend>(
      std::vector<ScriptEntry>{{{}, false, "recorded answer", {}}}, false);
  {
    ModelGateway gw(record_replay(live, CassetteMode::Record, path), test_support::no_sleep());
    EXPECT_EQ(gw.complete(user_request("q")).text, "recorded answer");
  }
  ModelGateway replay(record_replay(nullptr, CassetteMode::Replay, path),
                      test_support::no_sleep());
  EXPECT_EQ(replay.complete(user_request("q")).text, "recorded answer");
  try {
    replay.complete(user_request("unseen"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CassetteMiss);
  }
}

TEST(Cassette, RecordNeedsLiveBackend) {
  test_support::TempDir dir;
  EXPECT_THROW(record_replay(nullptr, CassetteMode::Record, dir / "c"), Error);
}

TEST(Cassette, CorruptLineNamed) {
  test_support::TempDir dir;
  std::ofstream(dir / "bad.cassette") << "persona-lab/v1 cassette\n"
                                      << R"({"fingerprint":"a","response":"b"})" << "\n"
                                      << "{not json\n";
  try {
    ReplayBackend replay(dir / "bad.cassette");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CassetteCorrupt);
    EXPECT_EQ(e.details().at("line"), 3);
  }
}

TEST(Cassette, ReplayRequiresFile) {
  test_support::TempDir dir;
  EXPECT_THROW(record_replay(nullptr, CassetteMode::Replay, dir / "missing"), Error);
}
