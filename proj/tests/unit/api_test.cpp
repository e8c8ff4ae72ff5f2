#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "persona_lab/api/service.hpp"
#include "persona_lab/common/error.hpp"
#include "persona_lab/common/hash.hpp"
#include "persona_lab/common/records.hpp"
#include "persona_lab/metrics/report.hpp"
#include "persona_lab/pipeline/pipeline.hpp"
#include "test_support.hpp"

using namespace persona_lab;
using nlohmann::json;

namespace {

const assessments::Battery& battery() {
  static const auto b = assessments::load_battery(std::filesystem::path(PERSONA_LAB_DATA_DIR) /
                                                  "sample_battery.jsonl");
  return b;
}

std::string default_answer(const assessments::DilemmaItem& item) {
  switch (item.qtype) {
    case assessments::QType::Choice: return "B";
    case assessments::QType::Likert: return "4";
    case assessments::QType::Ranking:
      return "Family > Career > Health > Friendships > Personal growth";
  }
  return "";
}

std::vector<gateway::ScriptEntry> prediction_script() {
  std::vector<gateway::ScriptEntry> script;
  for (const auto& item : battery().items) {
    script.push_back({{"Question " + item.item_id + ":"}, false,
                      test_support::prediction_reply(default_answer(item)), std::nullopt});
  }
  return script;
}

constexpr const char* kAdmin = "operator-secret";

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { start(test_support::interview_script(5)); }

  void start(std::vector<gateway::ScriptEntry> interview_script) {
    api::ServiceConfig cfg;
    cfg.store_root = dir.path();
    cfg.admin_token = kAdmin;
    cfg.interview_gateway = test_support::scripted_gateway(std::move(interview_script));
    cfg.battery = battery();
    cfg.backend_factory = [](const std::string& ref) -> std::shared_ptr<gateway::Backend> {
      if (ref != "scripted") throw Error(ErrorCode::InvalidConfig, "unknown backend " + ref);
      return std::make_shared<gateway::ScriptedBackend>(prediction_script(), false);
    };
    cfg.clock = fixed_clock(parse_rfc3339("2026-02-01T12:00:00Z"));
    cfg.bootstrap.replicates = 100;
    cfg.durable = false;
    service = std::make_unique<api::Service>(std::move(cfg));
    service->mount(server);
    port = server.bind_to_any_port("127.0.0.1");
    worker = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }

  void TearDown() override {
    server.stop();
    if (worker.joinable()) worker.join();
    service->wait_for_runs();
  }

  struct Reply {
    int status = 0;
    json body;
  };

  static Reply wrap(const httplib::Result& r) {
    EXPECT_TRUE(r) << "request failed";
    if (!r) return {};
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }

  Reply post(const std::string& path, const json& body, const std::string& token = "") {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    return wrap(client->Post(path, h, body.dump(), "application/json"));
  }

  Reply get(const std::string& path, const std::string& token = "") {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    return wrap(client->Get(path, h));
  }

  struct Participant {
    std::string id;
    std::string token;
  };

  Participant create(const std::string& alias) {
    const auto r = post("/v1/sessions", {{"alias", alias}});
    EXPECT_EQ(r.status, 201) << r.body.dump();
    return {r.body["session_id"], r.body["token"]};
  }

  // Answers every pending question until the session leaves the asking stages.
  void answer_all(const Participant& p) {
    for (int guard = 0; guard < 40; ++guard) {
      const auto pending = get("/v1/sessions/" + p.id + "/pending", p.token);
      ASSERT_EQ(pending.status, 200);
      if (pending.body["questions"].empty()) return;
      const auto& q = pending.body["questions"][0];
      const auto r = post("/v1/sessions/" + p.id + "/answers",
                          {{"question_id", q["question_id"]},
                           {"text", "I keep my promises even when it costs me time."},
                           {"expected_seq", pending.body["last_seq"]}},
                          p.token);
      ASSERT_EQ(r.status, 200) << r.body.dump();
    }
    FAIL() << "session never finished";
  }

  void record_dilemmas(const Participant& p) {
    json answers = json::object();
    for (const auto& item : battery().items) answers[item.item_id] = default_answer(item);
    const auto r = post("/v1/sessions/" + p.id + "/assessments/dilemmas",
                        {{"answers", answers}, {"finalize", true}}, p.token);
    ASSERT_EQ(r.status, 200) << r.body.dump();
  }

  json wait_run(const std::string& run_id) {
    for (int i = 0; i < 600; ++i) {
      const auto r = get("/v1/runs/" + run_id, kAdmin);
      EXPECT_EQ(r.status, 200);
      if (r.body["state"] != "running") return r.body;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    ADD_FAILURE() << "run did not finish";
    return {};
  }

  test_support::TempDir dir;
  std::unique_ptr<api::Service> service;
  httplib::Server server;
  int port = 0;
  std::thread worker;
  std::unique_ptr<httplib::Client> client;
};

}  // namespace

TEST(HttpStatus, MapsErrorFamilies) {
  EXPECT_EQ(api::http_status(ErrorCode::InvalidAlias), 400);
  EXPECT_EQ(api::http_status(ErrorCode::Unauthorized), 401);
  EXPECT_EQ(api::http_status(ErrorCode::NotFound), 404);
  EXPECT_EQ(api::http_status(ErrorCode::SeqConflict), 409);
  EXPECT_EQ(api::http_status(ErrorCode::StageTooEarly), 409);
  EXPECT_EQ(api::http_status(ErrorCode::TransportError), 502);
  EXPECT_EQ(api::http_status(ErrorCode::IoFailure), 500);
  const auto body = api::error_body(Error(ErrorCode::EmptyAnswer, "empty", {{"q", "Q1"}}));
  EXPECT_EQ(body["code"], "EMPTY_ANSWER");
  EXPECT_EQ(body["details"]["q"], "Q1");
}

TEST_F(ServiceTest, HealthAndCors) {
  const auto r = client->Get("/v1/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
  const auto o = client->Options("/v1/sessions");
  ASSERT_TRUE(o);
  EXPECT_EQ(o->status, 204);
}

TEST_F(ServiceTest, CreateSessionReturnsTokenAndCoreQuestions) {
  const auto r = post("/v1/sessions", {{"alias", "P01"}});
  ASSERT_EQ(r.status, 201);
  EXPECT_FALSE(r.body["token"].get<std::string>().empty());
  EXPECT_EQ(r.body["stage"], "CoreAsked");
  const auto pending = get("/v1/sessions/" + r.body["session_id"].get<std::string>() + "/pending",
                           r.body["token"]);
  ASSERT_EQ(pending.status, 200);
  EXPECT_EQ(pending.body["questions"].size(), 10u);
  EXPECT_EQ(pending.body["questions"][0]["stage"], "Core");
}

TEST_F(ServiceTest, TokenIsStoredOnlyAsHash) {
  const auto p = create("P01");
  const auto stored = read_text_file(dir.path() / "sessions" / "P01" / "token.sha256");
  EXPECT_EQ(stored.find(p.token), std::string::npos);
  EXPECT_NE(stored.find(sha256_hex(p.token)), std::string::npos);
}

TEST_F(ServiceTest, DuplicateAliasConflicts) {
  create("P01");
  const auto r = post("/v1/sessions", {{"alias", "P01"}});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["code"], "DUPLICATE_ALIAS");
}

TEST_F(ServiceTest, InvalidAliasAndMalformedBodyAreBadRequests) {
  EXPECT_EQ(post("/v1/sessions", {{"alias", "bad alias!"}}).status, 400);
  EXPECT_EQ(post("/v1/sessions", json::object()).status, 400);
  const auto r = wrap(client->Post("/v1/sessions", "{not json", "application/json"));
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["code"], "INVALID_REQUEST");
}

TEST_F(ServiceTest, WrongTokenIsUnauthorized) {
  const auto a = create("P01");
  const auto b = create("P02");
  EXPECT_EQ(get("/v1/sessions/" + a.id + "/pending", b.token).status, 401);
  EXPECT_EQ(get("/v1/sessions/" + a.id + "/pending").status, 401);
  EXPECT_EQ(get("/v1/sessions/unknown-id/pending", a.token).status, 404);
  // The alternative header carries the same credential.
  httplib::Headers h{{"X-Session-Token", a.token}};
  const auto r = client->Get("/v1/sessions/" + a.id + "/pending", h);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
}

TEST_F(ServiceTest, StaleSequenceConflicts) {
  const auto p = create("P01");
  const auto pending = get("/v1/sessions/" + p.id + "/pending", p.token);
  const auto seq = pending.body["last_seq"].get<std::int64_t>();
  const auto q1 = pending.body["questions"][0]["question_id"];
  const auto q2 = pending.body["questions"][1]["question_id"];
  ASSERT_EQ(post("/v1/sessions/" + p.id + "/answers",
                 {{"question_id", q1}, {"text", "first"}, {"expected_seq", seq}}, p.token)
                .status,
            200);
  const auto r = post("/v1/sessions/" + p.id + "/answers",
                      {{"question_id", q2}, {"text", "second"}, {"expected_seq", seq}}, p.token);
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["code"], "SEQ_CONFLICT");
}

TEST_F(ServiceTest, AnswerValidation) {
  const auto p = create("P01");
  const auto pending = get("/v1/sessions/" + p.id + "/pending", p.token);
  const auto seq = pending.body["last_seq"];
  const auto q1 = pending.body["questions"][0]["question_id"];
  auto r = post("/v1/sessions/" + p.id + "/answers",
                {{"question_id", q1}, {"text", "   "}, {"expected_seq", seq}}, p.token);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["code"], "EMPTY_ANSWER");
  r = post("/v1/sessions/" + p.id + "/answers",
           {{"question_id", "Q99"}, {"text", "x"}, {"expected_seq", seq}}, p.token);
  EXPECT_EQ(r.status, 400);
  r = post("/v1/sessions/" + p.id + "/answers", {{"question_id", q1}, {"text", "x"}}, p.token);
  EXPECT_EQ(r.status, 400);
}

TEST_F(ServiceTest, TenthCoreAnswerAdvancesToFollowUps) {
  const auto p = create("P01");
  auto pending = get("/v1/sessions/" + p.id + "/pending", p.token);
  Reply last;
  for (int i = 0; i < 10; ++i) {
    pending = get("/v1/sessions/" + p.id + "/pending", p.token);
    last = post("/v1/sessions/" + p.id + "/answers",
                {{"question_id", pending.body["questions"][0]["question_id"]},
                 {"text", "answer"},
                 {"expected_seq", pending.body["last_seq"]}},
                p.token);
    ASSERT_EQ(last.status, 200);
  }
  EXPECT_EQ(last.body["stage"], "FollowUpsAsked");
  pending = get("/v1/sessions/" + p.id + "/pending", p.token);
  ASSERT_EQ(pending.body["questions"].size(), 5u);
  for (const auto& q : pending.body["questions"]) EXPECT_EQ(q["stage"], "FollowUp");
  EXPECT_EQ(pending.body["answered"]["core"], 10);
}

TEST_F(ServiceTest, FullInterviewEndsSummarized) {
  const auto p = create("P01");
  answer_all(p);
  const auto pending = get("/v1/sessions/" + p.id + "/pending", p.token);
  EXPECT_EQ(pending.body["stage"], "Summarized");
  EXPECT_EQ(pending.body["answered"]["followup"], 5);
}

TEST(ServiceFailures, BackendOutageKeepsSessionAndAdvanceRetries) {
  test_support::TempDir dir;
  auto backend = std::make_shared<gateway::ScriptedBackend>(
      std::vector<gateway::ScriptEntry>{{{}, false, "", ErrorCode::TransportError}}, false);
  api::ServiceConfig cfg;
  cfg.store_root = dir.path();
  cfg.interview_gateway =
      std::make_shared<gateway::ModelGateway>(backend, test_support::no_sleep());
  cfg.durable = false;
  cfg.clock = fixed_clock(parse_rfc3339("2026-02-01T12:00:00Z"));
  api::Service service(cfg);
  const auto created = service.create_session({{"alias", "P01"}});
  EXPECT_EQ(created["stage"], "Created");
  EXPECT_EQ(created["advance_error"]["code"], "BACKEND_FAILURE");
  const std::string id = created["session_id"];
  const std::string token = created["token"];
  try {
    service.advance(id, token);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(api::http_status(e.code()), 502);
  }
  EXPECT_EQ(service.pending(id, token)["stage"], "Created");
}

TEST_F(ServiceTest, Bfi44Assessment) {
  const auto p = create("P01");
  std::vector<int> items(44, 3);
  auto r = post("/v1/sessions/" + p.id + "/assessments/bfi44", {{"items", items}}, p.token);
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_TRUE(r.body.contains("scores"));
  EXPECT_TRUE(r.body.contains("bits"));
  items.pop_back();
  r = post("/v1/sessions/" + p.id + "/assessments/bfi44", {{"items", items}}, p.token);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["code"], "OUT_OF_RANGE_ITEM");
}

TEST_F(ServiceTest, MbtiAssessment) {
  const auto p = create("P01");
  auto r = post("/v1/sessions/" + p.id + "/assessments/mbti", {{"types", "enfp / infp"}}, p.token);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["types"], json({"ENFP", "INFP"}));
  r = post("/v1/sessions/" + p.id + "/assessments/mbti", {{"types", {"INTJ"}}}, p.token);
  EXPECT_EQ(r.status, 200);
  r = post("/v1/sessions/" + p.id + "/assessments/mbti", {{"types", "XXXX"}}, p.token);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["code"], "INVALID_MBTI");
}

TEST_F(ServiceTest, DilemmaAssessment) {
  const auto p = create("P01");
  auto r = post("/v1/sessions/" + p.id + "/assessments/dilemmas",
                {{"answers", {{"Q18", 9}}}}, p.token);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["code"], "INVALID_ANSWER");
  r = post("/v1/sessions/" + p.id + "/assessments/dilemmas",
           {{"answers", {{"Q1", "B"}}}, {"finalize", true}}, p.token);
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body["code"], "INCOMPLETE_SET");
  r = post("/v1/sessions/" + p.id + "/assessments/dilemmas", {{"answers", {{"Q1", "B"}}}},
           p.token);
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["answered"], 1);
  EXPECT_EQ(post("/v1/sessions/" + p.id + "/assessments/iq", json::object(), p.token).status, 404);
}

TEST_F(ServiceTest, RunEndpointsNeedOperatorToken) {
  EXPECT_EQ(post("/v1/runs", {{"conditions", {"core10"}}, {"backend", "scripted"}}).status, 401);
  EXPECT_EQ(post("/v1/runs", {{"conditions", {"core10"}}, {"backend", "scripted"}}, "wrong").status,
            401);
  EXPECT_EQ(get("/v1/runs/x", "wrong").status, 401);
  EXPECT_EQ(get("/v1/runs/missing", kAdmin).status, 404);
}

TEST_F(ServiceTest, RunOverTwoSessionsProducesRecordsAndReport) {
  const auto a = create("P01");
  const auto b = create("P02");
  answer_all(a);
  answer_all(b);
  record_dilemmas(a);
  record_dilemmas(b);

  const auto launched = post("/v1/runs",
                             {{"conditions", {"core10"}},
                              {"backend", "scripted"},
                              {"run_id", "api-run"},
                              {"parallelism", 2}},
                             kAdmin);
  ASSERT_EQ(launched.status, 202) << launched.body.dump();
  EXPECT_EQ(launched.body["total"], 50);
  const auto status = wait_run("api-run");
  EXPECT_EQ(status["state"], "done") << status.dump();
  EXPECT_EQ(status["done"], 50);

  store::RunStore runs(dir.path());
  const auto set = runs.load_run("api-run", simulation::Condition::Core10);
  EXPECT_EQ(set.records.size(), 50u);
  EXPECT_TRUE(set.gaps.empty());

  const auto report = get("/v1/runs/api-run/report", kAdmin);
  ASSERT_EQ(report.status, 200) << report.body.dump();
  store::SessionStore sessions(dir.path(), false);
  pipeline::EvaluateOptions o;
  o.allow_gaps = true;
  o.evaluation.bootstrap.replicates = 100;
  const auto direct = metrics::to_json(pipeline::evaluate_run(sessions, runs, "api-run", o));
  EXPECT_EQ(report.body, direct);
  EXPECT_DOUBLE_EQ(report.body["conditions"][0]["overall_accuracy"]["value"].get<double>(), 1.0);
}

TEST_F(ServiceTest, RunRejectsSessionsBelowRequiredStage) {
  const auto a = create("P01");
  answer_all(a);
  create("P02");
  const auto r = post("/v1/runs", {{"conditions", {"summary"}}, {"backend", "scripted"}}, kAdmin);
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body["code"], "STAGE_TOO_EARLY");
  ASSERT_EQ(r.body["details"]["sessions"].size(), 1u);
  EXPECT_EQ(r.body["details"]["sessions"][0]["participant_alias"], "P02");
}

TEST_F(ServiceTest, RunRequestValidation) {
  EXPECT_EQ(post("/v1/runs", {{"conditions", {"bogus"}}, {"backend", "scripted"}}, kAdmin).status,
            400);
  EXPECT_EQ(post("/v1/runs", {{"conditions", json::array()}, {"backend", "scripted"}}, kAdmin)
                .status,
            400);
}
