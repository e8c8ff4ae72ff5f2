#include "persona_lab/api/service.hpp"

#include <httplib.h>

#include <cctype>

#include "persona_lab/assessments/bfi.hpp"
#include "persona_lab/assessments/mbti.hpp"
#include "persona_lab/assessments/responses.hpp"
#include "persona_lab/common/hash.hpp"
#include "persona_lab/common/records.hpp"
#include "persona_lab/common/text.hpp"
#include "persona_lab/pipeline/pipeline.hpp"
#include "persona_lab/simulation/predictor.hpp"

namespace persona_lab::api {

using interview::SessionState;
using interview::Stage;
using nlohmann::json;

namespace {

constexpr const char* kTokenFile = "token.sha256";

bool constant_time_equal(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff |= static_cast<unsigned char>(a[i] ^ b[i]);
  }
  return diff == 0;
}

bool is_generation_failure(ErrorCode c) {
  switch (c) {
    case ErrorCode::BackendFailure:
    case ErrorCode::TransportError:
    case ErrorCode::AuthFailure:
    case ErrorCode::Timeout:
    case ErrorCode::MalformedModelOutput:
    case ErrorCode::CassetteMiss:
      return true;
    default:
      return false;
  }
}

json question_view(const interview::Question& q) {
  json j = {{"question_id", q.question_id},
            {"stage", interview::question_stage_name(q.stage)},
            {"text", q.text}};
  if (q.domain_id) j["domain_id"] = *q.domain_id;
  return j;
}

std::string bearer(const httplib::Request& req, const char* fallback_header) {
  const auto auth = req.get_header_value("Authorization");
  if (text::istarts_with(auth, "Bearer ")) return text::trim(auth.substr(7));
  return fallback_header ? req.get_header_value(fallback_header) : std::string();
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorCode::InvalidRequest, "request body must be a JSON object");
  }
  return j;
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send(res, http_status(e.code()), error_body(e));
    } catch (const json::exception& e) {
      const Error err(ErrorCode::InvalidRequest, std::string("malformed request: ") + e.what());
      send(res, 400, error_body(err));
    } catch (const std::exception& e) {
      send(res, 500, {{"code", "INTERNAL"}, {"message", e.what()}, {"details", json::object()}});
    }
  };
}

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidAlias:
    case ErrorCode::InvalidConfig:
    case ErrorCode::UnknownQuestion:
    case ErrorCode::EmptyAnswer:
    case ErrorCode::InvalidRequest:
    case ErrorCode::InvalidKey:
    case ErrorCode::OutOfRangeItem:
    case ErrorCode::BatteryShapeError:
    case ErrorCode::InvalidMbti:
    case ErrorCode::InvalidAnswer:
    case ErrorCode::IncompleteSet:
    case ErrorCode::UnknownItem:
      return 400;
    case ErrorCode::Unauthorized:
      return 401;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownSession:
    case ErrorCode::ManifestMissing:
      return 404;
    case ErrorCode::DuplicateAlias:
    case ErrorCode::AlreadyAnswered:
    case ErrorCode::WrongStage:
    case ErrorCode::StageTooEarly:
    case ErrorCode::SeqConflict:
    case ErrorCode::NotReady:
    case ErrorCode::DuplicateRecord:
    case ErrorCode::HashMismatch:
    case ErrorCode::MissingGold:
    case ErrorCode::GridMismatch:
    case ErrorCode::RunAborted:
      return 409;
    case ErrorCode::BackendFailure:
    case ErrorCode::TransportError:
    case ErrorCode::AuthFailure:
    case ErrorCode::Timeout:
    case ErrorCode::MalformedModelOutput:
    case ErrorCode::CassetteMiss:
      return 502;
    default:
      return 500;
  }
}

json error_body(const Error& e) {
  return {{"code", error_token(e.code())},
          {"message", e.what()},
          {"details", e.details().is_null() ? json::object() : e.details()}};
}

Service::Service(ServiceConfig config)
    : config_(std::move(config)),
      sessions_(config_.store_root, config_.durable),
      runs_(config_.store_root, config_.durable),
      engine_(sessions_, config_.interview, config_.clock) {}

Service::~Service() { wait_for_runs(); }

void Service::wait_for_runs() {
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> g(mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

std::string Service::authorize_session(const std::string& session_id,
                                       const std::string& token) const {
  auto alias = sessions_.alias_for_session_id(session_id);
  if (!alias) throw Error(ErrorCode::NotFound, "unknown session " + session_id);
  const auto path = sessions_.session_dir(*alias) / kTokenFile;
  std::string stored;
  if (std::filesystem::exists(path)) stored = text::trim(read_text_file(path));
  if (token.empty() || stored.empty() || !constant_time_equal(sha256_hex(token), stored)) {
    throw Error(ErrorCode::Unauthorized, "token does not grant access to this session");
  }
  return *alias;
}

void Service::authorize_operator(const std::string& token) const {
  if (config_.admin_token.empty() || token.empty() ||
      !constant_time_equal(sha256_hex(token), sha256_hex(config_.admin_token))) {
    throw Error(ErrorCode::Unauthorized, "operator credential required");
  }
}

json Service::session_view(const SessionState& s) const {
  json questions = json::array();
  for (const auto& q : s.pending_questions()) questions.push_back(question_view(q));
  return {{"session_id", s.session_id},
          {"stage", interview::stage_name(s.stage)},
          {"questions", std::move(questions)},
          {"last_seq", s.last_seq},
          {"answered",
           {{"core", s.answered_count(interview::QuestionStage::Core)},
            {"followup", s.answered_count(interview::QuestionStage::FollowUp)}}}};
}

SessionState Service::advance_once(const SessionState& s, std::optional<json>* error) {
  if (!config_.interview_gateway) return s;
  try {
    switch (s.stage) {
      case Stage::Created: return engine_.generate_core_questions(s, *config_.interview_gateway);
      case Stage::CoreAnswered: return engine_.generate_followups(s, *config_.interview_gateway);
      case Stage::FollowUpsAnswered:
        return engine_.generate_summary(s, *config_.interview_gateway);
      default: return s;
    }
  } catch (const Error& e) {
    if (!is_generation_failure(e.code()) || !error) throw;
    *error = error_body(e);
    return sessions_.load_session(s.participant_alias);
  }
}

json Service::create_session(const json& body) {
  const auto alias = body.at("alias").get<std::string>();
  auto s = engine_.start_session(alias);
  const std::string token = random_hex(32);
  write_text_file(sessions_.session_dir(alias) / kTokenFile, sha256_hex(token) + "\n");
  std::optional<json> error;
  if (config_.auto_advance) s = advance_once(s, &error);
  json out = {{"session_id", s.session_id},
              {"token", token},
              {"stage", interview::stage_name(s.stage)},
              {"last_seq", s.last_seq}};
  if (error) out["advance_error"] = *error;
  return out;
}

json Service::pending(const std::string& session_id, const std::string& token) {
  const auto alias = authorize_session(session_id, token);
  return session_view(sessions_.load_session(alias));
}

json Service::submit_answer(const std::string& session_id, const std::string& token,
                            const json& body) {
  const auto alias = authorize_session(session_id, token);
  const auto question_id = body.at("question_id").get<std::string>();
  const auto text = body.at("text").get<std::string>();
  const auto expected = body.at("expected_seq").get<std::int64_t>();
  auto s = sessions_.load_session(alias);
  if (s.last_seq != expected) {
    throw Error(ErrorCode::SeqConflict,
                "session is at seq " + std::to_string(s.last_seq) + ", request expected " +
                    std::to_string(expected),
                {{"expected_seq", expected}, {"seq", s.last_seq}});
  }
  s = engine_.submit_answer(s, question_id, text);
  std::optional<json> error;
  if (config_.auto_advance &&
      (s.stage == Stage::CoreAnswered || s.stage == Stage::FollowUpsAnswered)) {
    s = advance_once(s, &error);
  }
  json out = {{"new_seq", s.last_seq}, {"stage", interview::stage_name(s.stage)}};
  if (error) out["advance_error"] = *error;
  return out;
}

json Service::advance(const std::string& session_id, const std::string& token) {
  const auto alias = authorize_session(session_id, token);
  const auto s = advance_once(sessions_.load_session(alias), nullptr);
  return session_view(s);
}

json Service::record_assessment(const std::string& session_id, const std::string& token,
                                const std::string& kind, const json& body) {
  const auto alias = authorize_session(session_id, token);
  const auto at = to_rfc3339(config_.clock());
  if (kind == "bfi44") {
    assessments::Bfi44Response r;
    r.items = body.at("items").get<std::vector<int>>();
    const auto rec =
        assessments::record_bfi44(sessions_, alias, r, assessments::Bfi44Key::standard(), at);
    return {{"kind", kind},
            {"scores", assessments::to_json(rec.scores)},
            {"bits", assessments::to_json(rec.bits)}};
  }
  if (kind == "mbti") {
    const auto& raw = body.at("types");
    assessments::MbtiReport report;
    if (raw.is_array()) {
      report = assessments::parse_mbti(text::join(raw.get<std::vector<std::string>>(), " / "));
    } else {
      report = assessments::parse_mbti(raw.get<std::string>());
    }
    assessments::record_mbti(sessions_, alias, report, at);
    return {{"kind", kind}, {"types", report.types}};
  }
  if (kind == "dilemmas") {
    assessments::ItemAnswers answers;
    for (const auto& [id, raw] : body.at("answers").items()) {
      const auto* item = config_.battery.find(id);
      if (!item) {
        throw Error(ErrorCode::InvalidAnswer, id + " is not in the battery",
                    {{"item", id}, {"reason", "unknown item"}});
      }
      if (raw.is_string()) {
        answers[id] = assessments::parse_answer_text(*item, raw.get<std::string>());
      } else if (raw.is_number_integer()) {
        answers[id] = assessments::LikertAnswer{raw.get<int>()};
      } else {
        answers[id] = assessments::answer_from_json(raw);
      }
    }
    const auto set = assessments::record_responses(sessions_, alias, config_.battery, answers,
                                                   body.value("finalize", false), at);
    return {{"kind", kind},
            {"answered", set.answers.size()},
            {"complete", set.complete},
            {"battery_hash", set.battery_hash}};
  }
  throw Error(ErrorCode::NotFound, "unknown assessment kind " + kind + " (bfi44, mbti, dilemmas)");
}

std::string Service::next_run_id() {
  std::string stamp;
  for (char c : to_rfc3339(config_.clock())) {
    if (std::isalnum(static_cast<unsigned char>(c))) stamp.push_back(c);
  }
  for (int n = 1;; ++n) {
    const std::string id = "run-" + stamp + "-" + std::to_string(n);
    if (!run_states_.count(id) && !runs_.has_run(id)) return id;
  }
}

json Service::launch_run(const std::string& token, const json& body) {
  authorize_operator(token);
  std::vector<simulation::Condition> conditions;
  for (const auto& c : body.at("conditions")) {
    conditions.push_back(simulation::require_condition(c.get<std::string>()));
  }
  if (conditions.empty()) throw Error(ErrorCode::InvalidRequest, "no conditions requested");
  assessments::Battery battery = config_.battery;
  if (body.contains("battery") && body["battery"].is_string()) {
    battery = assessments::load_battery(body["battery"].get<std::string>());
  }
  assessments::validate_battery(battery);

  std::vector<std::string> aliases;
  if (body.contains("participants")) {
    aliases = body["participants"].get<std::vector<std::string>>();
  } else {
    aliases = sessions_.list_aliases();
  }
  if (aliases.empty()) throw Error(ErrorCode::InvalidRequest, "no participants to simulate");
  std::vector<SessionState> sessions;
  json too_early = json::array();
  for (const auto& a : aliases) {
    if (!sessions_.has_session(a)) throw Error(ErrorCode::NotFound, "unknown participant " + a);
    auto s = sessions_.load_session(a);
    for (auto c : conditions) {
      if (s.stage < interview::required_stage(c)) {
        too_early.push_back({{"participant_alias", a},
                             {"stage", interview::stage_name(s.stage)},
                             {"condition", interview::condition_token(c)},
                             {"required", interview::stage_name(interview::required_stage(c))}});
      }
    }
    sessions.push_back(std::move(s));
  }
  if (!too_early.empty()) {
    throw Error(ErrorCode::StageTooEarly,
                std::to_string(too_early.size()) + " session/condition pairs are not ready",
                {{"sessions", too_early}});
  }
  if (!config_.backend_factory) throw Error(ErrorCode::InvalidConfig, "no backend factory");
  auto backend = config_.backend_factory(body.at("backend").get<std::string>());

  simulation::BatchOptions opts;
  opts.parallelism = body.value("parallelism", 4);
  opts.seed = body.value("seed", std::uint64_t{0});
  opts.personality = body.value("personality", false);
  opts.max_failure_rate = body.value("max_failure_rate", 0.2);
  opts.clock = config_.clock;
  opts.config = {{"launched_by", "service-api"}};

  std::lock_guard<std::mutex> g(mu_);
  opts.run_id = body.contains("run_id") ? body["run_id"].get<std::string>() : next_run_id();
  if (run_states_.count(opts.run_id) && run_states_[opts.run_id].state == "running") {
    throw Error(ErrorCode::DuplicateRecord, "run " + opts.run_id + " is already running");
  }
  runs_.run_dir(opts.run_id);  // validates the id
  RunState& state = run_states_[opts.run_id];
  state = RunState{};
  state.total = sessions.size() * battery.items.size() * conditions.size() +
                (opts.personality ? sessions.size() * conditions.size() : 0);
  for (auto c : conditions) state.conditions.emplace_back(interview::condition_token(c));
  const std::string run_id = opts.run_id;

  opts.progress = [this, run_id](std::size_t done, std::size_t total) {
    std::lock_guard<std::mutex> lk(mu_);
    auto& st = run_states_[run_id];
    st.done = done;
    st.total = total;
  };
  workers_.emplace_back([this, run_id, backend, sessions = std::move(sessions),
                         battery = std::move(battery), conditions, opts]() mutable {
    json error;
    bool failed = false;
    try {
      gateway::ModelGateway gw(backend);
      simulation::run_batch(gw, runs_, sessions, battery, conditions, opts);
    } catch (const Error& e) {
      failed = true;
      error = error_body(e);
    } catch (const std::exception& e) {
      failed = true;
      error = {{"code", "INTERNAL"}, {"message", e.what()}, {"details", json::object()}};
    }
    std::lock_guard<std::mutex> lk(mu_);
    auto& st = run_states_[run_id];
    st.state = failed ? "failed" : "done";
    if (failed) st.error = error;
    if (!failed) st.done = st.total;
  });
  return {{"run_id", run_id}, {"state", "running"}, {"total", state.total}};
}

json Service::run_status(const std::string& token, const std::string& run_id) {
  authorize_operator(token);
  {
    std::lock_guard<std::mutex> g(mu_);
    auto it = run_states_.find(run_id);
    if (it != run_states_.end()) {
      const auto& st = it->second;
      return {{"run_id", run_id},
              {"state", st.state},
              {"done", st.done},
              {"total", st.total},
              {"conditions", st.conditions},
              {"error", st.error ? *st.error : json(nullptr)}};
    }
  }
  if (!runs_.has_run(run_id)) throw Error(ErrorCode::NotFound, "unknown run " + run_id);
  std::size_t records = 0;
  std::size_t gaps = 0;
  json conds = json::array();
  for (auto c : runs_.conditions(run_id)) {
    const auto set = runs_.load_run(run_id, c);
    records += set.records.size();
    gaps += set.gaps.size();
    conds.push_back(interview::condition_token(c));
  }
  return {{"run_id", run_id}, {"state", "done"},      {"done", records + gaps},
          {"total", records + gaps}, {"conditions", conds}, {"error", nullptr}};
}

json Service::run_report(const std::string& token, const std::string& run_id) {
  authorize_operator(token);
  {
    std::lock_guard<std::mutex> g(mu_);
    auto it = run_states_.find(run_id);
    if (it != run_states_.end()) {
      if (it->second.state == "running") {
        throw Error(ErrorCode::NotReady, "run " + run_id + " is still running",
                    {{"done", it->second.done}, {"total", it->second.total}});
      }
      if (it->second.state == "failed") {
        throw Error(ErrorCode::RunAborted, "run " + run_id + " failed",
                    {{"error", *it->second.error}});
      }
      if (it->second.report) return *it->second.report;
    }
  }
  if (!runs_.has_run(run_id)) throw Error(ErrorCode::NotFound, "unknown run " + run_id);
  pipeline::EvaluateOptions o;
  o.allow_gaps = true;
  o.evaluation.bootstrap = config_.bootstrap;
  json report = metrics::to_json(pipeline::evaluate_run(sessions_, runs_, run_id, o));
  std::lock_guard<std::mutex> g(mu_);
  auto it = run_states_.find(run_id);
  if (it != run_states_.end()) it->second.report = report;
  return report;
}

void Service::mount(httplib::Server& server) {
  server.set_default_headers(
      {{"Access-Control-Allow-Origin", "*"},
       {"Access-Control-Allow-Headers", "Authorization, Content-Type, X-Session-Token"},
       {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    send(res, 200, {{"status", "ok"}});
  });
  server.Post("/v1/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                send(res, 201, create_session(parse_body(req)));
              }));
  server.Get(R"(/v1/sessions/([^/]+)/pending)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send(res, 200, pending(req.matches[1], bearer(req, "X-Session-Token")));
             }));
  server.Post(R"(/v1/sessions/([^/]+)/answers)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                send(res, 200,
                     submit_answer(req.matches[1], bearer(req, "X-Session-Token"), parse_body(req)));
              }));
  server.Post(R"(/v1/sessions/([^/]+)/advance)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                send(res, 200, advance(req.matches[1], bearer(req, "X-Session-Token")));
              }));
  server.Post(R"(/v1/sessions/([^/]+)/assessments/([^/]+))",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                send(res, 200,
                     record_assessment(req.matches[1], bearer(req, "X-Session-Token"),
                                       req.matches[2], parse_body(req)));
              }));
  server.Post("/v1/runs", guarded([this](const httplib::Request& req, httplib::Response& res) {
                send(res, 202, launch_run(bearer(req, nullptr), parse_body(req)));
              }));
  server.Get(R"(/v1/runs/([^/]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send(res, 200, run_status(bearer(req, nullptr), req.matches[1]));
             }));
  server.Get(R"(/v1/runs/([^/]+)/report)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               send(res, 200, run_report(bearer(req, nullptr), req.matches[1]));
             }));
}

}  // namespace persona_lab::api
