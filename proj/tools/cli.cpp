#include "cli.hpp"

#include <httplib.h>

#include <CLI11.hpp>
#include <csignal>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "persona_lab/api/service.hpp"
#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/assessments/responses.hpp"
#include "persona_lab/common/clock.hpp"
#include "persona_lab/common/records.hpp"
#include "persona_lab/common/text.hpp"
#include "persona_lab/fixtures/reference.hpp"
#include "persona_lab/interview/engine.hpp"
#include "persona_lab/pipeline/pipeline.hpp"
#include "persona_lab/simulation/predictor.hpp"
#include "persona_lab/store/run_store.hpp"
#include "persona_lab/store/session_store.hpp"

namespace persona_lab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoFailure:
    case ErrorCode::CorruptLog:
    case ErrorCode::LockNotHeld:
    case ErrorCode::BackendFailure:
    case ErrorCode::TransportError:
    case ErrorCode::AuthFailure:
    case ErrorCode::Timeout:
    case ErrorCode::MalformedModelOutput:
    case ErrorCode::CassetteMiss:
    case ErrorCode::CassetteCorrupt:
    case ErrorCode::FingerprintCollision:
    case ErrorCode::InvalidPredictedAnswer:
    case ErrorCode::RunAborted:
      return kRuntime;
    default:
      return kValidation;
  }
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) {
      throw Error(ErrorCode::InvalidConfig, std::string("unknown config key ") + where + "." + k);
    }
  }
}

}  // namespace

Settings settings_from_json(const json& j) {
  Settings s;
  try {
    reject_unknown(j, {"backend", "temperature", "followups", "bootstrap"}, "config");
    if (j.contains("backend")) {
      const auto& b = j["backend"];
      reject_unknown(b, {"base_url", "model", "timeout_seconds", "api_key_env"}, "backend");
      s.backend.base_url = b.value("base_url", s.backend.base_url);
      s.backend.model = b.value("model", s.backend.model);
      s.backend.timeout_seconds = b.value("timeout_seconds", s.backend.timeout_seconds);
      s.backend.api_key_env = b.value("api_key_env", s.backend.api_key_env);
    }
    if (j.contains("temperature")) {
      const auto& t = j["temperature"];
      reject_unknown(t, {"interview_min", "interview_max", "interview", "prediction"},
                     "temperature");
      auto& p = s.interview.temperature;
      p.interview_min = t.value("interview_min", p.interview_min);
      p.interview_max = t.value("interview_max", p.interview_max);
      p.prediction_temperature = t.value("prediction", p.prediction_temperature);
      s.interview.interview_temperature = t.value("interview", s.interview.interview_temperature);
    }
    if (j.contains("followups")) {
      const auto& f = j["followups"];
      reject_unknown(f, {"min", "max"}, "followups");
      s.interview.followups.min = f.value("min", s.interview.followups.min);
      s.interview.followups.max = f.value("max", s.interview.followups.max);
    }
    if (j.contains("bootstrap")) {
      const auto& b = j["bootstrap"];
      reject_unknown(b, {"replicates", "seed", "level"}, "bootstrap");
      s.bootstrap.replicates = b.value("replicates", s.bootstrap.replicates);
      s.bootstrap.seed = b.value("seed", s.bootstrap.seed);
      s.bootstrap.level = b.value("level", s.bootstrap.level);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad config value: ") + e.what());
  }
  s.interview.validate();
  s.bootstrap.validate();
  return s;
}

Settings load_settings(const fs::path& path) {
  const json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::InvalidConfig, path.string() + " is not valid JSON");
  return settings_from_json(j);
}

namespace {

const fs::path kDefaultBattery = fs::path(PERSONA_LAB_DATA_DIR) / "sample_battery.jsonl";

std::string fmt(double v, int digits = 3) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

std::vector<simulation::Condition> parse_conditions(const std::string& list) {
  std::vector<simulation::Condition> out;
  for (const auto& raw : text::split(list, ',')) {
    const auto token = text::trim(raw);
    if (token.empty()) continue;
    out.push_back(simulation::require_condition(token));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidRequest, "no conditions given");
  return out;
}

std::shared_ptr<gateway::ModelGateway> make_gateway(const std::string& ref,
                                                    const Settings& settings) {
  return std::make_shared<gateway::ModelGateway>(gateway::make_backend(ref, settings.backend));
}

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  std::string config_path;

  Settings settings() const {
    return config_path.empty() ? Settings{} : load_settings(config_path);
  }
};

// -- interview ---------------------------------------------------------------

struct InterviewArgs {
  std::string alias;
  std::string backend;
  std::string store;
};

bool ask_all(Context& ctx, const interview::InterviewEngine& engine,
             interview::SessionState& s) {
  for (const auto& q : s.pending_questions()) {
    ctx.out << q.question_id << ". " << q.text << "\n> " << std::flush;
    std::string line;
    while (true) {
      if (!std::getline(ctx.in, line)) {
        ctx.err << "input ended before " << q.question_id << " was answered\n";
        return false;
      }
      if (!text::trim(line).empty()) break;
      ctx.out << "(an answer is required)\n> " << std::flush;
    }
    ctx.out << "\n";
    s = engine.submit_answer(s, q.question_id, line);
  }
  return true;
}

int cmd_interview(Context& ctx, const InterviewArgs& a) {
  const auto settings = ctx.settings();
  fs::create_directories(a.store);
  store::SessionStore sessions(a.store);
  interview::InterviewEngine engine(sessions, settings.interview);
  auto s = engine.start_session(a.alias);
  ctx.out << "session " << s.session_id << " for " << a.alias << "\n\n";
  auto gw = make_gateway(a.backend, settings);
  s = engine.generate_core_questions(s, *gw);
  if (!ask_all(ctx, engine, s)) return kValidation;
  s = engine.generate_followups(s, *gw);
  if (!ask_all(ctx, engine, s)) return kValidation;
  s = engine.generate_summary(s, *gw);
  ctx.out << "Summary:\n" << s.summary->full_text << "\n";
  ctx.out << "stage " << interview::stage_name(s.stage) << ", " << s.answers.size()
          << " answers recorded\n";
  return kOk;
}

// -- simulate ----------------------------------------------------------------

struct SimulateArgs {
  std::string conditions = "core10,full,summary";
  std::string battery = kDefaultBattery.string();
  std::string store;
  std::string out;
  std::string backend;
  std::string run_id;
  std::vector<std::string> participants;
  int parallel = 4;
  std::uint64_t seed = 0;
  bool personality = false;
  double max_failure_rate = 0.2;
};

int cmd_simulate(Context& ctx, const SimulateArgs& a) {
  const auto settings = ctx.settings();
  const auto conditions = parse_conditions(a.conditions);
  const auto battery = assessments::load_battery(a.battery);
  assessments::validate_battery(battery);
  store::SessionStore sessions(a.store);
  store::RunStore runs(a.out);

  auto aliases = a.participants.empty() ? sessions.list_aliases() : a.participants;
  if (aliases.empty()) throw Error(ErrorCode::InvalidRequest, "no sessions in " + a.store);
  std::vector<interview::SessionState> states;
  for (const auto& alias : aliases) states.push_back(sessions.load_session(alias));

  simulation::BatchOptions o;
  o.run_id = a.run_id.empty() ? "run-s" + std::to_string(a.seed) : a.run_id;
  o.parallelism = a.parallel;
  o.seed = a.seed;
  o.personality = a.personality;
  o.max_failure_rate = a.max_failure_rate;
  o.config = {{"conditions", a.conditions},
              {"parallel", a.parallel},
              {"backend", a.backend},
              {"prediction_temperature", settings.interview.temperature.prediction_temperature}};
  auto gw = make_gateway(a.backend, settings);
  const auto sets = simulation::run_batch(*gw, runs, states, battery, conditions, o);
  std::size_t records = 0;
  for (const auto& set : sets) {
    ctx.out << interview::condition_token(set.condition) << ": " << set.records.size()
            << " records, " << set.gaps.size() << " gaps\n";
    records += set.records.size();
  }
  ctx.out << "run " << o.run_id << " at " << runs.run_dir(o.run_id).string() << ": " << records
          << " records, " << gw->calls() << " backend calls\n";
  return kOk;
}

// -- evaluate ----------------------------------------------------------------

struct EvaluateArgs {
  std::string runs;
  std::vector<std::string> run_ids;
  std::string gold;
  std::string report;
  std::optional<std::size_t> bootstrap;
  std::optional<std::uint64_t> seed;
  bool allow_gaps = false;
};

int cmd_evaluate(Context& ctx, const EvaluateArgs& a) {
  const auto settings = ctx.settings();
  store::RunStore runs(a.runs);
  store::SessionStore sessions(a.gold);
  auto ids = a.run_ids.empty() ? runs.list_runs() : a.run_ids;
  if (ids.empty()) throw Error(ErrorCode::ManifestMissing, "no runs under " + a.runs);

  pipeline::EvaluateOptions o;
  o.allow_gaps = a.allow_gaps;
  o.evaluation.bootstrap = settings.bootstrap;
  if (a.bootstrap) o.evaluation.bootstrap.replicates = *a.bootstrap;
  if (a.seed) o.evaluation.bootstrap.seed = *a.seed;
  o.evaluation.with_ci = o.evaluation.bootstrap.replicates > 0;
  if (!o.evaluation.with_ci) o.evaluation.bootstrap.replicates = 1;

  for (const auto& id : ids) {
    const auto run = pipeline::load_run(runs, id);
    const auto gold = pipeline::load_gold(sessions, run.battery);
    const auto report = pipeline::evaluate(gold, run, o);
    const auto files =
        pipeline::write_report(a.report, id, metrics::to_json(report), metrics::flatten(report));
    ctx.out << "run " << id << "\n";
    for (const auto& c : report.conditions) {
      ctx.out << "  " << std::left << std::setw(8) << interview::condition_token(c.condition);
      if (c.scored) {
        ctx.out << " overall " << fmt(c.overall);
        if (c.overall_ci) ctx.out << " [" << fmt(c.overall_ci->lo) << ", " << fmt(c.overall_ci->hi) << "]";
        ctx.out << "  cells " << c.scored_cells;
        if (c.gaps) ctx.out << "  gaps " << c.gaps;
      }
      if (c.mbti) ctx.out << "  mbti top1 " << fmt(c.mbti->top1_exact) << " hit@2 " << fmt(c.mbti->hit_at_2);
      ctx.out << "\n";
    }
    for (const auto& w : report.warnings) ctx.err << "warning: " << w << "\n";
    ctx.out << "  wrote " << files.json.string() << " and " << files.csv.string() << "\n";
  }
  return kOk;
}

// -- audit -------------------------------------------------------------------

struct AuditArgs {
  std::string core;
  std::string full;
  std::string gold;
  std::string out;
  std::string battery;
  std::string annotations;
  std::optional<std::size_t> bootstrap;
  std::optional<std::uint64_t> seed;
};

int cmd_audit(Context& ctx, const AuditArgs& a) {
  const auto settings = ctx.settings();
  auto full = pipeline::load_prediction_file(a.full);
  std::vector<simulation::PredictionSet> sets;
  std::optional<simulation::Condition> baseline;
  if (!a.core.empty()) {
    auto core = pipeline::load_prediction_file(a.core);
    baseline = core.condition;
    sets.push_back(std::move(core));
  }
  audit::AuditOptions o;
  o.condition = full.condition;
  o.baseline = baseline;
  o.bootstrap = settings.bootstrap;
  if (a.bootstrap) o.bootstrap->replicates = *a.bootstrap;
  if (a.seed) o.bootstrap->seed = *a.seed;
  if (o.bootstrap->replicates == 0) o.bootstrap.reset();
  sets.push_back(std::move(full));

  fs::path battery_path = a.battery;
  if (battery_path.empty()) {
    const auto beside = fs::path(a.full).parent_path() / "battery.jsonl";
    battery_path = fs::exists(beside) ? beside : kDefaultBattery;
  }
  const auto battery = assessments::load_battery(battery_path);
  store::SessionStore sessions(a.gold);
  const auto gold = pipeline::load_gold(sessions, battery);

  std::vector<audit::AnnotationRecord> annotations;
  if (!a.annotations.empty()) annotations = audit::read_annotations(read_text_file(a.annotations));
  const auto report =
      pipeline::audit(gold, sets, battery, o, a.annotations.empty() ? nullptr : &annotations);
  const auto files = pipeline::write_report(a.out, "audit", audit::to_json(report),
                                            audit::flatten(report));

  const auto& d = report.distribution;
  ctx.out << "traces " << d.n << ", follow-up involved " << fmt(d.followup_involved) << "\n";
  const auto show = [&](const char* name, const audit::GroupAccuracy& g) {
    ctx.out << name << " " << g.correct << "/" << g.n << " "
            << (g.rate ? fmt(*g.rate) : std::string("undefined")) << "\n";
  };
  show("grounded accuracy  ", report.accuracy.grounded);
  show("ungrounded accuracy", report.accuracy.ungrounded);
  if (report.transitions_grounded) {
    const auto& t = *report.transitions_grounded;
    ctx.out << "grounded transitions: unchanged-wrong " << t.unchanged_wrong
            << ", unchanged-correct " << t.unchanged_correct << ", improved " << t.improved
            << ", worsened " << t.worsened << ", changed " << t.changed << "/" << t.n << "\n";
  }
  if (report.agreement) {
    const auto rate = [](std::optional<double> r) { return r ? fmt(*r) : std::string("undefined"); };
    ctx.out << "inter-rater " << rate(report.agreement->inter_rater.rate()) << ", prelabel "
            << (report.agreement->prelabel ? rate(report.agreement->prelabel->rate()) : "n/a") << "\n";
  }
  if (report.location_mismatches) {
    ctx.err << "warning: " << report.location_mismatches
            << " traces claim a location their excerpt does not support\n";
  }
  ctx.out << "wrote " << files.json.string() << " and " << files.csv.string() << "\n";
  return kOk;
}

// -- fixtures ----------------------------------------------------------------

fixtures::ReferenceTargets targets_for(const std::string& spec, const std::string& file) {
  if (!file.empty()) return fixtures::load_targets(file);
  if (spec != "reference") {
    throw Error(ErrorCode::InvalidRequest, "unknown fixture spec " + spec + " (reference)");
  }
  return fixtures::default_targets();
}

int cmd_fixtures_build(Context& ctx, const std::string& spec, const std::string& targets,
                       const std::string& out) {
  const auto t = targets_for(spec, targets);
  fixtures::build_reference(out, t, assessments::load_battery(kDefaultBattery));
  ctx.out << "built fixtures in " << out << "\n";
  return kOk;
}

int cmd_fixtures_check(Context& ctx, const std::string& spec, const std::string& targets,
                       const std::string& dir) {
  const auto t = targets_for(spec, targets);
  std::size_t failed = 0;
  const auto lines = fixtures::check_reference(dir, t);
  for (const auto& l : lines) {
    if (!l.pass) ++failed;
    ctx.out << (l.pass ? "ok   " : "FAIL ") << l.name << " expected " << fmt(l.expected)
            << " got " << fmt(l.actual) << "\n";
  }
  ctx.out << lines.size() - failed << "/" << lines.size() << " checks match\n";
  return failed ? kMismatch : kOk;
}

// -- serve -------------------------------------------------------------------

httplib::Server* g_server = nullptr;

extern "C" void stop_server(int) {
  if (g_server) g_server->stop();
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store;
  std::string backend;
  std::string battery = kDefaultBattery.string();
  std::string admin_token_env = "PERSONA_LAB_ADMIN_TOKEN";
};

int cmd_serve(Context& ctx, const ServeArgs& a) {
  const auto settings = ctx.settings();
  fs::create_directories(a.store);
  api::ServiceConfig cfg;
  cfg.store_root = a.store;
  if (const char* t = std::getenv(a.admin_token_env.c_str())) cfg.admin_token = t;
  if (!a.backend.empty()) cfg.interview_gateway = make_gateway(a.backend, settings);
  cfg.interview = settings.interview;
  cfg.battery = assessments::load_battery(a.battery);
  cfg.bootstrap = settings.bootstrap;
  const auto backend_settings = settings.backend;
  cfg.backend_factory = [backend_settings](const std::string& ref) {
    return gateway::make_backend(ref, backend_settings);
  };
  api::Service service(cfg);
  httplib::Server server;
  service.mount(server);
  if (!server.bind_to_port(a.host, a.port)) {
    ctx.err << "cannot listen on " << a.host << ":" << a.port << "\n";
    return kRuntime;
  }
  if (cfg.admin_token.empty()) {
    ctx.err << "warning: " << a.admin_token_env << " is unset; run endpoints are disabled\n";
  }
  if (!cfg.interview_gateway) {
    ctx.err << "warning: no --backend; questions will not be generated\n";
  }
  ctx.out << "listening on http://" << a.host << ":" << a.port << "\n" << std::flush;
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  const bool ok = server.listen_after_bind();
  g_server = nullptr;
  service.wait_for_runs();
  return ok ? kOk : kRuntime;
}

// -- battery / assessments / transcript ----------------------------------------

int cmd_battery_validate(Context& ctx, const std::string& file, bool relaxed) {
  const auto battery = assessments::load_battery(file);
  assessments::BatteryChecks checks;
  if (relaxed) checks = {false, false};
  assessments::validate_battery(battery, checks);
  ctx.out << "ok " << battery.items.size() << " items, hash "
          << assessments::battery_hash(battery) << "\n";
  return kOk;
}

int cmd_import(Context& ctx, const std::string& store_dir, const std::string& file,
               const std::string& battery_file, bool finalize) {
  store::SessionStore sessions(store_dir);
  const auto battery = assessments::load_battery(battery_file);
  const auto at = to_rfc3339(clock_from_env()());
  for (const auto& [alias, answers] : assessments::read_responses_file(file, battery)) {
    const auto set = assessments::record_responses(sessions, alias, battery, answers, finalize, at);
    ctx.out << alias << ": " << set.answers.size() << " answers"
            << (set.complete ? ", complete" : "") << "\n";
  }
  return kOk;
}

int cmd_mbti(Context& ctx, const std::string& store_dir, const std::string& alias,
             const std::string& types) {
  store::SessionStore sessions(store_dir);
  const auto report = assessments::parse_mbti(types);
  assessments::record_mbti(sessions, alias, report, to_rfc3339(clock_from_env()()));
  ctx.out << alias << ": " << assessments::format_mbti(report) << "\n";
  return kOk;
}

int cmd_bfi44(Context& ctx, const std::string& store_dir, const std::string& alias,
              const std::string& items) {
  store::SessionStore sessions(store_dir);
  assessments::Bfi44Response r;
  for (const auto& raw : text::split(items, ',')) {
    const auto v = text::trim(raw);
    if (v.empty()) continue;
    try {
      r.items.push_back(std::stoi(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::OutOfRangeItem, "'" + v + "' is not a whole number");
    }
  }
  const auto rec = assessments::record_bfi44(sessions, alias, r, assessments::Bfi44Key::standard(),
                                             to_rfc3339(clock_from_env()()));
  ctx.out << alias << ": " << assessments::to_json(rec.scores).dump() << "\n";
  return kOk;
}

int cmd_transcript(Context& ctx, const std::string& store_dir, const std::string& alias,
                   bool redact) {
  store::SessionStore sessions(store_dir);
  const auto path = sessions.write_transcript_export(alias, redact);
  ctx.out << "wrote " << path.string() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Context ctx{in, out, err, {}};
  CLI::App app{"Interview-conditioned persona simulation toolkit"};
  app.require_subcommand(1);
  app.add_option("--config", ctx.config_path, "JSON settings file")->check(CLI::ExistingFile);

  InterviewArgs ia;
  auto* interview = app.add_subcommand("interview", "Run a three-stage interview in the terminal");
  interview->add_option("--alias", ia.alias)->required();
  interview->add_option("--backend", ia.backend, "scripted:<file>, replay:, record: or http")
      ->required();
  interview->add_option("--store", ia.store)->required();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Predict battery answers for stored sessions");
  simulate->add_option("--conditions", sa.conditions, "Comma-separated: core10,full,summary");
  simulate->add_option("--battery", sa.battery);
  simulate->add_option("--store", sa.store)->required();
  simulate->add_option("--out", sa.out, "Run store root")->required();
  simulate->add_option("--backend", sa.backend)->required();
  simulate->add_option("--run-id", sa.run_id);
  simulate->add_option("--participants", sa.participants)->delimiter(',');
  simulate->add_option("--parallel", sa.parallel)->check(CLI::Range(1, 64));
  simulate->add_option("--seed", sa.seed);
  simulate->add_flag("--personality", sa.personality, "Also predict MBTI and Big Five");
  simulate->add_option("--max-failure-rate", sa.max_failure_rate)->check(CLI::Range(0.0, 1.0));

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Score runs against self-reports");
  evaluate->add_option("--runs", ea.runs, "Run store root")->required();
  evaluate->add_option("--run-id", ea.run_ids, "Runs to score (default: all)");
  evaluate->add_option("--gold", ea.gold, "Session store with self-reports")->required();
  evaluate->add_option("--report", ea.report, "Output directory")->required();
  evaluate->add_option("--bootstrap", ea.bootstrap, "Replicates; 0 disables intervals");
  evaluate->add_option("--seed", ea.seed);
  evaluate->add_flag("--allow-gaps", ea.allow_gaps);

  AuditArgs aa;
  auto* audit_cmd = app.add_subcommand("audit", "Audit reasoning traces of categorical items");
  audit_cmd->add_option("--core", aa.core, "Baseline predictions file");
  audit_cmd->add_option("--full", aa.full, "Audited predictions file")->required();
  audit_cmd->add_option("--gold", aa.gold)->required();
  audit_cmd->add_option("--out", aa.out)->required();
  audit_cmd->add_option("--battery", aa.battery);
  audit_cmd->add_option("--annotations", aa.annotations, "Filled annotation TSV");
  audit_cmd->add_option("--bootstrap", aa.bootstrap);
  audit_cmd->add_option("--seed", aa.seed);

  std::string fx_spec = "reference";
  std::string fx_targets;
  std::string fx_dir;
  auto* fx = app.add_subcommand("fixtures", "Synthesize and check reference datasets");
  fx->require_subcommand(1);
  auto* fx_build = fx->add_subcommand("build");
  fx_build->add_option("--spec", fx_spec);
  fx_build->add_option("--targets", fx_targets, "Targets JSON (default: shipped targets)");
  fx_build->add_option("--out", fx_dir)->required();
  auto* fx_check = fx->add_subcommand("check");
  fx_check->add_option("--spec", fx_spec);
  fx_check->add_option("--targets", fx_targets);
  fx_check->add_option("--dir", fx_dir)->required();

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--host", va.host);
  serve->add_option("--port", va.port)->check(CLI::Range(0, 65535));
  serve->add_option("--store", va.store)->required();
  serve->add_option("--backend", va.backend, "Interview model");
  serve->add_option("--battery", va.battery);
  serve->add_option("--admin-token-env", va.admin_token_env);

  std::string battery_file;
  bool relaxed = false;
  auto* battery = app.add_subcommand("battery", "Battery tools");
  battery->require_subcommand(1);
  auto* validate = battery->add_subcommand("validate");
  validate->add_option("--file", battery_file)->required();
  validate->add_flag("--relaxed", relaxed, "Skip the reference layout and probe pair checks");

  std::string as_store;
  std::string as_file;
  std::string as_battery = kDefaultBattery.string();
  std::string as_alias;
  std::string as_value;
  bool as_finalize = false;
  auto* assessments_cmd = app.add_subcommand("assessments", "Record self-reports");
  assessments_cmd->require_subcommand(1);
  auto* import = assessments_cmd->add_subcommand("import", "Dilemma responses file");
  import->add_option("--store", as_store)->required();
  import->add_option("--responses", as_file)->required();
  import->add_option("--battery", as_battery);
  import->add_flag("--finalize", as_finalize, "Require complete sets");
  auto* mbti = assessments_cmd->add_subcommand("mbti");
  mbti->add_option("--store", as_store)->required();
  mbti->add_option("--alias", as_alias)->required();
  mbti->add_option("--types", as_value, "One or two types, e.g. \"ENFP / INFP\"")->required();
  auto* bfi = assessments_cmd->add_subcommand("bfi44");
  bfi->add_option("--store", as_store)->required();
  bfi->add_option("--alias", as_alias)->required();
  bfi->add_option("--items", as_value, "44 comma-separated values 1-5")->required();

  bool redact = false;
  auto* transcript = app.add_subcommand("transcript", "Export an interview transcript");
  transcript->add_option("--store", as_store)->required();
  transcript->add_option("--alias", as_alias)->required();
  transcript->add_flag("--redact", redact);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*interview) return cmd_interview(ctx, ia);
    if (*simulate) return cmd_simulate(ctx, sa);
    if (*evaluate) return cmd_evaluate(ctx, ea);
    if (*audit_cmd) return cmd_audit(ctx, aa);
    if (*fx_build) return cmd_fixtures_build(ctx, fx_spec, fx_targets, fx_dir);
    if (*fx_check) return cmd_fixtures_check(ctx, fx_spec, fx_targets, fx_dir);
    if (*serve) return cmd_serve(ctx, va);
    if (*validate) return cmd_battery_validate(ctx, battery_file, relaxed);
    if (*import) return cmd_import(ctx, as_store, as_file, as_battery, as_finalize);
    if (*mbti) return cmd_mbti(ctx, as_store, as_alias, as_value);
    if (*bfi) return cmd_bfi44(ctx, as_store, as_alias, as_value);
    if (*transcript) return cmd_transcript(ctx, as_store, as_alias, redact);
  } catch (const Error& e) {
    err << "error: " << e.token() << ": " << e.what() << "\n";
    if (!e.details().is_null()) err << "details: " << e.details().dump() << "\n";
    return exit_status_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kValidation;
}

}  // namespace persona_lab::cli
