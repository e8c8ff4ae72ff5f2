#include "persona_lab/simulation/predictor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "persona_lab/assessments/mbti.hpp"
#include "persona_lab/common/error.hpp"
#include "persona_lab/common/text.hpp"
#include "persona_lab/gateway/structured.hpp"

namespace persona_lab::simulation {

using assessments::DilemmaItem;
using assessments::QType;
using gateway::ChatMessage;
using gateway::FieldKind;
using gateway::FieldSpec;
using gateway::PromptRequest;
using gateway::RecordShape;
using gateway::Role;
using interview::ContextBundle;
using interview::SessionState;

namespace {

constexpr const char* kPredictionSystem =
    "You stand in for one specific research participant. Base every judgement on the interview "
    "material you are given about that person, and reply only with the labelled fields requested.";

constexpr const char* kTraceInstructions =
    "EXPLANATION: one or two sentences on why this person would answer this way.\n"
    "EVIDENCE: a short passage copied word for word from the participant's own answers that "
    "supports the prediction, or none if no particular passage applies.\n"
    "LOCATION: where that passage comes from: core interview, follow-up, both, or none.\n"
    "CATEGORY: the kind of reasoning behind the prediction, one of:\n"
    "  narrative reference: rests on a concrete event or story the participant described.\n"
    "  value abstraction: generalizes from priorities or principles the participant stated.\n"
    "  coping constraint: rests on practical limits, resources, or how the participant handles "
    "pressure and setbacks.\n"
    "  generic norm: falls back on how people usually respond, with no participant-specific "
    "support.\n";

std::string answer_format(const DilemmaItem& item) {
  std::ostringstream out;
  switch (item.qtype) {
    case QType::Choice: {
      out << "ANSWER: the letter of exactly one option (";
      for (std::size_t i = 0; i < item.options.size(); ++i) {
        if (i) out << ", ";
        out << item.options[i].label;
      }
      out << ").";
      break;
    }
    case QType::Likert:
      out << "ANSWER: a single whole number from " << item.scale->min << " to " << item.scale->max
          << ".";
      break;
    case QType::Ranking:
      out << "ANSWER: a full ordering of all " << item.rank_items.size()
          << " items from most to least important, each named exactly once and separated by "
             "\" > \".";
      break;
  }
  return out.str();
}

std::string render_item(const DilemmaItem& item) {
  std::ostringstream out;
  out << "Question " << item.item_id << ": " << item.prompt << "\n";
  switch (item.qtype) {
    case QType::Choice:
      for (const auto& o : item.options) out << o.label << ". " << o.text << "\n";
      break;
    case QType::Likert:
      out << "Scale: " << item.scale->min;
      if (!item.scale->low_anchor.empty()) out << " (" << item.scale->low_anchor << ")";
      out << " to " << item.scale->max;
      if (!item.scale->high_anchor.empty()) out << " (" << item.scale->high_anchor << ")";
      out << "\n";
      break;
    case QType::Ranking:
      out << "Items to rank:";
      for (const auto& r : item.rank_items) out << " [" << r << "]";
      out << "\n";
      break;
  }
  return out.str();
}

RecordShape prediction_shape() {
  RecordShape shape;
  shape.fields.push_back({"ANSWER", FieldKind::Text, false, {}, {}});
  shape.fields.push_back({"EXPLANATION", FieldKind::Text, false, {}, {}});
  shape.fields.push_back({"EVIDENCE", FieldKind::Text, true, {}, {}});
  shape.fields.push_back(
      {"LOCATION", FieldKind::Enum, false, {}, gateway::evidence_location_aliases()});
  shape.fields.push_back(
      {"CATEGORY", FieldKind::Enum, false, {}, gateway::reasoning_category_aliases()});
  return shape;
}

bool is_none(std::string_view s) {
  const auto n = text::normalize_label(s);
  return n.empty() || n == "none" || n == "n a" || n == "na" || n == "no evidence";
}

const std::vector<std::string_view>& wrappers() {
  static const std::vector<std::string_view> w = {
      "\"", "'", "`", "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99",
      "\xC2\xAB", "\xC2\xBB", "\xE2\x80\xA6", "...", "[...]", "(...)"};
  return w;
}

bool strip_one(std::string& s) {
  for (auto w : wrappers()) {
    if (s.size() >= w.size() && s.compare(0, w.size(), w) == 0) {
      s.erase(0, w.size());
      return true;
    }
    if (s.size() >= w.size() && s.compare(s.size() - w.size(), w.size(), w) == 0) {
      s.erase(s.size() - w.size());
      return true;
    }
  }
  return false;
}

}  // namespace

std::string render_context(const ContextBundle& context) {
  std::ostringstream out;
  if (context.condition == Condition::PersonalitySummary) {
    out << "Personality summary of the participant:\n" << context.summary_text.value_or("") << "\n";
    return out.str();
  }
  out << "Interview transcript ("
      << interview::condition_display_name(context.condition) << "):\n";
  for (const auto& t : context.turns) {
    out << "\n[" << t.question_id << "] Interviewer: " << t.question << "\n"
        << "Participant: " << t.answer << "\n";
  }
  return out.str();
}

PromptRequest build_prompt(const ContextBundle& context, const DilemmaItem& item) {
  std::ostringstream user;
  user << render_context(context) << "\n"
       << "Predict how this participant would answer the following question.\n\n"
       << render_item(item) << "\n"
       << "Reply with exactly these labelled fields, each starting on its own line:\n"
       << answer_format(item) << "\n"
       << kTraceInstructions;
  PromptRequest req;
  req.messages = {{Role::System, kPredictionSystem}, {Role::User, user.str()}};
  req.temperature = 0.0;
  req.decode_mode = gateway::DecodeMode::Greedy;
  return req;
}

std::string normalize_excerpt(std::string_view excerpt) {
  std::string s = text::to_lower(text::collapse_whitespace(excerpt));
  while (true) {
    s = text::trim(s);
    if (!strip_one(s)) break;
  }
  return text::collapse_whitespace(s);
}

EvidenceLocation locate_evidence(std::string_view excerpt, const SessionState& session) {
  const std::string needle = normalize_excerpt(excerpt);
  if (needle.empty()) return EvidenceLocation::Unclassified;
  bool core = false;
  bool followup = false;
  for (const auto& a : session.answers) {
    const auto* q = session.find_question(a.question_id);
    if (!q) continue;
    const std::string hay = text::to_lower(text::collapse_whitespace(a.text));
    if (hay.find(needle) == std::string::npos) continue;
    if (q->stage == interview::QuestionStage::Core) core = true;
    else followup = true;
  }
  if (core && followup) return EvidenceLocation::Both;
  if (core) return EvidenceLocation::CoreInterview;
  if (followup) return EvidenceLocation::FollowUp;
  return EvidenceLocation::Unclassified;
}

PredictionRecord predict(gateway::ModelGateway& gateway, const SessionState& session,
                         Condition condition, const DilemmaItem& item,
                         const std::string& created_at) {
  const ContextBundle context = interview::slice_context(session, condition);
  const PromptRequest request = build_prompt(context, item);

  gateway::StructuredOptions opts;
  opts.validation_error = ErrorCode::InvalidPredictedAnswer;
  opts.validator = [&item](const gateway::StructuredRecord& rec) -> std::optional<std::string> {
    try {
      auto answer = assessments::parse_answer_text(item, rec.at("ANSWER"));
      if (auto why = assessments::answer_problem(item, answer)) return "ANSWER " + *why;
      return std::nullopt;
    } catch (const Error& e) {
      return std::string("ANSWER ") + e.what();
    }
  };
  std::string fingerprint;
  auto rec = gateway::complete_structured(gateway, request, prediction_shape(), opts, &fingerprint);

  PredictionRecord out;
  out.participant_alias = session.participant_alias;
  out.item_id = item.item_id;
  out.condition = condition;
  out.answer = assessments::parse_answer_text(item, rec.at("ANSWER"));
  out.trace.explanation = rec.at("EXPLANATION");
  out.trace.evidence_excerpt = is_none(rec.at("EVIDENCE")) ? "" : rec.at("EVIDENCE");
  out.trace.claimed_location = *location_from_name(rec.at("LOCATION"));
  out.trace.reasoning_category = *category_from_name(rec.at("CATEGORY"));
  out.trace.verified_location = locate_evidence(out.trace.evidence_excerpt, session);
  out.trace.location_mismatch = out.trace.claimed_location != out.trace.verified_location;
  out.prompt_fingerprint = fingerprint;
  out.created_at = created_at;
  return out;
}

namespace {

constexpr std::array<const char*, 5> kTraitLabels = {"OPENNESS", "CONSCIENTIOUSNESS",
                                                     "EXTRAVERSION", "AGREEABLENESS",
                                                     "NEUROTICISM"};

RecordShape personality_shape() {
  RecordShape shape;
  shape.fields.push_back({"MBTI_1", FieldKind::Text, false, {}, {}});
  shape.fields.push_back({"MBTI_2", FieldKind::Text, false, {}, {}});
  for (const char* t : kTraitLabels) shape.fields.push_back({t, FieldKind::Text, false, {}, {}});
  shape.fields.push_back({"EXPLANATION", FieldKind::Text, false, {}, {}});
  return shape;
}

std::optional<int> read_score(const std::string& s) {
  std::size_t pos = 0;
  while (pos < s.size() && !std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos == s.size()) return std::nullopt;
  std::size_t end = pos;
  while (end < s.size() && std::isdigit(static_cast<unsigned char>(s[end]))) ++end;
  if (end - pos > 3) return std::nullopt;
  return std::stoi(s.substr(pos, end - pos));
}

}  // namespace

PromptRequest build_personality_prompt(const ContextBundle& context) {
  std::ostringstream user;
  user << render_context(context) << "\n"
       << "Infer this participant's personality profile from the material above.\n\n"
       << "Reply with exactly these labelled fields, each starting on its own line:\n"
       << "MBTI_1: the most likely four-letter MBTI type.\n"
       << "MBTI_2: the second most likely four-letter MBTI type, different from MBTI_1.\n";
  for (const char* t : kTraitLabels) {
    user << t << ": a whole number from 1 (very low) to 40 (very high).\n";
  }
  user << "EXPLANATION: one or two sentences justifying the profile.\n";
  PromptRequest req;
  req.messages = {{Role::System, kPredictionSystem}, {Role::User, user.str()}};
  req.temperature = 0.0;
  req.decode_mode = gateway::DecodeMode::Greedy;
  return req;
}

PersonalityPrediction predict_personality(gateway::ModelGateway& gateway,
                                          const SessionState& session, Condition condition,
                                          const std::string& created_at) {
  const ContextBundle context = interview::slice_context(session, condition);
  gateway::StructuredOptions opts;
  opts.validation_error = ErrorCode::InvalidPredictedAnswer;
  opts.validator = [](const gateway::StructuredRecord& rec) -> std::optional<std::string> {
    std::string first;
    for (const char* f : {"MBTI_1", "MBTI_2"}) {
      if (!assessments::is_valid_mbti(text::to_upper(text::trim(rec.at(f))))) {
        return std::string(f) + " is not a four-letter MBTI type";
      }
    }
    if (assessments::normalize_mbti(text::trim(rec.at("MBTI_1"))) ==
        assessments::normalize_mbti(text::trim(rec.at("MBTI_2")))) {
      return std::string("MBTI_2 must differ from MBTI_1");
    }
    for (const char* t : kTraitLabels) {
      auto v = read_score(rec.at(t));
      if (!v || *v < 1 || *v > 40) return std::string(t) + " must be a whole number from 1 to 40";
    }
    return std::nullopt;
  };
  std::string fingerprint;
  auto rec = gateway::complete_structured(gateway, build_personality_prompt(context),
                                          personality_shape(), opts, &fingerprint);
  PersonalityPrediction p;
  p.participant_alias = session.participant_alias;
  p.condition = condition;
  p.mbti_top2 = {assessments::normalize_mbti(text::trim(rec.at("MBTI_1"))),
                 assessments::normalize_mbti(text::trim(rec.at("MBTI_2")))};
  for (std::size_t i = 0; i < kTraitLabels.size(); ++i) {
    p.bigfive.values[i] = static_cast<double>(*read_score(rec.at(kTraitLabels[i])));
  }
  p.explanation = rec.at("EXPLANATION");
  p.prompt_fingerprint = fingerprint;
  p.created_at = created_at;
  return p;
}

namespace {

struct Task {
  const SessionState* session;
  Condition condition;
  const DilemmaItem* item;  // null for a personality task
};

bool fatal(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidRequest:
    case ErrorCode::FingerprintCollision:
    case ErrorCode::IoFailure:
    case ErrorCode::DuplicateRecord:
    case ErrorCode::HashMismatch:
    case ErrorCode::ManifestMissing:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<PredictionSet> run_batch(gateway::ModelGateway& gateway, store::RunStore& runs,
                                     const std::vector<SessionState>& sessions,
                                     const assessments::Battery& battery,
                                     const std::vector<Condition>& conditions,
                                     const BatchOptions& options) {
  if (options.parallelism < 1) {
    throw Error(ErrorCode::InvalidRequest, "parallelism must be a positive integer");
  }
  if (conditions.empty()) throw Error(ErrorCode::InvalidRequest, "no conditions requested");
  if (options.max_failure_rate < 0.0 || options.max_failure_rate > 1.0) {
    throw Error(ErrorCode::InvalidRequest, "max_failure_rate must lie in [0, 1]");
  }
  std::vector<std::string> aliases;
  for (const auto& s : sessions) {
    if (std::find(aliases.begin(), aliases.end(), s.participant_alias) != aliases.end()) {
      throw Error(ErrorCode::InvalidRequest, "session " + s.participant_alias + " listed twice");
    }
    aliases.push_back(s.participant_alias);
    for (auto c : conditions) interview::slice_context(s, c);
  }

  const Clock clock = options.clock ? options.clock : system_clock();
  RunManifest manifest;
  manifest.run_id = options.run_id;
  manifest.backend_name = gateway.backend_name();
  manifest.seed = options.seed;
  manifest.created_at = to_rfc3339(clock());
  manifest.config = options.config.is_object() ? options.config : nlohmann::json::object();
  std::vector<std::string> cond_tokens;
  for (auto c : conditions) cond_tokens.emplace_back(interview::condition_token(c));
  manifest.config["conditions"] = cond_tokens;
  manifest.config["participants"] = aliases;
  manifest.config["items"] = battery.item_ids();
  manifest.config["max_failure_rate"] = options.max_failure_rate;
  manifest.config["personality"] = options.personality;
  runs.open_run(manifest, battery);

  std::vector<Task> tasks;
  for (auto c : conditions) {
    for (const auto& s : sessions) {
      for (const auto& item : battery.items) {
        if (!runs.has_prediction(options.run_id, s.participant_alias, item.item_id, c)) {
          tasks.push_back({&s, c, &item});
        }
      }
      if (options.personality && !runs.has_personality(options.run_id, s.participant_alias, c)) {
        tasks.push_back({&s, c, nullptr});
      }
    }
  }

  const std::size_t total = tasks.size();
  const auto budget =
      static_cast<std::size_t>(std::floor(options.max_failure_rate * static_cast<double>(total)));
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<std::size_t> failures{0};
  std::atomic<bool> stop{false};
  std::mutex err_mu;
  std::exception_ptr fatal_error;

  auto worker = [&]() {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const Task& t = tasks[i];
      const std::string at = to_rfc3339(clock());
      try {
        if (t.item) {
          runs.store_prediction(options.run_id,
                                predict(gateway, *t.session, t.condition, *t.item, at));
        } else {
          runs.store_personality(options.run_id,
                                 predict_personality(gateway, *t.session, t.condition, at));
        }
      } catch (const Error& e) {
        if (fatal(e.code())) {
          std::lock_guard<std::mutex> g(err_mu);
          if (!fatal_error) fatal_error = std::current_exception();
          stop = true;
          return;
        }
        GapRecord gap{t.session->participant_alias, t.item ? t.item->item_id : "personality",
                      t.condition, std::string(error_token(e.code())), e.what()};
        try {
          if (t.item) runs.store_gap(options.run_id, gap);
          else runs.store_personality_gap(options.run_id, gap);
        } catch (...) {
          std::lock_guard<std::mutex> g(err_mu);
          if (!fatal_error) fatal_error = std::current_exception();
          stop = true;
          return;
        }
        if (failures.fetch_add(1) + 1 > budget) stop = true;
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!fatal_error) fatal_error = std::current_exception();
        stop = true;
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (options.progress) {
        std::lock_guard<std::mutex> g(err_mu);
        options.progress(d, total);
      }
    }
  };

  const int n_threads =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.parallelism),
                                             std::max<std::size_t>(total, 1)));
  std::vector<std::thread> pool;
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  if (fatal_error) std::rethrow_exception(fatal_error);
  if (failures.load() > budget) {
    throw Error(ErrorCode::RunAborted,
                "run '" + options.run_id + "' aborted: " + std::to_string(failures.load()) +
                    " failed cells exceed the failure budget of " + std::to_string(budget),
                {{"run_id", options.run_id},
                 {"failures", failures.load()},
                 {"attempted", done.load()},
                 {"total", total}});
  }

  std::vector<PredictionSet> sets;
  for (auto c : conditions) sets.push_back(runs.load_run(options.run_id, c));
  return sets;
}

}  // namespace persona_lab::simulation
