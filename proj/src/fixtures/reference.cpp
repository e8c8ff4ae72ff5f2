#include "persona_lab/fixtures/reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "persona_lab/assessments/bfi.hpp"
#include "persona_lab/assessments/mbti.hpp"
#include "persona_lab/assessments/responses.hpp"
#include "persona_lab/audit/audit.hpp"
#include "persona_lab/common/clock.hpp"
#include "persona_lab/common/error.hpp"
#include "persona_lab/common/random.hpp"
#include "persona_lab/common/records.hpp"
#include "persona_lab/gateway/scripted_backend.hpp"
#include "persona_lab/interview/engine.hpp"
#include "persona_lab/pipeline/pipeline.hpp"
#include "persona_lab/simulation/predictor.hpp"
#include "persona_lab/store/run_store.hpp"
#include "persona_lab/store/session_store.hpp"

namespace persona_lab::fixtures {

namespace fs = std::filesystem;
using assessments::Answer;
using assessments::Battery;
using assessments::ChoiceAnswer;
using assessments::DilemmaItem;
using assessments::ItemAnswers;
using assessments::LikertAnswer;
using assessments::QType;
using assessments::RankingAnswer;
using interview::SessionState;
using nlohmann::json;
using simulation::Condition;
using simulation::EvidenceLocation;
using simulation::PersonalityPrediction;
using simulation::PredictionRecord;
using simulation::ReasoningCategory;

namespace {

constexpr const char* kCreatedAt = "2026-01-15T09:00:00Z";
constexpr int kFollowUps = 3;

// Every core answer and the first follow-up answer share kBothExcerpt; the
// other two excerpts occur in one stage only.
constexpr const char* kBothExcerpt = "I keep my promises";
constexpr const char* kCoreExcerpt = "even when it costs me time";
constexpr const char* kFollowUpExcerpt = "my grandmother taught me patience";
constexpr const char* kUnfoundExcerpt = "reliability matters more than comfort";

const char* kConditionKeys[3] = {"core10", "full", "summary"};

std::array<double, 3> triple(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

[[noreturn]] void unrealisable(const std::string& what) {
  throw Error(ErrorCode::InvalidRequest, "reference targets cannot be realised: " + what);
}

// Count whose share of `n` is exactly `rate`.
std::size_t exact_count(double rate, std::size_t n, const std::string& what) {
  const double x = rate * static_cast<double>(n);
  const double r = std::round(x);
  if (std::fabs(x - r) > 1e-6 || r < 0) unrealisable(what + " is not a whole count of " + std::to_string(n));
  return static_cast<std::size_t>(r);
}

std::size_t nearest_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

std::string alias_of(std::size_t p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "P%02zu", p + 1);
  return buf;
}

// Interview script for the fixture sessions.

std::string core_reply() {
  std::string out = "Stage 1 - Ten Questions:\n";
  for (int i = 1; i <= 10; ++i) {
    out += std::to_string(i) + ". [Domain " + std::to_string(i) +
           "] Tell me about a time that shows how you handle theme " + std::to_string(i) + "?\n";
  }
  return out;
}

std::string followup_reply() {
  std::string out = "Stage 2 - Follow-Up Questions:\n";
  for (int i = 1; i <= kFollowUps; ++i) {
    out += "F" + std::to_string(i) + ". In Q" + std::to_string(i) +
           " you mentioned something important; can you say more about it? (Purpose: clarify "
           "point " + std::to_string(i) + ")\n";
  }
  return out;
}

std::string summary_reply() {
  std::string out;
  for (int i = 1; i <= 10; ++i) {
    out += "Domain " + std::to_string(i) + ": keeps commitments and values patience.\n";
  }
  return out;
}

std::vector<gateway::ScriptEntry> interview_script() {
  return {
      {{"personality insights per domain"}, true, summary_reply(), std::nullopt},
      {{"Proceed to Stage 2"}, true, followup_reply(), std::nullopt},
      {{"Begin Stage 1"}, true, core_reply(), std::nullopt},
  };
}

std::string core_answer(const std::string& alias, std::size_t k) {
  return "Answer " + std::to_string(k) + " from " + alias +
         ": I keep my promises even when it costs me time.";
}

std::string followup_answer(const std::string& alias, std::size_t k) {
  if (k == 1) return "When my sister needed help I dropped everything; I keep my promises.";
  return "Follow-up " + std::to_string(k) + " from " + alias +
         ": my grandmother taught me patience during the long winter.";
}

std::vector<SessionState> build_sessions(const store::SessionStore& store, std::size_t n) {
  gateway::GatewayOptions opts;
  opts.retry.sleep = [](std::chrono::milliseconds) {};
  gateway::ModelGateway gw(
      std::make_shared<gateway::ScriptedBackend>(interview_script(), false, "fixture"), opts);
  interview::InterviewConfig config;
  const interview::InterviewEngine engine(store, config, fixed_clock(parse_rfc3339(kCreatedAt)));
  std::vector<SessionState> sessions;
  for (std::size_t p = 0; p < n; ++p) {
    const auto alias = alias_of(p);
    auto s = engine.start_session(alias);
    s = engine.generate_core_questions(s, gw);
    const auto core = s.core_questions;
    for (std::size_t i = 0; i < core.size(); ++i) {
      s = engine.submit_answer(s, core[i].question_id, core_answer(alias, i + 1));
    }
    s = engine.generate_followups(s, gw);
    const auto followups = s.followup_questions;
    for (std::size_t i = 0; i < followups.size(); ++i) {
      s = engine.submit_answer(s, followups[i].question_id, followup_answer(alias, i + 1));
    }
    s = engine.generate_summary(s, gw);
    sessions.push_back(std::move(s));
  }
  return sessions;
}

// Gold answers.

std::string other_label(const DilemmaItem& item, const std::string& gold, std::size_t k) {
  std::size_t seen = 0;
  for (const auto& o : item.options) {
    if (o.label == gold) continue;
    if (seen++ == k) return o.label;
  }
  unrealisable(item.item_id + " needs at least three options");
}

Answer gold_answer(const DilemmaItem& item, std::size_t p) {
  const auto k = p + static_cast<std::size_t>(item.number());
  switch (item.qtype) {
    case QType::Choice:
      return ChoiceAnswer{item.options[k % item.options.size()].label};
    case QType::Likert: {
      const int mid = (item.scale->min + item.scale->max) / 2;
      return LikertAnswer{mid - 1 + static_cast<int>(k % 3)};
    }
    case QType::Ranking: {
      auto order = item.rank_items;
      std::rotate(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p % order.size()),
                  order.end());
      return RankingAnswer{order};
    }
  }
  return ChoiceAnswer{};
}

int likert_near(int g, const assessments::LikertScale& s, std::size_t p) {
  const int down = g - 1;
  const int up = g + 1;
  if (p % 2 == 0) return s.contains(up) ? up : down;
  return s.contains(down) ? down : up;
}

int likert_far(int g, const assessments::LikertScale& s) {
  if (s.contains(g + 2)) return g + 2;
  if (s.contains(g - 2)) return g - 2;
  unrealisable("Likert scale too short for a distant answer");
}

// A reordering of `gold` with exactly `k` discordant pairs.
std::vector<std::string> with_inversions(std::vector<std::string> gold, std::size_t k) {
  std::vector<std::string> out;
  while (!gold.empty()) {
    const std::size_t idx = std::min(k, gold.size() - 1);
    out.push_back(gold[idx]);
    gold.erase(gold.begin() + static_cast<std::ptrdiff_t>(idx));
    k -= idx;
  }
  return out;
}

// Participants marked true, a contiguous block of `k` starting at `offset`.
std::vector<bool> block(std::size_t n, std::size_t k, std::size_t offset) {
  std::vector<bool> mask(n, false);
  for (std::size_t j = 0; j < k; ++j) mask[(offset + j) % n] = true;
  return mask;
}

struct TraceSpec {
  std::string excerpt;
  EvidenceLocation claimed = EvidenceLocation::Unclassified;
  ReasoningCategory category = ReasoningCategory::ValueAbstraction;
};

PredictionRecord make_record(const SessionState& session, Condition c, const DilemmaItem& item,
                             Answer answer, const TraceSpec& spec) {
  PredictionRecord r;
  r.participant_alias = session.participant_alias;
  r.item_id = item.item_id;
  r.condition = c;
  r.answer = std::move(answer);
  r.trace.explanation = "Synthetic trace for the reference fixture.";
  r.trace.evidence_excerpt = spec.excerpt;
  r.trace.claimed_location = spec.claimed;
  r.trace.verified_location = simulation::locate_evidence(spec.excerpt, session);
  r.trace.location_mismatch = r.trace.claimed_location != r.trace.verified_location;
  r.trace.reasoning_category = spec.category;
  r.prompt_fingerprint =
      simulation::build_prompt(interview::slice_context(session, c), item).fingerprint();
  r.created_at = kCreatedAt;
  return r;
}

TraceSpec default_trace(Condition c) {
  switch (c) {
    case Condition::Core10: return {kCoreExcerpt, EvidenceLocation::CoreInterview};
    case Condition::FullInterview: return {kBothExcerpt, EvidenceLocation::Both};
    case Condition::PersonalitySummary: return {"", EvidenceLocation::Unclassified};
  }
  return {};
}

simulation::RunManifest manifest_for(const std::string& run_id, const Battery& battery,
                                     const std::string& backend, const json& config) {
  simulation::RunManifest m;
  m.run_id = run_id;
  m.config = config;
  m.battery_hash = assessments::battery_hash(battery);
  m.backend_name = backend;
  m.created_at = kCreatedAt;
  return m;
}

// Predictions of the reference run: per-question accuracy and the Likert
// channels follow the targets exactly.
std::map<Condition, std::vector<PredictionRecord>> reference_predictions(
    const ReferenceTargets& t, const Battery& battery, const std::vector<SessionState>& sessions,
    const std::map<std::string, ItemAnswers>& gold) {
  const std::size_t n = sessions.size();
  std::map<Condition, std::vector<PredictionRecord>> out;
  std::size_t likert_cells = 0;
  for (const auto& item : battery.items) likert_cells += item.qtype == QType::Likert ? n : 0;

  for (std::size_t ci = 0; ci < 3; ++ci) {
    const Condition c = interview::kConditions[ci];
    const std::string ckey = kConditionKeys[ci];
    // Likert near misses needed on top of the exact hits.
    std::size_t likert_exact = 0;
    for (const auto& item : battery.items) {
      if (item.qtype != QType::Likert) continue;
      likert_exact += exact_count(t.question_accuracy.at(item.item_id)[ci], n, item.item_id);
    }
    if (likert_cells > 0 &&
        std::fabs(static_cast<double>(likert_exact) / static_cast<double>(likert_cells) -
                  t.likert_exact[ci]) > 0.0005) {
      unrealisable("Likert exact rate disagrees with the Likert items (" + ckey + ")");
    }
    const std::size_t within_one = nearest_count(t.likert_off_by_one[ci], likert_cells);
    if (within_one < likert_exact) unrealisable("Likert off-by-one below exact (" + ckey + ")");
    std::size_t near_left = within_one - likert_exact;

    auto& records = out[c];
    std::vector<std::vector<PredictionRecord>> per_participant(n);
    for (const auto& item : battery.items) {
      auto rate = t.question_accuracy.find(item.item_id);
      if (rate == t.question_accuracy.end()) unrealisable("no target for " + item.item_id);
      const std::size_t offset = (static_cast<std::size_t>(item.number()) * 7 + ci * 3) % n;
      if (item.qtype == QType::Ranking) {
        const std::size_t m = item.rank_items.size();
        const std::size_t pairs = m * (m - 1) / 2;
        const std::size_t total = exact_count(rate->second[ci], n * pairs, item.item_id);
        for (std::size_t p = 0; p < n; ++p) {
          const std::size_t rank = (p + n - offset) % n;
          const std::size_t concordant = total / n + (rank < total % n ? 1 : 0);
          if (concordant > pairs) unrealisable(item.item_id + " concordance above 1");
          const auto& g = std::get<RankingAnswer>(gold.at(sessions[p].participant_alias).at(item.item_id));
          per_participant[p].push_back(make_record(
              sessions[p], c, item, RankingAnswer{with_inversions(g.order, pairs - concordant)},
              default_trace(c)));
        }
        continue;
      }
      const auto correct = block(n, exact_count(rate->second[ci], n, item.item_id), offset);
      for (std::size_t p = 0; p < n; ++p) {
        const auto& g = gold.at(sessions[p].participant_alias).at(item.item_id);
        Answer a = g;
        if (!correct[p]) {
          if (item.qtype == QType::Choice) {
            a = ChoiceAnswer{other_label(item, std::get<ChoiceAnswer>(g).label, p % 2)};
          } else {
            const int gv = std::get<LikertAnswer>(g).value;
            if (near_left > 0) {
              a = LikertAnswer{likert_near(gv, *item.scale, p)};
              --near_left;
            } else {
              a = LikertAnswer{likert_far(gv, *item.scale)};
            }
          }
        }
        per_participant[p].push_back(make_record(sessions[p], c, item, a, default_trace(c)));
      }
    }
    if (near_left > 0) unrealisable("not enough wrong Likert cells (" + ckey + ")");
    for (auto& v : per_participant) {
      for (auto& r : v) records.push_back(std::move(r));
    }
  }
  return out;
}

const std::vector<std::string>& all_types() {
  static const std::vector<std::string> types = [] {
    std::vector<std::string> v;
    for (char a : {'E', 'I'})
      for (char b : {'S', 'N'})
        for (char c : {'T', 'F'})
          for (char d : {'J', 'P'}) v.push_back(std::string{a, b, c, d});
    return v;
  }();
  return types;
}

std::string flip(std::string t, std::size_t dim) {
  static const char* pairs[4] = {"EI", "SN", "TF", "JP"};
  t[dim] = t[dim] == pairs[dim][0] ? pairs[dim][1] : pairs[dim][0];
  return t;
}

std::string base_type(std::size_t p) { return all_types()[(p * 5) % 16]; }

assessments::MbtiReport gold_mbti(std::size_t p) {
  assessments::MbtiReport r;
  r.types.push_back(base_type(p));
  if (p % 4 == 0) r.types.push_back(flip(base_type(p), 0));
  std::sort(r.types.begin(), r.types.end());
  return r;
}

bool gold_high(std::size_t p, std::size_t trait) { return (p * 3 + trait * 7 + p / 5) % 5 < 3; }

assessments::Bfi44Response gold_bfi(std::size_t p, const assessments::Bfi44Key& key) {
  assessments::Bfi44Response r;
  r.items.assign(assessments::kBfiItems, 3);
  for (const auto& e : key.entries()) {
    const bool high = gold_high(p, static_cast<std::size_t>(e.trait));
    r.items[static_cast<std::size_t>(e.item - 1)] = high != e.reverse ? 4 : 2;
  }
  return r;
}

// Personality predictions for one target row. `shift` rotates which
// participants land in each bucket so rows do not share a layout.
std::vector<PersonalityPrediction> personality_row(const MbtiTarget& mt,
                                                   const std::array<double, 5>& bf,
                                                   const std::vector<SessionState>& sessions,
                                                   Condition c, std::size_t shift,
                                                   const std::string& row) {
  const std::size_t n = sessions.size();
  const std::size_t top1 = exact_count(mt.top1_exact, n, row + " top-1");
  const std::size_t hit = exact_count(mt.hit_at_2, n, row + " hit@2");
  const std::size_t off1 = exact_count(mt.off_by_1, n, row + " off-by-1");
  const std::size_t off2 = exact_count(mt.off_by_2, n, row + " off-by-2");
  if (top1 + off1 + off2 > n || hit < top1) unrealisable("MBTI row " + row + " is inconsistent");
  const std::size_t extras = hit - top1;

  std::vector<PersonalityPrediction> out;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t rank = (p + shift) % n;
    const std::size_t d = rank < top1 ? 0 : rank < top1 + off1 ? 1 : rank < top1 + off1 + off2 ? 2 : 3;
    const auto gold = gold_mbti(p);
    std::string first = base_type(p);
    for (std::size_t k = 1; k <= d; ++k) first = flip(first, k);
    std::string second;
    if (d > 0 && rank - top1 < extras) {
      second = base_type(p);
    } else {
      for (const auto& cand : all_types()) {
        if (cand != first && !gold.contains(cand)) {
          second = cand;
          break;
        }
      }
    }
    PersonalityPrediction pp;
    pp.participant_alias = sessions[p].participant_alias;
    pp.condition = c;
    pp.mbti_top2 = {first, second};
    for (std::size_t t = 0; t < 5; ++t) {
      const std::size_t matches = exact_count(bf[t], n, row + " Big Five");
      const bool match = (p + shift + t * 3) % n < matches;
      const bool high = match == gold_high(p, t);
      pp.bigfive.values[t] = high ? 30.0 : 10.0;
    }
    pp.explanation = "Synthetic personality estimate for the reference fixture.";
    pp.prompt_fingerprint =
        simulation::build_personality_prompt(interview::slice_context(sessions[p], c)).fingerprint();
    pp.created_at = kCreatedAt;
    out.push_back(std::move(pp));
  }
  return out;
}

enum class Transition { WrongSame, WrongChanged, Correct, Improved, Worsened };

struct AuditCell {
  std::size_t participant = 0;
  const DilemmaItem* item = nullptr;
};

void shuffle(std::vector<std::size_t>& v, SeededRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

TraceSpec audit_trace(EvidenceLocation loc, ReasoningCategory cat) {
  switch (loc) {
    case EvidenceLocation::Both: return {kBothExcerpt, loc, cat};
    case EvidenceLocation::CoreInterview: return {kCoreExcerpt, loc, cat};
    case EvidenceLocation::FollowUp: return {kFollowUpExcerpt, loc, cat};
    case EvidenceLocation::Unclassified:
      return {cat == ReasoningCategory::GenericNorm ? "" : kUnfoundExcerpt, loc, cat};
  }
  return {};
}

struct AuditSets {
  std::vector<PredictionRecord> core;
  std::vector<PredictionRecord> full;
};

// Choice cells of the audit run. Categories and verified locations follow the
// cross-tab targets; correctness and answer changes follow the accuracy and
// transition targets.
AuditSets audit_predictions(const ReferenceTargets& t, const Battery& battery,
                            const std::vector<SessionState>& sessions,
                            const std::map<std::string, ItemAnswers>& gold) {
  std::vector<AuditCell> cells;
  for (std::size_t p = 0; p < sessions.size(); ++p) {
    for (const auto& item : battery.items) {
      if (item.qtype == QType::Choice) cells.push_back({p, &item});
    }
  }
  using Group = std::pair<ReasoningCategory, EvidenceLocation>;
  std::vector<Group> grounded_groups, other_groups;
  for (const auto& [cat_name, row] : t.audit_crosstab) {
    auto cat = simulation::category_from_name(cat_name);
    if (!cat) unrealisable("unknown reasoning category " + cat_name);
    for (const auto& [loc_name, count] : row) {
      auto loc = simulation::location_from_name(loc_name);
      if (!loc) unrealisable("unknown evidence location " + loc_name);
      auto& target = simulation::involves_followup(*loc) ? grounded_groups : other_groups;
      target.insert(target.end(), count, Group{*cat, *loc});
    }
  }
  const std::size_t grounded = grounded_groups.size();
  const std::size_t ungrounded = other_groups.size();
  if (grounded + ungrounded != cells.size()) {
    unrealisable("cross-tab covers " + std::to_string(grounded + ungrounded) + " traces but the "
                 "audit set has " + std::to_string(cells.size()));
  }

  // Grounded transitions come straight from the targets.
  if (t.unchanged_wrong + t.unchanged_correct + t.improved + t.worsened != grounded ||
      t.unchanged_correct + t.improved != t.grounded_correct ||
      t.unchanged_wrong_same_answer > t.unchanged_wrong) {
    unrealisable("grounded transitions disagree with the grounded counts");
  }
  std::vector<Transition> grounded_tr;
  grounded_tr.insert(grounded_tr.end(), t.unchanged_wrong_same_answer, Transition::WrongSame);
  grounded_tr.insert(grounded_tr.end(), t.unchanged_wrong - t.unchanged_wrong_same_answer,
                     Transition::WrongChanged);
  grounded_tr.insert(grounded_tr.end(), t.unchanged_correct, Transition::Correct);
  grounded_tr.insert(grounded_tr.end(), t.improved, Transition::Improved);
  grounded_tr.insert(grounded_tr.end(), t.worsened, Transition::Worsened);

  // Ungrounded transitions are not pinned beyond the two accuracy totals; ten
  // improvements is an arbitrary split that satisfies both.
  const std::size_t base_grounded_correct = t.unchanged_correct + t.worsened;
  if (t.baseline_correct < base_grounded_correct) unrealisable("baseline accuracy too low");
  const std::size_t base_other_correct = t.baseline_correct - base_grounded_correct;
  const std::size_t improved_u = std::min<std::size_t>(10, t.ungrounded_correct);
  const std::size_t correct_u = t.ungrounded_correct - improved_u;
  if (base_other_correct < correct_u ||
      correct_u + improved_u + (base_other_correct - correct_u) > ungrounded) {
    unrealisable("ungrounded accuracy totals do not fit the ungrounded traces");
  }
  const std::size_t worsened_u = base_other_correct - correct_u;
  const std::size_t wrong_u = ungrounded - correct_u - improved_u - worsened_u;
  std::vector<Transition> other_tr;
  other_tr.insert(other_tr.end(), wrong_u / 2, Transition::WrongSame);
  other_tr.insert(other_tr.end(), wrong_u - wrong_u / 2, Transition::WrongChanged);
  other_tr.insert(other_tr.end(), correct_u, Transition::Correct);
  other_tr.insert(other_tr.end(), improved_u, Transition::Improved);
  other_tr.insert(other_tr.end(), worsened_u, Transition::Worsened);

  SeededRng rng(kPlanSeed, 1);
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order, rng);
  std::vector<std::size_t> g_tr(grounded), o_tr(ungrounded);
  for (std::size_t i = 0; i < grounded; ++i) g_tr[i] = i;
  for (std::size_t i = 0; i < ungrounded; ++i) o_tr[i] = i;
  shuffle(g_tr, rng);
  shuffle(o_tr, rng);

  struct Plan {
    Group group;
    Transition tr;
  };
  std::vector<Plan> plan(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i < grounded) {
      plan[order[i]] = {grounded_groups[i], grounded_tr[g_tr[i]]};
    } else {
      const std::size_t j = i - grounded;
      plan[order[i]] = {other_groups[j], other_tr[o_tr[j]]};
    }
  }

  AuditSets out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& session = sessions[cells[i].participant];
    const auto& item = *cells[i].item;
    const auto g = std::get<ChoiceAnswer>(gold.at(session.participant_alias).at(item.item_id)).label;
    const auto w1 = other_label(item, g, 0);
    const auto w2 = other_label(item, g, 1);
    std::string base_label, full_label;
    switch (plan[i].tr) {
      case Transition::WrongSame: base_label = w1; full_label = w1; break;
      case Transition::WrongChanged: base_label = w2; full_label = w1; break;
      case Transition::Correct: base_label = g; full_label = g; break;
      case Transition::Improved: base_label = w1; full_label = g; break;
      case Transition::Worsened: base_label = g; full_label = w1; break;
    }
    const auto [cat, loc] = plan[i].group;
    auto full = make_record(session, Condition::FullInterview, item, ChoiceAnswer{full_label},
                            audit_trace(loc, cat));
    if (full.trace.verified_location != loc) {
      throw Error(ErrorCode::InvalidRequest, "fixture excerpt did not locate as intended");
    }
    out.full.push_back(std::move(full));
    out.core.push_back(make_record(session, Condition::Core10, item, ChoiceAnswer{base_label},
                                   default_trace(Condition::Core10)));
  }
  return out;
}

// Filled annotations: every annotator starts from the model's labels; a few
// overlap traces get one dissenting annotator and a few traces get a final
// label different from the model's.
std::vector<audit::AnnotationRecord> annotations_for(const ReferenceTargets& t,
                                                     const audit::VerificationPlan& plan,
                                                     const std::map<std::string, audit::Prelabel>& pre) {
  const std::size_t k = t.annotators.size();
  const std::size_t pairs_per_field = k * (k - 1) / 2;
  const std::size_t pair_total = plan.overlap.size() * pairs_per_field * 2;
  const std::size_t pair_misses = pair_total - nearest_count(t.inter_rater, pair_total);
  // A lone dissenter among k annotators breaks k - 1 pairs.
  if (k < 3 || pair_misses % (k - 1) != 0) unrealisable("inter-rater target needs other dissent");
  const std::size_t dissent = pair_misses / (k - 1);
  const std::size_t label_total = (plan.overlap.size() + plan.coverage.size()) * 2;
  const std::size_t relabel = label_total - nearest_count(t.prelabel, label_total);
  // A third of the relabelled traces sit in the overlap (all annotators agree
  // on a new category), the rest in single coverage (new location).
  const std::size_t relabel_overlap =
      dissent > plan.overlap.size() ? 0 : std::min(relabel / 3, plan.overlap.size() - dissent);
  const std::size_t relabel_coverage = relabel - relabel_overlap;
  if (dissent > plan.overlap.size() || relabel_coverage > plan.coverage.size()) {
    unrealisable("agreement targets need more verified traces");
  }

  auto other_location = [](EvidenceLocation l) {
    return l == EvidenceLocation::Both ? EvidenceLocation::CoreInterview : EvidenceLocation::Both;
  };
  auto other_category = [](ReasoningCategory c) {
    return c == ReasoningCategory::ValueAbstraction ? ReasoningCategory::CopingConstraint
                                                    : ReasoningCategory::ValueAbstraction;
  };

  std::vector<audit::AnnotationRecord> out;
  for (std::size_t i = 0; i < plan.overlap.size(); ++i) {
    const auto& id = plan.overlap[i];
    const auto& p = pre.at(id);
    const bool dissenting = i < dissent;
    const bool relabelled = i >= dissent && i < dissent + relabel_overlap;
    for (std::size_t a = 0; a < k; ++a) {
      audit::AnnotationRecord r{id, t.annotators[a], p.evidence_location, p.reasoning_category, true};
      if (dissenting && a == k - 1) r.evidence_location = other_location(p.evidence_location);
      if (relabelled) r.reasoning_category = other_category(p.reasoning_category);
      out.push_back(r);
    }
  }
  for (std::size_t i = 0; i < plan.coverage.size(); ++i) {
    const auto& id = plan.coverage[i];
    const auto& p = pre.at(id);
    audit::AnnotationRecord r{id, t.annotators[i % k], p.evidence_location, p.reasoning_category,
                              true};
    if (i < relabel_coverage) r.evidence_location = other_location(p.evidence_location);
    out.push_back(r);
  }
  return out;
}

const char* kProvenance = R"(# Reference fixture

Everything in this directory is synthetic and generated deterministically by
`persona_lab fixtures build`. No model was called.

- `sessions/`: twenty scripted interviews (P01..P20) run through the interview
  engine, each with dilemma gold answers, an MBTI self-report and BFI-44 items.
  BFI-44 items are 4 or 2 depending on the intended trait level, which scores
  30.25 (high) or 10.75 (low).
- `runs/reference/`: predictions for core10, full and summary. For each item
  and condition the number of participants predicted correctly equals the
  target accuracy times twenty; the ranking item's orderings carry exactly the
  number of discordant pairs the target concordance implies. Likert misses are
  split into within-one and distant answers to hit the Likert channel targets.
  Personality predictions place each participant at a chosen MBTI distance and
  Big Five agreement so the target rates come out exactly.
- `runs/reference-alt/`: personality predictions only, standing for a second
  backend on the full context.
- `runs/reference-audit/`: core10 and full predictions whose choice-item
  traces follow the audit cross-tab, grounded accuracy and transition targets.
  Evidence excerpts are real substrings of the interview answers, so verified
  locations are recomputed, not asserted. Its predictions differ from the
  reference run: the audit targets cannot be met by the same records.
- `annotations/`: the seeded verification plan, the blank sheet and filled
  annotations whose agreement matches the targets.
- `targets.json`: the targets this fixture was built from.
)";

void write_json(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace

ReferenceTargets targets_from_json(const json& j) {
  try {
    ReferenceTargets t;
    t.source = j;
    t.participants = j.at("participants").get<std::size_t>();
    for (const auto& [id, v] : j.at("question_accuracy").items()) t.question_accuracy[id] = triple(v);
    t.overall_accuracy = triple(j.at("overall_accuracy"));
    t.likert_exact = triple(j.at("likert_exact"));
    t.likert_off_by_one = triple(j.at("likert_off_by_one"));
    for (const auto& [row, v] : j.at("mbti").items()) {
      t.mbti[row] = {v.at("top1_exact").get<double>(), v.at("hit_at_2").get<double>(),
                     v.at("off_by_1").get<double>(), v.at("off_by_2").get<double>()};
    }
    for (const auto& [row, v] : j.at("bigfive_match").items()) {
      std::array<double, 5> a{};
      for (std::size_t i = 0; i < 5; ++i) a[i] = v.at(i).get<double>();
      t.bigfive_match[row] = a;
    }
    const auto& a = j.at("audit");
    t.audit_crosstab = a.at("crosstab").get<std::map<std::string, std::map<std::string, std::size_t>>>();
    t.grounded_correct = a.at("grounded_correct").get<std::size_t>();
    t.ungrounded_correct = a.at("ungrounded_correct").get<std::size_t>();
    t.baseline_correct = a.at("baseline_correct").get<std::size_t>();
    const auto& tr = a.at("transitions_grounded");
    t.unchanged_wrong = tr.at("unchanged_wrong").get<std::size_t>();
    t.unchanged_wrong_same_answer = tr.at("unchanged_wrong_same_answer").get<std::size_t>();
    t.unchanged_correct = tr.at("unchanged_correct").get<std::size_t>();
    t.improved = tr.at("improved").get<std::size_t>();
    t.worsened = tr.at("worsened").get<std::size_t>();
    const auto& g = j.at("agreement");
    t.overlap = g.at("overlap").get<std::size_t>();
    t.coverage = g.at("coverage").get<std::size_t>();
    t.annotators = g.at("annotators").get<std::vector<std::string>>();
    t.inter_rater = g.at("inter_rater").get<double>();
    t.prelabel = g.at("prelabel").get<double>();
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidRequest, std::string("reference targets: ") + e.what());
  }
}

ReferenceTargets load_targets(const fs::path& path) {
  const auto parsed = json::parse(read_text_file(path), nullptr, false);
  if (parsed.is_discarded()) {
    throw Error(ErrorCode::InvalidRequest, path.string() + " is not valid JSON");
  }
  return targets_from_json(parsed);
}

ReferenceTargets default_targets() {
  return load_targets(fs::path(PERSONA_LAB_DATA_DIR) / "reference_targets.json");
}

void build_reference(const fs::path& out, const ReferenceTargets& t, const Battery& battery) {
  for (const char* owned : {"sessions", "runs", "annotations", "exports"}) {
    std::error_code ec;
    fs::remove_all(out / owned, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot clear " + (out / owned).string());
  }
  fs::create_directories(out);
  const std::size_t n = t.participants;
  if (n < 2) unrealisable("need at least two participants");

  store::SessionStore sessions_store(out, false);
  const auto sessions = build_sessions(sessions_store, n);

  std::map<std::string, ItemAnswers> gold;
  const auto key = assessments::Bfi44Key::standard();
  for (std::size_t p = 0; p < n; ++p) {
    const auto alias = alias_of(p);
    for (const auto& item : battery.items) gold[alias][item.item_id] = gold_answer(item, p);
    assessments::record_responses(sessions_store, alias, battery, gold[alias], true, kCreatedAt);
    assessments::record_mbti(sessions_store, alias, gold_mbti(p), kCreatedAt);
    assessments::record_bfi44(sessions_store, alias, gold_bfi(p, key), key, kCreatedAt);
  }

  store::RunStore runs(out, false);
  const json conditions = {"core10", "full", "summary"};
  runs.open_run(manifest_for(kReferenceRun, battery, "fixture",
                             {{"fixture", "reference"}, {"conditions", conditions},
                              {"participants", n}}),
                battery);
  for (auto& [c, records] : reference_predictions(t, battery, sessions, gold)) {
    runs.store_predictions(kReferenceRun, records);
  }
  for (std::size_t ci = 0; ci < 3; ++ci) {
    const std::string row = kConditionKeys[ci];
    if (!t.mbti.count(row) || !t.bigfive_match.count(row)) continue;
    for (const auto& p : personality_row(t.mbti.at(row), t.bigfive_match.at(row), sessions,
                                         interview::kConditions[ci], ci * 5, row)) {
      runs.store_personality(kReferenceRun, p);
    }
  }

  if (t.mbti.count("alt") && t.bigfive_match.count("alt")) {
    runs.open_run(manifest_for(kAltRun, battery, "fixture-alt",
                               {{"fixture", "reference-alt"}, {"conditions", {"full"}},
                                {"participants", n}}),
                  battery);
    for (const auto& p : personality_row(t.mbti.at("alt"), t.bigfive_match.at("alt"), sessions,
                                         Condition::FullInterview, 15, "alt")) {
      runs.store_personality(kAltRun, p);
    }
  }

  auto audit_sets = audit_predictions(t, battery, sessions, gold);
  const auto reference_core = runs.load_run(kReferenceRun, Condition::Core10);
  const auto reference_full = runs.load_run(kReferenceRun, Condition::FullInterview);
  auto fill = [&](std::vector<PredictionRecord>& choice, const simulation::PredictionSet& from) {
    std::map<std::pair<std::string, std::string>, PredictionRecord> by_cell;
    for (auto& r : choice) by_cell[{r.participant_alias, r.item_id}] = std::move(r);
    for (const auto& r : from.records) {
      if (battery.at(r.item_id).qtype != QType::Choice) by_cell[{r.participant_alias, r.item_id}] = r;
    }
    std::vector<PredictionRecord> merged;
    for (const auto& s : sessions) {
      for (const auto& item : battery.items) {
        merged.push_back(std::move(by_cell.at({s.participant_alias, item.item_id})));
      }
    }
    return merged;
  };
  runs.open_run(manifest_for(kAuditRun, battery, "fixture",
                             {{"fixture", "reference-audit"}, {"conditions", {"core10", "full"}},
                              {"participants", n}}),
                battery);
  runs.store_predictions(kAuditRun, fill(audit_sets.core, reference_core));
  runs.store_predictions(kAuditRun, fill(audit_sets.full, reference_full));

  const auto audit_full = runs.load_run(kAuditRun, Condition::FullInterview);
  const auto subset = audit::audit_subset(audit_full, battery);
  const auto plan = audit::plan_verification(subset, t.overlap, t.coverage, t.annotators, kPlanSeed);
  const auto pre = audit::prelabels_for(subset);
  const fs::path ann = out / "annotations";
  write_json(ann / "plan.json", audit::to_json(plan));
  write_text_file(ann / "sheet.tsv", audit::annotation_sheet(plan, subset));
  write_text_file(ann / "annotations.tsv", audit::write_annotations(annotations_for(t, plan, pre)));

  write_json(out / "targets.json", t.source);
  write_text_file(out / "PROVENANCE.md", kProvenance);
}

std::vector<CheckLine> check_reference(const fs::path& dir, const ReferenceTargets& t) {
  constexpr double kTol = 0.001;
  std::vector<CheckLine> lines;
  auto add = [&](std::string name, double expected, double actual) {
    lines.push_back({std::move(name), expected, actual, std::fabs(expected - actual) <= kTol + 1e-12});
  };
  store::SessionStore sessions(dir, false);
  store::RunStore runs(dir, false);
  pipeline::EvaluateOptions eo;
  eo.evaluation.with_ci = false;

  const auto run = pipeline::load_run(runs, kReferenceRun);
  const auto gold = pipeline::load_gold(sessions, run.battery);
  const auto report = pipeline::evaluate(gold, run, eo);
  for (std::size_t ci = 0; ci < 3; ++ci) {
    const std::string key = kConditionKeys[ci];
    const auto* c = report.find(interview::kConditions[ci]);
    if (!c) {
      add("overall_accuracy:" + key, t.overall_accuracy[ci], -1.0);
      continue;
    }
    add("overall_accuracy:" + key, t.overall_accuracy[ci], c->overall);
    for (const auto& [id, cell] : c->per_question) {
      auto it = t.question_accuracy.find(id);
      if (it != t.question_accuracy.end()) {
        add("question_accuracy:" + id + ":" + key, it->second[ci], cell.value.value_or(-1.0));
      }
    }
    if (c->likert) {
      add("likert_exact:" + key, t.likert_exact[ci], c->likert->exact);
      add("likert_off_by_one:" + key, t.likert_off_by_one[ci], c->likert->off_by_one);
    }
  }
  auto personality = [&](const metrics::ConditionReport* c, const std::string& row) {
    if (t.mbti.count(row)) {
      const auto& m = t.mbti.at(row);
      const auto* got = c && c->mbti ? &*c->mbti : nullptr;
      add("mbti_top1_exact:" + row, m.top1_exact, got ? got->top1_exact : -1.0);
      add("mbti_hit_at_2:" + row, m.hit_at_2, got ? got->hit_at_2 : -1.0);
      add("mbti_off_by_1:" + row, m.off_by_1, got ? got->off_by[1] : -1.0);
      add("mbti_off_by_2:" + row, m.off_by_2, got ? got->off_by[2] : -1.0);
    }
    if (t.bigfive_match.count(row)) {
      const auto& b = t.bigfive_match.at(row);
      for (auto tr : assessments::kTraits) {
        const auto i = static_cast<std::size_t>(tr);
        add(std::string("bigfive_match:") + assessments::trait_letter(tr) + ":" + row, b[i],
            c && c->bigfive ? c->bigfive->match[i] : -1.0);
      }
    }
  };
  for (std::size_t ci = 0; ci < 3; ++ci) {
    personality(report.find(interview::kConditions[ci]), kConditionKeys[ci]);
  }
  if (runs.has_run(kAltRun)) {
    const auto alt = pipeline::evaluate(gold, pipeline::load_run(runs, kAltRun), eo);
    personality(alt.find(Condition::FullInterview), "alt");
  }

  const auto audit_run = pipeline::load_run(runs, kAuditRun);
  const auto annotations =
      audit::read_annotations(read_text_file(dir / "annotations" / "annotations.tsv"));
  audit::AuditOptions ao;
  const auto ar = pipeline::audit(gold, audit_run.sets, audit_run.battery, ao, &annotations);
  std::size_t grounded_total = 0;
  std::size_t total = 0;
  for (const auto& [cat_name, row] : t.audit_crosstab) {
    const auto cat = *simulation::category_from_name(cat_name);
    for (const auto& [loc_name, count] : row) {
      const auto loc = *simulation::location_from_name(loc_name);
      total += count;
      if (simulation::involves_followup(loc)) grounded_total += count;
      auto it = ar.crosstab.rows.find(cat);
      const double got = it == ar.crosstab.rows.end() ? 0.0 : static_cast<double>(it->second.counts.at(loc));
      add("crosstab:" + cat_name + ":" + loc_name, static_cast<double>(count), got);
    }
  }
  add("followup_involved", static_cast<double>(grounded_total) / static_cast<double>(total),
      ar.distribution.followup_involved);
  add("grounded_accuracy",
      static_cast<double>(t.grounded_correct) / static_cast<double>(grounded_total),
      ar.accuracy.grounded.rate.value_or(-1.0));
  add("ungrounded_accuracy",
      static_cast<double>(t.ungrounded_correct) / static_cast<double>(total - grounded_total),
      ar.accuracy.ungrounded.rate.value_or(-1.0));
  if (ar.transitions_grounded) {
    const auto& tr = *ar.transitions_grounded;
    add("transitions:unchanged_wrong", static_cast<double>(t.unchanged_wrong), static_cast<double>(tr.unchanged_wrong));
    add("transitions:unchanged_correct", static_cast<double>(t.unchanged_correct), static_cast<double>(tr.unchanged_correct));
    add("transitions:improved", static_cast<double>(t.improved), static_cast<double>(tr.improved));
    add("transitions:worsened", static_cast<double>(t.worsened), static_cast<double>(tr.worsened));
    const double changed = static_cast<double>(t.unchanged_wrong - t.unchanged_wrong_same_answer +
                                               t.improved + t.worsened);
    add("transitions:prediction_change_rate", changed / static_cast<double>(grounded_total),
        tr.prediction_change_rate.value_or(-1.0));
  }
  if (ar.agreement) {
    add("agreement:inter_rater", t.inter_rater, ar.agreement->inter_rater.rate().value_or(-1.0));
    add("agreement:prelabel", t.prelabel,
        ar.agreement->prelabel ? ar.agreement->prelabel->rate().value_or(-1.0) : -1.0);
  }
  return lines;
}

}  // namespace persona_lab::fixtures
