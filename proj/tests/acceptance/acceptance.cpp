// Acceptance checks. Prints one PASS/FAIL line per primary criterion and
// exits non-zero when any criterion fails. Expected values are written out
// here rather than read from the shipped targets file.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "persona_lab/assessments/bfi.hpp"
#include "persona_lab/audit/audit.hpp"
#include "persona_lab/common/records.hpp"
#include "persona_lab/fixtures/reference.hpp"
#include "persona_lab/interview/engine.hpp"
#include "persona_lab/metrics/bootstrap.hpp"
#include "persona_lab/metrics/kernels.hpp"
#include "persona_lab/pipeline/pipeline.hpp"
#include "test_support.hpp"

using namespace persona_lab;
namespace fs = std::filesystem;
using SteadyClock = std::chrono::steady_clock;

namespace {

const fs::path kData = PERSONA_LAB_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::vector<std::string> failures;
  std::string summary;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (failures.size() < 8) failures.push_back(what);
    }
  }
  void near(double actual, double expected, double tol, const std::string& what) {
    std::ostringstream o;
    o << what << ": expected " << expected << " got " << actual;
    expect(std::fabs(actual - expected) <= tol, o.str());
  }
};

double seconds_since(SteadyClock::time_point t0) {
  return std::chrono::duration<double>(SteadyClock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

const assessments::Battery& battery() {
  static const auto b = assessments::load_battery(kData / "sample_battery.jsonl");
  return b;
}

// Per condition: core10, full, summary.
const std::vector<std::pair<std::string, std::array<double, 3>>> kQuestionAccuracy = {
    {"Q1", {0.30, 0.35, 0.25}},  {"Q2", {0.50, 0.55, 0.65}},   {"Q3", {0.55, 0.35, 0.30}},
    {"Q4", {0.30, 0.35, 0.40}},  {"Q5", {0.30, 0.30, 0.40}},   {"Q6", {0.60, 0.65, 0.45}},
    {"Q7", {0.35, 0.35, 0.30}},  {"Q8", {0.10, 0.45, 0.40}},   {"Q9", {0.30, 0.35, 0.50}},
    {"Q10", {0.30, 0.30, 0.30}}, {"Q11", {0.45, 0.25, 0.30}},  {"Q12", {0.25, 0.20, 0.30}},
    {"Q13", {0.25, 0.30, 0.25}}, {"Q14", {0.35, 0.30, 0.40}},  {"Q15", {0.50, 0.25, 0.40}},
    {"Q16", {0.25, 0.10, 0.40}}, {"Q17", {0.675, 0.73, 0.675}}, {"Q18", {0.30, 0.20, 0.35}},
    {"Q19", {0.15, 0.10, 0.05}}, {"Q20", {0.25, 0.25, 0.25}},  {"Q21", {0.45, 0.40, 0.40}},
    {"Q22", {0.25, 0.30, 0.30}}, {"Q23", {0.45, 0.50, 0.50}},  {"Q24", {0.70, 0.65, 0.70}},
    {"Q25", {0.60, 0.60, 0.60}}};
constexpr std::array<double, 3> kOverall = {0.379, 0.365, 0.393};
constexpr std::array<double, 3> kLikertExact = {0.307, 0.236, 0.329};
constexpr std::array<double, 3> kLikertOffByOne = {0.579, 0.743, 0.721};

struct MbtiRow {
  const char* name;
  double top1, hit2, off1, off2;
};
const std::vector<MbtiRow> kMbti = {{"core10", 0.10, 0.20, 0.55, 0.25},
                                    {"full", 0.10, 0.40, 0.45, 0.15},
                                    {"summary", 0.40, 0.50, 0.45, 0.05},
                                    {"alt", 0.30, 0.50, 0.30, 0.20}};

const std::array<simulation::Condition, 3> kConds = {
    simulation::Condition::Core10, simulation::Condition::FullInterview,
    simulation::Condition::PersonalitySummary};

// One fixture directory built by criterion 1 and read by later criteria.
struct Shared {
  test_support::TempDir fixture;
  bool built = false;
  std::optional<metrics::MetricReport> report;
};

Shared& shared() {
  static Shared s;
  return s;
}

void ensure_fixture() {
  auto& s = shared();
  if (s.built) return;
  fixtures::build_reference(s.fixture.path(), fixtures::default_targets(), battery());
  s.built = true;
}

const metrics::MetricReport& reference_report() {
  auto& s = shared();
  if (!s.report) {
    ensure_fixture();
    store::SessionStore sessions(s.fixture.path(), false);
    store::RunStore runs(s.fixture.path());
    s.report = pipeline::evaluate_run(sessions, runs, fixtures::kReferenceRun, {});
  }
  return *s.report;
}

// 1 -------------------------------------------------------------------------
Outcome aggregation_fidelity() {
  Outcome o;
  const auto t0 = SteadyClock::now();
  ensure_fixture();
  const auto& report = reference_report();
  const double elapsed = seconds_since(t0);
  o.expect(report.conditions.size() == 3, "three condition reports");
  std::ostringstream s;
  for (std::size_t i = 0; i < 3 && i < report.conditions.size(); ++i) {
    const auto& c = report.conditions[i];
    o.expect(c.condition == kConds[i], "condition order");
    o.near(c.overall, kOverall[i], 0.001, std::string(interview::condition_token(c.condition)));
    s << (i ? " / " : "") << fmt(c.overall);
  }
  o.expect(elapsed < 10.0, "runtime " + fmt(elapsed, 1) + " s exceeds 10 s");
  o.summary = "overall " + s.str() + " in " + fmt(elapsed, 1) + " s";
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome per_question_fidelity() {
  Outcome o;
  const auto& report = reference_report();
  std::size_t cells = 0;
  for (std::size_t i = 0; i < 3 && i < report.conditions.size(); ++i) {
    const auto& c = report.conditions[i];
    o.expect(c.per_question.size() == 25, "25 items per condition");
    for (const auto& [item, expected] : kQuestionAccuracy) {
      const auto it = std::find_if(c.per_question.begin(), c.per_question.end(),
                                   [&](const auto& p) { return p.first == item; });
      if (it == c.per_question.end() || !it->second.value) {
        o.expect(false, item + " missing");
        continue;
      }
      o.expect(it->second.n == 20, item + " should have 20 participants");
      o.near(*it->second.value, expected[i], 1e-9,
             std::string(interview::condition_token(c.condition)) + " " + item);
      ++cells;
    }
  }
  const auto q17 = [&](std::size_t i) {
    for (const auto& [item, cell] : report.conditions[i].per_question) {
      if (item == "Q17" && cell.value) return fmt(*cell.value);
    }
    return std::string("?");
  };
  o.summary = std::to_string(cells) + " cells compared, Q17 " + q17(0) + "/" + q17(1) + "/" + q17(2);
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome likert_channels() {
  Outcome o;
  const auto& report = reference_report();
  std::ostringstream s;
  for (std::size_t i = 0; i < 3 && i < report.conditions.size(); ++i) {
    const auto& c = report.conditions[i];
    if (!c.likert) {
      o.expect(false, "no Likert metrics");
      continue;
    }
    const auto name = std::string(interview::condition_token(c.condition));
    o.near(c.likert->exact, kLikertExact[i], 0.001, name + " exact");
    o.near(c.likert->off_by_one, kLikertOffByOne[i], 0.001, name + " off-by-one");
    s << (i ? "; " : "") << fmt(c.likert->exact) << "/" << fmt(c.likert->off_by_one);
  }
  o.summary = "exact/off-by-one " + s.str();
  return o;
}

// 4 -------------------------------------------------------------------------
std::vector<std::string> all_mbti() {
  std::vector<std::string> out;
  for (char a : {'E', 'I'})
    for (char b : {'S', 'N'})
      for (char c : {'T', 'F'})
        for (char d : {'J', 'P'}) out.push_back({a, b, c, d});
  return out;
}

Outcome mbti_metrics() {
  Outcome o;
  const auto& report = reference_report();
  store::SessionStore sessions(shared().fixture.path(), false);
  store::RunStore runs(shared().fixture.path());
  const auto alt = pipeline::evaluate_run(sessions, runs, fixtures::kAltRun, {});
  for (const auto& row : kMbti) {
    const metrics::ConditionReport* c = nullptr;
    if (std::string(row.name) == "alt") {
      c = alt.conditions.empty() ? nullptr : &alt.conditions[0];
    } else {
      c = report.find(*interview::condition_from_token(row.name));
    }
    if (!c || !c->mbti) {
      o.expect(false, std::string(row.name) + " has no MBTI metrics");
      continue;
    }
    const auto& m = *c->mbti;
    o.expect(m.n == 20, std::string(row.name) + " n");
    o.near(m.top1_exact, row.top1, 1e-9, std::string(row.name) + " top1_exact");
    o.near(m.hit_at_2, row.hit2, 1e-9, std::string(row.name) + " hit_at_2");
    o.near(m.off_by[1], row.off1, 1e-9, std::string(row.name) + " off_by_1");
    o.near(m.off_by[2], row.off2, 1e-9, std::string(row.name) + " off_by_2");
  }

  // Kernels against a letter-by-letter oracle over all 256 ordered pairs.
  std::size_t pairs = 0;
  for (const auto& a : all_mbti()) {
    for (const auto& b : all_mbti()) {
      int oracle = 0;
      for (int i = 0; i < 4; ++i) oracle += a[i] != b[i];
      const std::vector<metrics::TraitSample> one{{metrics::mbti_vector(a), {metrics::mbti_vector(b)}}};
      o.expect(metrics::hamming(metrics::mbti_vector(a), metrics::mbti_vector(b)) == oracle,
               "hamming " + a + " " + b);
      for (int k = 0; k <= 4; ++k) {
        o.expect(metrics::off_by_k(one, k) == (k == oracle ? 1.0 : 0.0), "off_by_k " + a + " " + b);
      }
      o.expect(metrics::misclass_rate(one) == oracle / 4.0, "misclass " + a + " " + b);
      ++pairs;
    }
  }
  const auto* summary = report.find(simulation::Condition::PersonalitySummary);
  o.summary = "4 rows exact";
  if (summary && summary->mbti) {
    o.summary += " (summary top1 " + fmt(summary->mbti->top1_exact, 2) + ", hit@2 " +
                 fmt(summary->mbti->hit_at_2, 2) + ", off_by_2 " + fmt(summary->mbti->off_by[2], 2) +
                 ")";
  }
  o.summary += ", kernels agree on " + std::to_string(pairs) + " pairs";
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome audit_fidelity() {
  Outcome o;
  ensure_fixture();
  const auto dir = shared().fixture.path();
  store::SessionStore sessions(dir, false);
  const auto run_dir = dir / "runs" / fixtures::kAuditRun;
  const auto core = pipeline::load_prediction_file(run_dir / "core10.preds");
  const auto full = pipeline::load_prediction_file(run_dir / "full.preds");
  const auto gold = pipeline::load_gold(sessions, battery());
  audit::AuditOptions opts;
  const auto rep = pipeline::audit(gold, {core, full}, battery(), opts);

  if (!rep.transitions_grounded) {
    o.expect(false, "no transitions");
    return o;
  }
  const auto& t = *rep.transitions_grounded;
  o.expect(t.unchanged_wrong == 67, "unchanged_wrong " + std::to_string(t.unchanged_wrong));
  o.expect(t.unchanged_correct == 46, "unchanged_correct " + std::to_string(t.unchanged_correct));
  o.expect(t.improved == 15, "improved " + std::to_string(t.improved));
  o.expect(t.worsened == 6, "worsened " + std::to_string(t.worsened));
  const double change_rate = t.n ? static_cast<double>(t.changed) / static_cast<double>(t.n) : 0.0;
  o.near(change_rate, 0.507, 0.001, "change rate");
  o.near(rep.accuracy.grounded.rate.value_or(-1), 0.455, 0.001, "grounded accuracy");
  o.near(rep.accuracy.ungrounded.rate.value_or(-1), 0.393, 0.001, "ungrounded accuracy");
  o.near(rep.distribution.followup_involved, 0.394, 0.001, "follow-up involved");
  o.expect(rep.location_mismatches == 0, "location mismatches");

  using simulation::EvidenceLocation;
  using simulation::ReasoningCategory;
  struct Row {
    ReasoningCategory category;
    std::array<double, 4> proportions;  // core, follow-up, both, unclassified
    double involved;
  };
  const std::vector<Row> rows = {
      {ReasoningCategory::CopingConstraint, {0.421, 0.158, 0.421, 0.000}, 0.579},
      {ReasoningCategory::ValueAbstraction, {0.603, 0.087, 0.308, 0.003}, 0.394},
      {ReasoningCategory::NarrativeReference, {1.000, 0.000, 0.000, 0.000}, 0.000},
      {ReasoningCategory::GenericNorm, {0.000, 0.000, 0.000, 1.000}, 0.000},
  };
  const std::array<EvidenceLocation, 4> locs = {EvidenceLocation::CoreInterview,
                                                EvidenceLocation::FollowUp, EvidenceLocation::Both,
                                                EvidenceLocation::Unclassified};
  for (const auto& r : rows) {
    const auto it = rep.crosstab.rows.find(r.category);
    const std::string name(simulation::category_name(r.category));
    if (it == rep.crosstab.rows.end()) {
      o.expect(false, name + " row missing");
      continue;
    }
    for (std::size_t k = 0; k < 4; ++k) {
      const auto p = it->second.proportions.find(locs[k]);
      o.near(p == it->second.proportions.end() ? 0.0 : p->second, r.proportions[k], 0.001,
             name + " " + std::string(simulation::location_name(locs[k])));
    }
    o.near(it->second.followup_involved, r.involved, 0.001, name + " follow-up involved");
  }
  o.summary = "transitions " + std::to_string(t.unchanged_wrong) + "/" +
              std::to_string(t.unchanged_correct) + "/" + std::to_string(t.improved) + "/" +
              std::to_string(t.worsened) + ", change rate " + fmt(change_rate) + ", grounded " +
              fmt(rep.accuracy.grounded.rate.value_or(-1)) + " vs " +
              fmt(rep.accuracy.ungrounded.rate.value_or(-1)) + ", follow-up involved " +
              fmt(rep.distribution.followup_involved);
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome bootstrap_correctness() {
  Outcome o;
  const auto t0 = SteadyClock::now();
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> pick_p(0.2, 0.8);
  std::vector<std::string> rows, cols;
  for (int i = 1; i <= 20; ++i) rows.push_back((i < 10 ? "P0" : "P") + std::to_string(i));
  for (int j = 1; j <= 25; ++j) cols.push_back("Q" + std::to_string(j));
  metrics::BootstrapOptions opts;  // 10,000 replicates, 95 % percentile
  const int trials = 1000;
  int covered = 0;
  int t_covered = 0;  // Student-t interval on row means, same data, for reference
  for (int t = 0; t < trials; ++t) {
    const double p = pick_p(rng);
    std::bernoulli_distribution hit(p);
    metrics::ScoreMatrix m(rows, cols);
    std::vector<double> row_means(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const double v = hit(rng) ? 1.0 : 0.0;
        m.set(i, j, v);
        row_means[i] += v / static_cast<double>(cols.size());
      }
    }
    const double mean = std::accumulate(row_means.begin(), row_means.end(), 0.0) / 20.0;
    double ss = 0.0;
    for (double x : row_means) ss += (x - mean) * (x - mean);
    const double half = 2.093 * std::sqrt(ss / 19.0) / std::sqrt(20.0);
    t_covered += (mean - half <= p && p <= mean + half);
    opts.seed = static_cast<std::uint64_t>(t) + 1;
    const auto ci = metrics::bootstrap_ci(m, opts);
    covered += (ci.lo <= p && p <= ci.hi);
    if (t < 5) {
      const auto again = metrics::bootstrap_ci(m, opts);
      o.expect(again == ci, "equal seeds gave different intervals");
    }
  }
  const double coverage = static_cast<double>(covered) / trials;
  const double elapsed = seconds_since(t0);
  o.expect(coverage >= 0.93 && coverage <= 0.97, "coverage " + fmt(coverage) + " outside [0.93, 0.97]");
  o.expect(elapsed < 120.0, "runtime " + fmt(elapsed, 1) + " s exceeds 120 s");
  o.summary = "coverage " + fmt(coverage) + " over " + std::to_string(trials) + " trials (B=" +
              std::to_string(opts.replicates) + "), t-interval reference " +
              fmt(static_cast<double>(t_covered) / trials) + ", deterministic, " +
              fmt(elapsed, 1) + " s";
  return o;
}

// 7 -------------------------------------------------------------------------
std::string shuffled_core_reply(std::mt19937_64& rng, std::vector<int>& order) {
  order.resize(10);
  std::iota(order.begin(), order.end(), 1);
  std::shuffle(order.begin(), order.end(), rng);
  std::string out = "Stage 1 - Ten Questions:\n";
  for (int i = 0; i < 10; ++i) {
    out += std::to_string(i + 1) + ". [Domain " + std::to_string(order[i]) +
           "] What does theme " + std::to_string(order[i]) + " look like in your week?\n";
  }
  return out;
}

Outcome interview_state_machine() {
  Outcome o;
  std::mt19937_64 rng(12345);
  const int runs = 1000;
  std::size_t violations = 0;
  std::size_t rejected_counts = 0;
  const auto violation = [&](bool ok, const std::string& what) {
    if (!ok) ++violations;
    o.expect(ok, what);
  };
  std::unique_ptr<test_support::TempDir> dir;
  std::unique_ptr<store::SessionStore> sessions;
  for (int r = 0; r < runs; ++r) {
    if (r % 100 == 0) {
      sessions.reset();
      dir = std::make_unique<test_support::TempDir>();
      sessions = std::make_unique<store::SessionStore>(dir->path(), false);
    }
    interview::InterviewConfig cfg;
    cfg.followups.min = 1 + static_cast<int>(rng() % 4);
    cfg.followups.max = cfg.followups.min + static_cast<int>(rng() % 4);
    interview::InterviewEngine engine(*sessions, cfg,
                                      fixed_clock(parse_rfc3339("2026-03-01T10:00:00Z")));
    // Sometimes the model proposes a follow-up count outside the bounds.
    int followups = cfg.followups.min + static_cast<int>(rng() % (cfg.followups.max - cfg.followups.min + 1));
    const bool out_of_bounds = rng() % 5 == 0;
    if (out_of_bounds) followups = rng() % 2 ? cfg.followups.max + 1 : cfg.followups.min - 1;
    std::vector<int> order;
    const auto core = shuffled_core_reply(rng, order);
    auto gw = test_support::scripted_gateway({
        {{"personality insights per domain"}, true, test_support::summary_reply(), std::nullopt},
        {{"Proceed to Stage 2"}, true, test_support::followup_reply(std::max(followups, 0)), std::nullopt},
        {{"Begin Stage 1"}, true, core, std::nullopt},
    });
    const std::string alias = (r % 100 < 10 ? "P0" : "P") + std::to_string(r % 100);
    const std::string tag = "run " + std::to_string(r) + ": ";

    auto s = engine.start_session(alias);
    interview::Stage last = s.stage;
    const auto advance = [&](const interview::SessionState& next) {
      violation(next.stage >= last, tag + "stage went backwards");
      last = next.stage;
      s = next;
    };
    const auto summary_refused = [&] {
      const auto before = s;
      try {
        engine.generate_summary(s, *gw);
        violation(false, tag + "summary before follow-ups were answered");
      } catch (const Error& e) {
        violation(e.code() == ErrorCode::WrongStage, tag + "summary refusal code");
      }
      violation(sessions->load_session(alias) == before, tag + "refused summary changed state");
    };

    advance(engine.generate_core_questions(s, *gw));
    violation(s.core_questions.size() == interview::kCoreQuestionCount, tag + "core count");
    std::set<int> domains;
    for (const auto& q : s.core_questions) {
      if (q.domain_id) domains.insert(*q.domain_id);
    }
    violation(domains.size() == 10 && *domains.begin() == 1 && *domains.rbegin() == 10,
              tag + "core questions not bijective with domains");
    if (rng() % 3 == 0) summary_refused();

    auto pending = s.pending_questions();
    std::shuffle(pending.begin(), pending.end(), rng);
    for (const auto& q : pending) {
      advance(engine.submit_answer(s, q.question_id, "Answer to " + q.question_id + "."));
    }
    violation(s.stage == interview::Stage::CoreAnswered, tag + "core not answered");
    if (rng() % 3 == 0) summary_refused();

    if (out_of_bounds) {
      try {
        engine.generate_followups(s, *gw);
        violation(false, tag + "out-of-bounds follow-up count accepted");
      } catch (const Error& e) {
        violation(e.code() == ErrorCode::MalformedModelOutput, tag + "follow-up rejection code");
      }
      violation(sessions->load_session(alias).stage == interview::Stage::CoreAnswered,
                tag + "rejected follow-ups changed the stage");
      ++rejected_counts;
      continue;
    }
    advance(engine.generate_followups(s, *gw));
    const int n = static_cast<int>(s.followup_questions.size());
    violation(cfg.followups.contains(n), tag + "follow-up count outside bounds");
    if (rng() % 2 == 0) summary_refused();
    pending = s.pending_questions();
    std::shuffle(pending.begin(), pending.end(), rng);
    for (const auto& q : pending) {
      advance(engine.submit_answer(s, q.question_id, "More on " + q.question_id + "."));
    }
    violation(s.stage == interview::Stage::FollowUpsAnswered, tag + "follow-ups not answered");

    const auto core_ctx = interview::slice_context(s, interview::Condition::Core10);
    const auto full_ctx = interview::slice_context(s, interview::Condition::FullInterview);
    violation(core_ctx.turns.size() == 10, tag + "core context size");
    violation(full_ctx.turns.size() == 10 + static_cast<std::size_t>(n), tag + "full context size");
    for (const auto& turn : core_ctx.turns) {
      violation(std::find(full_ctx.turns.begin(), full_ctx.turns.end(), turn) != full_ctx.turns.end(),
                tag + "core turn missing from full context");
    }
    advance(engine.generate_summary(s, *gw));
    violation(s.stage == interview::Stage::Summarized, tag + "not summarized");
    violation(sessions->load_session(alias) == s, tag + "replayed state differs");
  }
  o.summary = std::to_string(runs) + " runs (" + std::to_string(rejected_counts) +
              " with out-of-bounds follow-ups), " + std::to_string(violations) + " violations";
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome scoring_kernels() {
  Outcome o;
  const auto key = assessments::Bfi44Key::standard();
  std::mt19937_64 rng(12345);
  const int responses = 10000;
  for (int t = 0; t < responses; ++t) {
    assessments::Bfi44Response r;
    for (int i = 0; i < 44; ++i) r.items.push_back(1 + static_cast<int>(rng() % 5));
    const auto scores = assessments::score_bfi44(r, key);
    for (int trait = 0; trait < 5; ++trait) {
      double raw = 0, n = 0;
      for (const auto& e : key.entries()) {
        if (static_cast<int>(e.trait) != trait) continue;
        const int v = r.items[static_cast<std::size_t>(e.item - 1)];
        raw += e.reverse ? 6 - v : v;
        n += 1;
      }
      const double oracle = 1 + 39 * (raw - n) / (4 * n);
      o.expect(std::fabs(scores.values[static_cast<std::size_t>(trait)] - oracle) < 1e-12,
               "BFI score differs from the item-loop oracle");
    }
  }
  o.expect(!assessments::binarize_score(20), "20 should be low");
  o.expect(assessments::binarize_score(21), "21 should be high");
  o.expect(!assessments::binarize_score(1) && assessments::binarize_score(40), "scale ends");

  std::size_t permutations = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<std::string> gold;
    for (std::size_t i = 0; i < n; ++i) gold.push_back(std::string(1, static_cast<char>('a' + i)));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<std::string> pred;
      for (auto i : perm) pred.push_back(gold[i]);
      std::size_t inversions = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
      const double oracle = n < 2 ? 1.0 : 1.0 - inversions / (n * (n - 1) / 2.0);
      o.expect(std::fabs(metrics::ranking_concordance(pred, gold) - oracle) < 1e-12,
               "concordance differs from inversion oracle");
      ++permutations;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  const auto types = all_mbti();
  for (int t = 0; t < 1000; ++t) {
    std::vector<metrics::TraitSample> samples;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      std::vector<metrics::TraitVector> gold{metrics::mbti_vector(types[rng() % 16])};
      if (rng() % 3 == 0) gold.push_back(metrics::mbti_vector(types[rng() % 16]));
      samples.push_back({metrics::mbti_vector(types[rng() % 16]), gold});
    }
    double total = 0, weighted = 0;
    for (int k = 0; k <= 4; ++k) {
      const double rate = metrics::off_by_k(samples, k);
      total += rate;
      weighted += k * rate;
    }
    o.expect(std::fabs(total - 1.0) < 1e-12, "off_by_k rates do not sum to 1");
    o.expect(std::fabs(metrics::misclass_rate(samples) - weighted / 4.0) < 1e-12,
             "misclass identity");
  }
  o.summary = std::to_string(responses) + " BFI responses, 20/21 boundary, " +
              std::to_string(permutations) + " rankings, 1000 off-by-k samples";
  return o;
}

// 9 -------------------------------------------------------------------------
Outcome end_to_end() {
  Outcome o;
  unsetenv("PERSONA_LAB_BASE_URL");
  unsetenv("PERSONA_LAB_API_KEY");
  test_support::TempDir dir;
  const auto store = (dir.path() / "store").string();
  const auto out = (dir.path() / "out").string();
  const std::string script = "scripted:" + (kData / "demo" / "demo.script").string();
  const std::string answers = read_text_file(kData / "demo" / "answers.txt");
  const auto t0 = SteadyClock::now();
  const auto step = [&](const std::vector<std::string>& args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream sout, serr;
    const int code = cli::run(args, in, sout, serr);
    o.expect(code == 0, args[0] + " exited " + std::to_string(code) + ": " + serr.str());
    return sout.str();
  };
  for (const char* alias : {"P01", "P02", "P03"}) {
    step({"interview", "--alias", alias, "--backend", script, "--store", store}, answers);
  }
  step({"assessments", "import", "--store", store, "--responses",
        (kData / "demo" / "responses.jsonl").string(), "--finalize"});
  step({"simulate", "--conditions", "core10,full,summary", "--store", store, "--out", out,
        "--backend", script, "--run-id", "e2e", "--seed", "1"});
  step({"evaluate", "--runs", out, "--gold", store, "--report", out + "/report", "--bootstrap",
        "1000"});
  const auto run_dir = fs::path(out) / "runs" / "e2e";
  step({"audit", "--core", (run_dir / "core10.preds").string(), "--full",
        (run_dir / "full.preds").string(), "--gold", store, "--out", out + "/audit",
        "--bootstrap", "1000"});
  const double elapsed = seconds_since(t0);

  store::RunStore runs(out);
  std::size_t records = 0, gaps = 0;
  if (runs.has_run("e2e")) {
    for (auto c : runs.conditions("e2e")) {
      const auto set = runs.load_run("e2e", c);
      records += set.records.size();
      gaps += set.gaps.size();
    }
  }
  o.expect(records == 3 * 25 * 3 && gaps == 0,
           "grid has " + std::to_string(records) + " records and " + std::to_string(gaps) + " gaps");
  o.expect(fs::exists(fs::path(out) / "report" / "e2e.json"), "evaluation report missing");
  o.expect(fs::exists(fs::path(out) / "audit" / "audit.json"), "audit report missing");
  o.expect(elapsed < 60.0, "runtime " + fmt(elapsed, 1) + " s exceeds 60 s");
  o.summary = "3 participants, " + std::to_string(records) + " records, " + std::to_string(gaps) +
              " gaps, " + fmt(elapsed, 1) + " s";
  return o;
}

// 10 ------------------------------------------------------------------------
Outcome annotation_protocol() {
  Outcome o;
  std::vector<std::string> ids;
  for (int i = 0; i < 340; ++i) ids.push_back("T" + std::to_string(1000 + i));
  const std::vector<std::string> annotators = {"A1", "A2", "A3"};
  const auto plan = audit::plan_verification(ids, 60, 60, annotators, 12345);
  o.expect(plan.assignments.size() == 240, "assignments " + std::to_string(plan.assignments.size()));
  o.expect(plan.overlap.size() == 60 && plan.coverage.size() == 60, "subset sizes");
  std::set<std::string> overlap(plan.overlap.begin(), plan.overlap.end());
  std::set<std::string> coverage(plan.coverage.begin(), plan.coverage.end());
  o.expect(overlap.size() == 60 && coverage.size() == 60, "subsets contain duplicates");
  for (const auto& id : overlap) o.expect(!coverage.count(id), "overlap and coverage intersect");
  std::map<std::string, std::set<std::string>> by_trace;
  std::set<std::pair<std::string, std::string>> unique;
  for (const auto& a : plan.assignments) {
    by_trace[a.trace_id].insert(a.annotator_id);
    unique.insert({a.trace_id, a.annotator_id});
  }
  o.expect(unique.size() == plan.assignments.size(), "repeated assignment");
  for (const auto& id : overlap) o.expect(by_trace[id].size() == 3, "overlap trace not triple-coded");
  for (const auto& id : coverage) o.expect(by_trace[id].size() == 1, "coverage trace not single-coded");
  o.expect(by_trace.size() == 120, "assignments reference traces outside the plan");

  ensure_fixture();
  const auto dir = shared().fixture.path();
  store::SessionStore sessions(dir, false);
  const auto audit_run = pipeline::load_run(store::RunStore(dir), fixtures::kAuditRun);
  const auto records = audit::read_annotations(read_text_file(dir / "annotations" / "annotations.tsv"));
  const auto gold = pipeline::load_gold(sessions, battery());
  const auto rep = pipeline::audit(gold, audit_run.sets, audit_run.battery, {}, &records);
  double inter = -1, pre = -1;
  if (rep.agreement) {
    inter = rep.agreement->inter_rater.rate().value_or(-1);
    if (rep.agreement->prelabel) pre = rep.agreement->prelabel->rate().value_or(-1);
  }
  o.near(inter, 0.95, 1e-9, "inter-rater agreement");
  o.near(pre, 0.879, 0.0005, "prelabel agreement");
  o.summary = "240 assignments, inter-rater " + fmt(inter) + ", prelabel " + fmt(pre);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"aggregation fidelity", aggregation_fidelity},
      {"per-question fidelity", per_question_fidelity},
      {"Likert channels", likert_channels},
      {"MBTI metrics", mbti_metrics},
      {"audit fidelity", audit_fidelity},
      {"bootstrap correctness", bootstrap_correctness},
      {"interview state machine", interview_state_machine},
      {"scoring kernels vs oracles", scoring_kernels},
      {"end-to-end offline pipeline", end_to_end},
      {"annotation protocol", annotation_protocol},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.failures.push_back(std::string("exception: ") + e.what());
    }
    if (!r.pass) ++failed;
    std::cout << "criterion " << std::setw(2) << i + 1 << " [PRIMARY] " << (r.pass ? "PASS" : "FAIL")
              << "  " << criteria[i].first;
    if (!r.summary.empty()) std::cout << ": " << r.summary;
    std::cout << "\n";
    for (const auto& f : r.failures) std::cout << "    " << f << "\n";
    std::cout << std::flush;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " primary criteria pass\n";
  return failed == 0 ? 0 : 1;
}
