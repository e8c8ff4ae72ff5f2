#include "persona_lab/audit/audit.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/random.hpp"
#include "persona_lab/common/text.hpp"
#include "persona_lab/gateway/structured.hpp"

namespace persona_lab::audit {

using assessments::answer_key;
using nlohmann::json;
using simulation::category_name;
using simulation::involves_followup;
using simulation::location_name;

namespace {

constexpr const char* kFieldLocation = "evidence_location";
constexpr const char* kFieldCategory = "reasoning_category";

double ratio(std::size_t a, std::size_t b) {
  return static_cast<double>(a) / static_cast<double>(b);
}

bool is_correct(const PredictionRecord& r,
                const std::map<std::string, assessments::ItemAnswers>& gold) {
  auto a = gold.find(r.participant_alias);
  if (a != gold.end()) {
    auto g = a->second.find(r.item_id);
    if (g != a->second.end()) return answer_key(g->second) == answer_key(r.answer);
  }
  throw Error(ErrorCode::MissingGold,
              "no gold answer for " + r.participant_alias + "/" + r.item_id,
              {{"participant_alias", r.participant_alias}, {"item_id", r.item_id}});
}

GroupAccuracy group(const std::vector<double>& outcomes,
                    const std::optional<metrics::BootstrapOptions>& bootstrap) {
  GroupAccuracy g;
  g.n = outcomes.size();
  for (double v : outcomes) g.correct += v > 0.5 ? 1 : 0;
  if (g.n > 0) g.rate = ratio(g.correct, g.n);
  if (bootstrap && g.n >= 2) g.ci = metrics::bootstrap_instances(outcomes, *bootstrap);
  return g;
}

}  // namespace

AuditSubset audit_subset(const PredictionSet& set, const assessments::Battery& battery) {
  AuditSubset s;
  s.condition = set.condition;
  for (const auto& r : set.records) {
    if (battery.at(r.item_id).qtype == assessments::QType::Choice) s.records.push_back(r);
  }
  return s;
}

std::string trace_id(const PredictionRecord& r) {
  return std::string(interview::condition_token(r.condition)) + "/" + r.participant_alias + "/" +
         r.item_id;
}

LocationDistribution evidence_distribution(const AuditSubset& subset) {
  if (subset.records.empty()) throw Error(ErrorCode::EmptyInput, "audit subset is empty");
  LocationDistribution d;
  d.n = subset.n();
  for (auto l : simulation::kLocations) d.counts[l] = 0;
  for (const auto& r : subset.records) d.counts[r.trace.verified_location]++;
  for (auto l : simulation::kLocations) d.proportions[l] = ratio(d.counts[l], d.n);
  d.followup_involved = ratio(d.counts[EvidenceLocation::FollowUp] + d.counts[EvidenceLocation::Both], d.n);
  return d;
}

GroundedAccuracy grounded_accuracy(const AuditSubset& subset,
                                   const std::map<std::string, assessments::ItemAnswers>& gold,
                                   const std::optional<metrics::BootstrapOptions>& bootstrap) {
  std::vector<double> grounded, ungrounded;
  for (const auto& r : subset.records) {
    const double ok = is_correct(r, gold) ? 1.0 : 0.0;
    (involves_followup(r.trace.verified_location) ? grounded : ungrounded).push_back(ok);
  }
  return {group(grounded, bootstrap), group(ungrounded, bootstrap)};
}

std::optional<double> CrossTab::followup_involved(ReasoningCategory c) const {
  auto it = rows.find(c);
  if (it == rows.end() || it->second.n == 0) return std::nullopt;
  return it->second.followup_involved;
}

CrossTab cross_tab(const AuditSubset& subset) {
  if (subset.records.empty()) throw Error(ErrorCode::EmptyInput, "audit subset is empty");
  CrossTab t;
  t.total = subset.n();
  for (const auto& r : subset.records) {
    auto& row = t.rows[r.trace.reasoning_category];
    if (row.counts.empty()) {
      for (auto l : simulation::kLocations) row.counts[l] = 0;
    }
    row.n++;
    row.counts[r.trace.verified_location]++;
  }
  for (auto& [c, row] : t.rows) {
    for (auto l : simulation::kLocations) row.proportions[l] = ratio(row.counts[l], row.n);
    row.followup_involved =
        ratio(row.counts[EvidenceLocation::FollowUp] + row.counts[EvidenceLocation::Both], row.n);
  }
  return t;
}

TransitionCounts paired_transitions(const PredictionSet& baseline, const PredictionSet& comparison,
                                    const std::map<std::string, assessments::ItemAnswers>& gold,
                                    const assessments::Battery& battery, bool grounded_only) {
  using Key = std::pair<std::string, std::string>;
  auto index = [&](const PredictionSet& set) {
    std::map<Key, const PredictionRecord*> m;
    for (const auto& r : set.records) {
      if (battery.at(r.item_id).qtype != assessments::QType::Choice) continue;
      m[{r.participant_alias, r.item_id}] = &r;
    }
    return m;
  };
  const auto base = index(baseline);
  const auto comp = index(comparison);
  std::vector<std::string> unmatched;
  for (const auto& [k, r] : base) {
    if (!comp.count(k)) unmatched.push_back(k.first + "/" + k.second);
  }
  for (const auto& [k, r] : comp) {
    if (!base.count(k)) unmatched.push_back(k.first + "/" + k.second);
  }
  if (!unmatched.empty()) {
    throw Error(ErrorCode::GridMismatch,
                std::to_string(unmatched.size()) + " cells are covered by only one of the sets",
                {{"cells", unmatched}});
  }
  TransitionCounts t;
  for (const auto& [k, c] : comp) {
    if (grounded_only && !involves_followup(c->trace.verified_location)) continue;
    const auto* b = base.at(k);
    const bool was = is_correct(*b, gold);
    const bool now = is_correct(*c, gold);
    ++t.n;
    if (was && now) ++t.unchanged_correct;
    else if (!was && !now) ++t.unchanged_wrong;
    else if (now) ++t.improved;
    else ++t.worsened;
    if (answer_key(b->answer) != answer_key(c->answer)) ++t.changed;
  }
  if (t.n > 0) t.prediction_change_rate = ratio(t.changed, t.n);
  return t;
}

VerificationPlan plan_verification(std::vector<std::string> trace_ids, std::size_t n_overlap,
                                   std::size_t n_coverage,
                                   const std::vector<std::string>& annotators,
                                   std::uint64_t seed) {
  if (annotators.empty()) throw Error(ErrorCode::InvalidRequest, "no annotators given");
  std::set<std::string> distinct(annotators.begin(), annotators.end());
  if (distinct.size() != annotators.size()) {
    throw Error(ErrorCode::InvalidRequest, "annotator ids must be distinct");
  }
  std::sort(trace_ids.begin(), trace_ids.end());
  trace_ids.erase(std::unique(trace_ids.begin(), trace_ids.end()), trace_ids.end());
  if (n_overlap + n_coverage > trace_ids.size()) {
    throw Error(ErrorCode::SubsetTooSmall,
                "requested " + std::to_string(n_overlap + n_coverage) + " traces but only " +
                    std::to_string(trace_ids.size()) + " are available",
                {{"available", trace_ids.size()}, {"requested", n_overlap + n_coverage}});
  }
  SeededRng rng(seed);
  const std::size_t take = n_overlap + n_coverage;
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(trace_ids.size() - i));
    std::swap(trace_ids[i], trace_ids[j]);
  }
  VerificationPlan plan;
  plan.overlap.assign(trace_ids.begin(), trace_ids.begin() + static_cast<std::ptrdiff_t>(n_overlap));
  plan.coverage.assign(trace_ids.begin() + static_cast<std::ptrdiff_t>(n_overlap),
                       trace_ids.begin() + static_cast<std::ptrdiff_t>(take));
  for (const auto& t : plan.overlap) {
    for (const auto& a : annotators) plan.assignments.push_back({t, a});
  }
  for (std::size_t i = 0; i < plan.coverage.size(); ++i) {
    plan.assignments.push_back({plan.coverage[i], annotators[i % annotators.size()]});
  }
  return plan;
}

VerificationPlan plan_verification(const AuditSubset& subset, std::size_t n_overlap,
                                   std::size_t n_coverage,
                                   const std::vector<std::string>& annotators,
                                   std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& r : subset.records) ids.push_back(trace_id(r));
  return plan_verification(std::move(ids), n_overlap, n_coverage, annotators, seed);
}

std::optional<double> Tally::rate() const {
  if (total == 0) return std::nullopt;
  return ratio(agree, total);
}

namespace {

std::string field_value(const AnnotationRecord& r, const std::string& field) {
  if (field == kFieldLocation) return std::string(location_name(r.evidence_location));
  return std::string(category_name(r.reasoning_category));
}

std::string prelabel_value(const Prelabel& p, const std::string& field) {
  if (field == kFieldLocation) return std::string(location_name(p.evidence_location));
  return std::string(category_name(p.reasoning_category));
}

// Strict majority label, if any.
std::optional<std::string> majority(const std::vector<const AnnotationRecord*>& rs,
                                    const std::string& field) {
  std::map<std::string, std::size_t> counts;
  for (const auto* r : rs) counts[field_value(*r, field)]++;
  for (const auto& [label, n] : counts) {
    if (2 * n > rs.size()) return label;
  }
  return std::nullopt;
}

}  // namespace

AgreementReport agreement(const std::vector<AnnotationRecord>& records,
                          const std::map<std::string, Prelabel>* prelabels) {
  std::map<std::string, std::vector<const AnnotationRecord*>> by_trace;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : records) {
    if (!seen.emplace(r.trace_id, r.annotator_id).second) {
      throw Error(ErrorCode::DuplicateRecord,
                  "trace " + r.trace_id + " annotated twice by " + r.annotator_id);
    }
    by_trace[r.trace_id].push_back(&r);
  }
  const std::vector<std::string> fields{kFieldLocation, kFieldCategory};
  AgreementReport rep;
  for (const auto& f : fields) {
    rep.inter_rater_by_field[f] = {};
    rep.prelabel_by_field[f] = {};
  }
  double trace_rate_sum = 0.0;
  for (const auto& [trace, rs] : by_trace) {
    if (rs.size() < 2) continue;
    ++rep.overlap_traces;
    Tally trace_tally;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      for (std::size_t j = i + 1; j < rs.size(); ++j) {
        for (const auto& f : fields) {
          const bool same = field_value(*rs[i], f) == field_value(*rs[j], f);
          auto& t = rep.inter_rater_by_field[f];
          t.total++;
          trace_tally.total++;
          if (same) {
            t.agree++;
            trace_tally.agree++;
          }
        }
      }
    }
    trace_rate_sum += *trace_tally.rate();
  }
  if (rep.overlap_traces == 0) {
    throw Error(ErrorCode::NoOverlap, "no trace was verified by two or more annotators");
  }
  for (const auto& f : fields) {
    rep.inter_rater.agree += rep.inter_rater_by_field[f].agree;
    rep.inter_rater.total += rep.inter_rater_by_field[f].total;
  }
  rep.inter_rater_trace_mean = trace_rate_sum / static_cast<double>(rep.overlap_traces);

  Tally pre;
  for (const auto& [trace, rs] : by_trace) {
    for (const auto& f : fields) {
      std::optional<std::string> final_label =
          rs.size() == 1 ? std::optional<std::string>(field_value(*rs.front(), f)) : majority(rs, f);
      if (!final_label) rep.unresolved.push_back(trace + ":" + f);
      if (!prelabels) continue;
      auto p = prelabels->find(trace);
      if (p == prelabels->end()) continue;
      auto& t = rep.prelabel_by_field[f];
      t.total++;
      pre.total++;
      if (final_label && *final_label == prelabel_value(p->second, f)) {
        t.agree++;
        pre.agree++;
      }
    }
  }
  if (prelabels) rep.prelabel = pre;
  return rep;
}

std::map<std::string, Prelabel> prelabels_for(const AuditSubset& subset) {
  std::map<std::string, Prelabel> out;
  for (const auto& r : subset.records) {
    out[trace_id(r)] = {r.trace.claimed_location, r.trace.reasoning_category};
  }
  return out;
}

namespace {

const std::vector<std::string>& sheet_columns() {
  static const std::vector<std::string> cols = {
      "trace_id",          "annotator_id",       "evidence_location", "reasoning_category",
      "prediction_supported", "participant_alias", "item_id",          "condition",
      "answer",            "explanation",        "evidence_excerpt",  "prelabel_location",
      "prelabel_category"};
  return cols;
}

// Tabs and newlines cannot appear inside a cell.
std::string cell(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

bool parse_bool(const std::string& s, std::size_t line) {
  const auto n = text::normalize_label(s);
  if (n == "true" || n == "yes" || n == "y" || n == "1") return true;
  if (n == "false" || n == "no" || n == "n" || n == "0") return false;
  throw Error(ErrorCode::InvalidRequest,
              "line " + std::to_string(line) + ": prediction_supported must be yes or no",
              {{"line", line}});
}

}  // namespace

std::string annotation_sheet(const VerificationPlan& plan, const AuditSubset& subset) {
  std::map<std::string, const PredictionRecord*> by_id;
  for (const auto& r : subset.records) by_id[trace_id(r)] = &r;
  std::ostringstream out;
  out << text::join(sheet_columns(), "\t") << "\n";
  for (const auto& a : plan.assignments) {
    auto it = by_id.find(a.trace_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::UnknownItem, "plan names trace " + a.trace_id + " not in the subset");
    }
    const auto& r = *it->second;
    std::vector<std::string> row = {
        a.trace_id,
        a.annotator_id,
        std::string(location_name(r.trace.claimed_location)),
        std::string(category_name(r.trace.reasoning_category)),
        "yes",
        r.participant_alias,
        r.item_id,
        std::string(interview::condition_token(r.condition)),
        answer_key(r.answer),
        cell(r.trace.explanation),
        cell(r.trace.evidence_excerpt),
        std::string(location_name(r.trace.claimed_location)),
        std::string(category_name(r.trace.reasoning_category))};
    out << text::join(row, "\t") << "\n";
  }
  return out.str();
}

std::string write_annotations(const std::vector<AnnotationRecord>& records) {
  std::ostringstream out;
  out << "trace_id\tannotator_id\tevidence_location\treasoning_category\tprediction_supported\n";
  for (const auto& r : records) {
    out << cell(r.trace_id) << '\t' << cell(r.annotator_id) << '\t'
        << location_name(r.evidence_location) << '\t' << category_name(r.reasoning_category)
        << '\t' << (r.prediction_supported ? "yes" : "no") << '\n';
  }
  return out.str();
}

std::vector<AnnotationRecord> read_annotations(const std::string& tsv) {
  const auto lines = text::split_lines(tsv);
  if (lines.empty()) throw Error(ErrorCode::EmptyInput, "annotation file is empty");
  const auto header = text::split(lines.front(), '\t');
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (text::trim(header[i]) == name) return i;
    }
    throw Error(ErrorCode::InvalidRequest, "annotation file lacks column " + name);
  };
  const auto c_trace = column("trace_id");
  const auto c_ann = column("annotator_id");
  const auto c_loc = column(kFieldLocation);
  const auto c_cat = column(kFieldCategory);
  const auto c_sup = column("prediction_supported");
  std::vector<AnnotationRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto cols = text::split(lines[i], '\t');
    const std::size_t line = i + 1;
    auto get = [&](std::size_t c) {
      if (c >= cols.size()) {
        throw Error(ErrorCode::InvalidRequest, "line " + std::to_string(line) + " is short",
                    {{"line", line}});
      }
      return text::trim(cols[c]);
    };
    AnnotationRecord r;
    r.trace_id = get(c_trace);
    r.annotator_id = get(c_ann);
    auto loc = gateway::resolve_alias(gateway::evidence_location_aliases(), get(c_loc));
    auto cat = gateway::resolve_alias(gateway::reasoning_category_aliases(), get(c_cat));
    if (!loc || !cat) {
      throw Error(ErrorCode::InvalidRequest,
                  "line " + std::to_string(line) + ": unknown location or category label",
                  {{"line", line}});
    }
    r.evidence_location = *simulation::location_from_name(*loc);
    r.reasoning_category = *simulation::category_from_name(*cat);
    r.prediction_supported = parse_bool(get(c_sup), line);
    if (r.trace_id.empty() || r.annotator_id.empty()) {
      throw Error(ErrorCode::InvalidRequest, "line " + std::to_string(line) + " lacks ids",
                  {{"line", line}});
    }
    out.push_back(std::move(r));
  }
  return out;
}

AuditReport run_audit(const std::vector<PredictionSet>& sets,
                      const std::map<std::string, assessments::ItemAnswers>& gold,
                      const assessments::Battery& battery, const AuditOptions& options) {
  auto find = [&](Condition c) -> const PredictionSet* {
    for (const auto& s : sets) {
      if (s.condition == c) return &s;
    }
    return nullptr;
  };
  const auto* main = find(options.condition);
  if (!main) {
    throw Error(ErrorCode::EmptyInput, "no predictions for condition " +
                                           std::string(interview::condition_token(options.condition)));
  }
  AuditReport rep;
  rep.run_id = main->run_id;
  rep.condition = options.condition;
  const auto subset = audit_subset(*main, battery);
  rep.distribution = evidence_distribution(subset);
  rep.accuracy = grounded_accuracy(subset, gold, options.bootstrap);
  rep.crosstab = cross_tab(subset);
  for (const auto& r : subset.records) rep.location_mismatches += r.trace.location_mismatch ? 1 : 0;
  if (options.baseline) {
    if (const auto* base = find(*options.baseline)) {
      rep.baseline = options.baseline;
      rep.transitions_grounded = paired_transitions(*base, *main, gold, battery, true);
      rep.transitions_all = paired_transitions(*base, *main, gold, battery, false);
    }
  }
  return rep;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json location_map(const std::map<EvidenceLocation, double>& m) {
  json j = json::object();
  for (const auto& [l, v] : m) j[std::string(location_name(l))] = v;
  return j;
}

json count_map(const std::map<EvidenceLocation, std::size_t>& m) {
  json j = json::object();
  for (const auto& [l, v] : m) j[std::string(location_name(l))] = v;
  return j;
}

json group_json(const GroupAccuracy& g) {
  return {{"n", g.n},
          {"correct", g.correct},
          {"rate", opt(g.rate)},
          {"ci", g.ci ? metrics::to_json(*g.ci) : json(nullptr)}};
}

json transitions_json(const std::optional<TransitionCounts>& t) {
  if (!t) return nullptr;
  return {{"n", t->n},
          {"unchanged_wrong", t->unchanged_wrong},
          {"unchanged_correct", t->unchanged_correct},
          {"improved", t->improved},
          {"worsened", t->worsened},
          {"changed", t->changed},
          {"prediction_change_rate", opt(t->prediction_change_rate)}};
}

json tally_json(const Tally& t) {
  return {{"agree", t.agree}, {"total", t.total}, {"rate", opt(t.rate())}};
}

}  // namespace

json to_json(const AgreementReport& r) {
  json by_field = json::object();
  for (const auto& [f, t] : r.inter_rater_by_field) by_field[f] = tally_json(t);
  json pre_field = json::object();
  for (const auto& [f, t] : r.prelabel_by_field) pre_field[f] = tally_json(t);
  return {{"overlap_traces", r.overlap_traces},
          {"inter_rater", tally_json(r.inter_rater)},
          {"inter_rater_by_field", by_field},
          {"inter_rater_trace_mean", opt(r.inter_rater_trace_mean)},
          {"prelabel", r.prelabel ? tally_json(*r.prelabel) : json(nullptr)},
          {"prelabel_by_field", r.prelabel ? pre_field : json(nullptr)},
          {"unresolved", r.unresolved}};
}

json to_json(const VerificationPlan& p) {
  json a = json::array();
  for (const auto& x : p.assignments) {
    a.push_back({{"trace_id", x.trace_id}, {"annotator_id", x.annotator_id}});
  }
  return {{"overlap", p.overlap}, {"coverage", p.coverage}, {"assignments", a}};
}

json to_json(const AuditReport& r) {
  json rows = json::object();
  for (const auto& [c, row] : r.crosstab.rows) {
    rows[std::string(category_name(c))] = {{"n", row.n},
                                           {"counts", count_map(row.counts)},
                                           {"proportions", location_map(row.proportions)},
                                           {"followup_involved", row.followup_involved}};
  }
  json j = {
      {"run_id", r.run_id},
      {"condition", interview::condition_token(r.condition)},
      {"baseline", r.baseline ? json(interview::condition_token(*r.baseline)) : json(nullptr)},
      {"evidence_distribution",
       {{"n", r.distribution.n},
        {"counts", count_map(r.distribution.counts)},
        {"proportions", location_map(r.distribution.proportions)},
        {"followup_involved", r.distribution.followup_involved}}},
      {"grounded_accuracy",
       {{"grounded", group_json(r.accuracy.grounded)},
        {"ungrounded", group_json(r.accuracy.ungrounded)}}},
      {"cross_tab",
       {{"total", r.crosstab.total},
        {"rows", rows},
        {"contrast",
         {{"CopingConstraint", opt(r.crosstab.followup_involved(ReasoningCategory::CopingConstraint))},
          {"ValueAbstraction",
           opt(r.crosstab.followup_involved(ReasoningCategory::ValueAbstraction))}}}}},
      {"transitions_grounded", transitions_json(r.transitions_grounded)},
      {"transitions_all", transitions_json(r.transitions_all)},
      {"location_mismatches", r.location_mismatches},
      {"agreement", r.agreement ? to_json(*r.agreement) : json(nullptr)}};
  return j;
}

std::vector<metrics::MetricRow> flatten(const AuditReport& r) {
  std::vector<metrics::MetricRow> rows;
  const std::string cond(interview::condition_token(r.condition));
  auto add = [&](std::string metric, std::optional<double> value, std::size_t n,
                 const std::optional<metrics::ConfidenceInterval>& ci = std::nullopt) {
    metrics::MetricRow row;
    row.metric = std::move(metric);
    row.condition = cond;
    row.value = value;
    row.n = n;
    if (ci) {
      row.ci_lo = ci->lo;
      row.ci_hi = ci->hi;
      row.replicates = ci->replicates;
      row.seed = ci->seed;
    }
    rows.push_back(std::move(row));
  };
  add("followup_involved", r.distribution.followup_involved, r.distribution.n);
  for (const auto& [l, p] : r.distribution.proportions) {
    add("evidence_share:" + std::string(location_name(l)), p, r.distribution.n);
  }
  add("grounded_accuracy", r.accuracy.grounded.rate, r.accuracy.grounded.n, r.accuracy.grounded.ci);
  add("ungrounded_accuracy", r.accuracy.ungrounded.rate, r.accuracy.ungrounded.n,
      r.accuracy.ungrounded.ci);
  for (const auto& [c, row] : r.crosstab.rows) {
    const std::string cat(category_name(c));
    for (const auto& [l, p] : row.proportions) {
      add("crosstab:" + cat + ":" + std::string(location_name(l)), p, row.n);
    }
    add("crosstab:" + cat + ":followup_involved", row.followup_involved, row.n);
  }
  if (r.transitions_grounded) {
    const auto& t = *r.transitions_grounded;
    add("transitions_grounded:unchanged_wrong", static_cast<double>(t.unchanged_wrong), t.n);
    add("transitions_grounded:unchanged_correct", static_cast<double>(t.unchanged_correct), t.n);
    add("transitions_grounded:improved", static_cast<double>(t.improved), t.n);
    add("transitions_grounded:worsened", static_cast<double>(t.worsened), t.n);
    add("transitions_grounded:prediction_change_rate", t.prediction_change_rate, t.n);
  }
  if (r.agreement) {
    add("agreement:inter_rater", r.agreement->inter_rater.rate(), r.agreement->inter_rater.total);
    if (r.agreement->prelabel) {
      add("agreement:prelabel", r.agreement->prelabel->rate(), r.agreement->prelabel->total);
    }
  }
  return rows;
}

}  // namespace persona_lab::audit
