#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/assessments/responses.hpp"
#include "persona_lab/metrics/bootstrap.hpp"
#include "persona_lab/metrics/report.hpp"
#include "persona_lab/simulation/records.hpp"

namespace persona_lab::audit {

using simulation::Condition;
using simulation::EvidenceLocation;
using simulation::PredictionRecord;
using simulation::PredictionSet;
using simulation::ReasoningCategory;

// Choice-item records of one condition.
struct AuditSubset {
  Condition condition = Condition::FullInterview;
  std::vector<PredictionRecord> records;

  std::size_t n() const noexcept { return records.size(); }
};

AuditSubset audit_subset(const PredictionSet& set, const assessments::Battery& battery);

// "<condition>/<alias>/<item>".
std::string trace_id(const PredictionRecord& r);

struct LocationDistribution {
  std::size_t n = 0;
  std::map<EvidenceLocation, std::size_t> counts;
  std::map<EvidenceLocation, double> proportions;
  double followup_involved = 0.0;  // FollowUp + Both
};

// Throws EmptyInput.
LocationDistribution evidence_distribution(const AuditSubset& subset);

struct GroupAccuracy {
  std::size_t n = 0;
  std::size_t correct = 0;
  std::optional<double> rate;  // undefined for an empty group
  std::optional<metrics::ConfidenceInterval> ci;
};

struct GroundedAccuracy {
  GroupAccuracy grounded;    // verified location FollowUp or Both
  GroupAccuracy ungrounded;
};

// Instance-bootstrap CIs when `bootstrap` is set. Throws MissingGold.
GroundedAccuracy grounded_accuracy(const AuditSubset& subset,
                                   const std::map<std::string, assessments::ItemAnswers>& gold,
                                   const std::optional<metrics::BootstrapOptions>& bootstrap = {});

struct CrossTabRow {
  std::size_t n = 0;
  std::map<EvidenceLocation, std::size_t> counts;
  std::map<EvidenceLocation, double> proportions;
  double followup_involved = 0.0;
};

struct CrossTab {
  std::size_t total = 0;
  std::map<ReasoningCategory, CrossTabRow> rows;  // only categories that occur

  // P(follow-up involved | category), absent when the category is empty.
  std::optional<double> followup_involved(ReasoningCategory c) const;
};

// Throws EmptyInput.
CrossTab cross_tab(const AuditSubset& subset);

struct TransitionCounts {
  std::size_t n = 0;
  std::size_t unchanged_wrong = 0;
  std::size_t unchanged_correct = 0;
  std::size_t improved = 0;
  std::size_t worsened = 0;
  std::size_t changed = 0;  // different predicted answers
  std::optional<double> prediction_change_rate;
};

// Pairs the baseline and comparison predictions per (participant, choice
// item). With `grounded_only` only pairs whose comparison trace is
// follow-up-grounded count. Throws GridMismatch when the two sets do not cover
// the same cells, MissingGold when gold is absent.
TransitionCounts paired_transitions(const PredictionSet& baseline, const PredictionSet& comparison,
                                    const std::map<std::string, assessments::ItemAnswers>& gold,
                                    const assessments::Battery& battery, bool grounded_only);

struct Assignment {
  std::string trace_id;
  std::string annotator_id;

  bool operator==(const Assignment&) const = default;
};

struct VerificationPlan {
  std::vector<std::string> overlap;
  std::vector<std::string> coverage;
  std::vector<Assignment> assignments;

  bool operator==(const VerificationPlan&) const = default;
};

// Seeded sampling without replacement from the sorted trace ids. Throws
// SubsetTooSmall, InvalidRequest for an empty or repeated annotator list.
VerificationPlan plan_verification(std::vector<std::string> trace_ids, std::size_t n_overlap,
                                   std::size_t n_coverage,
                                   const std::vector<std::string>& annotators, std::uint64_t seed);
VerificationPlan plan_verification(const AuditSubset& subset, std::size_t n_overlap,
                                   std::size_t n_coverage,
                                   const std::vector<std::string>& annotators, std::uint64_t seed);

struct AnnotationRecord {
  std::string trace_id;
  std::string annotator_id;
  EvidenceLocation evidence_location = EvidenceLocation::Unclassified;
  ReasoningCategory reasoning_category = ReasoningCategory::GenericNorm;
  bool prediction_supported = true;

  bool operator==(const AnnotationRecord&) const = default;
};

struct Prelabel {
  EvidenceLocation evidence_location = EvidenceLocation::Unclassified;
  ReasoningCategory reasoning_category = ReasoningCategory::GenericNorm;
};

struct Tally {
  std::size_t agree = 0;
  std::size_t total = 0;

  std::optional<double> rate() const;
};

struct AgreementReport {
  std::size_t overlap_traces = 0;
  Tally inter_rater;                            // pooled over traces, pairs, fields
  std::map<std::string, Tally> inter_rater_by_field;
  std::optional<double> inter_rater_trace_mean;  // mean of per-trace rates
  std::optional<Tally> prelabel;
  std::map<std::string, Tally> prelabel_by_field;
  std::vector<std::string> unresolved;  // "<trace_id>:<field>" with no majority
};

// Compares evidence_location and reasoning_category. Throws NoOverlap when no
// trace has two or more annotators and DuplicateRecord for a repeated
// (trace, annotator).
AgreementReport agreement(const std::vector<AnnotationRecord>& records,
                          const std::map<std::string, Prelabel>* prelabels = nullptr);

// Model-produced labels of each trace in the subset, keyed by trace id.
std::map<std::string, Prelabel> prelabels_for(const AuditSubset& subset);

// Tab-separated exchange. Columns: trace_id, annotator_id, evidence_location,
// reasoning_category, prediction_supported, then read-only context columns.
// Reading locates columns by header name, so extra or reordered columns are
// tolerated.
std::string annotation_sheet(const VerificationPlan& plan, const AuditSubset& subset);
std::vector<AnnotationRecord> read_annotations(const std::string& tsv);
std::string write_annotations(const std::vector<AnnotationRecord>& records);

struct AuditReport {
  std::string run_id;
  Condition condition = Condition::FullInterview;
  std::optional<Condition> baseline;
  LocationDistribution distribution;
  GroundedAccuracy accuracy;
  CrossTab crosstab;
  std::optional<TransitionCounts> transitions_grounded;
  std::optional<TransitionCounts> transitions_all;
  std::size_t location_mismatches = 0;
  std::optional<AgreementReport> agreement;
};

struct AuditOptions {
  Condition condition = Condition::FullInterview;
  std::optional<Condition> baseline = Condition::Core10;
  // Unset: no confidence intervals.
  std::optional<metrics::BootstrapOptions> bootstrap = metrics::BootstrapOptions{};
};

AuditReport run_audit(const std::vector<PredictionSet>& sets,
                      const std::map<std::string, assessments::ItemAnswers>& gold,
                      const assessments::Battery& battery, const AuditOptions& options);

nlohmann::json to_json(const AuditReport& r);
nlohmann::json to_json(const AgreementReport& r);
nlohmann::json to_json(const VerificationPlan& p);
std::vector<metrics::MetricRow> flatten(const AuditReport& r);

}  // namespace persona_lab::audit
