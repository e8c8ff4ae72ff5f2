#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/assessments/bfi.hpp"
#include "persona_lab/assessments/mbti.hpp"
#include "persona_lab/assessments/responses.hpp"
#include "persona_lab/metrics/bootstrap.hpp"
#include "persona_lab/metrics/probe.hpp"
#include "persona_lab/metrics/score_matrix.hpp"
#include "persona_lab/simulation/records.hpp"

namespace persona_lab::metrics {

struct MbtiMetrics {
  std::size_t n = 0;
  double top1_exact = 0.0;
  double hit_at_2 = 0.0;
  std::array<double, 5> off_by{};  // k = 0..4
  double misclass = 0.0;
};

struct BigFiveMetrics {
  std::size_t n = 0;
  std::array<double, 5> match{};  // O, C, E, A, N
};

struct LikertMetrics {
  std::size_t n = 0;
  double exact = 0.0;
  double off_by_one = 0.0;
};

struct ConditionReport {
  simulation::Condition condition = simulation::Condition::Core10;
  std::size_t participants = 0;
  std::size_t scored_cells = 0;
  std::size_t missing_cells = 0;
  std::size_t gaps = 0;
  bool scored = false;  // false when only personality predictions exist
  double overall = 0.0;
  std::optional<ConfidenceInterval> overall_ci;
  std::vector<std::pair<std::string, RateCell>> per_question;
  std::map<assessments::QType, RateCell> per_qtype;
  std::optional<LikertMetrics> likert;
  std::vector<ProbeResult> probe_consistency;
  std::optional<MbtiMetrics> mbti;
  std::optional<BigFiveMetrics> bigfive;
};

struct MetricReport {
  std::string run_id;
  std::string battery_hash;
  BootstrapOptions bootstrap;
  std::vector<ConditionReport> conditions;
  std::vector<ProbeResult> gold_probe_consistency;
  std::vector<std::string> notes;
  std::vector<std::string> warnings;

  const ConditionReport* find(simulation::Condition c) const;
};

struct EvaluationInputs {
  std::string run_id;
  const assessments::Battery* battery = nullptr;
  std::map<std::string, assessments::ItemAnswers> gold;
  std::vector<simulation::PredictionSet> sets;
  std::map<std::string, assessments::MbtiReport> gold_mbti;
  std::map<std::string, assessments::BigFiveBits> gold_bigfive;
  std::vector<simulation::PersonalityPrediction> personality;
};

struct EvaluationOptions {
  BootstrapOptions bootstrap;
  MissingPolicy missing = MissingPolicy::Exclude;
  bool with_ci = true;
};

// One condition report per condition that has predictions or personality
// predictions, in condition order. Throws MissingGold, GridMismatch (strict),
// EmptyInput.
MetricReport build_report(const EvaluationInputs& inputs, const EvaluationOptions& options);

// MBTI metrics over participants with both a prediction and a gold report.
std::optional<MbtiMetrics> mbti_metrics(
    const std::vector<simulation::PersonalityPrediction>& predictions,
    const std::map<std::string, assessments::MbtiReport>& gold);
std::optional<BigFiveMetrics> bigfive_metrics(
    const std::vector<simulation::PersonalityPrediction>& predictions,
    const std::map<std::string, assessments::BigFiveBits>& gold);
// Pooled over Likert cells with both answers.
std::optional<LikertMetrics> likert_metrics(
    const simulation::PredictionSet& set,
    const std::map<std::string, assessments::ItemAnswers>& gold,
    const assessments::Battery& battery);

nlohmann::json to_json(const MetricReport& report);

struct MetricRow {
  std::string metric;
  std::string condition;
  std::optional<double> value;
  std::optional<double> ci_lo;
  std::optional<double> ci_hi;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

// One row per metric and condition.
std::vector<MetricRow> flatten(const MetricReport& report);
// Header "metric,condition,value,ci_lo,ci_hi,n,B,seed".
std::string to_csv(const std::vector<MetricRow>& rows);

}  // namespace persona_lab::metrics
