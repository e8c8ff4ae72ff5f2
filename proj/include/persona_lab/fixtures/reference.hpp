#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "persona_lab/assessments/battery.hpp"

// Deterministic synthetic datasets whose evaluation reproduces a set of target
// statistics. Everything (interviews, self-reports, predictions, traces,
// annotations) is generated; no model is called.
namespace persona_lab::fixtures {

struct MbtiTarget {
  double top1_exact = 0.0;
  double hit_at_2 = 0.0;
  double off_by_1 = 0.0;
  double off_by_2 = 0.0;
};

struct ReferenceTargets {
  std::size_t participants = 20;
  // Per item, one value per condition (core10, full, summary). Ranking items
  // hold the mean pairwise concordance.
  std::map<std::string, std::array<double, 3>> question_accuracy;
  std::array<double, 3> overall_accuracy{};
  std::array<double, 3> likert_exact{};
  std::array<double, 3> likert_off_by_one{};
  // Keys "core10", "full", "summary" and "alt" (a second backend, full context).
  std::map<std::string, MbtiTarget> mbti;
  std::map<std::string, std::array<double, 5>> bigfive_match;

  // Audit set: counts per reasoning category and verified location.
  std::map<std::string, std::map<std::string, std::size_t>> audit_crosstab;
  std::size_t grounded_correct = 0;
  std::size_t ungrounded_correct = 0;
  std::size_t baseline_correct = 0;
  std::size_t unchanged_wrong = 0;
  std::size_t unchanged_wrong_same_answer = 0;
  std::size_t unchanged_correct = 0;
  std::size_t improved = 0;
  std::size_t worsened = 0;

  std::size_t overlap = 60;
  std::size_t coverage = 60;
  std::vector<std::string> annotators;
  double inter_rater = 0.0;
  double prelabel = 0.0;

  nlohmann::json source;  // the document the targets were read from
};

ReferenceTargets targets_from_json(const nlohmann::json& j);
ReferenceTargets load_targets(const std::filesystem::path& path);
// data/reference_targets.json shipped with the build.
ReferenceTargets default_targets();

inline constexpr const char* kReferenceRun = "reference";
inline constexpr const char* kAltRun = "reference-alt";
inline constexpr const char* kAuditRun = "reference-audit";
inline constexpr std::uint64_t kPlanSeed = 12345;

// Files written under the output directory:
//   sessions/       interview logs and self-reports of P01..Pn
//   runs/           reference, reference-alt and reference-audit runs
//   annotations/    verification plan, blank sheet and filled annotations
//   targets.json    the targets used
//   PROVENANCE.md   how each dataset is derived
// Directories owned by a previous build are replaced. Throws IoFailure, or
// InvalidRequest when the targets cannot be realised on the battery.
void build_reference(const std::filesystem::path& out, const ReferenceTargets& targets,
                     const assessments::Battery& battery);

struct CheckLine {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  bool pass = false;
};

// Evaluates and audits a built fixture directory and compares the results
// with the targets (tolerance 0.001).
std::vector<CheckLine> check_reference(const std::filesystem::path& dir,
                                       const ReferenceTargets& targets);

}  // namespace persona_lab::fixtures
