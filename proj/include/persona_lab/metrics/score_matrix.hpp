#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/assessments/responses.hpp"
#include "persona_lab/simulation/records.hpp"

namespace persona_lab::metrics {

// Missing cells are dropped from means (with a warning) or rejected.
enum class MissingPolicy { Exclude, Strict };

// Participants x items. Rows are kept sorted by alias; columns keep the order
// they were given in.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::vector<std::string> rows, std::vector<std::string> cols);

  const std::vector<std::string>& rows() const noexcept { return rows_; }
  const std::vector<std::string>& cols() const noexcept { return cols_; }

  // Scores must lie in [0, 1] (InvalidRequest otherwise).
  void set(const std::string& row, const std::string& col, double score);
  void set(std::size_t r, std::size_t c, double score);
  const std::optional<double>& at(std::size_t r, std::size_t c) const;
  std::optional<double> get(const std::string& row, const std::string& col) const;

  std::size_t row_index(const std::string& row) const;  // NotFound
  std::size_t col_index(const std::string& col) const;  // UnknownItem
  std::size_t missing_count() const;
  std::size_t present_count() const;
  bool complete() const { return missing_count() == 0; }

 private:
  std::vector<std::string> rows_;
  std::vector<std::string> cols_;
  std::vector<std::optional<double>> cells_;
};

struct RateCell {
  std::optional<double> value;  // absent when n = 0
  std::size_t n = 0;
};

// Throws GridMismatch in strict mode when any cell is missing.
void check_missing(const ScoreMatrix& m, MissingPolicy policy);

// Mean of per-question means (equal to the mean of all cells on a complete
// grid). Throws EmptyInput.
double overall_accuracy(const ScoreMatrix& m, MissingPolicy policy = MissingPolicy::Exclude);

// Per-question means over the given rows (a multiset of row indices).
double overall_accuracy_rows(const ScoreMatrix& m, const std::vector<std::size_t>& rows);

std::vector<std::pair<std::string, RateCell>> per_question(
    const ScoreMatrix& m, MissingPolicy policy = MissingPolicy::Exclude);

// Mean of the per-question means of each qtype's items. Throws UnknownItem
// for columns missing from the battery.
std::map<assessments::QType, RateCell> accuracy_by_qtype(
    const ScoreMatrix& m, const assessments::Battery& battery,
    MissingPolicy policy = MissingPolicy::Exclude);

// Scores a prediction set against gold answers. Rows are the participants the
// set covers; a cell is missing when either side lacks an answer. Throws
// MissingGold for a participant without any gold answers.
ScoreMatrix build_score_matrix(const simulation::PredictionSet& set,
                               const std::map<std::string, assessments::ItemAnswers>& gold,
                               const assessments::Battery& battery,
                               std::vector<std::string>* warnings = nullptr);

}  // namespace persona_lab::metrics
