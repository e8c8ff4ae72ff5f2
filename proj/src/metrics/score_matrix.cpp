#include "persona_lab/metrics/score_matrix.hpp"

#include <algorithm>
#include <set>

#include "persona_lab/common/error.hpp"
#include "persona_lab/metrics/kernels.hpp"

namespace persona_lab::metrics {

ScoreMatrix::ScoreMatrix(std::vector<std::string> rows, std::vector<std::string> cols)
    : rows_(std::move(rows)), cols_(std::move(cols)) {
  std::sort(rows_.begin(), rows_.end());
  if (std::adjacent_find(rows_.begin(), rows_.end()) != rows_.end()) {
    throw Error(ErrorCode::InvalidRequest, "score matrix rows must be distinct");
  }
  std::set<std::string> seen(cols_.begin(), cols_.end());
  if (seen.size() != cols_.size()) {
    throw Error(ErrorCode::InvalidRequest, "score matrix columns must be distinct");
  }
  cells_.assign(rows_.size() * cols_.size(), std::nullopt);
}

std::size_t ScoreMatrix::row_index(const std::string& row) const {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), row);
  if (it == rows_.end() || *it != row) {
    throw Error(ErrorCode::NotFound, "no row for participant " + row);
  }
  return static_cast<std::size_t>(it - rows_.begin());
}

std::size_t ScoreMatrix::col_index(const std::string& col) const {
  auto it = std::find(cols_.begin(), cols_.end(), col);
  if (it == cols_.end()) throw Error(ErrorCode::UnknownItem, "no column for item " + col);
  return static_cast<std::size_t>(it - cols_.begin());
}

void ScoreMatrix::set(std::size_t r, std::size_t c, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(ErrorCode::InvalidRequest, "score " + std::to_string(score) + " outside [0, 1]");
  }
  cells_.at(r * cols_.size() + c) = score;
}

void ScoreMatrix::set(const std::string& row, const std::string& col, double score) {
  set(row_index(row), col_index(col), score);
}

const std::optional<double>& ScoreMatrix::at(std::size_t r, std::size_t c) const {
  return cells_.at(r * cols_.size() + c);
}

std::optional<double> ScoreMatrix::get(const std::string& row, const std::string& col) const {
  return at(row_index(row), col_index(col));
}

std::size_t ScoreMatrix::missing_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return !c.has_value(); }));
}

std::size_t ScoreMatrix::present_count() const { return cells_.size() - missing_count(); }

void check_missing(const ScoreMatrix& m, MissingPolicy policy) {
  if (policy != MissingPolicy::Strict) return;
  const auto missing = m.missing_count();
  if (missing > 0) {
    throw Error(ErrorCode::GridMismatch,
                std::to_string(missing) + " score cells are missing (strict mode)",
                {{"missing", missing}});
  }
}

double overall_accuracy_rows(const ScoreMatrix& m, const std::vector<std::size_t>& rows) {
  double total = 0.0;
  std::size_t questions = 0;
  for (std::size_t c = 0; c < m.cols().size(); ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (auto r : rows) {
      if (const auto& v = m.at(r, c)) {
        sum += *v;
        ++n;
      }
    }
    if (n > 0) {
      total += sum / static_cast<double>(n);
      ++questions;
    }
  }
  if (questions == 0) throw Error(ErrorCode::EmptyInput, "score matrix has no scored cells");
  return total / static_cast<double>(questions);
}

double overall_accuracy(const ScoreMatrix& m, MissingPolicy policy) {
  check_missing(m, policy);
  std::vector<std::size_t> rows(m.rows().size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return overall_accuracy_rows(m, rows);
}

std::vector<std::pair<std::string, RateCell>> per_question(const ScoreMatrix& m,
                                                           MissingPolicy policy) {
  check_missing(m, policy);
  std::vector<std::pair<std::string, RateCell>> out;
  for (std::size_t c = 0; c < m.cols().size(); ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < m.rows().size(); ++r) {
      if (const auto& v = m.at(r, c)) {
        sum += *v;
        ++n;
      }
    }
    RateCell cell;
    cell.n = n;
    if (n > 0) cell.value = sum / static_cast<double>(n);
    out.emplace_back(m.cols()[c], cell);
  }
  return out;
}

std::map<assessments::QType, RateCell> accuracy_by_qtype(const ScoreMatrix& m,
                                                         const assessments::Battery& battery,
                                                         MissingPolicy policy) {
  std::map<assessments::QType, std::pair<double, std::size_t>> sums;  // sum of means, questions
  std::map<assessments::QType, std::size_t> cells;
  for (const auto& [item_id, cell] : per_question(m, policy)) {
    const auto& item = battery.at(item_id);
    cells[item.qtype] += cell.n;
    auto& s = sums[item.qtype];
    if (cell.value) {
      s.first += *cell.value;
      ++s.second;
    }
  }
  std::map<assessments::QType, RateCell> out;
  for (const auto& [q, n] : cells) {
    RateCell rc;
    rc.n = n;
    const auto& s = sums[q];
    if (s.second > 0) rc.value = s.first / static_cast<double>(s.second);
    out[q] = rc;
  }
  return out;
}

ScoreMatrix build_score_matrix(const simulation::PredictionSet& set,
                               const std::map<std::string, assessments::ItemAnswers>& gold,
                               const assessments::Battery& battery,
                               std::vector<std::string>* warnings) {
  std::set<std::string> aliases;
  for (const auto& r : set.records) aliases.insert(r.participant_alias);
  for (const auto& g : set.gaps) aliases.insert(g.participant_alias);
  for (const auto& a : aliases) {
    auto it = gold.find(a);
    if (it == gold.end() || it->second.empty()) {
      throw Error(ErrorCode::MissingGold, "no gold answers for participant " + a,
                  {{"participant_alias", a}});
    }
  }
  ScoreMatrix m(std::vector<std::string>(aliases.begin(), aliases.end()), battery.item_ids());
  for (const auto& r : set.records) {
    const auto& item = battery.at(r.item_id);
    const auto& answers = gold.at(r.participant_alias);
    auto g = answers.find(r.item_id);
    if (g == answers.end()) continue;
    m.set(r.participant_alias, r.item_id, score_item(r.answer, g->second, item.qtype));
  }
  if (warnings) {
    for (std::size_t row = 0; row < m.rows().size(); ++row) {
      std::vector<std::string> missing;
      for (std::size_t c = 0; c < m.cols().size(); ++c) {
        if (!m.at(row, c)) missing.push_back(m.cols()[c]);
      }
      if (!missing.empty()) {
        std::string msg = std::string(interview::condition_token(set.condition)) + ": " +
                          m.rows()[row] + " has " + std::to_string(missing.size()) +
                          " unscored item(s) excluded:";
        for (const auto& id : missing) msg += " " + id;
        warnings->push_back(msg);
      }
    }
  }
  return m;
}

}  // namespace persona_lab::metrics
