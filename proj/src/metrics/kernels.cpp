#include "persona_lab/metrics/kernels.hpp"

#include <algorithm>
#include <map>

#include "persona_lab/assessments/mbti.hpp"
#include "persona_lab/common/error.hpp"

namespace persona_lab::metrics {

using assessments::Answer;
using assessments::QType;

namespace {

template <typename T>
void require_non_empty(const std::vector<T>& v, const char* what) {
  if (v.empty()) throw Error(ErrorCode::EmptyInput, std::string(what) + " needs at least one sample");
}

bool contains(const std::vector<std::string>& set, const std::string& v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

}  // namespace

double exact_match(const std::vector<LabelSample>& samples) {
  require_non_empty(samples, "exact_match");
  std::size_t hits = 0;
  for (const auto& s : samples) hits += contains(s.gold, s.predicted) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

bool hit_at_2(const std::array<std::string, 2>& predicted, const std::vector<std::string>& gold) {
  if (predicted[0] == predicted[1]) {
    throw Error(ErrorCode::DuplicateCandidates,
                "top-2 candidates must differ (both are " + predicted[0] + ")");
  }
  return contains(gold, predicted[0]) || contains(gold, predicted[1]);
}

double hit_at_2_rate(const std::vector<PairSample>& samples) {
  require_non_empty(samples, "hit_at_2");
  std::size_t hits = 0;
  for (const auto& s : samples) hits += hit_at_2(s.predicted, s.gold) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

TraitVector mbti_vector(std::string_view code) {
  const std::string c = assessments::normalize_mbti(code);
  return TraitVector{{c[0] == 'E', c[1] == 'S', c[2] == 'T', c[3] == 'J'}};
}

TraitVector bigfive_vector(const assessments::BigFiveBits& bits) {
  return TraitVector{std::vector<bool>(bits.high.begin(), bits.high.end())};
}

int hamming(const TraitVector& a, const TraitVector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "trait vectors differ in dimension (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a.bits[i] != b.bits[i] ? 1 : 0;
  return d;
}

int sample_distance(const TraitSample& sample) {
  if (sample.gold.empty()) throw Error(ErrorCode::EmptyInput, "trait sample has no gold vector");
  int best = hamming(sample.predicted, sample.gold.front());
  for (const auto& g : sample.gold) best = std::min(best, hamming(sample.predicted, g));
  return best;
}

double off_by_k(const std::vector<TraitSample>& samples, int k) {
  require_non_empty(samples, "off_by_k");
  std::size_t hits = 0;
  for (const auto& s : samples) hits += sample_distance(s) == k ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

double misclass_rate(const std::vector<TraitSample>& samples) {
  require_non_empty(samples, "misclass_rate");
  double total = 0.0;
  for (const auto& s : samples) {
    total += static_cast<double>(sample_distance(s)) / static_cast<double>(s.predicted.size());
  }
  return total / static_cast<double>(samples.size());
}

double ranking_concordance(const std::vector<std::string>& predicted,
                           const std::vector<std::string>& gold) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < predicted.size(); ++i) pos[predicted[i]] = i;
  auto sorted_pred = predicted;
  auto sorted_gold = gold;
  std::sort(sorted_pred.begin(), sorted_pred.end());
  std::sort(sorted_gold.begin(), sorted_gold.end());
  if (sorted_pred != sorted_gold || pos.size() != predicted.size()) {
    throw Error(ErrorCode::InvalidAnswer, "rankings must order the same distinct items");
  }
  const std::size_t n = gold.size();
  if (n < 2) return 1.0;
  std::size_t agree = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++pairs;
      if (pos[gold[i]] < pos[gold[j]]) ++agree;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

double score_item(const Answer& predicted, const Answer& gold, QType qtype) {
  if (assessments::answer_qtype(predicted) != qtype || assessments::answer_qtype(gold) != qtype) {
    throw Error(ErrorCode::QtypeMismatch,
                "answers do not match qtype " + std::string(assessments::qtype_name(qtype)));
  }
  switch (qtype) {
    case QType::Choice:
      return std::get<assessments::ChoiceAnswer>(predicted).label ==
                     std::get<assessments::ChoiceAnswer>(gold).label
                 ? 1.0
                 : 0.0;
    case QType::Likert:
      return std::get<assessments::LikertAnswer>(predicted).value ==
                     std::get<assessments::LikertAnswer>(gold).value
                 ? 1.0
                 : 0.0;
    case QType::Ranking:
      return ranking_concordance(std::get<assessments::RankingAnswer>(predicted).order,
                                 std::get<assessments::RankingAnswer>(gold).order);
  }
  return 0.0;
}

bool likert_off_by_one(int predicted, int gold, const assessments::LikertScale& scale) {
  if (!scale.contains(predicted) || !scale.contains(gold)) {
    throw Error(ErrorCode::OutOfScale,
                "Likert values " + std::to_string(predicted) + "/" + std::to_string(gold) +
                    " outside " + std::to_string(scale.min) + ".." + std::to_string(scale.max));
  }
  return std::abs(predicted - gold) <= 1;
}

std::array<double, 5> bigfive_match(
    const std::vector<std::pair<assessments::BigFiveBits, assessments::BigFiveBits>>& samples) {
  require_non_empty(samples, "bigfive_match");
  std::array<double, 5> out{};
  for (const auto& [pred, gold] : samples) {
    for (std::size_t t = 0; t < 5; ++t) out[t] += pred.high[t] == gold.high[t] ? 1.0 : 0.0;
  }
  for (auto& v : out) v /= static_cast<double>(samples.size());
  return out;
}

}  // namespace persona_lab::metrics
