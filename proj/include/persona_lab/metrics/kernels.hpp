#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/assessments/bfi.hpp"

namespace persona_lab::metrics {

// A predicted label against the set of labels accepted as gold.
struct LabelSample {
  std::string predicted;
  std::vector<std::string> gold;
};

// Fraction of samples whose prediction is in the gold set. Throws EmptyInput.
double exact_match(const std::vector<LabelSample>& samples);

// Throws DuplicateCandidates when both candidates are equal.
bool hit_at_2(const std::array<std::string, 2>& predicted, const std::vector<std::string>& gold);

struct PairSample {
  std::array<std::string, 2> predicted;
  std::vector<std::string> gold;
};
double hit_at_2_rate(const std::vector<PairSample>& samples);

struct TraitVector {
  std::vector<bool> bits;

  std::size_t size() const noexcept { return bits.size(); }
  bool operator==(const TraitVector&) const = default;
};

// E, S, T, J are 1. Throws InvalidMbti.
TraitVector mbti_vector(std::string_view code);
// High is 1, in O, C, E, A, N order.
TraitVector bigfive_vector(const assessments::BigFiveBits& bits);

// Throws DimensionMismatch.
int hamming(const TraitVector& a, const TraitVector& b);

// Distance is taken to the nearest vector of the gold set.
struct TraitSample {
  TraitVector predicted;
  std::vector<TraitVector> gold;
};
int sample_distance(const TraitSample& sample);
double off_by_k(const std::vector<TraitSample>& samples, int k);
double misclass_rate(const std::vector<TraitSample>& samples);

// Fraction of item pairs ordered the same way in both rankings. Both must be
// permutations of the same labels (InvalidAnswer otherwise); a single item
// scores 1.
double ranking_concordance(const std::vector<std::string>& predicted,
                           const std::vector<std::string>& gold);

// Choice and Likert score 1 on equality; Ranking scores pairwise concordance.
// Throws QtypeMismatch when either answer is not of `qtype`.
double score_item(const assessments::Answer& predicted, const assessments::Answer& gold,
                  assessments::QType qtype);

// Throws OutOfScale.
bool likert_off_by_one(int predicted, int gold, const assessments::LikertScale& scale);

// Per-trait fraction of equal bits. Throws EmptyInput.
std::array<double, 5> bigfive_match(
    const std::vector<std::pair<assessments::BigFiveBits, assessments::BigFiveBits>>& samples);

}  // namespace persona_lab::metrics
