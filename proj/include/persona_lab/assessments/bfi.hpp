#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace persona_lab::assessments {

// Fixed order used everywhere: O, C, E, A, N.
enum class Trait { O, C, E, A, N };
inline constexpr std::array<Trait, 5> kTraits = {Trait::O, Trait::C, Trait::E, Trait::A, Trait::N};
inline constexpr int kBfiItems = 44;
inline constexpr double kScaleMin = 1.0;
inline constexpr double kScaleMax = 40.0;

char trait_letter(Trait t) noexcept;
std::optional<Trait> trait_from_letter(std::string_view s) noexcept;

struct KeyEntry {
  int item = 0;  // 1-based
  Trait trait = Trait::O;
  bool reverse = false;

  bool operator==(const KeyEntry&) const = default;
};

class Bfi44Key {
 public:
  // The published inventory key.
  static Bfi44Key standard();
  // Header "persona-lab/v1 bfi44-key", then {"item","trait","reverse"} per line.
  static Bfi44Key load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  // Throws Error(InvalidKey) unless items 1..44 are each assigned exactly once
  // and every trait has at least one item.
  static Bfi44Key from(std::vector<KeyEntry> entries);

  const std::vector<KeyEntry>& entries() const noexcept { return entries_; }
  std::vector<KeyEntry> items_for(Trait t) const;

 private:
  std::vector<KeyEntry> entries_;  // sorted by item
};

struct Bfi44Response {
  std::vector<int> items;  // items[0] is item 1

  // Throws Error(OutOfRangeItem) for a wrong count or a value outside 1..5.
  void validate() const;
};

struct BigFiveScores {
  std::array<double, 5> values{};  // indexed by Trait

  double operator[](Trait t) const { return values[static_cast<int>(t)]; }
  double& operator[](Trait t) { return values[static_cast<int>(t)]; }
  bool operator==(const BigFiveScores&) const = default;
};

struct BigFiveBits {
  std::array<bool, 5> high{};  // indexed by Trait

  bool operator[](Trait t) const { return high[static_cast<int>(t)]; }
  bool operator==(const BigFiveBits&) const = default;
};

// Reverse-keyed items map v -> 6 - v; each trait's raw sum is scaled linearly
// so the trait's raw minimum lands on 1 and its maximum on 40.
BigFiveScores score_bfi44(const Bfi44Response& response, const Bfi44Key& key);

// <= 20 low, >= 21 high; values strictly between go high only above 20.5.
bool binarize_score(double value) noexcept;
BigFiveBits binarize_bigfive(const BigFiveScores& scores);

nlohmann::json to_json(const BigFiveScores& s);
BigFiveScores scores_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BigFiveBits& b);
BigFiveBits bits_from_json(const nlohmann::json& j);

}  // namespace persona_lab::assessments
