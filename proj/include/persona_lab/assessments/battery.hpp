#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace persona_lab::assessments {

enum class Category {
  MoralReasoning,
  SocialCooperationFairness,
  EmotionRegulation,
  DecisionMaking,
  Value,
  PersonalityTrait,
};

enum class QType { Choice, Likert, Ranking };

std::string_view category_name(Category c) noexcept;
std::optional<Category> category_from_name(std::string_view s) noexcept;
std::string_view qtype_name(QType q) noexcept;
std::optional<QType> qtype_from_name(std::string_view s) noexcept;

struct ChoiceOption {
  std::string label;  // "A"
  std::string text;

  bool operator==(const ChoiceOption&) const = default;
};

struct LikertScale {
  int min = 1;
  int max = 5;
  std::string low_anchor;
  std::string high_anchor;

  bool contains(int v) const { return v >= min && v <= max; }
  bool operator==(const LikertScale&) const = default;
};

// How the partner item's answer maps into this item's answer space.
struct ProbeAlignment {
  enum class Kind { Identity, Reverse, Map };
  Kind kind = Kind::Identity;
  // Map only: partner answer key -> this item's answer key. Keys are choice
  // labels or Likert values written as decimal strings.
  std::map<std::string, std::string> map;

  bool operator==(const ProbeAlignment&) const = default;
};

struct DilemmaItem {
  std::string item_id;  // "Q1".."Q25"
  Category category = Category::DecisionMaking;
  QType qtype = QType::Choice;
  std::string prompt;
  std::vector<ChoiceOption> options;     // Choice
  std::optional<LikertScale> scale;      // Likert
  std::vector<std::string> rank_items;   // Ranking
  std::optional<std::string> probe_partner;
  std::optional<ProbeAlignment> probe_alignment;

  int number() const;  // 7 for "Q7"
  bool operator==(const DilemmaItem&) const = default;
};

struct ChoiceAnswer {
  std::string label;
  bool operator==(const ChoiceAnswer&) const = default;
};
struct LikertAnswer {
  int value = 0;
  bool operator==(const LikertAnswer&) const = default;
};
struct RankingAnswer {
  std::vector<std::string> order;
  bool operator==(const RankingAnswer&) const = default;
};
using Answer = std::variant<ChoiceAnswer, LikertAnswer, RankingAnswer>;

QType answer_qtype(const Answer& a) noexcept;
// Choice label, Likert value as text, or the ranking joined with " > ".
std::string answer_key(const Answer& a);
nlohmann::json to_json(const Answer& a);
Answer answer_from_json(const nlohmann::json& j);

// Reason the answer is not valid for the item, or nullopt.
std::optional<std::string> answer_problem(const DilemmaItem& item, const Answer& a);

// Reads "B", "Option B", "4", "A > C > B", "A, C, B" as an answer for the
// item. Throws Error(InvalidAnswer) when the text cannot be read for the
// item's qtype; the result is not range-checked (use answer_problem).
Answer parse_answer_text(const DilemmaItem& item, std::string_view text);

// Maps the partner's answer into `item`'s answer space through the item's
// probe alignment. Throws Error(MissingAlignment).
Answer align_partner_answer(const DilemmaItem& item, const DilemmaItem& partner,
                            const Answer& partner_answer);

nlohmann::json to_json(const DilemmaItem& item);
DilemmaItem item_from_json(const nlohmann::json& j);

struct Battery {
  std::vector<DilemmaItem> items;

  const DilemmaItem* find(std::string_view item_id) const;
  const DilemmaItem& at(std::string_view item_id) const;  // Throws UnknownItem
  std::vector<std::string> item_ids() const;
};

struct BatteryChecks {
  bool probe_pairs = true;       // exactly the five reference pairs
  bool reference_layout = true;  // fixed item categories and Q17 as the only Ranking item
};

// The five reference probe pairs, in order.
const std::vector<std::pair<std::string, std::string>>& reference_probe_pairs();
// Category fixed for each listed item (Q1, Q11, Q12 are free).
const std::map<std::string, Category>& reference_category_map();

// Throws Error(BatteryShapeError) naming the first violated rule in details
// {"rule", "item"}. Rules, in order: item_count, item_ids, item_shape,
// probe_symmetry, probe_pairs, probe_alignment, category_map, qtype_layout.
const Battery& validate_battery(const Battery& battery, const BatteryChecks& checks = {});

// Header "persona-lab/v1 battery", one item per line in canonical form.
Battery load_battery(const std::filesystem::path& path);
void save_battery(const std::filesystem::path& path, const Battery& battery);
std::string serialize_battery(const Battery& battery);
// SHA-256 of the canonical serialization (equals the hash of a saved file).
std::string battery_hash(const Battery& battery);

}  // namespace persona_lab::assessments
