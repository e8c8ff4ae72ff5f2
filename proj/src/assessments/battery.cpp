#include "persona_lab/assessments/battery.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/hash.hpp"
#include "persona_lab/common/records.hpp"
#include "persona_lab/common/text.hpp"

namespace persona_lab::assessments {

namespace {

constexpr Category kCategories[] = {
    Category::MoralReasoning, Category::SocialCooperationFairness, Category::EmotionRegulation,
    Category::DecisionMaking, Category::Value,                     Category::PersonalityTrait,
};

constexpr std::size_t kItemCount = 25;

[[noreturn]] void shape_error(const std::string& rule, const std::string& item,
                              const std::string& why) {
  throw Error(ErrorCode::BatteryShapeError, rule + (item.empty() ? "" : " (" + item + ")") +
                                                ": " + why,
              {{"rule", rule}, {"item", item}});
}

std::string alignment_kind_name(ProbeAlignment::Kind k) {
  switch (k) {
    case ProbeAlignment::Kind::Identity: return "identity";
    case ProbeAlignment::Kind::Reverse: return "reverse";
    case ProbeAlignment::Kind::Map: return "map";
  }
  return "identity";
}

// Every valid answer key of a Choice or Likert item.
std::vector<std::string> answer_space(const DilemmaItem& item) {
  std::vector<std::string> keys;
  if (item.qtype == QType::Choice) {
    for (const auto& o : item.options) keys.push_back(o.label);
  } else if (item.qtype == QType::Likert && item.scale) {
    for (int v = item.scale->min; v <= item.scale->max; ++v) keys.push_back(std::to_string(v));
  }
  return keys;
}

Answer answer_from_key(const DilemmaItem& item, const std::string& key) {
  if (item.qtype == QType::Likert) return LikertAnswer{std::stoi(key)};
  return ChoiceAnswer{key};
}

std::optional<std::string> item_shape_problem(const DilemmaItem& item) {
  if (text::trim(item.prompt).empty()) return "prompt is empty";
  const bool has_options = !item.options.empty();
  const bool has_scale = item.scale.has_value();
  const bool has_ranks = !item.rank_items.empty();
  if (int(has_options) + int(has_scale) + int(has_ranks) != 1) {
    return "exactly one of options, scale, rank_items must be set";
  }
  switch (item.qtype) {
    case QType::Choice: {
      if (!has_options) return "Choice item needs options";
      if (item.options.size() < 2) return "Choice item needs at least two options";
      std::set<std::string> labels;
      for (const auto& o : item.options) {
        if (o.label.empty() || !labels.insert(o.label).second) return "option labels must be unique";
      }
      break;
    }
    case QType::Likert:
      if (!has_scale) return "Likert item needs a scale";
      if (item.scale->min >= item.scale->max) return "Likert scale needs min < max";
      break;
    case QType::Ranking: {
      if (!has_ranks) return "Ranking item needs rank_items";
      if (item.rank_items.size() < 2) return "Ranking item needs at least two rank items";
      std::set<std::string> labels(item.rank_items.begin(), item.rank_items.end());
      if (labels.size() != item.rank_items.size()) return "rank items must be unique";
      break;
    }
  }
  if (item.probe_alignment && !item.probe_partner) return "alignment without a probe partner";
  return std::nullopt;
}

std::optional<std::string> alignment_problem(const DilemmaItem& item, const DilemmaItem& partner) {
  const auto& a = *item.probe_alignment;
  if (item.qtype == QType::Ranking || partner.qtype == QType::Ranking) {
    return "Ranking items cannot be probe-aligned";
  }
  switch (a.kind) {
    case ProbeAlignment::Kind::Identity:
      if (answer_space(item) != answer_space(partner)) return "identity needs equal answer spaces";
      break;
    case ProbeAlignment::Kind::Reverse:
      if (item.qtype != QType::Likert || partner.qtype != QType::Likert ||
          item.scale->min != partner.scale->min || item.scale->max != partner.scale->max) {
        return "reverse needs two Likert items on the same scale";
      }
      break;
    case ProbeAlignment::Kind::Map: {
      const auto from = answer_space(partner);
      const auto to = answer_space(item);
      for (const auto& k : from) {
        auto it = a.map.find(k);
        if (it == a.map.end()) return "map does not cover partner answer '" + k + "'";
        if (std::find(to.begin(), to.end(), it->second) == to.end()) {
          return "map target '" + it->second + "' is not an answer of " + item.item_id;
        }
      }
      if (a.map.size() != from.size()) return "map has keys that are not partner answers";
      break;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string_view category_name(Category c) noexcept {
  switch (c) {
    case Category::MoralReasoning: return "MoralReasoning";
    case Category::SocialCooperationFairness: return "SocialCooperationFairness";
    case Category::EmotionRegulation: return "EmotionRegulation";
    case Category::DecisionMaking: return "DecisionMaking";
    case Category::Value: return "Value";
    case Category::PersonalityTrait: return "PersonalityTrait";
  }
  return "";
}

std::optional<Category> category_from_name(std::string_view s) noexcept {
  for (auto c : kCategories) {
    if (category_name(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view qtype_name(QType q) noexcept {
  switch (q) {
    case QType::Choice: return "Choice";
    case QType::Likert: return "Likert";
    case QType::Ranking: return "Ranking";
  }
  return "";
}

std::optional<QType> qtype_from_name(std::string_view s) noexcept {
  for (auto q : {QType::Choice, QType::Likert, QType::Ranking}) {
    if (text::iequals(qtype_name(q), s)) return q;
  }
  return std::nullopt;
}

int DilemmaItem::number() const {
  if (item_id.size() < 2 || item_id[0] != 'Q') return 0;
  try {
    return std::stoi(item_id.substr(1));
  } catch (...) {
    return 0;
  }
}

QType answer_qtype(const Answer& a) noexcept {
  if (std::holds_alternative<ChoiceAnswer>(a)) return QType::Choice;
  if (std::holds_alternative<LikertAnswer>(a)) return QType::Likert;
  return QType::Ranking;
}

std::string answer_key(const Answer& a) {
  if (auto c = std::get_if<ChoiceAnswer>(&a)) return c->label;
  if (auto l = std::get_if<LikertAnswer>(&a)) return std::to_string(l->value);
  return text::join(std::get<RankingAnswer>(a).order, " > ");
}

json to_json(const Answer& a) {
  if (auto c = std::get_if<ChoiceAnswer>(&a)) return {{"choice", c->label}};
  if (auto l = std::get_if<LikertAnswer>(&a)) return {{"likert", l->value}};
  return {{"ranking", std::get<RankingAnswer>(a).order}};
}

Answer answer_from_json(const json& j) {
  if (j.contains("choice")) return ChoiceAnswer{j.at("choice").get<std::string>()};
  if (j.contains("likert")) return LikertAnswer{j.at("likert").get<int>()};
  if (j.contains("ranking")) return RankingAnswer{j.at("ranking").get<std::vector<std::string>>()};
  throw Error(ErrorCode::InvalidAnswer, "answer record has no choice/likert/ranking field",
              {{"answer", j}});
}

std::optional<std::string> answer_problem(const DilemmaItem& item, const Answer& a) {
  if (answer_qtype(a) != item.qtype) {
    return std::string(qtype_name(answer_qtype(a))) + " answer given for a " +
           std::string(qtype_name(item.qtype)) + " item";
  }
  if (auto c = std::get_if<ChoiceAnswer>(&a)) {
    for (const auto& o : item.options) {
      if (o.label == c->label) return std::nullopt;
    }
    return "'" + c->label + "' is not an option";
  }
  if (auto l = std::get_if<LikertAnswer>(&a)) {
    if (!item.scale || !item.scale->contains(l->value)) {
      return std::to_string(l->value) + " is outside the scale " +
             std::to_string(item.scale ? item.scale->min : 0) + "-" +
             std::to_string(item.scale ? item.scale->max : 0);
    }
    return std::nullopt;
  }
  const auto& order = std::get<RankingAnswer>(a).order;
  std::vector<std::string> sorted_order = order;
  std::vector<std::string> sorted_items = item.rank_items;
  std::sort(sorted_order.begin(), sorted_order.end());
  std::sort(sorted_items.begin(), sorted_items.end());
  if (std::adjacent_find(sorted_order.begin(), sorted_order.end()) != sorted_order.end()) {
    return "ranking repeats a label";
  }
  if (sorted_order != sorted_items) return "ranking is not a permutation of the rank items";
  return std::nullopt;
}

Answer parse_answer_text(const DilemmaItem& item, std::string_view raw) {
  std::string s = text::trim(raw);
  // Drop markdown emphasis.
  s.erase(std::remove(s.begin(), s.end(), '*'), s.end());
  s = text::trim(s);
  auto unreadable = [&]() -> Error {
    return Error(ErrorCode::InvalidAnswer,
                 "cannot read '" + s + "' as a " + std::string(qtype_name(item.qtype)) +
                     " answer for " + item.item_id,
                 {{"item", item.item_id}, {"text", s}});
  };
  if (s.empty()) throw unreadable();
  switch (item.qtype) {
    case QType::Choice: {
      static const std::regex lead(R"(^\(?\s*(?:option\s+)?([A-Za-z0-9]{1,3})\s*(?:[).:\]]|\s|$))",
                                   std::regex::icase);
      std::smatch m;
      if (std::regex_search(s, m, lead)) {
        for (const auto& o : item.options) {
          if (text::iequals(o.label, m[1].str())) return ChoiceAnswer{o.label};
        }
      }
      const std::string norm = text::normalize_label(s);
      for (const auto& o : item.options) {
        if (!o.text.empty() && text::normalize_label(o.text) == norm) return ChoiceAnswer{o.label};
      }
      if (m.size() > 1 && m[1].matched) return ChoiceAnswer{text::to_upper(m[1].str())};
      throw unreadable();
    }
    case QType::Likert: {
      static const std::regex num(R"(-?\d+)");
      std::smatch m;
      if (!std::regex_search(s, m, num)) throw unreadable();
      return LikertAnswer{std::stoi(m[0].str())};
    }
    case QType::Ranking: {
      char sep = '\n';
      if (s.find('>') != std::string::npos) sep = '>';
      else if (s.find(',') != std::string::npos) sep = ',';
      else if (s.find(';') != std::string::npos) sep = ';';
      static const std::regex numbering(R"(^\s*\d+\s*[.)]\s*)");
      RankingAnswer r;
      for (auto part : text::split(s, sep)) {
        part = text::trim(std::regex_replace(part, numbering, ""));
        if (part.empty()) continue;
        std::string label = part;
        for (const auto& ri : item.rank_items) {
          if (text::normalize_label(ri) == text::normalize_label(part)) label = ri;
        }
        r.order.push_back(label);
      }
      if (r.order.size() < 2) throw unreadable();
      return r;
    }
  }
  throw unreadable();
}

Answer align_partner_answer(const DilemmaItem& item, const DilemmaItem& partner,
                            const Answer& partner_answer) {
  if (!item.probe_alignment) {
    throw Error(ErrorCode::MissingAlignment, item.item_id + " has no probe alignment",
                {{"item", item.item_id}});
  }
  const auto& a = *item.probe_alignment;
  switch (a.kind) {
    case ProbeAlignment::Kind::Identity:
      return partner_answer;
    case ProbeAlignment::Kind::Reverse: {
      const auto* l = std::get_if<LikertAnswer>(&partner_answer);
      if (!l || !item.scale) {
        throw Error(ErrorCode::MissingAlignment, "reverse alignment needs Likert answers");
      }
      return LikertAnswer{item.scale->min + item.scale->max - l->value};
    }
    case ProbeAlignment::Kind::Map: {
      auto it = a.map.find(answer_key(partner_answer));
      if (it == a.map.end()) {
        throw Error(ErrorCode::MissingAlignment,
                    "no mapping for " + partner.item_id + " answer '" +
                        answer_key(partner_answer) + "'",
                    {{"item", item.item_id}});
      }
      return answer_from_key(item, it->second);
    }
  }
  throw Error(ErrorCode::MissingAlignment, "unknown alignment");
}

json to_json(const DilemmaItem& item) {
  json j = {{"item_id", item.item_id},
            {"category", category_name(item.category)},
            {"qtype", qtype_name(item.qtype)},
            {"prompt", item.prompt}};
  if (!item.options.empty()) {
    json opts = json::array();
    for (const auto& o : item.options) opts.push_back({{"label", o.label}, {"text", o.text}});
    j["options"] = std::move(opts);
  }
  if (item.scale) {
    j["scale"] = {{"min", item.scale->min},
                  {"max", item.scale->max},
                  {"low_anchor", item.scale->low_anchor},
                  {"high_anchor", item.scale->high_anchor}};
  }
  if (!item.rank_items.empty()) j["rank_items"] = item.rank_items;
  if (item.probe_partner) j["probe_partner"] = *item.probe_partner;
  if (item.probe_alignment) {
    json a = {{"kind", alignment_kind_name(item.probe_alignment->kind)}};
    if (item.probe_alignment->kind == ProbeAlignment::Kind::Map) a["map"] = item.probe_alignment->map;
    j["probe_alignment"] = std::move(a);
  }
  return j;
}

DilemmaItem item_from_json(const json& j) {
  try {
    DilemmaItem item;
    item.item_id = j.at("item_id").get<std::string>();
    auto cat = category_from_name(j.at("category").get<std::string>());
    if (!cat) shape_error("item_shape", item.item_id, "unknown category");
    item.category = *cat;
    auto qt = qtype_from_name(j.at("qtype").get<std::string>());
    if (!qt) shape_error("item_shape", item.item_id, "unknown qtype");
    item.qtype = *qt;
    item.prompt = j.at("prompt").get<std::string>();
    if (j.contains("options")) {
      for (const auto& o : j.at("options")) {
        item.options.push_back({o.at("label").get<std::string>(), o.value("text", "")});
      }
    }
    if (j.contains("scale")) {
      const auto& s = j.at("scale");
      item.scale = LikertScale{s.at("min").get<int>(), s.at("max").get<int>(),
                               s.value("low_anchor", ""), s.value("high_anchor", "")};
    }
    if (j.contains("rank_items")) {
      item.rank_items = j.at("rank_items").get<std::vector<std::string>>();
    }
    if (j.contains("probe_partner")) item.probe_partner = j.at("probe_partner").get<std::string>();
    if (j.contains("probe_alignment")) {
      const auto& a = j.at("probe_alignment");
      ProbeAlignment pa;
      const auto kind = a.at("kind").get<std::string>();
      if (kind == "identity") pa.kind = ProbeAlignment::Kind::Identity;
      else if (kind == "reverse") pa.kind = ProbeAlignment::Kind::Reverse;
      else if (kind == "map") pa.kind = ProbeAlignment::Kind::Map;
      else shape_error("item_shape", item.item_id, "unknown alignment kind '" + kind + "'");
      if (a.contains("map")) pa.map = a.at("map").get<std::map<std::string, std::string>>();
      item.probe_alignment = std::move(pa);
    }
    return item;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BatteryShapeError, std::string("malformed item: ") + e.what(),
                {{"rule", "item_shape"}, {"item", j.value("item_id", "")}});
  }
}

const DilemmaItem* Battery::find(std::string_view item_id) const {
  for (const auto& i : items) {
    if (i.item_id == item_id) return &i;
  }
  return nullptr;
}

const DilemmaItem& Battery::at(std::string_view item_id) const {
  if (const auto* i = find(item_id)) return *i;
  throw Error(ErrorCode::UnknownItem, "no item " + std::string(item_id),
              {{"item", std::string(item_id)}});
}

std::vector<std::string> Battery::item_ids() const {
  std::vector<std::string> ids;
  for (const auto& i : items) ids.push_back(i.item_id);
  return ids;
}

const std::vector<std::pair<std::string, std::string>>& reference_probe_pairs() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"Q8", "Q9"}, {"Q11", "Q12"}, {"Q14", "Q15"}, {"Q19", "Q20"}, {"Q21", "Q22"}};
  return pairs;
}

const std::map<std::string, Category>& reference_category_map() {
  static const std::map<std::string, Category> map = [] {
    std::map<std::string, Category> m;
    auto put = [&](Category c, std::initializer_list<int> ids) {
      for (int i : ids) m["Q" + std::to_string(i)] = c;
    };
    put(Category::MoralReasoning, {4, 10, 19, 21, 25});
    put(Category::SocialCooperationFairness, {8, 9, 13, 22});
    put(Category::EmotionRegulation, {2, 5, 16});
    put(Category::DecisionMaking, {3, 14, 15});
    put(Category::Value, {6, 7, 17, 18, 20});
    put(Category::PersonalityTrait, {23, 24});
    return m;
  }();
  return map;
}

const Battery& validate_battery(const Battery& b, const BatteryChecks& checks) {
  if (b.items.size() != kItemCount) {
    shape_error("item_count", "", "expected 25 items, found " + std::to_string(b.items.size()));
  }
  std::set<std::string> ids;
  for (const auto& i : b.items) ids.insert(i.item_id);
  for (std::size_t n = 1; n <= kItemCount; ++n) {
    const std::string id = "Q" + std::to_string(n);
    if (!ids.count(id)) shape_error("item_ids", id, "missing or duplicated item ids");
  }
  for (const auto& i : b.items) {
    if (auto why = item_shape_problem(i)) shape_error("item_shape", i.item_id, *why);
  }
  for (const auto& i : b.items) {
    if (!i.probe_partner) continue;
    const auto* p = b.find(*i.probe_partner);
    if (!p || p->item_id == i.item_id || p->probe_partner != i.item_id) {
      shape_error("probe_symmetry", i.item_id, "partner " + *i.probe_partner + " does not link back");
    }
  }
  if (checks.probe_pairs) {
    std::set<std::pair<std::string, std::string>> expected(reference_probe_pairs().begin(),
                                                           reference_probe_pairs().end());
    for (const auto& i : b.items) {
      if (!i.probe_partner) continue;
      const bool first = i.number() < b.at(*i.probe_partner).number();
      const auto pair = first ? std::make_pair(i.item_id, *i.probe_partner)
                              : std::make_pair(*i.probe_partner, i.item_id);
      if (!expected.count(pair)) {
        shape_error("probe_pairs", i.item_id,
                    "(" + pair.first + ", " + pair.second + ") is not a probe pair");
      }
    }
    for (const auto& [a, c] : reference_probe_pairs()) {
      if (b.at(a).probe_partner != c) {
        shape_error("probe_pairs", a, "expected probe partner " + c);
      }
    }
  }
  for (const auto& i : b.items) {
    if (!i.probe_partner) continue;
    const auto& p = b.at(*i.probe_partner);
    if (!i.probe_alignment && !p.probe_alignment) {
      shape_error("probe_alignment", i.item_id, "probe pair has no alignment");
    }
    if (i.probe_alignment) {
      if (auto why = alignment_problem(i, p)) shape_error("probe_alignment", i.item_id, *why);
    }
  }
  if (checks.reference_layout) {
    for (const auto& [id, cat] : reference_category_map()) {
      if (b.at(id).category != cat) {
        shape_error("category_map", id,
                    "category must be " + std::string(category_name(cat)));
      }
    }
    for (const auto& i : b.items) {
      const bool ranking = i.qtype == QType::Ranking;
      if (ranking != (i.item_id == "Q17")) {
        shape_error("qtype_layout", i.item_id, "Q17 must be the only Ranking item");
      }
    }
  }
  return b;
}

std::string serialize_battery(const Battery& battery) {
  std::vector<DilemmaItem> sorted = battery.items;
  std::string out = header_line("battery") + "\n";
  for (const auto& i : sorted) out += canonical(to_json(i)) + "\n";
  return out;
}

Battery load_battery(const std::filesystem::path& path) {
  auto file = read_record_file(path, "battery", ErrorCode::BatteryShapeError);
  Battery b;
  for (const auto& r : file.records) b.items.push_back(item_from_json(r));
  return b;
}

void save_battery(const std::filesystem::path& path, const Battery& battery) {
  write_text_file(path, serialize_battery(battery));
}

std::string battery_hash(const Battery& battery) { return sha256_hex(serialize_battery(battery)); }

}  // namespace persona_lab::assessments
