#include "persona_lab/assessments/bfi.hpp"

#include <algorithm>
#include <set>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/records.hpp"

namespace persona_lab::assessments {

char trait_letter(Trait t) noexcept { return "OCEAN"[static_cast<int>(t)]; }

std::optional<Trait> trait_from_letter(std::string_view s) noexcept {
  if (s.size() != 1) return std::nullopt;
  for (Trait t : kTraits) {
    if (trait_letter(t) == s[0] || trait_letter(t) == s[0] - 'a' + 'A') return t;
  }
  return std::nullopt;
}

Bfi44Key Bfi44Key::standard() {
  struct Row {
    Trait trait;
    std::vector<int> items;  // negative = reverse keyed
  };
  const std::vector<Row> rows = {
      {Trait::E, {1, -6, 11, 16, -21, 26, -31, 36}},
      {Trait::A, {-2, 7, -12, 17, 22, -27, 32, -37, 42}},
      {Trait::C, {3, -8, 13, -18, -23, 28, 33, 38, -43}},
      {Trait::N, {4, -9, 14, 19, -24, 29, -34, 39}},
      {Trait::O, {5, 10, 15, 20, 25, 30, -35, 40, -41, 44}},
  };
  std::vector<KeyEntry> entries;
  for (const auto& r : rows) {
    for (int i : r.items) entries.push_back({i < 0 ? -i : i, r.trait, i < 0});
  }
  return from(std::move(entries));
}

Bfi44Key Bfi44Key::from(std::vector<KeyEntry> entries) {
  std::set<int> seen;
  std::set<Trait> traits;
  for (const auto& e : entries) {
    if (e.item < 1 || e.item > kBfiItems) {
      throw Error(ErrorCode::InvalidKey, "key item " + std::to_string(e.item) + " out of range",
                  {{"item", e.item}});
    }
    if (!seen.insert(e.item).second) {
      throw Error(ErrorCode::InvalidKey, "item " + std::to_string(e.item) + " assigned twice",
                  {{"item", e.item}});
    }
    traits.insert(e.trait);
  }
  for (int i = 1; i <= kBfiItems; ++i) {
    if (!seen.count(i)) {
      throw Error(ErrorCode::InvalidKey, "item " + std::to_string(i) + " is unassigned",
                  {{"item", i}});
    }
  }
  if (traits.size() != kTraits.size()) {
    throw Error(ErrorCode::InvalidKey, "every trait needs at least one item");
  }
  std::sort(entries.begin(), entries.end(),
            [](const KeyEntry& a, const KeyEntry& b) { return a.item < b.item; });
  Bfi44Key key;
  key.entries_ = std::move(entries);
  return key;
}

Bfi44Key Bfi44Key::load(const std::filesystem::path& path) {
  auto file = read_record_file(path, "bfi44-key", ErrorCode::InvalidKey);
  std::vector<KeyEntry> entries;
  for (const auto& r : file.records) {
    try {
      auto trait = trait_from_letter(r.at("trait").get<std::string>());
      if (!trait) throw Error(ErrorCode::InvalidKey, "unknown trait in key");
      entries.push_back({r.at("item").get<int>(), *trait, r.value("reverse", false)});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidKey, std::string("bad key row: ") + e.what());
    }
  }
  return from(std::move(entries));
}

void Bfi44Key::save(const std::filesystem::path& path) const {
  std::vector<json> records;
  for (const auto& e : entries_) {
    records.push_back({{"item", e.item},
                       {"trait", std::string(1, trait_letter(e.trait))},
                       {"reverse", e.reverse}});
  }
  write_record_file(path, "bfi44-key", records);
}

std::vector<KeyEntry> Bfi44Key::items_for(Trait t) const {
  std::vector<KeyEntry> out;
  for (const auto& e : entries_) {
    if (e.trait == t) out.push_back(e);
  }
  return out;
}

void Bfi44Response::validate() const {
  if (items.size() != static_cast<std::size_t>(kBfiItems)) {
    throw Error(ErrorCode::OutOfRangeItem,
                "expected 44 responses, got " + std::to_string(items.size()),
                {{"count", items.size()}});
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] < 1 || items[i] > 5) {
      throw Error(ErrorCode::OutOfRangeItem,
                  "item " + std::to_string(i + 1) + " = " + std::to_string(items[i]) +
                      " is outside 1..5",
                  {{"item", i + 1}, {"value", items[i]}});
    }
  }
}

BigFiveScores score_bfi44(const Bfi44Response& response, const Bfi44Key& key) {
  response.validate();
  BigFiveScores out;
  for (Trait t : kTraits) {
    const auto keyed = key.items_for(t);
    int raw = 0;
    for (const auto& e : keyed) {
      const int v = response.items[e.item - 1];
      raw += e.reverse ? 6 - v : v;
    }
    const int lo = static_cast<int>(keyed.size());
    const int hi = 5 * lo;
    out[t] = kScaleMin + (kScaleMax - kScaleMin) * (raw - lo) / static_cast<double>(hi - lo);
  }
  return out;
}

bool binarize_score(double value) noexcept {
  if (value <= 20.0) return false;
  if (value >= 21.0) return true;
  return value > 20.5;
}

BigFiveBits binarize_bigfive(const BigFiveScores& scores) {
  BigFiveBits bits;
  for (Trait t : kTraits) bits.high[static_cast<int>(t)] = binarize_score(scores[t]);
  return bits;
}

json to_json(const BigFiveScores& s) {
  json j = json::object();
  for (Trait t : kTraits) j[std::string(1, trait_letter(t))] = s[t];
  return j;
}

BigFiveScores scores_from_json(const json& j) {
  BigFiveScores s;
  for (Trait t : kTraits) s[t] = j.at(std::string(1, trait_letter(t))).get<double>();
  return s;
}

json to_json(const BigFiveBits& b) {
  json j = json::object();
  for (Trait t : kTraits) j[std::string(1, trait_letter(t))] = b[t] ? "high" : "low";
  return j;
}

BigFiveBits bits_from_json(const json& j) {
  BigFiveBits b;
  for (Trait t : kTraits) {
    const auto& v = j.at(std::string(1, trait_letter(t)));
    b.high[static_cast<int>(t)] = v.is_boolean() ? v.get<bool>() : v.get<std::string>() == "high";
  }
  return b;
}

}  // namespace persona_lab::assessments
