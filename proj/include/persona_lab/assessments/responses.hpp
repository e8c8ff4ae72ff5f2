#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/assessments/bfi.hpp"
#include "persona_lab/assessments/mbti.hpp"
#include "persona_lab/store/session_store.hpp"

namespace persona_lab::assessments {

using ItemAnswers = std::map<std::string, Answer>;

struct DilemmaResponseSet {
  std::string participant_alias;
  std::string battery_hash;
  ItemAnswers answers;
  bool complete = false;

  bool operator==(const DilemmaResponseSet&) const = default;
};

// Validates every answer against the battery (InvalidAnswer with details
// {"item", "reason"}), merges with answers already stored for the
// participant, and persists. With `finalize` the merged set must cover the
// battery (IncompleteSet with the missing ids); nothing is written on error.
DilemmaResponseSet record_responses(const store::SessionStore& store, const std::string& alias,
                                    const Battery& battery, const ItemAnswers& answers,
                                    bool finalize, const std::string& at);
std::optional<DilemmaResponseSet> load_responses(const store::SessionStore& store,
                                                 const std::string& alias);

struct BfiRecord {
  Bfi44Response response;
  BigFiveScores scores;
  BigFiveBits bits;
};

BfiRecord record_bfi44(const store::SessionStore& store, const std::string& alias,
                       const Bfi44Response& response, const Bfi44Key& key, const std::string& at);
std::optional<BfiRecord> load_bfi44(const store::SessionStore& store, const std::string& alias);

void record_mbti(const store::SessionStore& store, const std::string& alias,
                 const MbtiReport& report, const std::string& at);
std::optional<MbtiReport> load_mbti(const store::SessionStore& store, const std::string& alias);

// Responses file: header "persona-lab/v1 responses", then
// {"alias", "item_id", "answer"} per line where answer is either an answer
// record ({"choice": "B"}) or text read with parse_answer_text.
std::map<std::string, ItemAnswers> read_responses_file(const std::filesystem::path& path,
                                                       const Battery& battery);

}  // namespace persona_lab::assessments
