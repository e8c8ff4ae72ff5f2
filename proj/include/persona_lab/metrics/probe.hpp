#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/assessments/responses.hpp"

namespace persona_lab::metrics {

struct ProbeResult {
  std::string first;   // lower-numbered item of the pair
  std::string second;
  std::size_t n = 0;   // participants answering both items
  std::size_t consistent = 0;
  std::optional<double> rate;  // absent when n = 0
};

// True when the two answers agree once mapped through the pair's alignment
// (held by either item). Throws MissingAlignment.
bool probe_consistent(const assessments::DilemmaItem& a, const assessments::Answer& answer_a,
                      const assessments::DilemmaItem& b, const assessments::Answer& answer_b);

// One result per probe pair of the battery, in item order.
std::vector<ProbeResult> probe_consistency(
    const std::map<std::string, assessments::ItemAnswers>& answers,
    const assessments::Battery& battery);

nlohmann::json to_json(const ProbeResult& r);

}  // namespace persona_lab::metrics
