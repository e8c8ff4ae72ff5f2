#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "persona_lab/gateway/prompt.hpp"
#include "persona_lab/interview/domains.hpp"

namespace persona_lab::interview {

struct FollowUpBounds {
  int min = 3;
  int max = 6;

  bool contains(int n) const { return n >= min && n <= max; }
};

// The interview meta-prompt, with {{followup_min}} / {{followup_max}} slots.
const std::string& default_meta_prompt_template();

struct InterviewConfig {
  FollowUpBounds followups;
  gateway::TemperaturePolicy temperature;
  double interview_temperature = 0.9;
  DomainRegistry domains = DomainRegistry::defaults();
  std::string meta_prompt_template = default_meta_prompt_template();
  // Regeneration attempts after a malformed model reply.
  int malformed_retries = 1;

  // Throws Error(InvalidConfig).
  void validate() const;

  // Meta-prompt with the follow-up bounds substituted.
  std::string render_meta_prompt() const;

  // Recorded in the session's creation event.
  nlohmann::json snapshot() const;
  static InterviewConfig from_snapshot(const nlohmann::json& j);
};

}  // namespace persona_lab::interview
