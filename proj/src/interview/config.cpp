#include "persona_lab/interview/config.hpp"

#include "persona_lab/common/error.hpp"

namespace persona_lab::interview {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

const std::string& default_meta_prompt_template() {
  static const std::string kTemplate =
#include "meta_prompt_text.inc"
      ;
  return kTemplate;
}

void InterviewConfig::validate() const {
  if (followups.min < 1 || followups.max < followups.min) {
    throw Error(ErrorCode::InvalidConfig,
                "follow-up bounds must satisfy 1 <= min <= max",
                {{"min", followups.min}, {"max", followups.max}});
  }
  temperature.validate();
  if (!temperature.allows_interview(interview_temperature)) {
    throw Error(ErrorCode::InvalidConfig, "interview temperature outside the allowed range",
                {{"temperature", interview_temperature},
                 {"range", {temperature.interview_min, temperature.interview_max}}});
  }
  if (domains.size() != 10) throw Error(ErrorCode::InvalidConfig, "need exactly 10 domains");
  if (malformed_retries < 0) throw Error(ErrorCode::InvalidConfig, "malformed_retries < 0");
  const std::string rendered = render_meta_prompt();
  if (rendered.find("{{") != std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "meta-prompt template has unknown slots");
  }
  if (meta_prompt_template.find("{{followup_min}}") == std::string::npos ||
      meta_prompt_template.find("{{followup_max}}") == std::string::npos) {
    throw Error(ErrorCode::InvalidConfig, "meta-prompt template lacks follow-up bound slots");
  }
}

std::string InterviewConfig::render_meta_prompt() const {
  std::string s = meta_prompt_template;
  replace_all(s, "{{followup_min}}", std::to_string(followups.min));
  replace_all(s, "{{followup_max}}", std::to_string(followups.max));
  return s;
}

nlohmann::json InterviewConfig::snapshot() const {
  nlohmann::json domains_json = nlohmann::json::array();
  for (const auto& d : domains.domains()) {
    domains_json.push_back({{"domain_id", d.domain_id}, {"name", d.name}, {"basis_note", d.basis_note}});
  }
  return {
      {"followups", {{"min", followups.min}, {"max", followups.max}}},
      {"temperature",
       {{"interview_range", {temperature.interview_min, temperature.interview_max}},
        {"interview", interview_temperature},
        {"prediction", temperature.prediction_temperature}}},
      {"domains", std::move(domains_json)},
      {"meta_prompt", meta_prompt_template},
      {"malformed_retries", malformed_retries},
  };
}

InterviewConfig InterviewConfig::from_snapshot(const nlohmann::json& j) {
  InterviewConfig c;
  try {
    c.followups.min = j.at("followups").at("min").get<int>();
    c.followups.max = j.at("followups").at("max").get<int>();
    const auto& t = j.at("temperature");
    c.temperature.interview_min = t.at("interview_range").at(0).get<double>();
    c.temperature.interview_max = t.at("interview_range").at(1).get<double>();
    c.temperature.prediction_temperature = t.at("prediction").get<double>();
    c.interview_temperature = t.at("interview").get<double>();
    std::vector<PersonaDomain> ds;
    for (const auto& d : j.at("domains")) {
      ds.push_back({d.at("domain_id").get<int>(), d.at("name").get<std::string>(),
                    d.value("basis_note", "")});
    }
    c.domains = DomainRegistry::from(std::move(ds));
    c.meta_prompt_template = j.at("meta_prompt").get<std::string>();
    c.malformed_retries = j.value("malformed_retries", 1);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad interview config snapshot: ") + e.what());
  }
  return c;
}

}  // namespace persona_lab::interview
