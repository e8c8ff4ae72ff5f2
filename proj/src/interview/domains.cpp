#include "persona_lab/interview/domains.hpp"

#include <algorithm>
#include <set>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/records.hpp"

namespace persona_lab::interview {

DomainRegistry DomainRegistry::defaults() {
  return from({
      {1, "Behavioral priorities & trade-offs", "Value enactment theory"},
      {2, "Decision logic & value hierarchy", "Moral reasoning and cognitive-style literature"},
      {3, "Fears & deep motivation", "Reinforcement Sensitivity Theory"},
      {4, "Self-awareness & blind spots", "Self-other knowledge asymmetry"},
      {5, "Stress & coping mechanisms", "Trait-coping meta-analysis"},
      {6, "Relational logic & boundaries", "Attachment and interpersonal theory"},
      {7, "Value conflicts & compromise", "Integrative complexity and ethical decision-making"},
      {8, "Core identity & self-definition", "Narrative identity"},
      {9, "Emotional vulnerability & regulation", "Emotion regulation framework"},
      {10, "Life narrative & sense of meaning", "Meaning-making and generativity literature"},
  });
}

DomainRegistry DomainRegistry::from(std::vector<PersonaDomain> domains) {
  if (domains.size() != 10) {
    throw Error(ErrorCode::InvalidConfig,
                "domain registry needs exactly 10 domains, got " + std::to_string(domains.size()));
  }
  std::set<int> ids;
  for (const auto& d : domains) {
    if (d.domain_id < 1 || d.domain_id > 10 || !ids.insert(d.domain_id).second) {
      throw Error(ErrorCode::InvalidConfig,
                  "domain ids must be unique and within 1..10 (saw " + std::to_string(d.domain_id) + ")");
    }
    if (d.name.empty()) throw Error(ErrorCode::InvalidConfig, "domain name is empty");
  }
  std::sort(domains.begin(), domains.end(),
            [](const auto& a, const auto& b) { return a.domain_id < b.domain_id; });
  DomainRegistry r;
  r.domains_ = std::move(domains);
  return r;
}

DomainRegistry DomainRegistry::load(const std::filesystem::path& path) {
  auto file = read_record_file(path, "domains", ErrorCode::InvalidConfig);
  std::vector<PersonaDomain> domains;
  for (const auto& r : file.records) {
    try {
      domains.push_back({r.at("domain_id").get<int>(), r.at("name").get<std::string>(),
                         r.value("basis_note", "")});
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
  }
  return from(std::move(domains));
}

void DomainRegistry::save(const std::filesystem::path& path) const {
  std::vector<json> records;
  for (const auto& d : domains_) {
    records.push_back({{"domain_id", d.domain_id}, {"name", d.name}, {"basis_note", d.basis_note}});
  }
  write_record_file(path, "domains", records);
}

const PersonaDomain& DomainRegistry::at(int domain_id) const {
  for (const auto& d : domains_) {
    if (d.domain_id == domain_id) return d;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown domain " + std::to_string(domain_id));
}

}  // namespace persona_lab::interview
