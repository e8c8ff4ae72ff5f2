#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace persona_lab::interview {

struct PersonaDomain {
  int domain_id = 0;
  std::string name;
  std::string basis_note;

  bool operator==(const PersonaDomain&) const = default;
};

// Exactly ten domains with ids 1..10.
class DomainRegistry {
 public:
  static DomainRegistry defaults();

  // Domain file: header "persona-lab/v1 domains", then one
  // {"domain_id", "name", "basis_note"} record per line.
  static DomainRegistry load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  static DomainRegistry from(std::vector<PersonaDomain> domains);

  const std::vector<PersonaDomain>& domains() const { return domains_; }
  const PersonaDomain& at(int domain_id) const;
  std::size_t size() const { return domains_.size(); }

  bool operator==(const DomainRegistry&) const = default;

 private:
  std::vector<PersonaDomain> domains_;
};

}  // namespace persona_lab::interview
