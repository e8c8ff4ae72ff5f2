#include "persona_lab/common/alias.hpp"

#include <cctype>
#include <string>

#include "persona_lab/common/error.hpp"

namespace persona_lab {

bool is_valid_alias(std::string_view alias) noexcept {
  return alias.size() == 3 && alias[0] == 'P' &&
         std::isdigit(static_cast<unsigned char>(alias[1])) &&
         std::isdigit(static_cast<unsigned char>(alias[2]));
}

void require_valid_alias(std::string_view alias) {
  if (!is_valid_alias(alias)) {
    throw Error(ErrorCode::InvalidAlias,
                "participant alias must match P\\d\\d, got '" + std::string(alias) + "'");
  }
}

}  // namespace persona_lab
