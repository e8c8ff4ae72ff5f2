#pragma once

#include <string>
#include <string_view>

namespace persona_lab {

// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

// `n` random bytes from the OS CSPRNG, hex encoded.
std::string random_hex(std::size_t n);

}  // namespace persona_lab
