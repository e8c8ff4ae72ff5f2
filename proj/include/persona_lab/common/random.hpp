#pragma once

#include <cstdint>
#include <random>

namespace persona_lab {

// Deterministic across platforms: mt19937_64 is fully specified and the bounded
// draw below does not depend on the standard library's distributions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer, used to derive independent substreams from (seed, i).
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace persona_lab
