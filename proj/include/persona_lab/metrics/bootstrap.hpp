#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "persona_lab/metrics/score_matrix.hpp"

namespace persona_lab::metrics {

inline constexpr std::size_t kDefaultReplicates = 10000;
inline constexpr std::uint64_t kDefaultSeed = 12345;

struct BootstrapOptions {
  std::size_t replicates = kDefaultReplicates;
  double level = 0.95;
  std::uint64_t seed = kDefaultSeed;

  void validate() const;  // InvalidRequest
};

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;

  bool operator==(const ConfidenceInterval&) const = default;
};

nlohmann::json to_json(const ConfidenceInterval& ci);

// Linear interpolation between order statistics of sorted values; q in [0, 1].
double percentile(const std::vector<double>& sorted, double q);

// Percentile bootstrap over `n` units. Replicate i draws n indices with
// replacement from the substream (seed, i) and evaluates `statistic` on them.
ConfidenceInterval bootstrap(std::size_t n,
                             const std::function<double(const std::vector<std::size_t>&)>& statistic,
                             const BootstrapOptions& options);

// Resamples participant rows (sorted by alias) and recomputes the overall
// accuracy with per-question averaging. Throws TooFewParticipants below 2 rows.
ConfidenceInterval bootstrap_ci(const ScoreMatrix& matrix, const BootstrapOptions& options,
                                MissingPolicy policy = MissingPolicy::Exclude);

// Resamples individual instances and recomputes their mean. Throws
// TooFewParticipants below 2 instances.
ConfidenceInterval bootstrap_instances(const std::vector<double>& values,
                                       const BootstrapOptions& options);

}  // namespace persona_lab::metrics
