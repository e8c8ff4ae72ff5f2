#include "persona_lab/metrics/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/random.hpp"

namespace persona_lab::metrics {

void BootstrapOptions::validate() const {
  if (replicates == 0) throw Error(ErrorCode::InvalidRequest, "bootstrap needs B >= 1");
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidRequest, "bootstrap level must lie in (0, 1)");
  }
}

nlohmann::json to_json(const ConfidenceInterval& ci) {
  return {{"lo", ci.lo},
          {"hi", ci.hi},
          {"level", ci.level},
          {"B", ci.replicates},
          {"seed", ci.seed}};
}

double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "percentile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

ConfidenceInterval bootstrap(std::size_t n,
                             const std::function<double(const std::vector<std::size_t>&)>& statistic,
                             const BootstrapOptions& options) {
  options.validate();
  std::vector<double> stats(options.replicates);
  std::vector<std::size_t> idx(n);
  for (std::size_t b = 0; b < options.replicates; ++b) {
    SeededRng rng(options.seed, b);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
    stats[b] = statistic(idx);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - options.level) / 2.0;
  ConfidenceInterval ci;
  ci.lo = percentile(stats, tail);
  ci.hi = percentile(stats, 1.0 - tail);
  ci.level = options.level;
  ci.replicates = options.replicates;
  ci.seed = options.seed;
  return ci;
}

ConfidenceInterval bootstrap_ci(const ScoreMatrix& matrix, const BootstrapOptions& options,
                                MissingPolicy policy) {
  check_missing(matrix, policy);
  const std::size_t n = matrix.rows().size();
  if (n < 2) {
    throw Error(ErrorCode::TooFewParticipants,
                "bootstrap needs at least 2 participants, got " + std::to_string(n));
  }
  if (matrix.present_count() == 0) throw Error(ErrorCode::EmptyInput, "no scored cells");
  if (matrix.complete()) {
    // On a complete grid the mean of per-question means equals the mean of
    // row means, which is much cheaper per replicate.
    std::vector<double> row_means(n);
    const auto cols = static_cast<double>(matrix.cols().size());
    for (std::size_t r = 0; r < n; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < matrix.cols().size(); ++c) s += *matrix.at(r, c);
      row_means[r] = s / cols;
    }
    return bootstrap(
        n,
        [&](const std::vector<std::size_t>& idx) {
          double s = 0.0;
          for (auto i : idx) s += row_means[i];
          return s / static_cast<double>(idx.size());
        },
        options);
  }
  // Participants without any scored cell carry no information; leave them out.
  std::vector<std::size_t> live;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < matrix.cols().size(); ++c) {
      if (matrix.at(r, c)) {
        live.push_back(r);
        break;
      }
    }
  }
  if (live.size() < 2) {
    throw Error(ErrorCode::TooFewParticipants,
                "bootstrap needs at least 2 scored participants, got " +
                    std::to_string(live.size()));
  }
  std::vector<std::size_t> rows(live.size());
  return bootstrap(
      live.size(),
      [&](const std::vector<std::size_t>& idx) {
        for (std::size_t i = 0; i < idx.size(); ++i) rows[i] = live[idx[i]];
        return overall_accuracy_rows(matrix, rows);
      },
      options);
}

ConfidenceInterval bootstrap_instances(const std::vector<double>& values,
                                       const BootstrapOptions& options) {
  if (values.size() < 2) {
    throw Error(ErrorCode::TooFewParticipants,
                "instance bootstrap needs at least 2 instances, got " +
                    std::to_string(values.size()));
  }
  return bootstrap(
      values.size(),
      [&](const std::vector<std::size_t>& idx) {
        double s = 0.0;
        for (auto i : idx) s += values[i];
        return s / static_cast<double>(idx.size());
      },
      options);
}

}  // namespace persona_lab::metrics
