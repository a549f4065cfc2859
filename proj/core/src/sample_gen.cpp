#include "spga/sample_gen.hpp"

#include <cmath>
#include <stdexcept>

#include "spga/errors.hpp"
#include "spga/student_t.hpp"

namespace spga {

namespace {

void check_features(const Matrix& features) {
  if (features.rows() < 2) {
    throw InsufficientSamplesError(
        "need at least 2 feature vectors for a sample variance");
  }
  if (features.cols() < 1) {
    throw std::invalid_argument("feature vectors must have at least 1 component");
  }
  if (!features.all_finite()) {
    throw std::invalid_argument("feature matrix contains non-finite entries");
  }
}

}  // namespace

std::vector<ComponentStats> component_stats(const Matrix& features) {
  check_features(features);
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  std::vector<ComponentStats> stats(d);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += features(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = features(i, j) - mean;
      ss += dev * dev;
    }
    stats[j] = {mean, std::sqrt(ss / static_cast<double>(n - 1))};
  }
  return stats;
}

std::vector<ComponentInterval> confidence_intervals(const Matrix& features,
                                                    double alpha) {
  const auto stats = component_stats(features);
  const double critical =
      t_two_sided_critical({alpha, static_cast<int>(features.rows()) - 1});
  const double root_n = std::sqrt(static_cast<double>(features.rows()));
  std::vector<ComponentInterval> intervals(stats.size());
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const double half = critical * stats[j].std / root_n;
    intervals[j] = {stats[j].mean, stats[j].std, stats[j].mean - half,
                    stats[j].mean + half};
  }
  return intervals;
}

GeneratedFeatures generate(const std::vector<ComponentInterval>& intervals,
                           std::size_t m, std::uint64_t seed) {
  if (intervals.empty()) {
    throw std::invalid_argument("generate: interval list is empty");
  }
  const std::size_t d = intervals.size();
  Rng rng(seed);
  Matrix out(m, d);
  for (std::size_t v = 0; v < m; ++v) {
    for (std::size_t j = 0; j < d; ++j) {
      out(v, j) = rng.uniform(intervals[j].lower, intervals[j].upper);
    }
  }
  return {std::move(out), seed};
}

Matrix augment(const Matrix& features, double alpha, std::size_t m,
               std::uint64_t seed) {
  const auto intervals = confidence_intervals(features, alpha);
  Matrix combined = features;
  if (m > 0) {
    combined.append_rows(generate(intervals, m, seed).data);
  }
  return combined;
}

}  // namespace spga
