#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "spga/defaults.hpp"
#include "spga/matrix.hpp"
#include "spga/rng.hpp"

namespace spga {

struct ComponentStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, n-1 denominator
};

// Confidence interval of the component mean: [mean - h, mean + h] with
// h = t* . std / sqrt(n). A zero-variance component collapses to a point.
struct ComponentInterval {
  double mean = 0.0;
  double std = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

// Feature vectors drawn uniformly inside per-component intervals, plus the
// seed and generator identifier that reproduce them.
struct GeneratedFeatures {
  Matrix data;  // m x d
  std::uint64_t seed = 0;
  std::string_view generator = Rng::kAlgorithm;
};

// Per-component mean and sample standard deviation over the rows of
// `features`. Requires at least two rows and finite entries.
std::vector<ComponentStats> component_stats(const Matrix& features);

// Per-component confidence intervals of the mean at two-sided level alpha.
// One critical value is shared across components (df depends only on n).
std::vector<ComponentInterval> confidence_intervals(const Matrix& features,
                                                    double alpha);

// m vectors with entry (v, j) i.i.d. uniform on interval j. Deterministic
// for a fixed seed; m == 0 yields an empty matrix.
GeneratedFeatures generate(const std::vector<ComponentInterval>& intervals,
                           std::size_t m, std::uint64_t seed);

// Originals first, then m generated rows.
Matrix augment(const Matrix& features, double alpha, std::size_t m,
               std::uint64_t seed);

}  // namespace spga
