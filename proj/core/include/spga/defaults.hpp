#pragma once

#include <cstddef>

// Operating defaults shared by the library, the config parser and the CLI.
namespace spga::defaults {

inline constexpr double kAlpha = 0.05;           // two-sided CI level
inline constexpr std::size_t kPositives = 32;    // collected positives per batch
inline constexpr std::size_t kGenerated = 64;    // generated positives per batch
inline constexpr std::size_t kNegatives = 96;    // negatives per batch
inline constexpr double kEpsilon = 0.1;          // gradient density window
inline constexpr std::size_t kInitIterations = 30;
inline constexpr std::size_t kUpdateIterations = 10;
inline constexpr std::size_t kUpdatePeriod = 10;     // frames between updates
inline constexpr std::size_t kCandidates = 256;      // candidates per frame
inline constexpr std::size_t kUpdateDraws = 250;     // samples drawn per update
inline constexpr double kFailureThreshold = 0.5;
inline constexpr double kLearningRate = 1e-3;
inline constexpr double kMomentum = 0.9;
inline constexpr std::size_t kHiddenUnits = 32;

}  // namespace spga::defaults
