#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "spga/classifier.hpp"
#include "spga/matrix.hpp"
#include "spga/rng.hpp"

namespace spga {

// Independent per-component normal source with an optional per-frame mean
// shift. Also serves as the known-truth source in coverage tests.
struct GaussianSource {
  std::vector<double> mean;
  std::vector<double> std;
  std::vector<double> drift;  // additive mean shift per frame

  std::vector<double> mean_at(std::size_t frame) const;
  std::vector<double> sample(Rng& rng, std::size_t frame = 0) const;
};

struct WorldConfig {
  std::size_t dim = 16;
  std::size_t candidates = defaults::kCandidates;  // per frame
  std::size_t frames = 50;
  std::size_t easy_clusters = 3;
  double target_std = 0.35;
  double background_std = 0.35;
  double hard_offset = 1.0;   // hard cluster distance from the target mean
  double easy_offset = 4.0;   // easy cluster distance from the origin
  double hard_fraction = 0.25;  // share of background candidates that are hard
  double drift = 0.0;         // per-frame target mean shift magnitude
  double jitter = 0.0;        // per-frame random mean perturbation

  friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

struct Frame {
  Matrix candidates;               // candidates x dim
  std::size_t truth = 0;           // index of the target candidate
  std::vector<double> target_mean; // drifted mean the target was drawn from
};

// A synthetic feature-vector stream: per frame, one candidate comes from the
// (drifted) target source, the rest from one hard cluster that shadows the
// target plus diffuse easy clusters.
class Sequence {
 public:
  Sequence(const WorldConfig& cfg, std::size_t length, std::uint64_t seed);

  const WorldConfig& config() const noexcept { return config_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t length() const noexcept { return frames_.size(); }
  const Frame& frame(std::size_t i) const { return frames_[i]; }

  const GaussianSource& target_source() const noexcept { return target_; }

  // Positive draws around an arbitrary center (the predicted location).
  Matrix sample_positives(std::span<const double> center, std::size_t count,
                          Rng& rng) const;
  // Background draws at a frame, hard/easy mix as in candidate synthesis.
  Matrix sample_negatives(std::size_t frame, std::size_t count,
                          Rng& rng) const;

 private:
  std::vector<double> hard_mean(std::size_t frame) const;

  WorldConfig config_;
  std::uint64_t seed_ = 0;
  GaussianSource target_;
  std::vector<double> hard_direction_;       // unit offset of the hard cluster
  std::vector<std::vector<double>> easy_means_;
  std::vector<Frame> frames_;
};

Sequence make_sequence(const WorldConfig& cfg, std::size_t length,
                       std::uint64_t seed);

struct TrackerConfig {
  Architecture architecture = Architecture::kLinear;
  std::size_t hidden = defaults::kHiddenUnits;
  double learning_rate = defaults::kLearningRate;
  double momentum = defaults::kMomentum;
  std::size_t init_iterations = defaults::kInitIterations;     // I1
  std::size_t update_iterations = defaults::kUpdateIterations; // I2
  LossMode loss_mode = LossMode::kCrossEntropy;
  double epsilon = defaults::kEpsilon;
  WeightMode weight_mode = WeightMode::kRaw;
  std::optional<AugmentSettings> augment;  // engaged => positives augmented
  std::size_t n_pos = defaults::kPositives;
  std::size_t n_neg = defaults::kNegatives;
  std::size_t update_period = defaults::kUpdatePeriod;
  std::size_t update_draws = defaults::kUpdateDraws;  // N2, also store cap
  double failure_threshold = defaults::kFailureThreshold;
  std::uint64_t seed = 0;

  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

// Classifier plus schedule state; sample stores are FIFO-capped at the
// update draw count, oldest first.
struct TrackerState {
  ModelParams model;
  std::size_t frames_since_update = 0;
  bool failure_flag = false;
  std::deque<std::vector<double>> pos_store;
  std::deque<std::vector<double>> neg_store;
  Rng rng{0};
};

struct Detection {
  std::size_t index = 0;
  double score = 0.0;
};

TrackerState initialize(const Sequence& seq, const TrackerConfig& cfg);

// Argmax of forward probability over a frame's candidates; ties break to
// the lowest index.
Detection detect(const TrackerState& state, const Frame& frame);

// Refreshes the sample stores around the last prediction and retrains for
// the update iteration budget; resets the schedule counters.
void update(TrackerState& state, const Sequence& seq, std::size_t frame_index,
            std::span<const double> predicted, const TrackerConfig& cfg);

struct FrameRecord {
  std::size_t frame = 0;
  std::size_t chosen = 0;
  std::size_t truth = 0;
  bool correct = false;
  double score = 0.0;
  bool updated = false;  // an update ran after this frame
};

struct TrackRecord {
  std::vector<FrameRecord> frames;
  double success_rate = 0.0;
};

TrackRecord run(const Sequence& seq, const TrackerConfig& cfg);

}  // namespace spga
