#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spga/defaults.hpp"
#include "spga/gradient_loss.hpp"
#include "spga/matrix.hpp"
#include "spga/rng.hpp"

namespace spga {

enum class Architecture { kLinear, kOneHidden };

// Flat parameter vector for a binary scoring head.
//   linear:     [w(d), b]
//   one-hidden: [W1(h x d, row-major), b1(h), w2(h), b2], ReLU hidden layer.
struct ModelParams {
  Architecture architecture = Architecture::kLinear;
  std::size_t input_dim = 0;
  std::size_t hidden = 0;  // used by kOneHidden
  std::vector<double> values;

  std::size_t expected_size() const;

  // Weights uniform in [-0.01, 0.01] from the seed stream, biases zero.
  static ModelParams init(Architecture arch, std::size_t input_dim,
                          std::size_t hidden, Rng& rng);
};

struct Prediction {
  double logit = 0.0;
  double probability = 0.5;
};

Prediction forward(const ModelParams& params, std::span<const double> features);

// Gradient of the mean loss w.r.t. every parameter, given per-sample
// dL/dlogit values. Row i of `features` pairs with logit_grads[i].
std::vector<double> backward(const ModelParams& params, const Matrix& features,
                             std::span<const double> logit_grads);

// Feature-space augmentation applied to the positives inside the train loop.
struct AugmentSettings {
  double alpha = defaults::kAlpha;
  std::size_t m = defaults::kGenerated;
  bool per_iteration = true;  // regenerate each iteration vs once per call

  friend bool operator==(const AugmentSettings&,
                         const AugmentSettings&) = default;
};

struct TrainConfig {
  double learning_rate = defaults::kLearningRate;
  double momentum = defaults::kMomentum;
  std::size_t iterations = defaults::kInitIterations;
  LossMode loss_mode = LossMode::kCrossEntropy;
  double epsilon = defaults::kEpsilon;
  WeightMode weight_mode = WeightMode::kRaw;
  std::uint64_t seed = 0;
};

struct IterationMetrics {
  std::size_t iteration = 0;
  double loss = 0.0;
  double pos_weight_mean = 0.0;
  double neg_weight_mean = 0.0;
  std::size_t batch_positives = 0;
  std::size_t batch_negatives = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<IterationMetrics> metrics;
};

// Full-batch SGD with momentum. Each iteration optionally augments the
// positives, assembles positives-then-negatives, weights the loss per the
// configured mode and takes one step. Deterministic given cfg.seed.
TrainResult train(ModelParams params, const Matrix& positives,
                  const Matrix& negatives, const TrainConfig& cfg,
                  const std::optional<AugmentSettings>& augment = {});

// JSON checkpoint round-trip: {architecture, dims, parameter array}.
std::string model_to_json(const ModelParams& params);
ModelParams model_from_json(const std::string& text);

}  // namespace spga
