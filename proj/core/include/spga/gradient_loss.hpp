#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spga {

inline constexpr double kProbClamp = 1e-7;

double sigmoid(double x);

// Binary cross entropy at an already-clamped probability.
double ce_loss(double p, int y);

// d(ce_loss o sigmoid)/dx = p - y; magnitude in [0, 1].
double logit_gradient(double p, int y);

// (logit, label) pairs; probabilities are derived once, clamped away from
// 0 and 1 so losses stay finite for saturated logits.
class LabeledBatch {
 public:
  LabeledBatch(std::vector<double> logits, std::vector<int> labels);

  std::size_t size() const noexcept { return logits_.size(); }
  double logit(std::size_t i) const { return logits_[i]; }
  double prob(std::size_t i) const { return probs_[i]; }
  int label(std::size_t i) const { return labels_[i]; }
  double gradient(std::size_t i) const {
    return logit_gradient(probs_[i], labels_[i]);
  }

  std::size_t count_positive() const noexcept { return n_pos_; }
  std::size_t count_negative() const noexcept { return n_neg_; }

 private:
  std::vector<double> logits_;
  std::vector<int> labels_;
  std::vector<double> probs_;
  std::size_t n_pos_ = 0;
  std::size_t n_neg_ = 0;
};

enum class DensityScope { kPerClass, kPooled };
enum class WeightMode { kRaw, kMeanNormalized };
enum class LossMode { kCrossEntropy, kGradientSensitive, kPooledHarmonized };

struct DensityEstimate {
  std::vector<double> densities;  // one per sample, each >= 1/epsilon
  double epsilon = 0.0;
  DensityScope scope = DensityScope::kPerClass;
};

struct ClassWeights {
  std::vector<double> weights;  // lambda, one per sample
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  WeightMode mode = WeightMode::kRaw;
};

// Number of samples k with g_i - eps/2 <= g_k < g_i + eps/2 (self included),
// per sample. Sort-and-slide evaluation, O(N log N).
std::vector<std::size_t> window_counts(std::span<const double> gradients,
                                       double epsilon);

// Window counts scaled by 1/epsilon.
std::vector<double> gradient_density(std::span<const double> gradients,
                                     double epsilon);

// Densities of the batch's logit gradients under the given scope. Per-class
// scope computes each sample's density only over samples sharing its label.
DensityEstimate batch_density(const LabeledBatch& batch, double epsilon,
                              DensityScope scope);

// lambda_i = N_class(i) / D_i (raw), evaluated as epsilon * N / count so the
// identical-gradient and lone-outlier identities hold exactly. Per-class
// scope requires both classes present. Mean-normalized mode additionally
// rescales each class so its mean weight is 1.
ClassWeights class_weights(const LabeledBatch& batch, double epsilon,
                           DensityScope scope, WeightMode mode);

// Weights for a loss mode: plain CE uses unit weights, the per-class and
// pooled modes re-weight by gradient density.
ClassWeights weights_for_mode(const LabeledBatch& batch, LossMode mode,
                              double epsilon, WeightMode weight_mode);

struct LossResult {
  double total = 0.0;  // mean over the batch
  std::vector<double> per_sample;
};

// Per-sample weighted cross entropy; total is the batch mean.
LossResult gsl_loss(const LabeledBatch& batch, const ClassWeights& weights);

// d(loss_i)/dx_i = lambda_i * (p_i - y_i); weights are held constant.
std::vector<double> gsl_backward(const LabeledBatch& batch,
                                 const ClassWeights& weights);

}  // namespace spga
