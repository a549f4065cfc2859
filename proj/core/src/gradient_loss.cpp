#include "spga/gradient_loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spga/errors.hpp"

namespace spga {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

double clamp_prob(double p) {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

void check_label(int y) {
  if (y != 0 && y != 1) {
    throw std::domain_error("label must be 0 or 1");
  }
}

}  // namespace

double ce_loss(double p, int y) {
  check_label(y);
  p = clamp_prob(p);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

double logit_gradient(double p, int y) {
  check_label(y);
  return p - y;
}

LabeledBatch::LabeledBatch(std::vector<double> logits, std::vector<int> labels)
    : logits_(std::move(logits)), labels_(std::move(labels)) {
  if (logits_.empty() || logits_.size() != labels_.size()) {
    throw std::invalid_argument(
        "LabeledBatch: logits and labels must have equal nonzero length");
  }
  probs_.resize(logits_.size());
  for (std::size_t i = 0; i < logits_.size(); ++i) {
    check_label(labels_[i]);
    probs_[i] = clamp_prob(sigmoid(logits_[i]));
    if (labels_[i] == 1) {
      ++n_pos_;
    } else {
      ++n_neg_;
    }
  }
}

std::vector<std::size_t> window_counts(std::span<const double> gradients,
                                       double epsilon) {
  if (gradients.empty()) {
    throw std::domain_error("window_counts: empty gradient list");
  }
  if (!(epsilon > 0.0)) {
    throw std::domain_error("window_counts: epsilon must be positive");
  }
  const std::size_t n = gradients.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gradients[a] < gradients[b];
  });

  // Half-open window [g - eps/2, g + eps/2); both endpoints use the same
  // expressions as the direct count so the two routes agree bit for bit.
  std::vector<std::size_t> counts(n);
  std::size_t left = 0;
  std::size_t right = 0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    const double center = gradients[order[rank]];
    const double lo = center - epsilon / 2.0;
    const double hi = center + epsilon / 2.0;
    while (left < n && gradients[order[left]] < lo) ++left;
    if (right < left) right = left;
    while (right < n && gradients[order[right]] < hi) ++right;
    counts[order[rank]] = right - left;
  }
  return counts;
}

std::vector<double> gradient_density(std::span<const double> gradients,
                                     double epsilon) {
  const auto counts = window_counts(gradients, epsilon);
  std::vector<double> densities(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    densities[i] = static_cast<double>(counts[i]) / epsilon;
  }
  return densities;
}

namespace {

std::vector<double> batch_gradients(const LabeledBatch& batch) {
  std::vector<double> grads(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) grads[i] = batch.gradient(i);
  return grads;
}

// Indices of samples with the given label.
std::vector<std::size_t> label_indices(const LabeledBatch& batch, int label) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.label(i) == label) idx.push_back(i);
  }
  return idx;
}

}  // namespace

DensityEstimate batch_density(const LabeledBatch& batch, double epsilon,
                              DensityScope scope) {
  const auto grads = batch_gradients(batch);
  DensityEstimate est;
  est.epsilon = epsilon;
  est.scope = scope;
  est.densities.resize(batch.size());
  if (scope == DensityScope::kPooled) {
    est.densities = gradient_density(grads, epsilon);
    return est;
  }
  for (int label : {0, 1}) {
    const auto idx = label_indices(batch, label);
    if (idx.empty()) continue;
    std::vector<double> class_grads(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      class_grads[k] = grads[idx[k]];
    }
    const auto dens = gradient_density(class_grads, epsilon);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      est.densities[idx[k]] = dens[k];
    }
  }
  return est;
}

ClassWeights class_weights(const LabeledBatch& batch, double epsilon,
                           DensityScope scope, WeightMode mode) {
  if (!(epsilon > 0.0)) {
    throw std::domain_error("class_weights: epsilon must be positive");
  }
  const auto grads = batch_gradients(batch);
  ClassWeights out;
  out.n_pos = batch.count_positive();
  out.n_neg = batch.count_negative();
  out.mode = mode;
  out.weights.resize(batch.size());

  // lambda = N / (count / eps) rearranged to eps * (N / count); with an
  // integer ratio of 1 or N this is exact.
  auto assign = [&](const std::vector<std::size_t>& idx,
                    const std::vector<std::size_t>& counts) {
    const double n_class = static_cast<double>(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.weights[idx[k]] =
          epsilon * (n_class / static_cast<double>(counts[k]));
    }
  };

  if (scope == DensityScope::kPooled) {
    const auto counts = window_counts(grads, epsilon);
    const double n = static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      out.weights[i] = epsilon * (n / static_cast<double>(counts[i]));
    }
  } else {
    for (int label : {0, 1}) {
      const auto idx = label_indices(batch, label);
      if (idx.empty()) {
        throw MissingClassError(
            "class_weights: per-class scope requires both classes");
      }
      std::vector<double> class_grads(idx.size());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        class_grads[k] = grads[idx[k]];
      }
      assign(idx, window_counts(class_grads, epsilon));
    }
  }

  if (mode == WeightMode::kMeanNormalized) {
    for (int label : {0, 1}) {
      const auto idx = label_indices(batch, label);
      if (idx.empty()) continue;
      double sum = 0.0;
      for (std::size_t i : idx) sum += out.weights[i];
      const double mean = sum / static_cast<double>(idx.size());
      for (std::size_t i : idx) out.weights[i] /= mean;
    }
  }
  return out;
}

ClassWeights weights_for_mode(const LabeledBatch& batch, LossMode mode,
                              double epsilon, WeightMode weight_mode) {
  if (mode == LossMode::kCrossEntropy) {
    ClassWeights w;
    w.weights.assign(batch.size(), 1.0);
    w.n_pos = batch.count_positive();
    w.n_neg = batch.count_negative();
    w.mode = weight_mode;
    return w;
  }
  const DensityScope scope = mode == LossMode::kGradientSensitive
                                 ? DensityScope::kPerClass
                                 : DensityScope::kPooled;
  return class_weights(batch, epsilon, scope, weight_mode);
}

LossResult gsl_loss(const LabeledBatch& batch, const ClassWeights& weights) {
  if (weights.weights.size() != batch.size()) {
    throw std::invalid_argument("gsl_loss: weights misaligned with batch");
  }
  LossResult res;
  res.per_sample.resize(batch.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    res.per_sample[i] =
        weights.weights[i] * ce_loss(batch.prob(i), batch.label(i));
    sum += res.per_sample[i];
  }
  res.total = sum / static_cast<double>(batch.size());
  return res;
}

std::vector<double> gsl_backward(const LabeledBatch& batch,
                                 const ClassWeights& weights) {
  if (weights.weights.size() != batch.size()) {
    throw std::invalid_argument("gsl_backward: weights misaligned with batch");
  }
  std::vector<double> grads(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    grads[i] = weights.weights[i] * batch.gradient(i);
  }
  return grads;
}

}  // namespace spga
