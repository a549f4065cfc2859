#include "spga/classifier.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spga/errors.hpp"
#include "spga/sample_gen.hpp"

namespace spga {

std::size_t ModelParams::expected_size() const {
  if (architecture == Architecture::kLinear) {
    return input_dim + 1;
  }
  return hidden * input_dim + hidden + hidden + 1;
}

ModelParams ModelParams::init(Architecture arch, std::size_t input_dim,
                              std::size_t hidden, Rng& rng) {
  ModelParams params;
  params.architecture = arch;
  params.input_dim = input_dim;
  params.hidden = arch == Architecture::kOneHidden ? hidden : 0;
  params.values.assign(params.expected_size(), 0.0);
  const std::size_t n_weights =
      arch == Architecture::kLinear ? input_dim : hidden * input_dim + hidden;
  // Weight block first, biases stay zero. For the hidden net the weight
  // blocks are W1 then (after b1) w2; initialize both weight blocks.
  if (arch == Architecture::kLinear) {
    for (std::size_t i = 0; i < n_weights; ++i) {
      params.values[i] = rng.uniform(-0.01, 0.01);
    }
  } else {
    for (std::size_t i = 0; i < hidden * input_dim; ++i) {
      params.values[i] = rng.uniform(-0.01, 0.01);
    }
    const std::size_t w2_off = hidden * input_dim + hidden;
    for (std::size_t i = 0; i < hidden; ++i) {
      params.values[w2_off + i] = rng.uniform(-0.01, 0.01);
    }
  }
  return params;
}

namespace {

void check_model(const ModelParams& params) {
  if (params.values.size() != params.expected_size()) {
    throw std::invalid_argument("ModelParams: parameter count mismatch");
  }
  if (params.architecture == Architecture::kOneHidden && params.hidden == 0) {
    throw std::invalid_argument("ModelParams: hidden width must be nonzero");
  }
}

}  // namespace

Prediction forward(const ModelParams& params, std::span<const double> x) {
  check_model(params);
  if (x.size() != params.input_dim) {
    throw std::invalid_argument("forward: feature dimension mismatch");
  }
  const auto& v = params.values;
  double logit = 0.0;
  if (params.architecture == Architecture::kLinear) {
    for (std::size_t j = 0; j < x.size(); ++j) logit += v[j] * x[j];
    logit += v[x.size()];
  } else {
    const std::size_t h = params.hidden;
    const std::size_t d = params.input_dim;
    const std::size_t b1_off = h * d;
    const std::size_t w2_off = b1_off + h;
    const std::size_t b2_off = w2_off + h;
    for (std::size_t u = 0; u < h; ++u) {
      double z = v[b1_off + u];
      for (std::size_t j = 0; j < d; ++j) z += v[u * d + j] * x[j];
      if (z > 0.0) logit += v[w2_off + u] * z;  // ReLU
    }
    logit += v[b2_off];
  }
  return {logit, sigmoid(logit)};
}

std::vector<double> backward(const ModelParams& params, const Matrix& features,
                             std::span<const double> logit_grads) {
  check_model(params);
  if (features.rows() != logit_grads.size()) {
    throw std::invalid_argument("backward: rows and gradients misaligned");
  }
  if (features.rows() == 0) {
    throw std::invalid_argument("backward: empty batch");
  }
  if (features.cols() != params.input_dim) {
    throw std::invalid_argument("backward: feature dimension mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(features.rows());
  const auto& v = params.values;
  std::vector<double> grad(v.size(), 0.0);

  if (params.architecture == Architecture::kLinear) {
    const std::size_t d = params.input_dim;
    for (std::size_t i = 0; i < features.rows(); ++i) {
      const double g = logit_grads[i] * inv_n;
      const auto x = features.row(i);
      for (std::size_t j = 0; j < d; ++j) grad[j] += g * x[j];
      grad[d] += g;
    }
    return grad;
  }

  const std::size_t h = params.hidden;
  const std::size_t d = params.input_dim;
  const std::size_t b1_off = h * d;
  const std::size_t w2_off = b1_off + h;
  const std::size_t b2_off = w2_off + h;
  std::vector<double> z(h);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double g = logit_grads[i] * inv_n;
    const auto x = features.row(i);
    for (std::size_t u = 0; u < h; ++u) {
      double zu = v[b1_off + u];
      for (std::size_t j = 0; j < d; ++j) zu += v[u * d + j] * x[j];
      z[u] = zu;
    }
    for (std::size_t u = 0; u < h; ++u) {
      const double a = z[u] > 0.0 ? z[u] : 0.0;
      grad[w2_off + u] += g * a;
      if (z[u] > 0.0) {
        const double gz = g * v[w2_off + u];
        for (std::size_t j = 0; j < d; ++j) grad[u * d + j] += gz * x[j];
        grad[b1_off + u] += gz;
      }
    }
    grad[b2_off] += g;
  }
  return grad;
}

TrainResult train(ModelParams params, const Matrix& positives,
                  const Matrix& negatives, const TrainConfig& cfg,
                  const std::optional<AugmentSettings>& augment) {
  check_model(params);
  if (positives.rows() == 0 || negatives.rows() == 0) {
    throw MissingClassError("train: both classes must be non-empty");
  }
  if (positives.cols() != params.input_dim ||
      negatives.cols() != params.input_dim) {
    throw std::invalid_argument("train: feature dimension mismatch");
  }
  if (cfg.iterations < 1) {
    throw std::invalid_argument("train: iterations must be >= 1");
  }
  if (!(cfg.learning_rate > 0.0)) {
    throw std::invalid_argument("train: learning rate must be positive");
  }
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw std::invalid_argument("train: momentum must lie in [0, 1)");
  }

  Rng master(cfg.seed);
  Rng aug_rng = master.split();

  Matrix pos_fixed;
  if (augment && !augment->per_iteration) {
    pos_fixed =
        spga::augment(positives, augment->alpha, augment->m, aug_rng.next_u64());
  }

  TrainResult result;
  result.metrics.reserve(cfg.iterations);
  std::vector<double> velocity(params.values.size(), 0.0);

  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    Matrix batch_pos;
    const Matrix* pos = &positives;
    if (augment) {
      if (augment->per_iteration) {
        batch_pos = spga::augment(positives, augment->alpha, augment->m,
                                  aug_rng.next_u64());
        pos = &batch_pos;
      } else {
        pos = &pos_fixed;
      }
    }

    Matrix batch = *pos;
    batch.append_rows(negatives);
    std::vector<double> logits(batch.rows());
    std::vector<int> labels(batch.rows());
    for (std::size_t i = 0; i < batch.rows(); ++i) {
      logits[i] = forward(params, batch.row(i)).logit;
      labels[i] = i < pos->rows() ? 1 : 0;
    }
    LabeledBatch labeled(std::move(logits), std::move(labels));
    const ClassWeights weights =
        weights_for_mode(labeled, cfg.loss_mode, cfg.epsilon, cfg.weight_mode);
    const LossResult loss = gsl_loss(labeled, weights);
    const std::vector<double> upstream = gsl_backward(labeled, weights);
    const std::vector<double> grad = backward(params, batch, upstream);

    for (std::size_t k = 0; k < params.values.size(); ++k) {
      velocity[k] = cfg.momentum * velocity[k] + grad[k];
      params.values[k] -= cfg.learning_rate * velocity[k];
    }

    double pos_w = 0.0;
    double neg_w = 0.0;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      (labeled.label(i) == 1 ? pos_w : neg_w) += weights.weights[i];
    }
    result.metrics.push_back(
        {iter, loss.total,
         pos_w / static_cast<double>(labeled.count_positive()),
         neg_w / static_cast<double>(labeled.count_negative()),
         labeled.count_positive(), labeled.count_negative()});
  }
  result.params = std::move(params);
  return result;
}

std::string model_to_json(const ModelParams& params) {
  nlohmann::json j;
  j["architecture"] =
      params.architecture == Architecture::kLinear ? "linear" : "one_hidden";
  j["input_dim"] = params.input_dim;
  j["hidden"] = params.hidden;
  j["values"] = params.values;
  return j.dump();
}

ModelParams model_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ModelParams params;
  const std::string arch = j.at("architecture").get<std::string>();
  if (arch == "linear") {
    params.architecture = Architecture::kLinear;
  } else if (arch == "one_hidden") {
    params.architecture = Architecture::kOneHidden;
  } else {
    throw std::invalid_argument("model_from_json: unknown architecture " +
                                arch);
  }
  params.input_dim = j.at("input_dim").get<std::size_t>();
  params.hidden = j.at("hidden").get<std::size_t>();
  params.values = j.at("values").get<std::vector<double>>();
  if (params.values.size() != params.expected_size()) {
    throw std::invalid_argument("model_from_json: parameter count mismatch");
  }
  return params;
}

}  // namespace spga
