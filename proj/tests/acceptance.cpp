// Acceptance suite: one criterion per check, one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spga/classifier.hpp"
#include "spga/experiment.hpp"
#include "spga/gradient_loss.hpp"
#include "spga/sample_gen.hpp"
#include "spga/simworld.hpp"
#include "spga/student_t.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> check;
};

bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// ---- 1: t-quantile agreement with the integration oracle ----------------

bool check_quantiles(std::string& detail) {
  const auto start = Clock::now();
  double worst = 0.0;
  for (double alpha : {0.01, 0.05, 0.1}) {
    for (int df : {1, 2, 5, 10, 31, 100, 200}) {
      const double got = spga::t_two_sided_critical({alpha, df});
      const double want = oracles::t_two_sided_critical(alpha, df);
      worst = std::max(worst, std::fabs(got - want));
      if (std::fabs(got - want) >= 1e-6) {
        detail = "alpha=" + std::to_string(alpha) +
                 " df=" + std::to_string(df) + " off by " +
                 std::to_string(got - want);
        return false;
      }
    }
  }
  const double cauchy = spga::t_two_sided_critical({0.05, 1});
  if (std::fabs(cauchy - std::tan(0.475 * std::numbers::pi)) >= 1e-6) {
    detail = "df=1 closed form violated";
    return false;
  }
  const double elapsed = seconds_since(start);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |err| %.2e, %.2fs", worst, elapsed);
  detail = buf;
  return elapsed < 5.0;
}

// ---- 2: interval coverage ------------------------------------------------

bool check_coverage(std::string& detail) {
  const auto start = Clock::now();
  const spga::GaussianSource source{{1.25}, {0.8}, {}};
  spga::Rng rng(2025);
  const int trials = 10000;
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    spga::Matrix m(32, 1);
    for (std::size_t i = 0; i < 32; ++i) {
      m(i, 0) = source.sample(rng)[0];
    }
    const auto ci = spga::confidence_intervals(m, 0.05);
    if (ci[0].lower <= source.mean[0] && source.mean[0] <= ci[0].upper) {
      ++hits;
    }
  }
  const double coverage = static_cast<double>(hits) / trials;
  const double elapsed = seconds_since(start);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "coverage %.4f, %.2fs", coverage, elapsed);
  detail = buf;
  return coverage >= 0.94 && coverage <= 0.96 && elapsed < 10.0;
}

// ---- 3: interval membership and degenerate collapse ----------------------

bool check_membership(std::string& detail) {
  spga::Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng.below(31);
    const std::size_t d = 1 + rng.below(12);
    spga::Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        m(i, j) = 5.0 * rng.normal() + static_cast<double>(j);
      }
    }
    // One exactly constant component per matrix.
    const std::size_t flat = rng.below(d);
    for (std::size_t i = 0; i < n; ++i) m(i, flat) = -3.25;

    const auto intervals = spga::confidence_intervals(m, 0.05);
    const auto out = spga::augment(m, 0.05, 64, rng.next_u64());
    if (out.rows() != n + 64) {
      detail = "row count mismatch";
      return false;
    }
    for (std::size_t v = n; v < out.rows(); ++v) {
      for (std::size_t j = 0; j < d; ++j) {
        if (!(out(v, j) >= intervals[j].lower &&
              out(v, j) <= intervals[j].upper)) {
          detail = "generated value escaped its interval";
          return false;
        }
      }
      if (out(v, flat) != -3.25) {
        detail = "zero-variance component not constant";
        return false;
      }
    }
  }
  detail = "100 augmentations, all rows inside";
  return true;
}

// ---- 4: gradient correctness against finite differences ------------------

double frozen_mean_loss(const spga::ModelParams& params,
                        const spga::Matrix& features,
                        const std::vector<int>& labels,
                        const std::vector<double>& weights) {
  double sum = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const auto pred = spga::forward(params, features.row(i));
    sum += weights[i] * spga::ce_loss(pred.probability, labels[i]);
  }
  return sum / static_cast<double>(features.rows());
}

bool check_gradients(std::string& detail) {
  spga::Rng rng(11);
  double worst = 0.0;
  for (int config = 0; config < 50; ++config) {
    const auto arch = config % 2 == 0 ? spga::Architecture::kLinear
                                      : spga::Architecture::kOneHidden;
    const auto mode = (config / 2) % 2 == 0
                          ? spga::LossMode::kCrossEntropy
                          : spga::LossMode::kGradientSensitive;
    const std::size_t dim = 3 + rng.below(5);
    const std::size_t n = 6 + rng.below(10);
    spga::ModelParams params =
        spga::ModelParams::init(arch, dim, 4, rng);
    for (auto& v : params.values) v = rng.uniform(-0.9, 0.9);
    spga::Matrix features(n, dim);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < dim; ++j) features(i, j) = rng.normal();
      labels[i] = static_cast<int>(rng.below(2));
    }
    labels[0] = 1;
    labels[1] = 0;

    std::vector<double> logits(n);
    for (std::size_t i = 0; i < n; ++i) {
      logits[i] = spga::forward(params, features.row(i)).logit;
    }
    const spga::LabeledBatch batch(logits, labels);
    const auto weights =
        spga::weights_for_mode(batch, mode, 0.1, spga::WeightMode::kRaw);

    // Per-sample logit gradient vs finite differences of the weighted CE.
    for (std::size_t i = 0; i < n; ++i) {
      const double analytic = weights.weights[i] * batch.gradient(i);
      const double lambda = weights.weights[i];
      const int y = labels[i];
      const double fd = oracles::central_diff(
          [&](double x) { return lambda * spga::ce_loss(spga::sigmoid(x), y); },
          logits[i]);
      worst = std::max(worst, std::fabs(analytic - fd));
      if (!close_rel(analytic, fd, 1e-5)) {
        detail = "logit gradient mismatch at config " + std::to_string(config);
        return false;
      }
    }

    // Full backward pass vs finite differences of the frozen mean loss.
    const auto upstream = spga::gsl_backward(batch, weights);
    const auto grad = spga::backward(params, features, upstream);
    for (std::size_t k = 0; k < params.values.size(); ++k) {
      spga::ModelParams probe = params;
      const double h = 1e-6;
      probe.values[k] = params.values[k] + h;
      const double up = frozen_mean_loss(probe, features, labels,
                                         weights.weights);
      probe.values[k] = params.values[k] - h;
      const double dn = frozen_mean_loss(probe, features, labels,
                                         weights.weights);
      const double fd = (up - dn) / (2.0 * h);
      if (!close_rel(grad[k], fd, 1e-5)) {
        detail = "backward mismatch at config " + std::to_string(config) +
                 " param " + std::to_string(k);
        return false;
      }
    }
  }
  detail = "50 configurations, both architectures and loss modes";
  return true;
}

// ---- 5: density oracle equivalence ---------------------------------------

bool check_density(std::string& detail) {
  spga::Rng rng(13);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rng.below(1000);
    std::vector<double> grads(n);
    for (auto& g : grads) g = rng.uniform(-1.0, 1.0);
    // Inject ties so the half-open boundary is exercised.
    for (std::size_t i = 0; i + 1 < n; i += 7) grads[i + 1] = grads[i];
    for (double eps : {0.05, 0.1, 0.2}) {
      if (spga::window_counts(grads, eps) !=
          oracles::direct_window_counts(grads, eps)) {
        detail = "count mismatch at batch " + std::to_string(rep);
        return false;
      }
    }
  }
  detail = "200 batches x 3 window widths, exact integer agreement";
  return true;
}

// ---- 6: weight identities -------------------------------------------------

bool check_weight_identities(std::string& detail) {
  // Identical gradients: every weight equals epsilon exactly.
  for (double eps : {0.05, 0.1, 0.2}) {
    std::vector<double> logits(96, 1.3);
    std::vector<int> labels(96, 1);
    logits.push_back(-0.4);
    labels.push_back(0);
    const spga::LabeledBatch batch(logits, labels);
    const auto w = spga::class_weights(batch, eps, spga::DensityScope::kPerClass,
                                       spga::WeightMode::kRaw);
    for (std::size_t i = 0; i < 96; ++i) {
      if (w.weights[i] != eps) {
        detail = "identical-gradient weight differs from epsilon";
        return false;
      }
    }
  }

  // Strictly larger window count means strictly smaller weight.
  spga::Rng rng(17);
  std::vector<double> logits;
  std::vector<int> labels;
  for (int i = 0; i < 200; ++i) {
    logits.push_back(rng.uniform(-3.0, 3.0));
    labels.push_back(static_cast<int>(rng.below(2)));
  }
  labels[0] = 1;
  labels[1] = 0;
  const spga::LabeledBatch batch(logits, labels);
  const auto w = spga::class_weights(batch, 0.1, spga::DensityScope::kPerClass,
                                     spga::WeightMode::kRaw);
  for (int label : {0, 1}) {
    std::vector<double> grads;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (batch.label(i) == label) {
        grads.push_back(batch.gradient(i));
        index.push_back(i);
      }
    }
    const auto counts = spga::window_counts(grads, 0.1);
    for (std::size_t a = 0; a < index.size(); ++a) {
      for (std::size_t b = 0; b < index.size(); ++b) {
        if (counts[a] > counts[b] &&
            !(w.weights[index[a]] < w.weights[index[b]])) {
          detail = "denser sample not strictly down-weighted";
          return false;
        }
      }
    }
  }

  // Per-class isolation: perturbing a negative leaves positive weights
  // bitwise unchanged.
  auto perturbed_logits = logits;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) {
      perturbed_logits[i] += 0.777;
      break;
    }
  }
  const spga::LabeledBatch batch2(perturbed_logits, labels);
  const auto w2 = spga::class_weights(batch2, 0.1,
                                      spga::DensityScope::kPerClass,
                                      spga::WeightMode::kRaw);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1 && w.weights[i] != w2.weights[i]) {
      detail = "positive weight changed when a negative moved";
      return false;
    }
  }
  detail = "exact identities hold";
  return true;
}

// ---- 7 & 8: ablation direction and plan determinism -----------------------

std::string ablation_plan_text(const std::string& world_block) {
  std::string text = "seeds = ";
  for (int s = 1; s <= 20; ++s) {
    text += std::to_string(s);
    text += s == 20 ? "\n" : ",";
  }
  text += "\n[world]\n" + world_block +
          "\n[variant ce]\nloss_mode = ce\nspsg = off\nlearning_rate = 0.3\n"
          "\n[variant ce+spsg]\nloss_mode = ce\nspsg = on\nlearning_rate = 0.3\n"
          "\n[variant gsl]\nloss_mode = gsl\nspsg = off\nlearning_rate = 0.3\n"
          "\n[variant spga]\nloss_mode = gsl\nspsg = on\nlearning_rate = 0.3\n";
  return text;
}

const char* kDriftHardWorld =
    "dim = 16\ncandidates = 256\nframes = 50\ndrift = 0.04\njitter = 0.02\n"
    "hard_offset = 1.2\nhard_fraction = 0.25\ntarget_std = 0.2\n"
    "background_std = 0.2\neasy_offset = 6\neasy_clusters = 3\n";
const char* kClutterWorld =
    "dim = 16\ncandidates = 256\nframes = 50\ndrift = 0\njitter = 0.02\n"
    "hard_offset = 1\nhard_fraction = 0.4\ntarget_std = 0.2\n"
    "background_std = 0.2\neasy_offset = 6\neasy_clusters = 3\n";
const char* kFastDriftWorld =
    "dim = 16\ncandidates = 256\nframes = 50\ndrift = 0.1\njitter = 0.02\n"
    "hard_offset = 1.6\nhard_fraction = 0.1\ntarget_std = 0.2\n"
    "background_std = 0.2\neasy_offset = 6\neasy_clusters = 3\n";

std::filesystem::path acceptance_dir() {
  return std::filesystem::temp_directory_path() / "spga_acceptance";
}

double summary_median(const spga::PlanResult& result,
                      const std::string& variant, bool delta) {
  for (const auto& s : result.summary) {
    if (s.variant == variant) return delta ? s.median_delta : s.median_success;
  }
  return std::nan("");
}

spga::PlanResult g_drift_hard_result;  // reused by the determinism criterion

bool check_ablation(std::string& detail) {
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, const char*>> worlds{
      {"drift_hard", kDriftHardWorld},
      {"clutter", kClutterWorld},
      {"fast_drift", kFastDriftWorld}};

  int spga_wins = 0;
  std::string report;
  for (const auto& [name, world] : worlds) {
    spga::ExperimentPlan plan = spga::parse_plan(ablation_plan_text(world));
    plan.out_dir = (acceptance_dir() / name).string();
    const spga::PlanResult result = spga::run_plan(plan, 1);
    if (result.any_error) {
      detail = "run errors on world " + name;
      return false;
    }
    if (name == "drift_hard") {
      g_drift_hard_result = result;
      const double d_spsg = summary_median(result, "ce+spsg", true);
      const double d_gsl = summary_median(result, "gsl", true);
      char buf[96];
      std::snprintf(buf, sizeof(buf),
                    "spsg delta %+.3f, gsl delta %+.3f; ", d_spsg, d_gsl);
      report += buf;
      if (!(d_spsg >= 0.0 && d_gsl >= 0.0)) {
        detail = report + "drifting-hard deltas not non-negative";
        return false;
      }
    }
    const double m_spga = summary_median(result, "spga", false);
    bool highest = true;
    for (const char* other : {"ce", "ce+spsg", "gsl"}) {
      highest = highest && m_spga >= summary_median(result, other, false);
    }
    if (highest) ++spga_wins;
  }
  const double elapsed = seconds_since(start);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "spga highest in %d/3 worlds, %.1fs",
                spga_wins, elapsed);
  detail = report + buf;
  return spga_wins >= 1 && elapsed < 180.0;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool check_determinism(std::string& detail) {
  const auto dir_a = acceptance_dir() / "drift_hard";
  if (!std::filesystem::exists(dir_a / "plan.resolved.cfg")) {
    detail = "ablation criterion must run first";
    return false;
  }
  spga::ExperimentPlan replay =
      spga::parse_plan(read_file(dir_a / "plan.resolved.cfg"));
  replay.out_dir = (acceptance_dir() / "drift_hard_replay").string();
  const spga::PlanResult result = spga::run_plan(replay, 2);
  if (result.any_error) {
    detail = "replay errored";
    return false;
  }
  if (read_file(dir_a / "summary.csv") !=
      read_file(acceptance_dir() / "drift_hard_replay" / "summary.csv")) {
    detail = "summary.csv differs";
    return false;
  }
  if (read_file(dir_a / "runs.csv") !=
      read_file(acceptance_dir() / "drift_hard_replay" / "runs.csv")) {
    detail = "runs.csv differs";
    return false;
  }
  detail = "replay from emitted artifacts is byte-identical";
  return true;
}

}  // namespace

int main() {
  std::filesystem::remove_all(acceptance_dir());
  std::filesystem::create_directories(acceptance_dir());

  const std::vector<Criterion> criteria{
      {"t-quantile vs integration oracle", check_quantiles},
      {"interval coverage 10k trials", check_coverage},
      {"interval membership exact", check_membership},
      {"gradients vs finite differences", check_gradients},
      {"density sliding window vs direct count", check_density},
      {"weight identities exact", check_weight_identities},
      {"ablation direction on 3 worlds", check_ablation},
      {"plan replay determinism", check_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].check(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    std::printf("%s criterion %zu: %s%s%s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name.c_str(), detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  std::filesystem::remove_all(acceptance_dir());
  return failures;
}
