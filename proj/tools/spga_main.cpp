// Command line surface: quantile, spsg, loss-demo, train, track, plan.
// Tabular output is RFC 4180 CSV with a header row; structured dumps are
// JSON, one object per line.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spga/csv.hpp"
#include "spga/experiment.hpp"
#include "spga/gradient_loss.hpp"
#include "spga/sample_gen.hpp"
#include "spga/student_t.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Sectionless key=value file; any [section] header is an error here.
std::vector<spga::ConfigEntry> read_flat_config(
    const std::filesystem::path& path) {
  const auto sections = spga::parse_kv(read_file(path));
  if (sections.size() > 1) {
    throw spga::ParseError(sections[1].line,
                           "sections are not allowed in this file");
  }
  return sections[0].entries;
}

spga::LossMode parse_mode_flag(const std::string& mode) {
  if (mode == "ce") return spga::LossMode::kCrossEntropy;
  if (mode == "gsl") return spga::LossMode::kGradientSensitive;
  if (mode == "ghm") return spga::LossMode::kPooledHarmonized;
  throw CLI::ValidationError("--mode", "must be ce, gsl or ghm");
}

struct TrainFileOptions {
  spga::TrainConfig cfg;
  spga::Architecture arch = spga::Architecture::kLinear;
  std::size_t hidden = spga::defaults::kHiddenUnits;
  std::optional<spga::AugmentSettings> augment;
};

// run.cfg for the standalone trainer: the shared tracker keys minus the
// schedule, plus `iterations` and `seed`.
TrainFileOptions parse_train_config(const std::vector<spga::ConfigEntry>& entries) {
  TrainFileOptions opt;
  bool spsg = false;
  spga::AugmentSettings aug;
  for (const auto& e : entries) {
    if (e.key == "iterations") {
      opt.cfg.iterations = spga::parse_count(e);
      if (opt.cfg.iterations == 0) {
        throw spga::ParseError(e.line, "iterations must be >= 1");
      }
    } else if (e.key == "seed") {
      opt.cfg.seed = spga::parse_u64(e);
    } else if (e.key == "loss_mode") {
      if (e.value == "ce") {
        opt.cfg.loss_mode = spga::LossMode::kCrossEntropy;
      } else if (e.value == "gsl") {
        opt.cfg.loss_mode = spga::LossMode::kGradientSensitive;
      } else if (e.value == "ghm") {
        opt.cfg.loss_mode = spga::LossMode::kPooledHarmonized;
      } else {
        throw spga::ParseError(e.line, "loss_mode must be ce, gsl or ghm");
      }
    } else if (e.key == "epsilon") {
      opt.cfg.epsilon = spga::parse_real(e);
      if (!(opt.cfg.epsilon > 0.0)) {
        throw spga::ParseError(e.line, "epsilon must be positive");
      }
    } else if (e.key == "weight_mode") {
      if (e.value == "raw") {
        opt.cfg.weight_mode = spga::WeightMode::kRaw;
      } else if (e.value == "mean_normalized") {
        opt.cfg.weight_mode = spga::WeightMode::kMeanNormalized;
      } else {
        throw spga::ParseError(e.line,
                               "weight_mode must be raw or mean_normalized");
      }
    } else if (e.key == "learning_rate") {
      opt.cfg.learning_rate = spga::parse_real(e);
      if (!(opt.cfg.learning_rate > 0.0)) {
        throw spga::ParseError(e.line, "learning_rate must be positive");
      }
    } else if (e.key == "momentum") {
      opt.cfg.momentum = spga::parse_real(e);
      if (!(opt.cfg.momentum >= 0.0 && opt.cfg.momentum < 1.0)) {
        throw spga::ParseError(e.line, "momentum must lie in [0, 1)");
      }
    } else if (e.key == "arch") {
      if (e.value == "linear") {
        opt.arch = spga::Architecture::kLinear;
      } else if (e.value == "one_hidden") {
        opt.arch = spga::Architecture::kOneHidden;
      } else {
        throw spga::ParseError(e.line, "arch must be linear or one_hidden");
      }
    } else if (e.key == "hidden") {
      opt.hidden = spga::parse_count(e);
      if (opt.hidden == 0) throw spga::ParseError(e.line, "hidden must be >= 1");
    } else if (e.key == "spsg") {
      spsg = spga::parse_on_off(e);
    } else if (e.key == "alpha") {
      aug.alpha = spga::parse_real(e);
      if (!(aug.alpha > 0.0 && aug.alpha <= 1.0)) {
        throw spga::ParseError(e.line, "alpha must lie in (0, 1]");
      }
    } else if (e.key == "m") {
      aug.m = spga::parse_count(e);
    } else if (e.key == "regen") {
      if (e.value == "per_iteration") {
        aug.per_iteration = true;
      } else if (e.value == "per_phase") {
        aug.per_iteration = false;
      } else {
        throw spga::ParseError(e.line,
                               "regen must be per_iteration or per_phase");
      }
    } else {
      throw spga::ParseError(e.line, "unknown key '" + e.key + "'");
    }
  }
  if (spsg) opt.augment = aug;
  return opt;
}

int cmd_quantile(double alpha, int df) {
  const double t = spga::t_two_sided_critical({alpha, df});
  std::cout << spga::format_double(t, 9) << "\n";
  return 0;
}

int cmd_spsg(const std::string& input, double alpha, std::size_t m,
             std::uint64_t seed, const std::string& out,
             const std::string& intervals_path) {
  const spga::Matrix features = spga::read_matrix_csv(input);
  const auto intervals = spga::confidence_intervals(features, alpha);

  spga::Matrix combined = features;
  const auto generated = spga::generate(intervals, m, seed);
  combined.append_rows(generated.data);
  spga::write_matrix_csv(out, combined);

  if (!intervals_path.empty()) {
    std::string dump;
    for (std::size_t j = 0; j < intervals.size(); ++j) {
      json rec;
      rec["component"] = j;
      rec["mean"] = intervals[j].mean;
      rec["std"] = intervals[j].std;
      rec["lower"] = intervals[j].lower;
      rec["upper"] = intervals[j].upper;
      dump += rec.dump() + "\n";
    }
    spga::write_file_atomic(intervals_path, dump);
  }

  json info;
  info["generator"] = std::string(generated.generator);
  info["seed"] = seed;
  info["original_rows"] = features.rows();
  info["generated_rows"] = generated.data.rows();
  info["components"] = features.cols();
  info["output"] = out;
  std::cout << info.dump() << "\n";
  return 0;
}

int cmd_loss_demo(double epsilon, const std::string& mode_name,
                  const std::string& batch_path,
                  const std::string& weight_mode_name) {
  const spga::LossMode mode = parse_mode_flag(mode_name);
  const spga::WeightMode weight_mode =
      weight_mode_name == "mean_normalized" ? spga::WeightMode::kMeanNormalized
                                            : spga::WeightMode::kRaw;
  const spga::Matrix table = spga::read_matrix_csv(batch_path);
  if (table.cols() != 2) {
    throw std::runtime_error(batch_path +
                             ": expected two columns (logit, label)");
  }
  std::vector<double> logits(table.rows());
  std::vector<int> labels(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    logits[i] = table(i, 0);
    labels[i] = static_cast<int>(table(i, 1));
  }
  const spga::LabeledBatch batch(std::move(logits), std::move(labels));
  const auto weights =
      spga::weights_for_mode(batch, mode, epsilon, weight_mode);
  const auto density = spga::batch_density(
      batch, epsilon,
      mode == spga::LossMode::kGradientSensitive
          ? spga::DensityScope::kPerClass
          : spga::DensityScope::kPooled);
  const auto loss = spga::gsl_loss(batch, weights);

  std::cout << spga::csv_line({"gradient", "density", "weight", "loss"});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::cout << spga::csv_line({spga::format_double(batch.gradient(i)),
                                 spga::format_double(density.densities[i]),
                                 spga::format_double(weights.weights[i]),
                                 spga::format_double(loss.per_sample[i])});
  }
  return 0;
}

int cmd_train(const std::string& pos_path, const std::string& neg_path,
              const std::string& config_path, const std::string& out_path,
              const std::string& metrics_path, std::uint64_t seed,
              bool seed_given) {
  TrainFileOptions opt;
  if (!config_path.empty()) {
    opt = parse_train_config(read_flat_config(config_path));
  }
  if (seed_given) opt.cfg.seed = seed;

  const spga::Matrix pos = spga::read_matrix_csv(pos_path);
  const spga::Matrix neg = spga::read_matrix_csv(neg_path);

  spga::Rng init_rng(opt.cfg.seed);
  spga::ModelParams params =
      spga::ModelParams::init(opt.arch, pos.cols(), opt.hidden, init_rng);
  const spga::TrainResult result =
      spga::train(std::move(params), pos, neg, opt.cfg, opt.augment);

  spga::write_file_atomic(out_path, spga::model_to_json(result.params) + "\n");

  if (!metrics_path.empty()) {
    std::string csv = spga::csv_line(
        {"iteration", "loss", "pos_weight_mean", "neg_weight_mean"});
    for (const auto& m : result.metrics) {
      csv += spga::csv_line({std::to_string(m.iteration),
                             spga::format_double(m.loss),
                             spga::format_double(m.pos_weight_mean),
                             spga::format_double(m.neg_weight_mean)});
    }
    spga::write_file_atomic(metrics_path, csv);
  }

  json info;
  info["iterations"] = result.metrics.size();
  info["final_loss"] = result.metrics.back().loss;
  info["model"] = out_path;
  std::cout << info.dump() << "\n";
  return 0;
}

int cmd_track(const std::string& world_path, const std::string& config_path,
              std::uint64_t seed, const std::string& out_path) {
  const spga::WorldConfig world =
      spga::parse_world_config(read_flat_config(world_path));
  spga::TrackerConfig tracker;
  if (!config_path.empty()) {
    tracker = spga::parse_tracker_config(read_flat_config(config_path));
  }
  const spga::TrackRecord record = spga::run_seeded(world, tracker, seed);
  spga::write_file_atomic(out_path, spga::track_record_csv(record));

  json info;
  info["seed"] = seed;
  info["frames"] = record.frames.size();
  info["success_rate"] = record.success_rate;
  info["output"] = out_path;
  std::cout << info.dump() << "\n";
  return 0;
}

int cmd_plan(const std::string& plan_path, const std::string& out_dir,
             std::size_t jobs) {
  spga::ExperimentPlan plan = spga::parse_plan(read_file(plan_path));
  if (!out_dir.empty()) plan.out_dir = out_dir;
  const spga::PlanResult result = spga::run_plan(plan, jobs);

  std::cout << spga::csv_line({"variant", "runs", "errors", "mean_success",
                               "median_success", "mean_delta", "median_delta",
                               "config_hash"});
  for (const auto& s : result.summary) {
    std::cout << spga::csv_line(
        {s.variant, std::to_string(s.runs), std::to_string(s.errors),
         spga::format_double(s.mean_success),
         spga::format_double(s.median_success),
         spga::format_double(s.mean_delta),
         spga::format_double(s.median_delta), result.config_hash});
  }
  return result.any_error ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical positive sample generation and gradient sensitive "
               "loss toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string out_dir;

  // Global flags; subcommands fall through to them.
  auto* seed_opt = app.add_option("--seed", seed, "default seed");
  app.add_option("--jobs", jobs, "parallel runs for plan execution");
  app.add_option("--out-dir", out_dir,
                 "directory for outputs (plan directory, or the base for "
                 "relative output paths)");

  auto* quantile = app.add_subcommand(
      "quantile", "Two-sided Student's-t critical value");
  double alpha = spga::defaults::kAlpha;
  int df = 1;
  quantile->add_option("--alpha", alpha, "two-sided significance level")
      ->required();
  quantile->add_option("--df", df, "degrees of freedom")->required();

  auto* spsg = app.add_subcommand(
      "spsg", "Augment a feature matrix inside per-component confidence "
              "intervals");
  std::string input;
  std::string out;
  std::string intervals_path;
  double spsg_alpha = spga::defaults::kAlpha;
  std::size_t m = spga::defaults::kGenerated;
  spsg->add_option("--input", input, "headerless CSV, one vector per row")
      ->required();
  spsg->add_option("--alpha", spsg_alpha, "confidence level");
  spsg->add_option("--m", m, "number of generated vectors");
  spsg->add_option("--out", out, "output CSV (originals then generated)")
      ->required();
  spsg->add_option("--intervals", intervals_path,
                   "optional JSONL interval dump");

  auto* loss_demo = app.add_subcommand(
      "loss-demo", "Per-sample gradient, density, weight and loss");
  double epsilon = spga::defaults::kEpsilon;
  std::string mode = "gsl";
  std::string batch_path;
  std::string weight_mode = "raw";
  loss_demo->add_option("--epsilon", epsilon, "density window width");
  loss_demo->add_option("--mode", mode, "ce, gsl or ghm");
  loss_demo->add_option("--batch", batch_path,
                        "headerless CSV rows: logit,label")->required();
  loss_demo->add_option("--weight-mode", weight_mode,
                        "raw or mean_normalized");

  auto* train = app.add_subcommand("train", "Train a scoring head on CSV "
                                            "feature matrices");
  std::string pos_path;
  std::string neg_path;
  std::string config_path;
  std::string model_out = "model.json";
  std::string metrics_path;
  train->add_option("--pos", pos_path, "positive feature matrix")->required();
  train->add_option("--neg", neg_path, "negative feature matrix")->required();
  train->add_option("--config", config_path, "key=value train config");
  train->add_option("--out", model_out, "model checkpoint path");
  train->add_option("--metrics", metrics_path, "per-iteration metrics CSV");

  auto* track = app.add_subcommand(
      "track", "Run the online tracking loop on a synthetic world");
  std::string world_path;
  std::string tracker_path;
  std::string record_out = "record.csv";
  track->add_option("--world", world_path, "key=value world config")
      ->required();
  track->add_option("--config", tracker_path, "key=value tracker config");
  track->add_option("--out", record_out, "per-frame record CSV");

  auto* plan = app.add_subcommand(
      "plan", "Run a seeded ablation plan and summarize it");
  std::string plan_path;
  plan->add_option("--plan", plan_path, "plan file")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  // Relative output paths resolve against --out-dir when it is set.
  auto resolve = [&](const std::string& path) -> std::string {
    if (out_dir.empty() || path.empty() ||
        std::filesystem::path(path).is_absolute()) {
      return path;
    }
    std::filesystem::create_directories(out_dir);
    return (std::filesystem::path(out_dir) / path).string();
  };

  try {
    if (quantile->parsed()) return cmd_quantile(alpha, df);
    if (spsg->parsed()) {
      return cmd_spsg(input, spsg_alpha, m, seed, resolve(out),
                      resolve(intervals_path));
    }
    if (loss_demo->parsed()) {
      return cmd_loss_demo(epsilon, mode, batch_path, weight_mode);
    }
    if (train->parsed()) {
      return cmd_train(pos_path, neg_path, config_path, resolve(model_out),
                       resolve(metrics_path), seed, seed_opt->count() > 0);
    }
    if (track->parsed()) {
      return cmd_track(world_path, tracker_path, seed, resolve(record_out));
    }
    if (plan->parsed()) return cmd_plan(plan_path, out_dir, jobs);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
