#include "spga/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "spga/csv.hpp"

namespace spga {

namespace {

constexpr std::uint64_t kTrackerSeedSalt = 0x9e3779b97f4a7c15ULL;

struct TrackerDraft {
  TrackerConfig cfg;
  bool spsg = false;
  AugmentSettings aug;
};

void check_fraction(const ConfigEntry& entry, double v, bool allow_one) {
  if (v > 0.0 && (v < 1.0 || (allow_one && v == 1.0))) return;
  throw ParseError(entry.line, "key '" + entry.key + "': value out of range");
}

// Applies one key to a tracker draft; throws ParseError on unknown keys or
// out-of-range values.
void apply_tracker_entry(TrackerDraft& draft, const ConfigEntry& e) {
  auto& cfg = draft.cfg;
  if (e.key == "loss_mode") {
    if (e.value == "ce") {
      cfg.loss_mode = LossMode::kCrossEntropy;
    } else if (e.value == "gsl") {
      cfg.loss_mode = LossMode::kGradientSensitive;
    } else if (e.value == "ghm") {
      cfg.loss_mode = LossMode::kPooledHarmonized;
    } else {
      throw ParseError(e.line, "loss_mode must be ce, gsl or ghm, got '" +
                                   e.value + "'");
    }
  } else if (e.key == "spsg") {
    draft.spsg = parse_on_off(e);
  } else if (e.key == "alpha") {
    const double v = parse_real(e);
    check_fraction(e, v, true);
    draft.aug.alpha = v;
  } else if (e.key == "m") {
    draft.aug.m = parse_count(e);
  } else if (e.key == "regen") {
    if (e.value == "per_iteration") {
      draft.aug.per_iteration = true;
    } else if (e.value == "per_phase") {
      draft.aug.per_iteration = false;
    } else {
      throw ParseError(e.line,
                       "regen must be per_iteration or per_phase, got '" +
                           e.value + "'");
    }
  } else if (e.key == "epsilon") {
    const double v = parse_real(e);
    if (!(v > 0.0)) {
      throw ParseError(e.line, "epsilon must be positive");
    }
    cfg.epsilon = v;
  } else if (e.key == "weight_mode") {
    if (e.value == "raw") {
      cfg.weight_mode = WeightMode::kRaw;
    } else if (e.value == "mean_normalized") {
      cfg.weight_mode = WeightMode::kMeanNormalized;
    } else {
      throw ParseError(e.line,
                       "weight_mode must be raw or mean_normalized, got '" +
                           e.value + "'");
    }
  } else if (e.key == "arch") {
    if (e.value == "linear") {
      cfg.architecture = Architecture::kLinear;
    } else if (e.value == "one_hidden") {
      cfg.architecture = Architecture::kOneHidden;
    } else {
      throw ParseError(e.line, "arch must be linear or one_hidden, got '" +
                                   e.value + "'");
    }
  } else if (e.key == "hidden") {
    cfg.hidden = parse_count(e);
    if (cfg.hidden == 0) throw ParseError(e.line, "hidden must be >= 1");
  } else if (e.key == "learning_rate") {
    const double v = parse_real(e);
    if (!(v > 0.0)) throw ParseError(e.line, "learning_rate must be positive");
    cfg.learning_rate = v;
  } else if (e.key == "momentum") {
    const double v = parse_real(e);
    if (!(v >= 0.0 && v < 1.0)) {
      throw ParseError(e.line, "momentum must lie in [0, 1)");
    }
    cfg.momentum = v;
  } else if (e.key == "init_iterations") {
    cfg.init_iterations = parse_count(e);
    if (cfg.init_iterations == 0) {
      throw ParseError(e.line, "init_iterations must be >= 1");
    }
  } else if (e.key == "update_iterations") {
    cfg.update_iterations = parse_count(e);
    if (cfg.update_iterations == 0) {
      throw ParseError(e.line, "update_iterations must be >= 1");
    }
  } else if (e.key == "n_pos") {
    cfg.n_pos = parse_count(e);
    if (cfg.n_pos < 2) throw ParseError(e.line, "n_pos must be >= 2");
  } else if (e.key == "n_neg") {
    cfg.n_neg = parse_count(e);
    if (cfg.n_neg == 0) throw ParseError(e.line, "n_neg must be >= 1");
  } else if (e.key == "update_period") {
    cfg.update_period = parse_count(e);
    if (cfg.update_period == 0) {
      throw ParseError(e.line, "update_period must be >= 1");
    }
  } else if (e.key == "update_draws") {
    cfg.update_draws = parse_count(e);
    if (cfg.update_draws == 0) {
      throw ParseError(e.line, "update_draws must be >= 1");
    }
  } else if (e.key == "failure_threshold") {
    cfg.failure_threshold = parse_real(e);
  } else {
    throw ParseError(e.line, "unknown key '" + e.key + "'");
  }
}

TrackerConfig finalize_tracker(TrackerDraft draft) {
  if (draft.spsg) {
    draft.cfg.augment = draft.aug;
  }
  return draft.cfg;
}

void apply_world_entry(WorldConfig& w, const ConfigEntry& e) {
  if (e.key == "dim") {
    w.dim = parse_count(e);
    if (w.dim == 0) throw ParseError(e.line, "dim must be >= 1");
  } else if (e.key == "candidates") {
    w.candidates = parse_count(e);
    if (w.candidates < 2) throw ParseError(e.line, "candidates must be >= 2");
  } else if (e.key == "frames") {
    w.frames = parse_count(e);
    if (w.frames == 0) throw ParseError(e.line, "frames must be >= 1");
  } else if (e.key == "easy_clusters") {
    w.easy_clusters = parse_count(e);
    if (w.easy_clusters == 0) {
      throw ParseError(e.line, "easy_clusters must be >= 1");
    }
  } else if (e.key == "target_std") {
    w.target_std = parse_real(e);
    if (!(w.target_std > 0.0)) {
      throw ParseError(e.line, "target_std must be positive");
    }
  } else if (e.key == "background_std") {
    w.background_std = parse_real(e);
    if (!(w.background_std > 0.0)) {
      throw ParseError(e.line, "background_std must be positive");
    }
  } else if (e.key == "hard_offset") {
    w.hard_offset = parse_real(e);
  } else if (e.key == "easy_offset") {
    w.easy_offset = parse_real(e);
  } else if (e.key == "hard_fraction") {
    w.hard_fraction = parse_real(e);
    if (!(w.hard_fraction >= 0.0 && w.hard_fraction <= 1.0)) {
      throw ParseError(e.line, "hard_fraction must lie in [0, 1]");
    }
  } else if (e.key == "drift") {
    w.drift = parse_real(e);
  } else if (e.key == "jitter") {
    w.jitter = parse_real(e);
  } else {
    throw ParseError(e.line, "unknown key '" + e.key + "'");
  }
}

std::string on_off(bool v) { return v ? "on" : "off"; }

std::string loss_mode_name(LossMode m) {
  switch (m) {
    case LossMode::kCrossEntropy: return "ce";
    case LossMode::kGradientSensitive: return "gsl";
    case LossMode::kPooledHarmonized: return "ghm";
  }
  return "ce";
}

void serialize_tracker_into(const TrackerConfig& cfg, std::string& out) {
  const AugmentSettings aug = cfg.augment.value_or(AugmentSettings{});
  out += "loss_mode = " + loss_mode_name(cfg.loss_mode) + "\n";
  out += "spsg = " + on_off(cfg.augment.has_value()) + "\n";
  out += "alpha = " + format_double(aug.alpha) + "\n";
  out += "m = " + std::to_string(aug.m) + "\n";
  out += std::string("regen = ") +
         (aug.per_iteration ? "per_iteration" : "per_phase") + "\n";
  out += "epsilon = " + format_double(cfg.epsilon) + "\n";
  out += std::string("weight_mode = ") +
         (cfg.weight_mode == WeightMode::kRaw ? "raw" : "mean_normalized") +
         "\n";
  out += std::string("arch = ") +
         (cfg.architecture == Architecture::kLinear ? "linear" : "one_hidden") +
         "\n";
  out += "hidden = " + std::to_string(cfg.hidden) + "\n";
  out += "learning_rate = " + format_double(cfg.learning_rate) + "\n";
  out += "momentum = " + format_double(cfg.momentum) + "\n";
  out += "init_iterations = " + std::to_string(cfg.init_iterations) + "\n";
  out += "update_iterations = " + std::to_string(cfg.update_iterations) + "\n";
  out += "n_pos = " + std::to_string(cfg.n_pos) + "\n";
  out += "n_neg = " + std::to_string(cfg.n_neg) + "\n";
  out += "update_period = " + std::to_string(cfg.update_period) + "\n";
  out += "update_draws = " + std::to_string(cfg.update_draws) + "\n";
  out += "failure_threshold = " + format_double(cfg.failure_threshold) + "\n";
}

void serialize_world_into(const WorldConfig& w, std::string& out) {
  out += "dim = " + std::to_string(w.dim) + "\n";
  out += "candidates = " + std::to_string(w.candidates) + "\n";
  out += "frames = " + std::to_string(w.frames) + "\n";
  out += "easy_clusters = " + std::to_string(w.easy_clusters) + "\n";
  out += "target_std = " + format_double(w.target_std) + "\n";
  out += "background_std = " + format_double(w.background_std) + "\n";
  out += "hard_offset = " + format_double(w.hard_offset) + "\n";
  out += "easy_offset = " + format_double(w.easy_offset) + "\n";
  out += "hard_fraction = " + format_double(w.hard_fraction) + "\n";
  out += "drift = " + format_double(w.drift) + "\n";
  out += "jitter = " + format_double(w.jitter) + "\n";
}

std::string serialize_plan_impl(const ExperimentPlan& plan,
                                bool include_out_dir) {
  std::string out;
  if (include_out_dir) {
    out += "out_dir = " + plan.out_dir + "\n";
  }
  out += "seeds = ";
  for (std::size_t i = 0; i < plan.seeds.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(plan.seeds[i]);
  }
  out += "\n\n[world]\n";
  serialize_world_into(plan.world, out);
  for (const auto& variant : plan.variants) {
    out += "\n[variant " + variant.name + "]\n";
    serialize_tracker_into(variant.tracker, out);
  }
  return out;
}

std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  }
  return out;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return std::nan("");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

TrackerConfig parse_tracker_config(const std::vector<ConfigEntry>& entries) {
  TrackerDraft draft;
  for (const auto& e : entries) apply_tracker_entry(draft, e);
  return finalize_tracker(std::move(draft));
}

WorldConfig parse_world_config(const std::vector<ConfigEntry>& entries) {
  WorldConfig w;
  for (const auto& e : entries) apply_world_entry(w, e);
  return w;
}

std::string serialize_world(const WorldConfig& world) {
  std::string out;
  serialize_world_into(world, out);
  return out;
}

std::string serialize_tracker(const TrackerConfig& tracker) {
  std::string out;
  serialize_tracker_into(tracker, out);
  return out;
}

ExperimentPlan parse_plan(const std::string& text) {
  const auto sections = parse_kv(text);
  ExperimentPlan plan;
  plan.seeds = {1};
  bool saw_world = false;
  std::set<std::string> names;

  for (const auto& section : sections) {
    if (section.name.empty()) {
      for (const auto& e : section.entries) {
        if (e.key == "out_dir") {
          plan.out_dir = e.value;
        } else if (e.key == "seeds") {
          plan.seeds = parse_u64_list(e);
        } else {
          throw ParseError(e.line, "unknown key '" + e.key + "'");
        }
      }
    } else if (section.name == "world") {
      if (saw_world) {
        throw ParseError(section.line, "duplicate [world] section");
      }
      saw_world = true;
      plan.world = parse_world_config(section.entries);
    } else if (section.name.starts_with("variant ")) {
      Variant variant;
      variant.name = section.name.substr(8);
      if (variant.name.empty()) {
        throw ParseError(section.line, "variant needs a name");
      }
      if (!names.insert(variant.name).second) {
        throw ParseError(section.line,
                         "duplicate variant '" + variant.name + "'");
      }
      variant.tracker = parse_tracker_config(section.entries);
      plan.variants.push_back(std::move(variant));
    } else {
      throw ParseError(section.line, "unknown section [" + section.name + "]");
    }
  }

  if (plan.variants.empty()) {
    throw ParseError(1, "plan needs at least one [variant <name>] section");
  }
  if (plan.seeds.empty()) {
    throw ParseError(1, "plan needs at least one seed");
  }
  return plan;
}

std::string serialize_plan(const ExperimentPlan& plan) {
  return serialize_plan_impl(plan, true);
}

std::string plan_config_hash(const ExperimentPlan& plan) {
  const std::string text = serialize_plan_impl(plan, false);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

TrackRecord run_seeded(const WorldConfig& world, TrackerConfig tracker,
                       std::uint64_t seed) {
  const Sequence seq = make_sequence(world, world.frames, seed);
  tracker.seed = seed ^ kTrackerSeedSalt;
  return run(seq, tracker);
}

std::string track_record_csv(const TrackRecord& record) {
  std::string out = csv_line({"frame", "chosen", "truth", "correct", "score"});
  for (const auto& fr : record.frames) {
    out += csv_line({std::to_string(fr.frame), std::to_string(fr.chosen),
                     std::to_string(fr.truth), fr.correct ? "1" : "0",
                     format_double(fr.score)});
  }
  return out;
}

PlanResult run_plan(const ExperimentPlan& plan, std::size_t jobs) {
  namespace fs = std::filesystem;
  const fs::path out_dir(plan.out_dir);
  fs::create_directories(out_dir / "runs");

  PlanResult result;
  result.config_hash = plan_config_hash(plan);

  const std::size_t n_variants = plan.variants.size();
  const std::size_t n_seeds = plan.seeds.size();
  result.runs.resize(n_variants * n_seeds);

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= n_variants * n_seeds) break;
      const std::size_t vi = job / n_seeds;
      const std::size_t si = job % n_seeds;
      const Variant& variant = plan.variants[vi];
      const std::uint64_t seed = plan.seeds[si];

      RunOutcome outcome;
      outcome.variant = variant.name;
      outcome.seed = seed;
      try {
        const TrackRecord record = run_seeded(plan.world, variant.tracker, seed);
        outcome.success_rate = record.success_rate;
        const fs::path path =
            out_dir / "runs" /
            ("v" + std::to_string(vi) + "_" + sanitize_name(variant.name) +
             "-s" + std::to_string(seed) + ".csv");
        write_file_atomic(path, track_record_csv(record));
      } catch (const std::exception& ex) {
        outcome.error = ex.what();
      }
      result.runs[job] = std::move(outcome);
    }
  };

  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min(jobs, n_variants * n_seeds));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Paired per-seed deltas vs the first (baseline) variant; a seed counts
  // only when both runs succeeded.
  auto run_at = [&](std::size_t vi, std::size_t si) -> const RunOutcome& {
    return result.runs[vi * n_seeds + si];
  };
  for (std::size_t vi = 0; vi < n_variants; ++vi) {
    VariantSummary s;
    s.variant = plan.variants[vi].name;
    s.runs = n_seeds;
    std::vector<double> successes;
    std::vector<double> deltas;
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const RunOutcome& r = run_at(vi, si);
      if (!r.error.empty()) {
        ++s.errors;
        result.any_error = true;
        continue;
      }
      successes.push_back(r.success_rate);
      const RunOutcome& base = run_at(0, si);
      if (base.error.empty()) {
        deltas.push_back(r.success_rate - base.success_rate);
      }
    }
    s.mean_success = mean_of(successes);
    s.median_success = median(successes);
    s.mean_delta = mean_of(deltas);
    s.median_delta = median(deltas);
    result.summary.push_back(std::move(s));
  }

  write_file_atomic(out_dir / "plan.resolved.cfg", serialize_plan(plan));

  std::string runs_csv = csv_line({"variant", "seed", "success_rate",
                                   "delta_vs_baseline", "error",
                                   "config_hash"});
  for (std::size_t vi = 0; vi < n_variants; ++vi) {
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const RunOutcome& r = run_at(vi, si);
      std::string success;
      std::string delta;
      if (r.error.empty()) {
        success = format_double(r.success_rate);
        const RunOutcome& base = run_at(0, si);
        if (base.error.empty()) {
          delta = format_double(r.success_rate - base.success_rate);
        }
      }
      runs_csv += csv_line({r.variant, std::to_string(r.seed), success, delta,
                            r.error, result.config_hash});
    }
  }
  write_file_atomic(out_dir / "runs.csv", runs_csv);

  std::string summary_csv =
      csv_line({"variant", "runs", "errors", "mean_success", "median_success",
                "mean_delta", "median_delta", "config_hash"});
  for (const auto& s : result.summary) {
    summary_csv += csv_line({s.variant, std::to_string(s.runs),
                             std::to_string(s.errors),
                             format_double(s.mean_success),
                             format_double(s.median_success),
                             format_double(s.mean_delta),
                             format_double(s.median_delta),
                             result.config_hash});
  }
  write_file_atomic(out_dir / "summary.csv", summary_csv);

  return result;
}

}  // namespace spga
