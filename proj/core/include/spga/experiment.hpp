#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spga/config.hpp"
#include "spga/simworld.hpp"

namespace spga {

// One named tracker configuration in an ablation grid.
struct Variant {
  std::string name;
  TrackerConfig tracker;

  friend bool operator==(const Variant&, const Variant&) = default;
};

// A seeded batch of paired runs: every variant sees the same world per
// seed, so per-seed deltas isolate the method effect. The first variant is
// the baseline the deltas are measured against.
struct ExperimentPlan {
  std::string out_dir = "runs";
  std::vector<std::uint64_t> seeds;
  WorldConfig world;
  std::vector<Variant> variants;

  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

// Plan files: top-level keys, one [world] section, one or more
// [variant <name>] sections. Unknown keys and duplicate variant names are
// rejected with the offending line number.
ExperimentPlan parse_plan(const std::string& text);
std::string serialize_plan(const ExperimentPlan& plan);

// Flat (sectionless) surfaces reused by the CLI.
TrackerConfig parse_tracker_config(const std::vector<ConfigEntry>& entries);
WorldConfig parse_world_config(const std::vector<ConfigEntry>& entries);
std::string serialize_world(const WorldConfig& world);
std::string serialize_tracker(const TrackerConfig& tracker);

// FNV-1a 64 over the serialized plan minus its output location; every
// emitted row carries it so artifacts can be matched to their config.
std::string plan_config_hash(const ExperimentPlan& plan);

// One paired run: the sequence comes from `seed`, the tracker stream from a
// salted mix of it, so different trackers on the same seed share a world.
TrackRecord run_seeded(const WorldConfig& world, TrackerConfig tracker,
                       std::uint64_t seed);

struct RunOutcome {
  std::string variant;
  std::uint64_t seed = 0;
  double success_rate = 0.0;
  std::string error;  // empty on success
};

struct VariantSummary {
  std::string variant;
  std::size_t runs = 0;
  std::size_t errors = 0;
  double mean_success = 0.0;
  double median_success = 0.0;
  double mean_delta = 0.0;    // paired per-seed vs the first variant
  double median_delta = 0.0;
};

struct PlanResult {
  std::vector<RunOutcome> runs;  // variant-major, seed order within
  std::vector<VariantSummary> summary;
  std::string config_hash;
  bool any_error = false;
};

// Executes every (variant, seed) pair, up to `jobs` at a time. Writes the
// resolved plan, per-run track records, runs.csv and summary.csv under
// plan.out_dir, all atomically. Individual run failures are recorded as
// rows and do not abort the plan.
PlanResult run_plan(const ExperimentPlan& plan, std::size_t jobs = 1);

double median(std::vector<double> values);

std::string track_record_csv(const TrackRecord& record);

}  // namespace spga
