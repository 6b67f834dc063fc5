#pragma once

#include "maploc/ekf.hpp"
#include "maploc/mapat.hpp"
#include "maploc/raytrace.hpp"
#include "maploc/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

namespace maploc {

enum class StepMode { MapAtFix, SingleMpcUpdate, Outage };

const char* to_string(StepMode mode);

struct StepRecord {
  std::size_t step = 0;
  Point2 truth = Point2::Zero();
  Point2 estimate = Point2::Zero();
  double error = 0.0;
  std::size_t mpc_count = 0;
  StepMode mode = StepMode::Outage;
  EkfState state;
  bool los = false;
  std::optional<Point2> mapat_fix;  // MAP-AT-only estimate when one exists
  std::optional<double> nis;
  std::size_t anchors_used = 0;
};

using CdfPoint = std::pair<double, double>;  // (error, cumulative probability)

struct RunSummary {
  std::size_t steps = 0;
  double mean_error = 0.0;
  double median_error = 0.0;
  double max_error = 0.0;
  double los_mean_error = 0.0;
  double nlos_mean_error = 0.0;
  std::vector<CdfPoint> cdf;
  // Steps where MAP-AT alone produced a fix.
  std::size_t multi_mpc_steps = 0;
  double mapat_only_mean = 0.0;
  double ekf_mean = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
  RunSummary summary;
};

// Loaded map plus the seed-independent geometry of every waypoint.
struct Scenario {
  ScenarioConfig config;
  MapModel map;
  MotionModel motion;
  std::vector<std::vector<PropagationPath>> paths;  // per waypoint
  std::vector<bool> los;                            // per waypoint
};

Scenario prepare_scenario(ScenarioConfig config);
Scenario prepare_scenario(ScenarioConfig config, MapModel map);

/// One pass over the track.
///
/// Per step: synthesise measurements at the true waypoint, then
///   >= 2 MPCs: MAP-AT fix, anchors from the clustered paths, predict + update;
///   1 MPC (or no fix): predict + update using the branch nearest the prediction;
///   0 MPCs: predict only.
/// The first step initialises the filter from MAP-AT instead of updating.
RunResult run_scenario(const Scenario& scenario, std::uint64_t seed);

struct MonteCarloResult {
  std::vector<RunResult> runs;
  RunSummary aggregate;  // over every step of every run
};

// Runs seeds config.noise.seed, +1, ..., +runs-1.
MonteCarloResult run_monte_carlo(const Scenario& scenario, std::size_t runs);

struct BaselinePair {
  std::uint64_t seed;
  std::size_t step;
  double mapat_error;
  double ekf_error;
};

struct BaselineComparison {
  std::vector<BaselinePair> pairs;
  double mapat_only_mean = 0.0;
  double ekf_mean = 0.0;
};

// MAP-AT-only fixes against the filter at the same steps; steps without a
// MAP-AT fix (one MPC or no cluster) are excluded.
BaselineComparison mapat_only_baseline(std::span<const RunResult> runs);
BaselineComparison mapat_only_baseline(const Scenario& scenario, std::size_t runs);

std::vector<CdfPoint> compute_cdf(std::vector<double> errors);
RunSummary summarize(std::span<const StepRecord> steps);

// trajectory_<seed>.csv per run, cdf.csv and summary.json.
void emit_outputs(const MonteCarloResult& result, const BaselineComparison& baseline,
                  const std::filesystem::path& out_dir);
std::string trajectory_csv(std::span<const StepRecord> steps);
std::string cdf_csv(std::span<const CdfPoint> cdf);
nlohmann::json summary_json(const RunSummary& summary);

}  // namespace maploc
