#pragma once

#include "maploc/ekf.hpp"
#include "maploc/geomap.hpp"
#include "maploc/raytrace.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace maploc {

struct TracerConfig {
  TraceLimits limits;
  std::size_t max_mpcs = 5;
  double dynamic_range_db = 60.0;    // floor relative to the strongest path
  double sensitivity_db = -1000.0;   // absolute floor
};

struct ScenarioConfig {
  std::filesystem::path map_path;
  Point2 bs = Point2::Zero();
  std::vector<Point2> waypoints;
  double speed = 1.5;           // m/s
  double sample_period = 2.0;   // s
  NoiseSpec noise{0.25e-9, deg_to_rad(0.5), 1};
  double sigma_a = 0.05;        // m/s^2
  double p1_scale = 0.01;
  TracerConfig tracer;
  double cluster_radius = 0.5;  // m
  int backtrace_depth = 4;
  double max_range = 500.0;     // m
  std::size_t monte_carlo_runs = 100;
};

// Relative map paths are resolved against the scenario file's directory.
ScenarioConfig parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

// Throws DomainError on any violated invariant, including waypoint spacing
// that differs from speed * sample_period by more than 1e-6 m.
void validate(const ScenarioConfig& config);

/// Known-track control inputs: at every waypoint where the heading changes the
/// transition is zeroed and u carries the post-turn position and velocity.
MotionModel build_motion_model(const ScenarioConfig& config);

// Velocity while leaving waypoint k (the last waypoint keeps the previous leg's).
Vector2 leg_velocity(const ScenarioConfig& config, std::size_t k);

}  // namespace maploc
