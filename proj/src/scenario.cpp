#include "maploc/scenario.hpp"

#include "maploc/errors.hpp"

#include <cmath>
#include <fstream>

namespace maploc {
namespace {

Point2 point_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw DomainError(std::string("expected [x, y] for ") + what);
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json point_to(const Point2& p) { return nlohmann::json::array({p.x(), p.y()}); }

bool same_heading(const Vector2& a, const Vector2& b) {
  return (a.normalized() - b.normalized()).norm() < 1e-9;
}

}  // namespace

ScenarioConfig parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  try {
    std::filesystem::path map = doc.at("map").get<std::string>();
    c.map_path = map.is_relative() && !base_dir.empty() ? base_dir / map : map;
    c.bs = point_from(doc.at("bs"), "bs");
    for (const auto& w : doc.at("waypoints")) {
      c.waypoints.push_back(point_from(w, "waypoint"));
    }
    c.speed = doc.value("speed_mps", c.speed);
    c.sample_period = doc.value("sample_period_s", c.sample_period);
    if (doc.contains("noise")) {
      const auto& n = doc.at("noise");
      c.noise.sigma_tof = n.value("sigma_tof_ns", 0.25) * 1e-9;
      c.noise.sigma_aoa = deg_to_rad(n.value("sigma_aoa_deg", 0.5));
    }
    c.noise.seed = doc.value("seed", std::uint64_t{1});
    if (doc.contains("ekf")) {
      const auto& e = doc.at("ekf");
      c.sigma_a = e.value("sigma_a", c.sigma_a);
      c.p1_scale = e.value("p1_scale", c.p1_scale);
    }
    if (doc.contains("tracer")) {
      const auto& t = doc.at("tracer");
      c.tracer.limits.max_reflections = t.value("max_reflections", c.tracer.limits.max_reflections);
      c.tracer.limits.max_transmissions = t.value("max_transmissions", c.tracer.limits.max_transmissions);
      c.tracer.limits.frequency_hz = t.value("frequency_hz", c.tracer.limits.frequency_hz);
      c.tracer.max_mpcs = t.value("max_mpcs", c.tracer.max_mpcs);
      c.tracer.dynamic_range_db = t.value("dynamic_range_db", c.tracer.dynamic_range_db);
      c.tracer.sensitivity_db = t.value("sensitivity_db", c.tracer.sensitivity_db);
    }
    if (doc.contains("mapat")) {
      const auto& m = doc.at("mapat");
      c.cluster_radius = m.value("cluster_radius_m", c.cluster_radius);
      c.backtrace_depth = m.value("depth_budget", c.backtrace_depth);
      c.max_range = m.value("max_range_m", c.max_range);
    }
    c.monte_carlo_runs = doc.value("monte_carlo_runs", c.monte_carlo_runs);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed scenario: ") + e.what());
  }
  validate(c);
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DomainError("cannot open scenario file: " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("malformed scenario file " + path.string() + ": " + e.what());
  }
  return parse_scenario(doc, path.parent_path());
}

nlohmann::json scenario_to_json(const ScenarioConfig& c) {
  nlohmann::json doc;
  doc["map"] = c.map_path.string();
  doc["bs"] = point_to(c.bs);
  doc["waypoints"] = nlohmann::json::array();
  for (const auto& w : c.waypoints) {
    doc["waypoints"].push_back(point_to(w));
  }
  doc["speed_mps"] = c.speed;
  doc["sample_period_s"] = c.sample_period;
  doc["noise"] = {{"sigma_tof_ns", c.noise.sigma_tof * 1e9}, {"sigma_aoa_deg", rad_to_deg(c.noise.sigma_aoa)}};
  doc["seed"] = c.noise.seed;
  doc["ekf"] = {{"sigma_a", c.sigma_a}, {"p1_scale", c.p1_scale}};
  doc["tracer"] = {{"max_reflections", c.tracer.limits.max_reflections},
                   {"max_transmissions", c.tracer.limits.max_transmissions},
                   {"frequency_hz", c.tracer.limits.frequency_hz},
                   {"max_mpcs", c.tracer.max_mpcs},
                   {"dynamic_range_db", c.tracer.dynamic_range_db},
                   {"sensitivity_db", c.tracer.sensitivity_db}};
  doc["mapat"] = {{"cluster_radius_m", c.cluster_radius},
                  {"depth_budget", c.backtrace_depth},
                  {"max_range_m", c.max_range}};
  doc["monte_carlo_runs"] = c.monte_carlo_runs;
  return doc;
}

void validate(const ScenarioConfig& c) {
  require_finite(c.bs, "BS position");
  if (c.waypoints.size() < 2) {
    throw DomainError("scenario needs at least two waypoints");
  }
  if (!(c.speed > 0.0) || !(c.sample_period > 0.0)) {
    throw DomainError("speed and sample period must be positive");
  }
  if (!(c.noise.sigma_tof >= 0.0) || !(c.noise.sigma_aoa >= 0.0)) {
    throw DomainError("noise standard deviations must be non-negative");
  }
  if (!(c.sigma_a >= 0.0) || !(c.p1_scale > 0.0)) {
    throw DomainError("sigma_a must be non-negative and p1_scale positive");
  }
  if (!(c.cluster_radius > 0.0)) {
    throw DomainError("cluster radius must be positive");
  }
  if (c.backtrace_depth < 0 || c.backtrace_depth > kMaxInteractionDepth) {
    throw DomainError("back-trace depth budget must be within [0, 6]");
  }
  const auto& lim = c.tracer.limits;
  if (lim.max_reflections < 0 || lim.max_transmissions < 0 ||
      lim.max_reflections + lim.max_transmissions > kMaxInteractionDepth) {
    throw DomainError("tracer depth budgets must be non-negative and total at most 6");
  }
  const double step = c.speed * c.sample_period;
  for (std::size_t k = 0; k < c.waypoints.size(); ++k) {
    require_finite(c.waypoints[k], "waypoint");
    if ((c.waypoints[k] - c.bs).norm() <= kSelfHitEpsilon) {
      throw DomainError("waypoint coincides with the BS");
    }
    if (k > 0 && std::abs((c.waypoints[k] - c.waypoints[k - 1]).norm() - step) > 1e-6) {
      throw DomainError("waypoint " + std::to_string(k) + " is not speed * sample_period from its predecessor");
    }
  }
}

Vector2 leg_velocity(const ScenarioConfig& c, std::size_t k) {
  const auto& w = c.waypoints;
  if (k + 1 < w.size()) {
    return (w[k + 1] - w[k]) / c.sample_period;
  }
  return (w[k] - w[k - 1]) / c.sample_period;
}

MotionModel build_motion_model(const ScenarioConfig& c) {
  MotionModel model;
  model.T = c.sample_period;
  model.sigma_a = c.sigma_a;
  const auto& w = c.waypoints;
  for (std::size_t k = 1; k + 1 < w.size(); ++k) {
    const Vector2 in = w[k] - w[k - 1];
    const Vector2 out = w[k + 1] - w[k];
    if (same_heading(in, out)) {
      continue;
    }
    const Vector2 v = out / c.sample_period;
    ControlInput turn;
    turn.u << w[k].x(), v.x(), w[k].y(), v.y();
    model.control_schedule.emplace(k, turn);
  }
  return model;
}

}  // namespace maploc
