#include "maploc/geomap.hpp"

#include "maploc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace maploc {
namespace {

double cross(const Vector2& u, const Vector2& v) { return u.x() * v.y() - u.y() * v.x(); }

bool finite(const Point2& p) { return std::isfinite(p.x()) && std::isfinite(p.y()); }

void check_wall(const Wall& w) {
  if (!finite(w.a) || !finite(w.b)) {
    throw DomainError("wall endpoint is not finite");
  }
  if (w.length() <= kMinWallLength) {
    throw DomainError("degenerate wall: endpoints coincide");
  }
}

// Parametric intersection of the ray origin + t*dir with segment a + s*(b - a).
// Returns (t, s) or nothing for parallel/collinear configurations.
std::optional<std::pair<double, double>> intersect(const Point2& origin, const Vector2& dir,
                                                   const Wall& w) {
  const Vector2 e = w.b - w.a;
  const double denom = cross(dir, e);
  if (std::abs(denom) <= 1e-15 * dir.norm() * e.norm()) {
    return std::nullopt;
  }
  const Vector2 ao = w.a - origin;
  return std::make_pair(cross(ao, e) / denom, cross(ao, dir) / denom);
}

Point2 point_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw DomainError(std::string("expected [x, y] for ") + what);
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Vector2 Wall::normal() const {
  const Vector2 t = tangent();
  return {-t.y(), t.x()};
}

bool Bounds::contains(const Point2& p, double tol) const {
  return p.x() >= lo.x() - tol && p.y() >= lo.y() - tol && p.x() <= hi.x() + tol &&
         p.y() <= hi.y() + tol;
}

MapModel::MapModel(std::vector<Wall> walls, std::map<std::string, Material> materials,
                   std::optional<Bounds> bounds)
    : walls_(std::move(walls)), materials_(std::move(materials)), bounds_(std::move(bounds)) {
  for (const auto& [id, m] : materials_) {
    if (!std::isfinite(m.reflection_loss_db) || !std::isfinite(m.penetration_loss_db) ||
        m.reflection_loss_db < 0.0 || m.penetration_loss_db < 0.0) {
      throw DomainError("material '" + id + "' has a negative or non-finite loss");
    }
  }
  for (const auto& w : walls_) {
    check_wall(w);
    if (!materials_.contains(w.material)) {
      throw DomainError("wall references unknown material '" + w.material + "'");
    }
  }
  if (!bounds_ && !walls_.empty()) {
    Bounds box{walls_.front().a, walls_.front().a};
    for (const auto& w : walls_) {
      box.lo = box.lo.cwiseMin(w.a).cwiseMin(w.b);
      box.hi = box.hi.cwiseMax(w.a).cwiseMax(w.b);
    }
    bounds_ = box;
  }
  if (bounds_) {
    for (const auto& w : walls_) {
      if (!bounds_->contains(w.a) || !bounds_->contains(w.b)) {
        throw DomainError("wall lies outside the map bounds");
      }
    }
  }
}

const Material& MapModel::material_of(WallId id) const {
  return materials_.at(walls_.at(id).material);
}

MapModel parse_map(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw DomainError("map document must be a JSON object");
  }
  std::map<std::string, Material> materials;
  if (doc.contains("materials")) {
    for (const auto& [id, m] : doc.at("materials").items()) {
      materials[id] = Material{m.value("reflection_loss_db", 5.0), m.value("penetration_loss_db", 15.0)};
    }
  }
  std::vector<Wall> walls;
  if (doc.contains("walls")) {
    for (const auto& w : doc.at("walls")) {
      walls.push_back(Wall{point_from_json(w.at("a"), "wall.a"), point_from_json(w.at("b"), "wall.b"),
                           w.value("material", std::string("default"))});
    }
  }
  std::optional<Bounds> bounds;
  if (doc.contains("bounds")) {
    const auto& b = doc.at("bounds");
    bounds = Bounds{point_from_json(b.at("min"), "bounds.min"), point_from_json(b.at("max"), "bounds.max")};
  }
  return MapModel(std::move(walls), std::move(materials), bounds);
}

MapModel load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DomainError("cannot open map file: " + path.string());
  }
  try {
    return parse_map(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("malformed map file " + path.string() + ": " + e.what());
  }
}

nlohmann::json map_to_json(const MapModel& map) {
  nlohmann::json doc;
  doc["materials"] = nlohmann::json::object();
  for (const auto& [id, m] : map.materials()) {
    doc["materials"][id] = {{"reflection_loss_db", m.reflection_loss_db},
                            {"penetration_loss_db", m.penetration_loss_db}};
  }
  doc["walls"] = nlohmann::json::array();
  for (const auto& w : map.walls()) {
    doc["walls"].push_back({{"a", {w.a.x(), w.a.y()}}, {"b", {w.b.x(), w.b.y()}}, {"material", w.material}});
  }
  if (map.bounds()) {
    doc["bounds"] = {{"min", {map.bounds()->lo.x(), map.bounds()->lo.y()}},
                     {"max", {map.bounds()->hi.x(), map.bounds()->hi.y()}}};
  }
  return doc;
}

std::optional<RayHit> ray_first_hit(const Point2& origin, const Vector2& direction,
                                    const MapModel& map, double max_range) {
  require_finite(origin, "ray origin");
  require_finite(direction, "ray direction");
  if (!std::isfinite(max_range) || max_range <= 0.0) {
    throw DomainError("max_range must be positive and finite");
  }
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    throw DomainError("ray direction must be unit-norm");
  }

  std::optional<RayHit> best;
  for (WallId id = 0; id < map.walls().size(); ++id) {
    const auto ts = intersect(origin, direction, map.walls()[id]);
    if (!ts) {
      continue;
    }
    const auto [t, s] = *ts;
    if (s < 0.0 || s > 1.0 || t <= kSelfHitEpsilon || t > max_range) {
      continue;
    }
    if (!best || t < best->distance) {
      best = RayHit{id, origin + t * direction, t};
    }
  }
  return best;
}

std::vector<RayHit> segment_crossings(const Point2& from, const Point2& to, const MapModel& map) {
  require_finite(from, "segment start");
  require_finite(to, "segment end");
  const double len = (to - from).norm();
  std::vector<RayHit> hits;
  if (len <= 2.0 * kSelfHitEpsilon) {
    return hits;
  }
  const Vector2 dir = (to - from) / len;
  for (WallId id = 0; id < map.walls().size(); ++id) {
    const auto ts = intersect(from, dir, map.walls()[id]);
    if (!ts) {
      continue;
    }
    const auto [t, s] = *ts;
    if (s < 0.0 || s > 1.0 || t <= kSelfHitEpsilon || t >= len - kSelfHitEpsilon) {
      continue;
    }
    hits.push_back(RayHit{id, from + t * dir, t});
  }
  std::sort(hits.begin(), hits.end(), [](const RayHit& l, const RayHit& r) {
    return l.distance < r.distance || (l.distance == r.distance && l.wall < r.wall);
  });
  return hits;
}

Point2 mirror_point(const Point2& p, const Wall& wall) {
  require_finite(p, "mirrored point");
  check_wall(wall);
  const Vector2 n = wall.normal();
  return p - 2.0 * (p - wall.a).dot(n) * n;
}

Vector2 reflect_direction(const Vector2& d, const Wall& wall) {
  require_finite(d, "reflected direction");
  check_wall(wall);
  const Vector2 n = wall.normal();
  return (d - 2.0 * d.dot(n) * n).normalized();
}

double bearing_of(const Vector2& v) { return std::atan2(v.y(), v.x()); }

Vector2 unit_from_bearing(double bearing) { return {std::cos(bearing), std::sin(bearing)}; }

double wrap_angle(double radians) {
  double a = std::remainder(radians, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) {
    a += 2.0 * std::numbers::pi;
  }
  return a;
}

double deg_to_rad(double degrees) { return degrees * std::numbers::pi / 180.0; }
double rad_to_deg(double radians) { return radians * 180.0 / std::numbers::pi; }

void require_finite(const Point2& p, const char* what) {
  if (!finite(p)) {
    throw DomainError(std::string(what) + " is not finite");
  }
}

}  // namespace maploc
