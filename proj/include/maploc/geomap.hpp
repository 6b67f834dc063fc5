#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace maploc {

using Point2 = Eigen::Vector2d;
using Vector2 = Eigen::Vector2d;
using WallId = std::size_t;

// Rays never re-hit the surface they start on.
inline constexpr double kSelfHitEpsilon = 1e-9;
inline constexpr double kMinWallLength = 1e-9;

struct Material {
  double reflection_loss_db = 5.0;
  double penetration_loss_db = 15.0;
};

struct Wall {
  Point2 a;
  Point2 b;
  std::string material;

  double length() const { return (b - a).norm(); }
  Vector2 tangent() const { return (b - a).normalized(); }
  // Left-hand unit normal of a->b.
  Vector2 normal() const;
};

struct Bounds {
  Point2 lo;
  Point2 hi;

  bool contains(const Point2& p, double tol = 1e-9) const;
};

/// Immutable 2D site map: wall segments plus a material table.
///
/// Construction validates every wall (finite, non-degenerate, known material)
/// and that all walls lie inside the bounds. When no bounds are given the
/// bounding box of the walls is used.
class MapModel {
 public:
  MapModel() = default;
  MapModel(std::vector<Wall> walls, std::map<std::string, Material> materials,
           std::optional<Bounds> bounds = std::nullopt);

  const std::vector<Wall>& walls() const { return walls_; }
  const Wall& wall(WallId id) const { return walls_.at(id); }
  const std::map<std::string, Material>& materials() const { return materials_; }
  const Material& material_of(WallId id) const;
  const std::optional<Bounds>& bounds() const { return bounds_; }
  bool empty() const { return walls_.empty(); }

 private:
  std::vector<Wall> walls_;
  std::map<std::string, Material> materials_;
  std::optional<Bounds> bounds_;
};

MapModel parse_map(const nlohmann::json& doc);
MapModel load_map(const std::filesystem::path& path);
nlohmann::json map_to_json(const MapModel& map);

struct RayHit {
  WallId wall;
  Point2 point;
  double distance;
};

// Nearest wall intersection with distance in (kSelfHitEpsilon, max_range].
std::optional<RayHit> ray_first_hit(const Point2& origin, const Vector2& direction,
                                    const MapModel& map, double max_range);

// Every wall crossed strictly inside the open segment from -> to (both end
// neighbourhoods of kSelfHitEpsilon excluded), ordered by distance from `from`.
std::vector<RayHit> segment_crossings(const Point2& from, const Point2& to, const MapModel& map);

Point2 mirror_point(const Point2& p, const Wall& wall);
Vector2 reflect_direction(const Vector2& d, const Wall& wall);

// Azimuth counter-clockwise from +x, radians in (-pi, pi].
double bearing_of(const Vector2& v);
Vector2 unit_from_bearing(double bearing);
double wrap_angle(double radians);
double deg_to_rad(double degrees);
double rad_to_deg(double radians);

void require_finite(const Point2& p, const char* what);

}  // namespace maploc
