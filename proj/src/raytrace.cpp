#include "maploc/raytrace.hpp"

#include "maploc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace maploc {
namespace {

double cross(const Vector2& u, const Vector2& v) { return u.x() * v.y() - u.y() * v.x(); }

// Intersection of the open segment p -> q with wall w, returned only when it
// falls strictly inside p -> q and inside the wall segment.
std::optional<Point2> specular_point(const Point2& p, const Point2& q, const Wall& w) {
  const Vector2 d = q - p;
  const Vector2 e = w.b - w.a;
  const double denom = cross(d, e);
  if (std::abs(denom) <= 1e-15 * d.norm() * e.norm()) {
    return std::nullopt;
  }
  const Vector2 ap = w.a - p;
  const double lambda = cross(ap, e) / denom;
  const double s = cross(ap, d) / denom;
  const double len = d.norm();
  if (s < 0.0 || s > 1.0 || lambda * len <= kSelfHitEpsilon || (1.0 - lambda) * len <= kSelfHitEpsilon) {
    return std::nullopt;
  }
  return p + lambda * d;
}

struct Tracer {
  const MapModel& map;
  Point2 bs;
  Point2 ue;
  TraceLimits limits;
  std::vector<PropagationPath> out;

  void enumerate(std::vector<WallId>& sequence, std::vector<Point2>& images) {
    build(sequence, images);
    if (static_cast<int>(sequence.size()) >= limits.max_reflections) {
      return;
    }
    for (WallId id = 0; id < map.walls().size(); ++id) {
      if (!sequence.empty() && sequence.back() == id) {
        continue;
      }
      sequence.push_back(id);
      images.push_back(mirror_point(images.back(), map.wall(id)));
      enumerate(sequence, images);
      images.pop_back();
      sequence.pop_back();
    }
  }

  // Walks the image chain backwards from the UE and, if every specular point
  // is valid, emits the path with transmissions inserted.
  void build(const std::vector<WallId>& sequence, const std::vector<Point2>& images) {
    const std::size_t k = sequence.size();
    std::vector<Point2> reflection_points(k);
    Point2 target = ue;
    for (std::size_t j = k; j-- > 0;) {
      const auto p = specular_point(target, images[j + 1], map.wall(sequence[j]));
      if (!p) {
        return;
      }
      reflection_points[j] = *p;
      target = *p;
    }

    std::vector<Point2> vertices;
    vertices.reserve(k + 2);
    vertices.push_back(bs);
    vertices.insert(vertices.end(), reflection_points.begin(), reflection_points.end());
    vertices.push_back(ue);

    PropagationPath path;
    int transmissions = 0;
    for (std::size_t s = 0; s + 1 < vertices.size(); ++s) {
      const double seg = (vertices[s + 1] - vertices[s]).norm();
      if (seg <= kSelfHitEpsilon) {
        return;
      }
      path.length += seg;
      for (const auto& hit : segment_crossings(vertices[s], vertices[s + 1], map)) {
        if (++transmissions > limits.max_transmissions) {
          return;
        }
        path.interactions.push_back(Interaction{InteractionKind::Transmission, hit.wall, hit.point});
      }
      if (s < k) {
        path.interactions.push_back(Interaction{InteractionKind::Reflection, sequence[s], vertices[s + 1]});
      }
    }
    path.aoa_at_bs = bearing_of(vertices[1] - vertices[0]);
    path.path_gain_db = path_gain(path, map, limits.frequency_hz);
    out.push_back(std::move(path));
  }
};

bool same_geometry(const PropagationPath& l, const PropagationPath& r) {
  if (l.interactions.size() != r.interactions.size() || std::abs(l.length - r.length) > 1e-9) {
    return false;
  }
  for (std::size_t i = 0; i < l.interactions.size(); ++i) {
    if (l.interactions[i].kind != r.interactions[i].kind ||
        (l.interactions[i].point - r.interactions[i].point).norm() > 1e-9) {
      return false;
    }
  }
  return true;
}

bool wall_sequence_less(const PropagationPath& l, const PropagationPath& r) {
  return std::lexicographical_compare(
      l.interactions.begin(), l.interactions.end(), r.interactions.begin(), r.interactions.end(),
      [](const Interaction& a, const Interaction& b) {
        return a.wall < b.wall || (a.wall == b.wall && a.kind < b.kind);
      });
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

const char* to_string(InteractionKind kind) {
  return kind == InteractionKind::Reflection ? "reflection" : "transmission";
}

std::size_t PropagationPath::reflection_count() const {
  return static_cast<std::size_t>(std::count_if(interactions.begin(), interactions.end(), [](const auto& i) {
    return i.kind == InteractionKind::Reflection;
  }));
}

std::size_t PropagationPath::transmission_count() const {
  return interactions.size() - reflection_count();
}

std::vector<PropagationPath> trace_paths(const MapModel& map, const Point2& bs, const Point2& ue,
                                         const TraceLimits& limits) {
  require_finite(bs, "BS position");
  require_finite(ue, "UE position");
  if ((bs - ue).norm() <= kSelfHitEpsilon) {
    throw DomainError("BS and UE coincide");
  }
  if (limits.max_reflections < 0 || limits.max_transmissions < 0) {
    throw DomainError("interaction budgets must be non-negative");
  }
  if (limits.max_reflections + limits.max_transmissions > kMaxInteractionDepth) {
    throw DomainError("total interaction budget exceeds 6");
  }
  if (!(limits.frequency_hz > 0.0)) {
    throw DomainError("carrier frequency must be positive");
  }

  Tracer tracer{map, bs, ue, limits, {}};
  std::vector<WallId> sequence;
  std::vector<Point2> images{bs};
  tracer.enumerate(sequence, images);

  auto paths = std::move(tracer.out);
  std::stable_sort(paths.begin(), paths.end(), [](const PropagationPath& l, const PropagationPath& r) {
    if (l.path_gain_db != r.path_gain_db) {
      return l.path_gain_db > r.path_gain_db;
    }
    if (l.length != r.length) {
      return l.length < r.length;
    }
    if (l.interactions.size() != r.interactions.size()) {
      return l.interactions.size() < r.interactions.size();
    }
    return wall_sequence_less(l, r);
  });

  std::vector<PropagationPath> unique;
  for (auto& p : paths) {
    const bool dup = std::any_of(unique.begin(), unique.end(), [&](const auto& u) { return same_geometry(u, p); });
    if (!dup) {
      unique.push_back(std::move(p));
    }
  }
  return unique;
}

double free_space_path_loss_db(double length_m, double frequency_hz) {
  if (!(length_m > 0.0) || !(frequency_hz > 0.0)) {
    throw DomainError("path length and frequency must be positive");
  }
  return 20.0 * std::log10(4.0 * std::numbers::pi * length_m * frequency_hz / kSpeedOfLight);
}

double path_gain(const PropagationPath& path, const MapModel& map, double frequency_hz) {
  double gain = -free_space_path_loss_db(path.length, frequency_hz);
  for (const auto& i : path.interactions) {
    const auto& m = map.material_of(i.wall);
    gain -= i.kind == InteractionKind::Reflection ? m.reflection_loss_db : m.penetration_loss_db;
  }
  return gain;
}

std::vector<Point2> path_vertices(const Point2& bs, const PropagationPath& path, const Point2& ue) {
  std::vector<Point2> v{bs};
  for (const auto& i : path.interactions) {
    v.push_back(i.point);
  }
  v.push_back(ue);
  return v;
}

std::vector<MpcMeasurement> synthesize_measurements(std::span<const PropagationPath> paths,
                                                    const NoiseSpec& noise, std::size_t max_mpcs,
                                                    double min_gain_db) {
  if (!(noise.sigma_tof >= 0.0) || !(noise.sigma_aoa >= 0.0)) {
    throw DomainError("noise standard deviations must be non-negative");
  }
  std::vector<const PropagationPath*> kept;
  for (const auto& p : paths) {
    if (p.path_gain_db >= min_gain_db) {
      kept.push_back(&p);
    }
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto* l, const auto* r) { return l->path_gain_db > r->path_gain_db; });
  if (kept.size() > max_mpcs) {
    kept.resize(max_mpcs);
  }

  // Separate streams so that changing one sigma leaves the other's draws intact.
  std::mt19937_64 tof_rng(derive_seed(noise.seed, 0));
  std::mt19937_64 aoa_rng(derive_seed(noise.seed, 1));
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::normal_distribution<double> unit_normal_aoa(0.0, 1.0);

  std::vector<MpcMeasurement> out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const double tof_noise = unit_normal(tof_rng) * noise.sigma_tof;
    const double aoa_noise = unit_normal_aoa(aoa_rng) * noise.sigma_aoa;
    MpcMeasurement m;
    m.id = static_cast<int>(i);
    m.tof = kept[i]->length / kSpeedOfLight + tof_noise;
    m.aoa = noise.sigma_aoa == 0.0 ? kept[i]->aoa_at_bs : wrap_angle(kept[i]->aoa_at_bs + aoa_noise);
    m.power_db = kept[i]->path_gain_db;
    out.push_back(m);
  }
  return out;
}

double detection_floor_db(std::span<const PropagationPath> paths, double dynamic_range_db,
                          double sensitivity_db) {
  double strongest = -std::numeric_limits<double>::infinity();
  for (const auto& p : paths) {
    strongest = std::max(strongest, p.path_gain_db);
  }
  return std::max(strongest - dynamic_range_db, sensitivity_db);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) + stream);
}

}  // namespace maploc
