#include "maploc/errors.hpp"
#include "maploc/raytrace.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace maploc;

namespace {

const std::map<std::string, Material> kMaterials{{"default", Material{5.0, 15.0}}};

MapModel wall_x10() { return MapModel({Wall{{10, -5}, {10, 5}, "default"}}, kMaterials); }

MapModel random_map(std::mt19937_64& rng, int walls) {
  std::uniform_real_distribution<double> coord(-15.0, 15.0);
  std::vector<Wall> w;
  for (int i = 0; i < walls; ++i) {
    w.push_back(Wall{{coord(rng), coord(rng)}, {coord(rng), coord(rng)}, "default"});
  }
  return MapModel(std::move(w), kMaterials);
}

std::vector<double> sorted_lengths(const std::vector<PropagationPath>& paths) {
  std::vector<double> l;
  for (const auto& p : paths) {
    l.push_back(p.length);
  }
  std::sort(l.begin(), l.end());
  return l;
}

double point_to_segment(const Point2& p, const Wall& w) {
  const Vector2 e = w.b - w.a;
  const double s = std::clamp((p - w.a).dot(e) / e.squaredNorm(), 0.0, 1.0);
  return (w.a + s * e - p).norm();
}

}  // namespace

TEST_CASE("trace_paths: direct plus single reflection") {
  const auto paths = trace_paths(wall_x10(), {0, 0}, {6, 0}, TraceLimits{1, 0, 142e9});
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].interactions.empty());
  CHECK(paths[0].length == doctest::Approx(6.0));
  CHECK(paths[1].length == doctest::Approx(14.0));
  REQUIRE(paths[1].interactions.size() == 1);
  CHECK(paths[1].interactions[0].kind == InteractionKind::Reflection);
  CHECK((paths[1].interactions[0].point - Point2(10, 0)).norm() < 1e-12);
  CHECK(paths[1].aoa_at_bs == doctest::Approx(0.0));
}

TEST_CASE("trace_paths: collinear penetration") {
  const auto paths = trace_paths(wall_x10(), {0, 0}, {14, 0}, TraceLimits{0, 1, 142e9});
  REQUIRE(paths.size() == 1);
  REQUIRE(paths[0].interactions.size() == 1);
  CHECK(paths[0].interactions[0].kind == InteractionKind::Transmission);
  CHECK((paths[0].interactions[0].point - Point2(10, 0)).norm() < 1e-12);
  CHECK(paths[0].length == doctest::Approx(14.0));

  // Without a transmission budget the wall blocks everything.
  CHECK(trace_paths(wall_x10(), {0, 0}, {14, 0}, TraceLimits{0, 0, 142e9}).empty());
}

TEST_CASE("trace_paths: empty map yields the direct path only") {
  const auto paths = trace_paths(MapModel(), {1, 2}, {4, 6}, TraceLimits{2, 1, 142e9});
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].interactions.empty());
  CHECK(paths[0].length == doctest::Approx(5.0));
  CHECK(paths[0].aoa_at_bs == doctest::Approx(std::atan2(4.0, 3.0)));
}

TEST_CASE("trace_paths: input-domain errors") {
  CHECK_THROWS_AS(trace_paths(MapModel(), {1, 1}, {1, 1}), DomainError);
  CHECK_THROWS_AS(trace_paths(MapModel(), {0, 0}, {1, 1}, TraceLimits{5, 2, 142e9}), DomainError);
  CHECK_THROWS_AS(trace_paths(MapModel(), {0, 0}, {1, 1}, TraceLimits{-1, 0, 142e9}), DomainError);
}

TEST_CASE("trace_paths: two-bounce corridor") {
  // Parallel walls y = +-2; BS and UE inside.
  const MapModel map({Wall{{-50, 2}, {50, 2}, "default"}, Wall{{-50, -2}, {50, -2}, "default"}}, kMaterials);
  const auto paths = trace_paths(map, {0, 0}, {10, 0}, TraceLimits{2, 0, 142e9});
  // direct, one bounce off each wall, and two two-bounce orderings.
  REQUIRE(paths.size() == 5);
  const auto lengths = sorted_lengths(paths);
  CHECK(lengths[0] == doctest::Approx(10.0));
  CHECK(lengths[1] == doctest::Approx(std::hypot(10.0, 4.0)));
  CHECK(lengths[2] == doctest::Approx(std::hypot(10.0, 4.0)));
  CHECK(lengths[3] == doctest::Approx(std::hypot(10.0, 8.0)));
  CHECK(lengths[4] == doctest::Approx(std::hypot(10.0, 8.0)));
  for (std::size_t i = 1; i < paths.size(); ++i) {
    CHECK(paths[i - 1].path_gain_db >= paths[i].path_gain_db);
  }
}

TEST_CASE("path_gain: free-space and material losses") {
  // 20 log10(4 pi d f / c) at d = 10 m, f = 142 GHz, evaluated independently.
  const double expected = 20.0 * std::log10(4.0 * 3.141592653589793 * 10.0 * 142e9 / 299792458.0);
  CHECK(expected == doctest::Approx(95.5).epsilon(0.1 / 95.5));
  CHECK(free_space_path_loss_db(10.0, 142e9) == doctest::Approx(expected).epsilon(1e-12));

  PropagationPath p;
  p.length = 10.0;
  const MapModel map = wall_x10();
  CHECK(path_gain(p, map, 142e9) == doctest::Approx(-expected).epsilon(1e-12));
  p.interactions.push_back(Interaction{InteractionKind::Reflection, 0, {10, 0}});
  CHECK(path_gain(p, map, 142e9) == doctest::Approx(-expected - 5.0).epsilon(1e-12));
  p.interactions.push_back(Interaction{InteractionKind::Transmission, 0, {10, 0}});
  CHECK(path_gain(p, map, 142e9) == doctest::Approx(-expected - 20.0).epsilon(1e-12));
}

TEST_CASE("synthesize_measurements: noiseless, capped, and outage") {
  const auto paths = trace_paths(wall_x10(), {0, 0}, {6, 0}, TraceLimits{1, 0, 142e9});
  const auto z = synthesize_measurements(paths, NoiseSpec{0.0, 0.0, 42}, 5, -1e9);
  REQUIRE(z.size() == 2);
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(z[i].id == static_cast<int>(i));
    CHECK(z[i].tof == paths[i].length / kSpeedOfLight);
    CHECK(z[i].aoa == paths[i].aoa_at_bs);
  }
  CHECK(synthesize_measurements(paths, NoiseSpec{}, 1, -1e9).size() == 1);
  CHECK(synthesize_measurements(paths, NoiseSpec{}, 0, -1e9).empty());
  // Floor between the two path gains keeps only the direct path.
  const double mid = 0.5 * (paths[0].path_gain_db + paths[1].path_gain_db);
  CHECK(synthesize_measurements(paths, NoiseSpec{}, 5, mid).size() == 1);
  CHECK(synthesize_measurements(paths, NoiseSpec{}, 5, 0.0).empty());
  CHECK_THROWS_AS(synthesize_measurements(paths, NoiseSpec{-1.0, 0.0, 1}, 5, -1e9), DomainError);
}

TEST_CASE("synthesize_measurements: determinism and independent streams") {
  const auto paths = trace_paths(wall_x10(), {0, 0}, {6, 3}, TraceLimits{1, 0, 142e9});
  const NoiseSpec noise{0.25e-9, deg_to_rad(0.5), 99};
  const auto a = synthesize_measurements(paths, noise, 5, -1e9);
  const auto b = synthesize_measurements(paths, noise, 5, -1e9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tof == b[i].tof);
    CHECK(a[i].aoa == b[i].aoa);
  }
  // Changing the ToF sigma leaves the AoA draws untouched and scales ToF noise exactly.
  const auto c = synthesize_measurements(paths, NoiseSpec{0.5e-9, noise.sigma_aoa, 99}, 5, -1e9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(c[i].aoa == a[i].aoa);
    const double base = paths[i].length / kSpeedOfLight;
    CHECK((c[i].tof - base) == doctest::Approx(2.0 * (a[i].tof - base)).epsilon(1e-6));
  }
}

TEST_CASE("synthesize_measurements: ToF noise sample std") {
  PropagationPath p;
  p.length = 30.0;
  p.path_gain_db = -100.0;
  const std::vector<PropagationPath> many(10000, p);
  const double sigma = 0.25e-9;
  const auto z = synthesize_measurements(many, NoiseSpec{sigma, 0.0, 2024}, many.size(), -1e9);
  REQUIRE(z.size() == many.size());
  std::vector<double> e;
  for (const auto& m : z) {
    e.push_back(m.tof - p.length / kSpeedOfLight);
  }
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / e.size();
  double ss = 0.0;
  for (double v : e) {
    ss += (v - mean) * (v - mean);
  }
  const double std_dev = std::sqrt(ss / (e.size() - 1));
  CHECK(std::abs(std_dev - sigma) < 0.05 * sigma);
}

TEST_CASE("detection_floor_db") {
  std::vector<PropagationPath> paths(2);
  paths[0].path_gain_db = -100.0;
  paths[1].path_gain_db = -120.0;
  CHECK(detection_floor_db(paths, 60.0, -1000.0) == doctest::Approx(-160.0));
  CHECK(detection_floor_db(paths, 60.0, -110.0) == doctest::Approx(-110.0));
}

TEST_CASE("trace_paths properties on random maps") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_int_distribution<int> nwalls(0, 8);
  const TraceLimits limits{2, 1, 142e9};
  for (int trial = 0; trial < 60; ++trial) {
    const auto map = random_map(rng, nwalls(rng));
    const Point2 bs(coord(rng), coord(rng));
    const Point2 ue(coord(rng), coord(rng));
    const auto fwd = trace_paths(map, bs, ue, limits);
    const auto rev = trace_paths(map, ue, bs, limits);

    // Reciprocity.
    const auto lf = sorted_lengths(fwd);
    const auto lr = sorted_lengths(rev);
    REQUIRE(lf.size() == lr.size());
    for (std::size_t i = 0; i < lf.size(); ++i) {
      CHECK(std::abs(lf[i] - lr[i]) < 1e-9);
    }

    for (const auto& p : fwd) {
      const auto v = path_vertices(bs, p, ue);
      double len = 0.0;
      for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        len += (v[i + 1] - v[i]).norm();
      }
      CHECK(std::abs(len - p.length) < 1e-9);
      CHECK(p.length >= (ue - bs).norm() - 1e-9);
      CHECK(p.path_gain_db <= -free_space_path_loss_db(p.length, limits.frequency_hz) + 1e-12);
      CHECK(static_cast<int>(p.reflection_count()) <= limits.max_reflections);
      CHECK(static_cast<int>(p.transmission_count()) <= limits.max_transmissions);
      CHECK(p.aoa_at_bs == doctest::Approx(bearing_of(v[1] - v[0])));

      for (std::size_t i = 0; i < p.interactions.size(); ++i) {
        const auto& in = p.interactions[i];
        const Wall& w = map.wall(in.wall);
        CHECK(point_to_segment(in.point, w) < 1e-9);
        const Vector2 d_in = (v[i + 1] - v[i]).normalized();
        const Vector2 d_out = (v[i + 2] - v[i + 1]).normalized();
        if (in.kind == InteractionKind::Reflection) {
          // Specular: equal angles to the wall normal, on the same side.
          const Vector2 n = w.normal();
          CHECK(std::abs(std::acos(std::clamp(std::abs(d_in.dot(n)), 0.0, 1.0)) -
                         std::acos(std::clamp(std::abs(d_out.dot(n)), 0.0, 1.0))) < 1e-9);
          CHECK(d_in.dot(n) * d_out.dot(n) < 0.0);
          CHECK(std::abs(d_in.dot(w.tangent()) - d_out.dot(w.tangent())) < 1e-9);
        } else {
          CHECK((d_in - d_out).norm() < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("trace_paths: path count monotone in depth budget") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto map = random_map(rng, 6);
    const Point2 bs(coord(rng), coord(rng));
    const Point2 ue(coord(rng), coord(rng));
    std::size_t prev = 0;
    for (int r = 0; r <= 3; ++r) {
      const auto n = trace_paths(map, bs, ue, TraceLimits{r, 1, 142e9}).size();
      CHECK(n >= prev);
      prev = n;
    }
    CHECK(trace_paths(map, bs, ue, TraceLimits{2, 2, 142e9}).size() >=
          trace_paths(map, bs, ue, TraceLimits{2, 1, 142e9}).size());
  }
}
