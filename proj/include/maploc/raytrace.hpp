#pragma once

#include "maploc/geomap.hpp"
#include "maploc/measurement.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace maploc {

enum class InteractionKind { Reflection, Transmission };

struct Interaction {
  InteractionKind kind;
  WallId wall;
  Point2 point;

  bool operator==(const Interaction&) const = default;
};

const char* to_string(InteractionKind kind);

struct PropagationPath {
  std::vector<Interaction> interactions;  // ordered from the BS outward
  double length = 0.0;
  double aoa_at_bs = 0.0;  // bearing of the first segment leaving the BS
  double path_gain_db = 0.0;

  std::size_t reflection_count() const;
  std::size_t transmission_count() const;
};

struct TraceLimits {
  int max_reflections = 2;
  int max_transmissions = 1;
  double frequency_hz = 142e9;
};

inline constexpr int kMaxInteractionDepth = 6;

/// Enumerates BS -> UE propagation paths with the image method.
///
/// Every ordered sequence of up to `max_reflections` distinct-consecutive walls
/// is mirrored into an image chain and then validated segment by segment:
/// each specular point must land inside its wall, and every other wall a
/// segment crosses becomes a straight-through transmission. Chains that need
/// more than `max_transmissions` penetrations are dropped. The result is
/// deduplicated and sorted by descending path gain.
std::vector<PropagationPath> trace_paths(const MapModel& map, const Point2& bs, const Point2& ue,
                                         const TraceLimits& limits = {});

double free_space_path_loss_db(double length_m, double frequency_hz);

// Friis gain minus the material loss of every interaction.
double path_gain(const PropagationPath& path, const MapModel& map, double frequency_hz);

// Ordered list of points bs, interaction points..., ue.
std::vector<Point2> path_vertices(const Point2& bs, const PropagationPath& path, const Point2& ue);

struct NoiseSpec {
  double sigma_tof = 0.0;  // seconds
  double sigma_aoa = 0.0;  // radians
  std::uint64_t seed = 0;
};

// Keeps the `max_mpcs` strongest paths with gain >= min_gain_db and emits
// noisy AoA/ToF for each. An empty result is an outage.
std::vector<MpcMeasurement> synthesize_measurements(std::span<const PropagationPath> paths,
                                                    const NoiseSpec& noise, std::size_t max_mpcs,
                                                    double min_gain_db);

// Absolute detection floor: `dynamic_range_db` below the strongest path,
// never below `sensitivity_db`.
double detection_floor_db(std::span<const PropagationPath> paths, double dynamic_range_db,
                          double sensitivity_db);

// Derives an independent 64-bit stream seed from a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace maploc
