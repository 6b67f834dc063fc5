#pragma once

#include "maploc/geomap.hpp"
#include "maploc/measurement.hpp"
#include "maploc/raytrace.hpp"

#include <optional>
#include <span>
#include <vector>

namespace maploc {

// A hypothesised UE position at the end of one back-traced branch.
struct CandidateLocation {
  Point2 position;
  std::vector<Interaction> interactions;
  int source_mpc = 0;
  bool ends_on_wall = false;  // range budget ran out exactly on a wall
  // |measured power - gain predicted for this branch|, when both are known.
  std::optional<double> power_mismatch_db;
};

struct BacktraceOptions {
  int depth_budget = 4;
  double max_range_m = 500.0;
  // Enables power_mismatch_db on candidates of MPCs that carry a power.
  std::optional<double> frequency_hz;
};

/// Back-traces one MPC from the BS along its AoA with range c*ToF.
///
/// At every wall hit inside the remaining range the branch splits into a
/// specular reflection and a straight penetration, each consuming one unit of
/// depth. Once depth is exhausted the ray runs straight to the end of its
/// range, ignoring walls. Each branch ends in one candidate, so the result
/// always has at least one element and at most 2^depth_budget.
std::vector<CandidateLocation> backtrace_candidates(const MapModel& map, const Point2& bs,
                                                    const MpcMeasurement& mpc,
                                                    const BacktraceOptions& options = {});

// Length of the polyline bs -> interaction points -> candidate position.
double replay_length(const Point2& bs, const CandidateLocation& candidate);

struct PositionFix {
  Point2 position;
  int support = 0;        // distinct MPCs in the winning cluster
  double residual = 0.0;  // RMS distance of members to the centroid
  std::vector<CandidateLocation> per_mpc_paths;
};

inline constexpr double kDefaultClusterRadius = 0.5;
// Residuals closer than this are treated as equal when ranking clusters.
inline constexpr double kResidualTieTolerance = 1e-9;
inline constexpr double kPowerTieToleranceDb = 1e-6;

/// Clusters candidates across MPCs.
///
/// Every candidate seeds a cluster that takes, from each MPC, its nearest
/// candidate within `cluster_radius` of the seed. The winning cluster has the
/// largest support; ties go to the smaller residual, then the smaller total
/// power mismatch (zero when powers are unknown), then the fewest total
/// interactions, then the lowest MPC id. Returns nothing when fewer than two
/// MPCs contribute candidates or the best support is one.
std::optional<PositionFix> estimate_position(std::span<const std::vector<CandidateLocation>> candidate_sets,
                                             double cluster_radius = kDefaultClusterRadius);

}  // namespace maploc
