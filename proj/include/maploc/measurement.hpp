#pragma once

#include <optional>

namespace maploc {

// Exact, in m/s.
inline constexpr double kSpeedOfLight = 299'792'458.0;

// One multipath component as observed at the base station.
struct MpcMeasurement {
  int id = 0;
  double aoa = 0.0;  // arrival bearing at the BS, radians
  double tof = 0.0;  // seconds
  std::optional<double> power_db;
};

}  // namespace maploc
