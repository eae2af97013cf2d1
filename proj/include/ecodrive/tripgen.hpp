#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ecodrive/telemetry.hpp"

namespace ecodrive::tripgen {

enum class DrivingStyle { Smooth, Aggressive, Mixed };

std::string_view to_string(DrivingStyle s) noexcept;
DrivingStyle parse_style(std::string_view s);

struct DriverProfile {
  DrivingStyle style = DrivingStyle::Smooth;
  double target_speed_kmh = 90.0;   ///< personal cruise cap
  double limit_factor = 0.95;       ///< fraction of the posted limit aimed for
  double accel_mps2 = 1.2;
  double brake_decel_mps2 = 1.2;
  double lateral_comfort_mps2 = 1.5;
  double rpm_per_kmh = 100.0;       ///< first-gear ratio
  double shift_rpm = 2200.0;
  double post_shift_rpm = 1500.0;
  double hr_base_bpm = 62.0;
  double hr_stress_gain = 4.0;      ///< bpm per m/s^2 of recent |accel|
  std::uint64_t seed = 1;

  /// Magnitudes positive, post_shift_rpm < shift_rpm.
  bool valid() const noexcept;
};

DriverProfile smooth_profile(std::uint64_t seed);
DriverProfile aggressive_profile(std::uint64_t seed);
DriverProfile mixed_profile(std::uint64_t seed);
DriverProfile profile_for(DrivingStyle style, std::uint64_t seed);

struct RouteSegment {
  double length_m = 0.0;
  double speed_limit_kmh = 0.0;
  double curvature_inv_m = 0.0;  ///< signed; positive turns left

  bool operator==(const RouteSegment&) const = default;
};

using Route = std::vector<RouteSegment>;

/// `length_m,speed_limit_kmh,curvature_inv_m` per line. Blank lines and `#`
/// comments are ignored. Throws MalformedRoute with the line number.
Route parse_route(std::string_view text);
std::string format_route(const Route& route);

/// Roughly 3 km of city driving: limit changes and a few tight corners.
Route default_urban_route();
/// Straight 12 km run at a steady 80 km/h limit.
Route default_highway_route();

/// Coordinates of the route's start.
inline constexpr double kOriginLat = 38.246;
inline constexpr double kOriginLon = 21.735;

/// Simulates a full trip from standstill to standstill at the route's end.
/// Throws EmptyRoute.
TripRecord generate_trip(const DriverProfile& profile, const Route& route,
                         std::int64_t period_ms = 1000);

/// Smooth and aggressive drivers over the same route and seed.
std::pair<TripRecord, TripRecord> generate_paired(const Route& route, std::uint64_t seed,
                                                  std::int64_t period_ms = 1000);

}  // namespace ecodrive::tripgen
