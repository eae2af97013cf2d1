#include "ecodrive/tripgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ecodrive/error.hpp"
#include "ecodrive/scoring_config.hpp"

namespace ecodrive::tripgen {

namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kNoiseFraction = 0.02;
constexpr double kNoiseCorrelation = 0.95;  // per second
constexpr double kPlanMargin = 0.9;         // plan braking below the physical limit
constexpr double kBrakeFlagDecel = 0.5;     // m/s^2; gentler slowing is coasting
constexpr double kIdleRpm = 800.0;
constexpr int kGears = 6;
constexpr double kHrTimeConstantS = 10.0;
constexpr double kArrivalToleranceM = 3.0;

struct Pose {
  double x;  // east, m
  double y;  // north, m
  double heading;  // radians, counter-clockwise from east
};

class RouteGeometry {
 public:
  explicit RouteGeometry(const Route& route) : route_(route) {
    Pose p{0.0, 0.0, 0.0};
    double s = 0.0;
    for (const auto& seg : route_) {
      starts_.push_back(p);
      offsets_.push_back(s);
      p = advance(p, seg.curvature_inv_m, seg.length_m);
      s += seg.length_m;
    }
    length_ = s;
  }

  double length() const noexcept { return length_; }
  double offset(std::size_t i) const noexcept { return offsets_[i]; }

  std::size_t segment_at(double s) const noexcept {
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), s);
    return it == offsets_.begin() ? 0 : static_cast<std::size_t>(it - offsets_.begin()) - 1;
  }

  Pose pose_at(double s) const noexcept {
    s = std::clamp(s, 0.0, length_);
    const auto i = segment_at(s);
    const double d = std::min(s - offsets_[i], route_[i].length_m);
    return advance(starts_[i], route_[i].curvature_inv_m, d);
  }

 private:
  static Pose advance(const Pose& p, double k, double d) noexcept {
    if (std::abs(k) < 1e-12) {
      return {p.x + d * std::cos(p.heading), p.y + d * std::sin(p.heading), p.heading};
    }
    const double h = p.heading + k * d;
    return {p.x + (std::sin(h) - std::sin(p.heading)) / k,
            p.y - (std::cos(h) - std::cos(p.heading)) / k, h};
  }

  const Route& route_;
  std::vector<Pose> starts_;
  std::vector<double> offsets_;
  double length_ = 0.0;
};

// Largest next-step speed from which `target` can still be reached within
// the remaining distance at constant deceleration `decel`.
double reachable_speed(double distance, double v, double target, double decel, double dt) {
  const double c = distance - v * dt / 2.0;
  const double disc = decel * decel * dt * dt + 4.0 * (target * target + 2.0 * decel * c);
  if (disc <= 0.0) return 0.0;
  return std::max(0.0, (-decel * dt + std::sqrt(disc)) / 2.0);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view to_string(DrivingStyle s) noexcept {
  switch (s) {
    case DrivingStyle::Smooth: return "smooth";
    case DrivingStyle::Aggressive: return "aggressive";
    case DrivingStyle::Mixed: return "mixed";
  }
  return "unknown";
}

DrivingStyle parse_style(std::string_view s) {
  if (s == "smooth") return DrivingStyle::Smooth;
  if (s == "aggressive") return DrivingStyle::Aggressive;
  if (s == "mixed") return DrivingStyle::Mixed;
  throw Error(Errc::InvalidConfig, "unknown driving style '" + std::string(s) + "'");
}

bool DriverProfile::valid() const noexcept {
  return target_speed_kmh > 0 && limit_factor > 0 && accel_mps2 > 0 && brake_decel_mps2 > 0 &&
         lateral_comfort_mps2 > 0 && rpm_per_kmh > 0 && shift_rpm > 0 && post_shift_rpm > 0 &&
         post_shift_rpm < shift_rpm && hr_base_bpm > 0 && hr_stress_gain > 0;
}

DriverProfile smooth_profile(std::uint64_t seed) {
  DriverProfile p;
  p.seed = seed;
  return p;
}

DriverProfile aggressive_profile(std::uint64_t seed) {
  DriverProfile p;
  p.style = DrivingStyle::Aggressive;
  p.target_speed_kmh = 130.0;
  p.limit_factor = 1.10;
  p.accel_mps2 = 3.5;
  p.brake_decel_mps2 = 5.0;
  p.lateral_comfort_mps2 = 4.0;
  p.shift_rpm = 3800.0;
  p.post_shift_rpm = 2600.0;
  p.hr_base_bpm = 82.0;
  p.hr_stress_gain = 12.0;
  p.seed = seed;
  return p;
}

DriverProfile mixed_profile(std::uint64_t seed) {
  DriverProfile p;
  p.style = DrivingStyle::Mixed;
  p.target_speed_kmh = 110.0;
  p.limit_factor = 1.02;
  p.accel_mps2 = 2.2;
  p.brake_decel_mps2 = 3.2;
  p.lateral_comfort_mps2 = 2.5;
  p.shift_rpm = 2900.0;
  p.post_shift_rpm = 2000.0;
  p.hr_base_bpm = 72.0;
  p.hr_stress_gain = 8.0;
  p.seed = seed;
  return p;
}

DriverProfile profile_for(DrivingStyle style, std::uint64_t seed) {
  switch (style) {
    case DrivingStyle::Smooth: return smooth_profile(seed);
    case DrivingStyle::Aggressive: return aggressive_profile(seed);
    case DrivingStyle::Mixed: return mixed_profile(seed);
  }
  return smooth_profile(seed);
}

Route parse_route(std::string_view text) {
  Route route;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    double values[3];
    std::size_t field = 0;
    std::size_t start = 0;
    bool ok = true;
    while (ok) {
      const auto comma = line.find(',', start);
      const auto tok = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      if (field == 3) {
        ok = false;
        break;
      }
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), values[field]);
      ok = !tok.empty() && ec == std::errc{} && ptr == tok.data() + tok.size() &&
           std::isfinite(values[field]);
      ++field;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!ok || field != 3) {
      throw ParseError(Errc::MalformedRoute, line_no, "",
                       "line " + std::to_string(line_no) +
                           ": expected 'length_m,speed_limit_kmh,curvature_inv_m'");
    }
    if (!(values[0] > 0.0) || !(values[1] > 0.0)) {
      throw ParseError(Errc::MalformedRoute, line_no, values[0] > 0.0 ? "speed_limit_kmh" : "length_m",
                       "line " + std::to_string(line_no) + ": length and speed limit must be positive");
    }
    route.push_back({values[0], values[1], values[2]});
  }
  return route;
}

std::string format_route(const Route& route) {
  std::ostringstream out;
  for (const auto& seg : route) {
    out << format_exact(seg.length_m) << ',' << format_exact(seg.speed_limit_kmh) << ','
        << format_exact(seg.curvature_inv_m) << '\n';
  }
  return out.str();
}

Route default_urban_route() {
  return {
      {350.0, 50.0, 0.0},   {60.0, 50.0, 0.04},  {450.0, 50.0, 0.0},  {250.0, 30.0, 0.0},
      {80.0, 50.0, -0.025}, {600.0, 50.0, 0.0},  {40.0, 50.0, 0.05},  {500.0, 70.0, 0.0},
      {120.0, 40.0, 0.01},  {550.0, 50.0, 0.0},
  };
}

Route default_highway_route() { return {{12000.0, 80.0, 0.0}}; }

TripRecord generate_trip(const DriverProfile& profile, const Route& route, std::int64_t period_ms) {
  if (route.empty()) throw Error(Errc::EmptyRoute, "route has no segments");
  if (period_ms <= 0) throw Error(Errc::InvalidConfig, "period_ms must be positive");
  if (!profile.valid()) throw Error(Errc::InvalidConfig, "driver profile has non-positive magnitudes");

  const RouteGeometry geometry(route);
  const double dt = static_cast<double>(period_ms) / 1000.0;
  const double plan_decel = profile.brake_decel_mps2 * kPlanMargin;
  const double length = geometry.length();

  std::vector<double> segment_speed(route.size());
  for (std::size_t i = 0; i < route.size(); ++i) {
    double v = std::min(profile.target_speed_kmh, route[i].speed_limit_kmh * profile.limit_factor) / 3.6;
    if (std::abs(route[i].curvature_inv_m) > 1e-12) {
      v = std::min(v, std::sqrt(profile.lateral_comfort_mps2 / std::abs(route[i].curvature_inv_m)));
    }
    segment_speed[i] = v;
  }

  std::mt19937_64 rng(profile.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double rho = std::pow(kNoiseCorrelation, dt);
  const double innovation = std::sqrt(1.0 - rho * rho);

  const double shift_ratio = profile.post_shift_rpm / profile.shift_rpm;
  const double downshift_rpm = profile.post_shift_rpm * 0.75;
  int gear = 1;
  double ratio = profile.rpm_per_kmh;

  TripRecord trip;
  trip.trip_id = std::string(to_string(profile.style)) + "-" + std::to_string(profile.seed);
  trip.driver_id = std::string(to_string(profile.style));

  const double cos_lat0 = std::cos(kOriginLat * std::numbers::pi / 180.0);
  auto emit = [&](std::int64_t t, double s_pos, double v, double a, double stress) {
    const Pose p = geometry.pose_at(s_pos);
    TelemetrySample x;
    x.timestamp_ms = t;
    x.lat = kOriginLat + p.y / kEarthRadiusM * 180.0 / std::numbers::pi;
    x.lon = kOriginLon + p.x / (kEarthRadiusM * cos_lat0) * 180.0 / std::numbers::pi;
    const double kmh = v * 3.6;
    x.speed_kmh = kmh;

    double rpm = ratio * kmh;
    if (a >= 0.0 && rpm >= profile.shift_rpm && gear < kGears) {
      ++gear;
      ratio *= shift_ratio;
      rpm = ratio * kmh;
    }
    while (gear > 1 && ratio * kmh < downshift_rpm) {
      --gear;
      ratio /= shift_ratio;
    }
    x.rpm = std::max(kIdleRpm, ratio * kmh);

    double throttle = 0.0;
    if (a >= -0.3 && kmh >= 1.0) throttle = 8.0 + 0.25 * kmh + 18.0 * std::max(a, 0.0);
    if (a > 0.0 && kmh < 1.0) throttle = 8.0 + 18.0 * a;
    throttle *= 1.0 + kNoiseFraction * gauss(rng);
    x.throttle_pct = std::clamp(throttle, 0.0, 100.0);

    x.brake = a <= -kBrakeFlagDecel ? 1 : 0;
    x.hr_bpm = profile.hr_base_bpm + profile.hr_stress_gain * stress;
    trip.samples.push_back(x);
  };

  double s_pos = 0.0;
  double v = 0.0;
  double noise = 0.0;
  double stress = 0.0;
  std::int64_t t = 0;
  emit(t, s_pos, v, 0.0, stress);

  const auto max_steps = static_cast<std::size_t>(length / 0.5 / dt) + 10000;
  for (std::size_t step = 0; step < max_steps; ++step) {
    noise = rho * noise + innovation * gauss(rng);
    const auto seg = geometry.segment_at(s_pos);

    double v_next = std::min(segment_speed[seg] * (1.0 + kNoiseFraction * noise),
                             v + profile.accel_mps2 * dt);
    for (std::size_t j = seg + 1; j < route.size(); ++j) {
      if (segment_speed[j] < v_next) {
        v_next = std::min(v_next, reachable_speed(geometry.offset(j) - s_pos, v, segment_speed[j],
                                                  plan_decel, dt));
      }
    }
    v_next = std::min(v_next, reachable_speed(length - s_pos, v, 0.0, plan_decel, dt));
    v_next = std::max({v_next, v - profile.brake_decel_mps2 * dt, 0.0});

    double advance = (v + v_next) / 2.0 * dt;
    const double remaining = length - s_pos;
    const bool arrived = advance >= remaining ||
                         (remaining - advance < kArrivalToleranceM && v_next < 0.3 &&
                          v <= profile.brake_decel_mps2 * dt);
    if (arrived) {
      v_next = 0.0;
      advance = remaining;
    }
    const double a = (v_next - v) / dt;
    stress += (std::abs(a) - stress) * std::min(1.0, dt / kHrTimeConstantS);
    s_pos += advance;
    v = v_next;
    t += period_ms;
    emit(t, arrived ? length : s_pos, v, a, stress);
    if (arrived) break;
  }
  return trip;
}

std::pair<TripRecord, TripRecord> generate_paired(const Route& route, std::uint64_t seed,
                                                  std::int64_t period_ms) {
  auto smooth = generate_trip(smooth_profile(seed), route, period_ms);
  auto aggressive = generate_trip(aggressive_profile(seed), route, period_ms);
  return {std::move(smooth), std::move(aggressive)};
}

}  // namespace ecodrive::tripgen
