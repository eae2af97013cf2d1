#include "ecodrive/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "ecodrive/error.hpp"

namespace ecodrive {

namespace {

constexpr double kKmhToMps = 1.0 / 3.6;
constexpr double kEarthRadiusM = 6371008.8;
constexpr double kMinHeadingDisplacementM = 0.5;

double clamp01(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

// Welford accumulator; population variance.
struct RunningStats {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double variance() const noexcept { return n ? std::max(0.0, m2 / static_cast<double>(n)) : 0.0; }
};

// Linear interpolation between closest ranks.
double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

double wrap_angle(double a) noexcept {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

struct Event {
  std::size_t start;
  double peak;
  double duration_s;
};

// Maximal runs of indices where `member` holds; peak taken over `intensity`
// on [run start, run end + tail].
template <typename Member, typename Intensity>
std::vector<Event> find_runs(std::size_t n, std::size_t first, std::size_t tail, double dt_s,
                             Member member, Intensity intensity) {
  std::vector<Event> out;
  std::size_t i = first;
  while (i < n) {
    if (!member(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && member(j + 1)) ++j;
    double peak = 0.0;
    for (std::size_t k = i; k <= std::min(j + tail, n - 1); ++k) peak = std::max(peak, intensity(k));
    out.push_back({i, peak, static_cast<double>(j - i + 1) * dt_s});
    i = j + 1;
  }
  return out;
}

}  // namespace

double sigmoid(double x, const SigmoidParams& p) noexcept {
  const double u = p.a3 * (x - p.x0);
  if (u > 709.0) return p.a2;  // e^u overflows double; a1 / inf -> 0
  return p.a2 + p.a1 / (p.a4 + std::exp(u));
}

double weighted_histogram_score(std::span<const double> intensities,
                                std::span<const double> edges,
                                std::span<const double> weights) {
  if (weights.size() != edges.size() + 1) {
    throw Error(Errc::BadBinSpec, "histogram needs exactly one more weight than edges");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw Error(Errc::BadBinSpec, "histogram edges must be strictly increasing");
  }
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw Error(Errc::BadBinSpec, "histogram weights must lie in [0, 1]");
  }
  if (intensities.empty()) return 0.0;
  double total = 0.0;
  for (double v : intensities) {
    const auto bin = std::upper_bound(edges.begin(), edges.end(), v) - edges.begin();
    total += weights[static_cast<std::size_t>(bin)];
  }
  return total / static_cast<double>(intensities.size());
}

double weighted_histogram_score(std::span<const double> intensities, const HistogramSpec& spec) {
  return weighted_histogram_score(intensities, spec.edges, spec.weights);
}

std::vector<WindowFeatures> extract_windows(const TripRecord& trip, const ScoringConfig& cfg) {
  const auto& s = trip.samples;
  const std::size_t n = s.size();
  const auto window_ms = static_cast<std::int64_t>(std::llround(cfg.window_s * 1000.0));
  if (n < 2 || window_ms <= 0 || trip.duration_ms() < window_ms) {
    throw Error(Errc::TripTooShort, "trip shorter than one " + format_exact(cfg.window_s) + " s window");
  }
  const std::int64_t dt_ms = s[1].timestamp_ms - s[0].timestamp_ms;
  for (std::size_t i = 1; i < n; ++i) {
    if (s[i].timestamp_ms - s[i - 1].timestamp_ms != dt_ms || dt_ms <= 0) {
      throw Error(Errc::NotUniformlySampled, "sample " + std::to_string(i) + " breaks the uniform grid");
    }
  }
  const double dt = static_cast<double>(dt_ms) / 1000.0;
  const std::int64_t t0 = s.front().timestamp_ms;

  // Per-step longitudinal acceleration; accel[k] describes the step k-1 -> k.
  std::vector<double> accel(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    accel[k] = (s[k].speed_kmh - s[k - 1].speed_kmh) * kKmhToMps / dt;
  }

  // GPS heading per step and the lateral acceleration it implies.
  std::vector<std::optional<double>> heading(n);
  const double lat_ref = s.front().lat * std::numbers::pi / 180.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double north = (s[k].lat - s[k - 1].lat) * std::numbers::pi / 180.0 * kEarthRadiusM;
    const double east = (s[k].lon - s[k - 1].lon) * std::numbers::pi / 180.0 * kEarthRadiusM *
                        std::cos(lat_ref);
    if (std::hypot(north, east) >= kMinHeadingDisplacementM) {
      heading[k] = std::atan2(east, north);
    } else {
      heading[k] = heading[k - 1];
    }
  }
  std::vector<double> lateral(n, 0.0);
  for (std::size_t k = 2; k < n; ++k) {
    if (heading[k] && heading[k - 1]) {
      lateral[k] = std::abs(wrap_angle(*heading[k] - *heading[k - 1])) / dt * s[k].speed_kmh * kKmhToMps;
    }
  }

  // Braking events over the whole trip. Without any brake flag the trip is
  // segmented on strictly decreasing speed instead.
  const bool has_brake_channel =
      std::any_of(s.begin(), s.end(), [](const TelemetrySample& x) { return x.brake == 1; });
  auto decel = [&](std::size_t k) { return k == 0 ? 0.0 : std::max(0.0, -accel[k]); };
  const auto brakes =
      has_brake_channel
          ? find_runs(n, 0, 1, dt, [&](std::size_t k) { return s[k].brake == 1; }, decel)
          : find_runs(n, 1, 0, dt, [&](std::size_t k) { return s[k].speed_kmh < s[k - 1].speed_kmh; }, decel);
  const auto accels = find_runs(
      n, 1, 0, dt, [&](std::size_t k) { return accel[k] >= cfg.accel_event_mps2; },
      [&](std::size_t k) { return accel[k]; });

  // Shift-ups: RPM drop within the shift window at non-decreasing speed.
  const auto lookback = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg.shift_window_s * 1000.0 / static_cast<double>(dt_ms))));
  const auto refractory_ms = static_cast<std::int64_t>(std::llround(cfg.shift_window_s * 1000.0));
  std::vector<std::size_t> shifts;
  for (std::size_t k = 1; k < n; ++k) {
    if (!shifts.empty() && s[k].timestamp_ms - s[shifts.back()].timestamp_ms < refractory_ms) continue;
    bool shifted = false;
    bool speed_ok = true;
    for (std::size_t j = k; j-- > (k >= lookback ? k - lookback : 0);) {
      speed_ok = speed_ok && s[j + 1].speed_kmh >= s[j].speed_kmh;
      if (!speed_ok) break;
      if (s[j].rpm - s[k].rpm >= cfg.shift_rpm_drop) {
        shifted = true;
        break;
      }
    }
    if (shifted) shifts.push_back(k);
  }

  // Time spent above the RPM midpoint while accelerating or holding speed,
  // with no upshift following within the lookahead.
  const auto lookahead_ms = static_cast<std::int64_t>(std::llround(cfg.shift_lookahead_s * 1000.0));
  std::vector<bool> unshifted(n, false);
  {
    std::size_t next_shift = 0;
    for (std::size_t k = 1; k < n; ++k) {
      while (next_shift < shifts.size() && shifts[next_shift] <= k) ++next_shift;
      if (s[k].rpm <= cfg.rpm.x0 || s[k].speed_kmh < s[k - 1].speed_kmh) continue;
      const bool shift_soon = next_shift < shifts.size() &&
                              s[shifts[next_shift]].timestamp_ms - s[k].timestamp_ms <= lookahead_ms;
      unshifted[k] = !shift_soon;
    }
  }

  // Window layout.
  const std::int64_t duration = trip.duration_ms();
  const auto full = static_cast<std::size_t>(duration / window_ms);
  const std::int64_t remainder = duration - static_cast<std::int64_t>(full) * window_ms;
  const std::size_t count = full + (2 * remainder >= window_ms ? 1 : 0);

  std::vector<WindowFeatures> windows(count);
  for (std::size_t w = 0; w < count; ++w) {
    windows[w].start_ms = t0 + static_cast<std::int64_t>(w) * window_ms;
    windows[w].end_ms = w < full ? windows[w].start_ms + window_ms : s.back().timestamp_ms;
  }
  auto window_of = [&](std::size_t i) -> std::optional<std::size_t> {
    const auto w = static_cast<std::size_t>((s[i].timestamp_ms - t0) / window_ms);
    if (w < count) return w;
    return std::nullopt;
  };

  std::vector<RunningStats> rpm(count), throttle(count), speed(count), hr(count);
  std::vector<std::vector<double>> positive_accel(count), lateral_values(count);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = window_of(i);
    if (!w) continue;
    auto& f = windows[*w];
    ++f.sample_count;
    rpm[*w].add(s[i].rpm);
    throttle[*w].add(s[i].throttle_pct);
    speed[*w].add(s[i].speed_kmh);
    if (s[i].hr_bpm > 0.0) hr[*w].add(s[i].hr_bpm);
    if (i >= 1 && accel[i] > 0.0) positive_accel[*w].push_back(accel[i]);
    lateral_values[*w].push_back(lateral[i]);
    if (unshifted[i]) f.high_rpm_unshifted_s += dt;
  }
  for (const auto& e : brakes) {
    if (const auto w = window_of(e.start)) {
      auto& f = windows[*w];
      if (e.peak >= cfg.abrupt_brake_decel_mps2) {
        ++f.abrupt_brakes;
      } else {
        ++f.smooth_brakes;
      }
      f.brake_peak_decels.push_back(e.peak);
      f.brake_durations_s.push_back(e.duration_s);
    }
  }
  for (const auto& e : accels) {
    if (const auto w = window_of(e.start)) windows[*w].accel_peaks.push_back(e.peak);
  }
  for (std::size_t k : shifts) {
    if (const auto w = window_of(k)) ++windows[*w].shift_up_events;
  }

  for (std::size_t w = 0; w < count; ++w) {
    auto& f = windows[w];
    f.rpm_mean = rpm[w].mean;
    f.rpm_variance = rpm[w].variance();
    f.throttle_variance = throttle[w].variance();
    f.speed_mean = speed[w].mean;
    f.speed_variance = speed[w].variance();
    f.accel_p95_mps2 = percentile(std::move(positive_accel[w]), 0.95);
    f.lateral_accel_p95_mps2 = percentile(std::move(lateral_values[w]), 0.95);
    f.hr_mean_bpm = hr[w].n ? hr[w].mean : 0.0;
    const double minutes = f.duration_s() / 60.0;
    const auto events = static_cast<double>(f.abrupt_brakes + f.smooth_brakes) +
                        static_cast<double>(f.accel_peaks.size());
    f.event_rate_per_min = minutes > 0.0 ? events / minutes : 0.0;
    f.cruising = f.speed_mean >= cfg.cruise_min_speed_kmh &&
                 std::sqrt(f.speed_variance) <= cfg.cruise_max_std_kmh;
  }
  return windows;
}

double aggressiveness_rpm(const WindowFeatures& f, const ScoringConfig& cfg) noexcept {
  return clamp01(f.rpm_variance / cfg.mu);
}

double braking_intensity_agg(const WindowFeatures& f) noexcept {
  const int total = f.abrupt_brakes + f.smooth_brakes;
  if (total <= 0) return 0.0;
  return static_cast<double>(f.abrupt_brakes) / static_cast<double>(total);
}

double heartbeat_factor(double hr_mean_bpm, const ScoringConfig& cfg) noexcept {
  if (hr_mean_bpm <= 0.0) return 0.0;
  return clamp01((hr_mean_bpm - cfg.hr_rest_bpm) / (cfg.hr_max_bpm - cfg.hr_rest_bpm));
}

double window_aggressiveness(const WindowFeatures& f, const ScoringConfig& cfg) {
  const double lateral = 1.0 - sigmoid(f.lateral_accel_p95_mps2, cfg.lateral);
  const double throttle = clamp01(f.throttle_variance / cfg.mu_throttle);
  const double agg =
      (aggressiveness_rpm(f, cfg) + braking_intensity_agg(f) + lateral + throttle) / 4.0;
  const double h = heartbeat_factor(f.hr_mean_bpm, cfg);
  return clamp01(agg * (1.0 + h));
}

WindowEco window_ecoscore(const WindowFeatures& f, const ScoringConfig& cfg) {
  WindowEco out;
  auto& p = out.parameters;
  p.shift_up = sigmoid(f.high_rpm_unshifted_s, cfg.shift_up);
  p.braking = 1.0 - weighted_histogram_score(f.brake_peak_decels, cfg.braking_histogram);
  p.acceleration = sigmoid(f.accel_p95_mps2, cfg.acceleration);
  p.rpm = sigmoid(f.rpm_mean, cfg.rpm);
  p.cruising = f.cruising ? sigmoid(f.speed_variance, cfg.cruising) : 0.5;

  const auto& w = cfg.weights;
  const double eco = w.shift_up * p.shift_up + w.braking * p.braking +
                     w.acceleration * p.acceleration + w.rpm * p.rpm + w.cruising * p.cruising;
  const double h = heartbeat_factor(f.hr_mean_bpm, cfg);
  out.eco = 1.0 - clamp01((1.0 - eco) * (1.0 + h));
  return out;
}

int trip_ecoscore(double eco_mean, double agg_mean, const ScoringConfig& cfg) noexcept {
  const double raw = 100.0 * (cfg.w_e * eco_mean - cfg.w_a * agg_mean);
  return static_cast<int>(std::clamp<long>(std::lround(raw), 0, 100));
}

TripScore score_trip(const TripRecord& trip, const ScoringConfig& cfg) {
  if (trip.samples.size() < 2) {
    throw Error(Errc::TripTooShort, "trip has " + std::to_string(trip.samples.size()) +
                                        " samples; at least 2 are needed");
  }
  const auto uniform = resample_uniform(trip, cfg.resample_period_ms);
  auto features = extract_windows(uniform, cfg);

  TripScore score{trip.trip_id, trip.driver_id, {}, 0.0, 0.0, 0};
  score.windows.reserve(features.size());
  double eco_sum = 0.0;
  double agg_sum = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    WindowScore ws;
    ws.window_index = i;
    const auto eco = window_ecoscore(features[i], cfg);
    ws.parameters = eco.parameters;
    ws.eco_score = eco.eco;
    ws.aggressiveness = window_aggressiveness(features[i], cfg);
    ws.acceleration_histogram =
        weighted_histogram_score(features[i].accel_peaks, cfg.acceleration_histogram);
    ws.features = std::move(features[i]);
    eco_sum += ws.eco_score;
    agg_sum += ws.aggressiveness;
    score.windows.push_back(std::move(ws));
  }
  const auto count = static_cast<double>(score.windows.size());
  score.eco_mean = eco_sum / count;
  score.agg_mean = agg_sum / count;
  score.trip_ecoscore = trip_ecoscore(score.eco_mean, score.agg_mean, cfg);
  return score;
}

}  // namespace ecodrive
