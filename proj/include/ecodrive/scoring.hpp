#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecodrive/scoring_config.hpp"
#include "ecodrive/telemetry.hpp"

namespace ecodrive {

/// Statistics of one scoring window. Variances are population variances.
struct WindowFeatures {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::size_t sample_count = 0;

  double rpm_mean = 0.0;
  double rpm_variance = 0.0;
  double throttle_variance = 0.0;
  double speed_mean = 0.0;
  double speed_variance = 0.0;
  double accel_p95_mps2 = 0.0;
  double lateral_accel_p95_mps2 = 0.0;

  int abrupt_brakes = 0;
  int smooth_brakes = 0;
  /// Peak deceleration of every braking event in the window, m/s^2.
  std::vector<double> brake_peak_decels;
  /// Braking time of every braking event, seconds (recorded, not scored).
  std::vector<double> brake_durations_s;
  /// Peak acceleration of every acceleration event, m/s^2.
  std::vector<double> accel_peaks;

  int shift_up_events = 0;
  double high_rpm_unshifted_s = 0.0;
  double event_rate_per_min = 0.0;
  double hr_mean_bpm = 0.0;
  bool cruising = false;

  double duration_s() const noexcept { return static_cast<double>(end_ms - start_ms) / 1000.0; }
  bool operator==(const WindowFeatures&) const = default;
};

struct EcoParameters {
  double shift_up = 0.0;
  double braking = 0.0;
  double acceleration = 0.0;
  double rpm = 0.0;
  double cruising = 0.0;

  bool operator==(const EcoParameters&) const = default;
};

struct WindowScore {
  std::size_t window_index = 0;
  EcoParameters parameters;
  double eco_score = 0.0;
  double aggressiveness = 0.0;
  /// Mean bin weight of acceleration events; diagnostic only.
  double acceleration_histogram = 0.0;
  WindowFeatures features;

  bool operator==(const WindowScore&) const = default;
};

struct TripScore {
  std::string trip_id;
  std::string driver_id;
  std::vector<WindowScore> windows;
  double eco_mean = 0.0;
  double agg_mean = 0.0;
  int trip_ecoscore = 0;

  bool operator==(const TripScore&) const = default;
};

/// a2 + a1 / (a4 + e^(a3 (x - x0))). Saturates at the asymptotes instead of
/// overflowing.
double sigmoid(double x, const SigmoidParams& p) noexcept;

/// Mean bin weight over the events; 0 for no events. Throws BadBinSpec.
double weighted_histogram_score(std::span<const double> intensities,
                                std::span<const double> edges,
                                std::span<const double> weights);
double weighted_histogram_score(std::span<const double> intensities, const HistogramSpec& spec);

/// Splits a uniformly sampled trip into consecutive windows of cfg.window_s.
/// A trailing window shorter than half a window is dropped.
std::vector<WindowFeatures> extract_windows(const TripRecord& trip, const ScoringConfig& cfg);

/// clamp(rpm_variance / mu, 0, 1).
double aggressiveness_rpm(const WindowFeatures& f, const ScoringConfig& cfg) noexcept;

/// B_a / (B_a + B_s), 0 when the window has no braking.
double braking_intensity_agg(const WindowFeatures& f) noexcept;

/// Normalized heart-rate elevation in [0, 1]; 0 without a wearable.
double heartbeat_factor(double hr_mean_bpm, const ScoringConfig& cfg) noexcept;

double window_aggressiveness(const WindowFeatures& f, const ScoringConfig& cfg);

struct WindowEco {
  EcoParameters parameters;
  double eco = 0.0;
};
WindowEco window_ecoscore(const WindowFeatures& f, const ScoringConfig& cfg);

/// clamp(round(100 (w_e eco_mean - w_a agg_mean)), 0, 100).
int trip_ecoscore(double eco_mean, double agg_mean, const ScoringConfig& cfg) noexcept;

/// Resample, window, score. Throws TripTooShort for unscoreable trips.
TripScore score_trip(const TripRecord& trip, const ScoringConfig& cfg = {});

}  // namespace ecodrive
