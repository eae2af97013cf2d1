#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ecodrive {

/// Decreasing logistic curve a2 + a1 / (a4 + exp(a3 * (x - x0))).
/// a1, a3, a4 > 0, a2 >= 0 and a2 + a1 / a4 <= 1 keep it inside [0, 1].
struct SigmoidParams {
  double a1 = 1.0;
  double a2 = 0.0;
  double a3 = 1.0;
  double a4 = 1.0;
  double x0 = 0.0;

  bool valid() const noexcept;
  bool operator==(const SigmoidParams&) const = default;
};

/// Bin edges (strictly increasing) with one more weight than edges.
struct HistogramSpec {
  std::vector<double> edges;
  std::vector<double> weights;

  bool operator==(const HistogramSpec&) const = default;
};

struct CombinationWeights {
  double shift_up = 0.2;
  double braking = 0.2;
  double acceleration = 0.2;
  double rpm = 0.2;
  double cruising = 0.2;

  bool operator==(const CombinationWeights&) const = default;
};

struct ScoringConfig {
  double window_s = 30.0;
  std::int64_t resample_period_ms = 1000;

  double mu = 250000.0;          // RPM variance normalizer, RPM^2
  double mu_throttle = 400.0;    // throttle variance normalizer, %^2

  SigmoidParams shift_up{1.0, 0.0, 0.8, 1.0, 5.0};
  SigmoidParams acceleration{1.0, 0.0, 2.0, 1.0, 2.5};
  SigmoidParams rpm{1.0, 0.0, 0.004, 1.0, 2500.0};
  SigmoidParams cruising{1.0, 0.0, 1.5, 1.0, 4.0};
  SigmoidParams lateral{1.0, 0.0, 2.0, 1.0, 3.0};

  HistogramSpec braking_histogram{{2.0, 3.0, 4.0}, {0.0, 0.3, 0.7, 1.0}};
  HistogramSpec acceleration_histogram{{1.5, 2.5, 3.5}, {0.0, 0.3, 0.7, 1.0}};

  double abrupt_brake_decel_mps2 = 3.0;
  double shift_rpm_drop = 500.0;
  double shift_window_s = 1.0;
  double shift_lookahead_s = 3.0;
  double accel_event_mps2 = 1.5;
  double cruise_min_speed_kmh = 30.0;
  double cruise_max_std_kmh = 3.0;

  double hr_rest_bpm = 60.0;
  double hr_max_bpm = 180.0;

  double w_e = 1.0;
  double w_a = 0.5;
  CombinationWeights weights;

  /// Throws InvalidConfig naming the first violated constraint.
  void validate() const;

  bool operator==(const ScoringConfig&) const = default;
};

/// Flat `key = value` text; `#` starts a comment. Lists are comma separated.
/// Unknown keys and unparsable values are rejected with the line number.
ScoringConfig parse_scoring_config(std::string_view text);
std::string serialize_scoring_config(const ScoringConfig& cfg);
ScoringConfig load_scoring_config(const std::string& path);

struct KeyValue {
  std::size_t line;
  std::string key;
  std::string value;
};

/// Generic `key = value` tokenizer shared with the service config. Rejects
/// duplicate keys and lines without '='.
std::vector<KeyValue> parse_key_values(std::string_view text);

std::string read_text_file(const std::string& path);

/// Shortest representation that parses back to the same double.
std::string format_exact(double v);

}  // namespace ecodrive
