#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ecodrive {

/// One timestamped multi-channel reading from the vehicle, the wearable and
/// the phone GPS. hr_bpm == 0 means the wearable produced no reading.
struct TelemetrySample {
  std::int64_t timestamp_ms = 0;
  double lat = 0.0;
  double lon = 0.0;
  double speed_kmh = 0.0;
  double rpm = 0.0;
  double throttle_pct = 0.0;
  int brake = 0;
  double hr_bpm = 0.0;

  bool operator==(const TelemetrySample&) const = default;
};

/// Per-trip sample matrix. Samples are strictly ascending by timestamp.
struct TripRecord {
  std::string trip_id;
  std::string driver_id;
  std::vector<TelemetrySample> samples;

  std::int64_t duration_ms() const noexcept {
    return samples.size() < 2 ? 0
                              : samples.back().timestamp_ms - samples.front().timestamp_ms;
  }

  bool operator==(const TripRecord&) const = default;
};

/// Returns the name of the first out-of-range field, or an empty view.
std::string_view find_invalid_field(const TelemetrySample& s) noexcept;

/// Throws InvariantViolation / OutOfOrderTimestamp if the trip is malformed.
void validate_trip(const TripRecord& trip);

/// Column header shared by every trip CSV producer and consumer.
inline constexpr std::string_view kTripCsvHeader =
    "timestamp_ms,lat,lon,speed_kmh,rpm,throttle_pct,brake,hr_bpm";

/// Serializes a real with at most six decimals, trailing zeros trimmed down
/// to a single fractional digit ("50.0", "38.246").
std::string format_real(double v);

std::string encode_trip_csv(const TripRecord& trip);

/// Whole-file decode. Line numbers in errors are 1-based, header is line 1.
TripRecord decode_trip_csv(std::string_view data, std::string trip_id,
                           std::string driver_id);

inline constexpr std::int64_t kDefaultResamplePeriodMs = 1000;

/// Linear interpolation of continuous channels and zero-order hold of the
/// brake flag onto t0, t0 + period, ... <= t_last.
TripRecord resample_uniform(const TripRecord& trip,
                            std::int64_t period_ms = kDefaultResamplePeriodMs);

}  // namespace ecodrive
