#include "ecodrive/telemetry.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <type_traits>

#include "ecodrive/error.hpp"

namespace ecodrive {

namespace {

constexpr std::size_t kColumns = 8;
constexpr const char* kColumnNames[kColumns] = {
    "timestamp_ms", "lat", "lon", "speed_kmh", "rpm", "throttle_pct", "brake", "hr_bpm"};

// Splits on ',' without allocating; an empty trailing field is kept.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') return false;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) return false;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) return false;
  }
  return true;
}

[[noreturn]] void fail_row(std::size_t line, const std::string& field,
                           const std::string& why) {
  throw ParseError(Errc::MalformedRow, line, field,
                   "line " + std::to_string(line) + ": " + why);
}

}  // namespace

std::string_view find_invalid_field(const TelemetrySample& s) noexcept {
  if (!(s.lat >= -90.0 && s.lat <= 90.0)) return "lat";
  if (!(s.lon >= -180.0 && s.lon <= 180.0)) return "lon";
  if (!(s.speed_kmh >= 0.0) || !std::isfinite(s.speed_kmh)) return "speed_kmh";
  if (!(s.rpm >= 0.0) || !std::isfinite(s.rpm)) return "rpm";
  if (!(s.throttle_pct >= 0.0 && s.throttle_pct <= 100.0)) return "throttle_pct";
  if (s.brake != 0 && s.brake != 1) return "brake";
  if (!(s.hr_bpm >= 0.0) || !std::isfinite(s.hr_bpm)) return "hr_bpm";
  return {};
}

void validate_trip(const TripRecord& trip) {
  for (std::size_t i = 0; i < trip.samples.size(); ++i) {
    const auto& s = trip.samples[i];
    if (auto field = find_invalid_field(s); !field.empty()) {
      throw ParseError(Errc::InvariantViolation, i + 2, std::string(field),
                       "sample " + std::to_string(i) + ": field " +
                           std::string(field) + " out of range");
    }
    if (i > 0 && s.timestamp_ms <= trip.samples[i - 1].timestamp_ms) {
      throw ParseError(Errc::OutOfOrderTimestamp, i + 2, "timestamp_ms",
                       "sample " + std::to_string(i) + ": timestamp not strictly ascending");
    }
  }
}

std::string format_real(double v) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string out(buf, static_cast<std::size_t>(n));
  const auto dot = out.find('.');
  if (dot != std::string::npos) {
    auto end = out.find_last_not_of('0');
    if (end == dot) ++end;  // keep one fractional digit
    out.erase(end + 1);
  }
  if (out == "-0.0") out = "0.0";
  return out;
}

std::string encode_trip_csv(const TripRecord& trip) {
  std::string out;
  out.reserve(64 * (trip.samples.size() + 1));
  out += kTripCsvHeader;
  out += '\n';
  for (const auto& s : trip.samples) {
    out += std::to_string(s.timestamp_ms);
    out += ',';
    out += format_real(s.lat);
    out += ',';
    out += format_real(s.lon);
    out += ',';
    out += format_real(s.speed_kmh);
    out += ',';
    out += format_real(s.rpm);
    out += ',';
    out += format_real(s.throttle_pct);
    out += ',';
    out += s.brake ? '1' : '0';
    out += ',';
    out += format_real(s.hr_bpm);
    out += '\n';
  }
  return out;
}

TripRecord decode_trip_csv(std::string_view data, std::string trip_id,
                           std::string driver_id) {
  TripRecord trip{std::move(trip_id), std::move(driver_id), {}};

  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < data.size()) {
    auto eol = data.find('\n', pos);
    if (eol == std::string_view::npos) eol = data.size();
    std::string_view line = data.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!header_seen) {
      if (line != kTripCsvHeader) {
        throw ParseError(Errc::MalformedHeader, 1, "",
                         "line 1: expected header '" + std::string(kTripCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }

    const auto fields = split_fields(line);
    if (fields.size() != kColumns) {
      fail_row(line_no, "", "expected " + std::to_string(kColumns) + " columns, got " +
                                std::to_string(fields.size()));
    }

    TelemetrySample s;
    if (!parse_number(fields[0], s.timestamp_ms)) fail_row(line_no, kColumnNames[0], "bad integer in timestamp_ms");
    double* reals[] = {&s.lat, &s.lon, &s.speed_kmh, &s.rpm, &s.throttle_pct};
    for (std::size_t c = 0; c < 5; ++c) {
      if (!parse_number(fields[c + 1], *reals[c])) {
        fail_row(line_no, kColumnNames[c + 1],
                 std::string("bad number in ") + kColumnNames[c + 1]);
      }
    }
    if (!parse_number(fields[6], s.brake)) fail_row(line_no, kColumnNames[6], "bad integer in brake");
    if (!parse_number(fields[7], s.hr_bpm)) fail_row(line_no, kColumnNames[7], "bad number in hr_bpm");

    if (auto field = find_invalid_field(s); !field.empty()) {
      throw ParseError(Errc::InvariantViolation, line_no, std::string(field),
                       "line " + std::to_string(line_no) + ": field " +
                           std::string(field) + " out of range");
    }
    if (!trip.samples.empty() && s.timestamp_ms <= trip.samples.back().timestamp_ms) {
      throw ParseError(Errc::OutOfOrderTimestamp, line_no, "timestamp_ms",
                       "line " + std::to_string(line_no) +
                           ": timestamp not strictly greater than previous row");
    }
    trip.samples.push_back(s);
  }
  if (!header_seen) {
    throw ParseError(Errc::MalformedHeader, 1, "", "line 1: missing header");
  }
  return trip;
}

TripRecord resample_uniform(const TripRecord& trip, std::int64_t period_ms) {
  if (trip.samples.size() < 2) {
    throw Error(Errc::TooFewSamples, "resampling needs at least 2 samples");
  }
  if (period_ms <= 0) {
    throw Error(Errc::InvalidConfig, "resample period must be positive");
  }

  const auto& in = trip.samples;
  const std::int64_t t0 = in.front().timestamp_ms;
  const std::int64_t t_last = in.back().timestamp_ms;
  const std::int64_t count = (t_last - t0) / period_ms + 1;

  TripRecord out{trip.trip_id, trip.driver_id, {}};
  out.samples.reserve(static_cast<std::size_t>(count));

  std::size_t seg = 0;  // in[seg].t <= t < in[seg + 1].t
  for (std::int64_t k = 0; k < count; ++k) {
    const std::int64_t t = t0 + k * period_ms;
    while (seg + 1 < in.size() && in[seg + 1].timestamp_ms <= t) ++seg;

    const auto& a = in[seg];
    TelemetrySample s;
    s.timestamp_ms = t;
    s.brake = a.brake;
    if (seg + 1 == in.size() || a.timestamp_ms == t) {
      s.lat = a.lat;
      s.lon = a.lon;
      s.speed_kmh = a.speed_kmh;
      s.rpm = a.rpm;
      s.throttle_pct = a.throttle_pct;
      s.hr_bpm = a.hr_bpm;
    } else {
      const auto& b = in[seg + 1];
      const double f = static_cast<double>(t - a.timestamp_ms) /
                       static_cast<double>(b.timestamp_ms - a.timestamp_ms);
      auto lerp = [f](double x, double y) { return x + (y - x) * f; };
      s.lat = lerp(a.lat, b.lat);
      s.lon = lerp(a.lon, b.lon);
      s.speed_kmh = lerp(a.speed_kmh, b.speed_kmh);
      s.rpm = lerp(a.rpm, b.rpm);
      s.throttle_pct = lerp(a.throttle_pct, b.throttle_pct);
      s.hr_bpm = lerp(a.hr_bpm, b.hr_bpm);
    }
    out.samples.push_back(s);
  }
  return out;
}

}  // namespace ecodrive
