#include <doctest.h>

#include <cmath>
#include <random>

#include "ecodrive/error.hpp"
#include "ecodrive/telemetry.hpp"
#include "ecodrive/tripgen.hpp"
#include "oracles.hpp"

using namespace ecodrive;

namespace {

const std::string kHeader = std::string(kTripCsvHeader) + "\n";

template <typename F>
Error capture(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an exception");
  return Error(Errc::StorageFailure, "unreachable");
}

ParseError capture_parse(const std::string& csv) {
  try {
    decode_trip_csv(csv, "t", "d");
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError(Errc::StorageFailure, 0, "", "unreachable");
}

void check_close(const TelemetrySample& a, const TelemetrySample& b, double tol) {
  CHECK(a.timestamp_ms == b.timestamp_ms);
  CHECK(std::abs(a.lat - b.lat) <= tol);
  CHECK(std::abs(a.lon - b.lon) <= tol);
  CHECK(std::abs(a.speed_kmh - b.speed_kmh) <= tol);
  CHECK(std::abs(a.rpm - b.rpm) <= tol);
  CHECK(std::abs(a.throttle_pct - b.throttle_pct) <= tol);
  CHECK(a.brake == b.brake);
  CHECK(std::abs(a.hr_bpm - b.hr_bpm) <= tol);
}

}  // namespace

TEST_CASE("single sample encodes to header plus one row") {
  TripRecord t{"t", "d", {{1000, 38.246, 21.735, 50.0, 2000.0, 25.0, 0, 72.0}}};
  CHECK(encode_trip_csv(t) == kHeader + "1000,38.246,21.735,50.0,2000.0,25.0,0,72.0\n");
}

TEST_CASE("format_real trims to at most six decimals") {
  CHECK(format_real(50.0) == "50.0");
  CHECK(format_real(38.246) == "38.246");
  CHECK(format_real(0.1234567) == "0.123457");
  CHECK(format_real(-0.0000001) == "0.0");
  CHECK(format_real(-12.5) == "-12.5");
}

TEST_CASE("header-only file is an empty trip") {
  const auto t = decode_trip_csv(kHeader, "t", "d");
  CHECK(t.samples.empty());
  CHECK(t.trip_id == "t");
  CHECK(t.driver_id == "d");
  CHECK(decode_trip_csv(kTripCsvHeader, "t", "d").samples.empty());
}

TEST_CASE("trailing newline is optional and CRLF is tolerated") {
  const std::string row = "0,38.0,21.0,10.0,900.0,5.0,0,0.0";
  CHECK(decode_trip_csv(kHeader + row, "t", "d").samples.size() == 1);
  CHECK(decode_trip_csv(std::string(kTripCsvHeader) + "\r\n" + row + "\r\n", "t", "d").samples.size() == 1);
}

TEST_CASE("decode errors carry line and field") {
  SUBCASE("empty input") { CHECK(capture_parse("").code() == Errc::MalformedHeader); }
  SUBCASE("wrong header") {
    const auto e = capture_parse("timestamp,lat\n");
    CHECK(e.code() == Errc::MalformedHeader);
    CHECK(e.line() == 1);
  }
  SUBCASE("brake = 2") {
    const auto e = capture_parse(kHeader + "0,38.0,21.0,10.0,900.0,5.0,0,0.0\n1000,38.0,21.0,10.0,900.0,5.0,2,0.0\n");
    CHECK(e.code() == Errc::InvariantViolation);
    CHECK(e.line() == 3);
    CHECK(e.field() == "brake");
    CHECK(std::string(e.what()).find("brake") != std::string::npos);
  }
  SUBCASE("equal timestamps") {
    const auto e = capture_parse(kHeader + "5,38.0,21.0,10.0,900.0,5.0,0,0.0\n5,38.0,21.0,10.0,900.0,5.0,0,0.0\n");
    CHECK(e.code() == Errc::OutOfOrderTimestamp);
    CHECK(e.line() == 3);
  }
  SUBCASE("decreasing timestamps") {
    CHECK(capture_parse(kHeader + "5,38.0,21.0,10.0,900.0,5.0,0,0.0\n4,38.0,21.0,10.0,900.0,5.0,0,0.0\n").code() ==
          Errc::OutOfOrderTimestamp);
  }
  SUBCASE("wrong column count") {
    const auto e = capture_parse(kHeader + "0,38.0,21.0,10.0,900.0,5.0,0\n");
    CHECK(e.code() == Errc::MalformedRow);
    CHECK(e.line() == 2);
  }
  SUBCASE("unparsable number") {
    const auto e = capture_parse(kHeader + "0,38.0,21.0,fast,900.0,5.0,0,0.0\n");
    CHECK(e.code() == Errc::MalformedRow);
    CHECK(e.field() == "speed_kmh");
  }
  SUBCASE("non-finite number") {
    CHECK(capture_parse(kHeader + "0,38.0,21.0,nan,900.0,5.0,0,0.0\n").code() == Errc::MalformedRow);
  }
  SUBCASE("range violations") {
    CHECK(capture_parse(kHeader + "0,91.0,21.0,10.0,900.0,5.0,0,0.0\n").field() == "lat");
    CHECK(capture_parse(kHeader + "0,38.0,-181.0,10.0,900.0,5.0,0,0.0\n").field() == "lon");
    CHECK(capture_parse(kHeader + "0,38.0,21.0,-1.0,900.0,5.0,0,0.0\n").field() == "speed_kmh");
    CHECK(capture_parse(kHeader + "0,38.0,21.0,1.0,-900.0,5.0,0,0.0\n").field() == "rpm");
    CHECK(capture_parse(kHeader + "0,38.0,21.0,1.0,900.0,100.5,0,0.0\n").field() == "throttle_pct");
    CHECK(capture_parse(kHeader + "0,38.0,21.0,1.0,900.0,5.0,0,-3.0\n").field() == "hr_bpm");
  }
}

TEST_CASE("round trip on a 300-sample simulator trip") {
  const auto route = tripgen::Route{{8000.0, 60.0, 0.002}};
  auto trip = tripgen::generate_trip(tripgen::mixed_profile(9), route);
  REQUIRE(trip.samples.size() >= 300);
  trip.samples.resize(300);
  const auto back = decode_trip_csv(encode_trip_csv(trip), trip.trip_id, trip.driver_id);
  REQUIRE(back.samples.size() == trip.samples.size());
  for (std::size_t i = 0; i < trip.samples.size(); ++i) check_close(back.samples[i], trip.samples[i], 1e-6);
  CHECK(encode_trip_csv(back) == encode_trip_csv(trip));
}

TEST_CASE("round trip property over random valid samples") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180), pos(0, 250), pct(0, 100);
  for (int trial = 0; trial < 50; ++trial) {
    TripRecord t{"t", "d", {}};
    std::int64_t ts = static_cast<std::int64_t>(rng() % 100000);
    for (int i = 0; i < 40; ++i) {
      ts += 1 + static_cast<std::int64_t>(rng() % 2000);
      t.samples.push_back({ts, lat(rng), lon(rng), pos(rng), pos(rng) * 40, pct(rng), static_cast<int>(rng() % 2),
                           (rng() % 4 == 0) ? 0.0 : pos(rng)});
    }
    const auto back = decode_trip_csv(encode_trip_csv(t), "t", "d");
    REQUIRE(back.samples.size() == t.samples.size());
    for (std::size_t i = 0; i < t.samples.size(); ++i) check_close(back.samples[i], t.samples[i], 1e-6);
  }
}

TEST_CASE("resample: linear midpoint and zero-order hold") {
  TripRecord t{"t", "d", {{0, 38.0, 21.0, 0.0, 800.0, 0.0, 1, 60.0}, {1000, 38.0, 21.0, 10.0, 1800.0, 50.0, 0, 70.0}}};
  const auto r = resample_uniform(t, 500);
  REQUIRE(r.samples.size() == 3);
  CHECK(r.samples[0].speed_kmh == doctest::Approx(0.0));
  CHECK(r.samples[1].speed_kmh == doctest::Approx(5.0));
  CHECK(r.samples[2].speed_kmh == doctest::Approx(10.0));
  CHECK(r.samples[0].brake == 1);
  CHECK(r.samples[1].brake == 1);
  CHECK(r.samples[2].brake == 0);
  CHECK(r.samples[1].hr_bpm == doctest::Approx(65.0));
}

TEST_CASE("resample: errors") {
  TripRecord one{"t", "d", {{0, 38.0, 21.0, 0.0, 800.0, 0.0, 0, 0.0}}};
  CHECK(capture([&] { resample_uniform(one, 1000); }).code() == Errc::TooFewSamples);
  TripRecord two{"t", "d", {{0, 38.0, 21.0, 0.0, 800.0, 0.0, 0, 0.0}, {10, 38.0, 21.0, 0.0, 800.0, 0.0, 0, 0.0}}};
  CHECK(capture([&] { resample_uniform(two, 0); }).code() == Errc::InvalidConfig);
}

TEST_CASE("resample: 30-sample irregular trip matches brute-force interpolation") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    TripRecord t{"t", "d", {}};
    std::int64_t ts = 1'700'000'000'000;
    for (int i = 0; i < 30; ++i) {
      t.samples.push_back({ts, 38.0 + (rng() % 1000) * 1e-5, 21.0 + (rng() % 1000) * 1e-5,
                           static_cast<double>(rng() % 120), 800.0 + static_cast<double>(rng() % 3000),
                           static_cast<double>(rng() % 100), static_cast<int>(rng() % 2),
                           60.0 + static_cast<double>(rng() % 60)});
      ts += 200 + static_cast<std::int64_t>(rng() % 1800);
    }
    const std::int64_t period = 250 + static_cast<std::int64_t>(rng() % 1000);
    const auto r = resample_uniform(t, period);

    std::vector<std::int64_t> ts_in;
    std::vector<double> speed, rpm, thr, hr, lat, lon;
    for (const auto& s : t.samples) {
      ts_in.push_back(s.timestamp_ms);
      speed.push_back(s.speed_kmh);
      rpm.push_back(s.rpm);
      thr.push_back(s.throttle_pct);
      hr.push_back(s.hr_bpm);
      lat.push_back(s.lat);
      lon.push_back(s.lon);
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      const auto& s = r.samples[k];
      REQUIRE(s.timestamp_ms == t.samples.front().timestamp_ms + static_cast<std::int64_t>(k) * period);
      worst = std::max({worst, std::abs(s.speed_kmh - oracle::interpolate(ts_in, speed, s.timestamp_ms)),
                        std::abs(s.rpm - oracle::interpolate(ts_in, rpm, s.timestamp_ms)),
                        std::abs(s.throttle_pct - oracle::interpolate(ts_in, thr, s.timestamp_ms)),
                        std::abs(s.hr_bpm - oracle::interpolate(ts_in, hr, s.timestamp_ms)),
                        std::abs(s.lat - oracle::interpolate(ts_in, lat, s.timestamp_ms)),
                        std::abs(s.lon - oracle::interpolate(ts_in, lon, s.timestamp_ms))});
      // Zero-order hold: brake of the latest input at or before the grid point.
      int held = t.samples.front().brake;
      for (const auto& in : t.samples) {
        if (in.timestamp_ms <= s.timestamp_ms) held = in.brake;
      }
      CHECK(s.brake == held);
    }
    CHECK(worst < 1e-9);
    // Grid spacing is constant and never overshoots the last input.
    CHECK(r.samples.front().timestamp_ms == t.samples.front().timestamp_ms);
    CHECK(r.samples.back().timestamp_ms <= t.samples.back().timestamp_ms);
    CHECK(t.samples.back().timestamp_ms - r.samples.back().timestamp_ms < period);
  }
}

TEST_CASE("resample preserves the last timestamp when the duration divides evenly") {
  TripRecord t{"t", "d", {{0, 38.0, 21.0, 0.0, 800.0, 0.0, 0, 0.0}, {333, 38.0, 21.0, 3.0, 800.0, 0.0, 0, 0.0},
                          {3000, 38.0, 21.0, 9.0, 800.0, 0.0, 0, 0.0}}};
  const auto r = resample_uniform(t, 1000);
  REQUIRE(r.samples.size() == 4);
  CHECK(r.samples.back().timestamp_ms == 3000);
  CHECK(r.samples.back().speed_kmh == doctest::Approx(9.0));
}

TEST_CASE("validate_trip rejects what decode rejects") {
  TripRecord t{"t", "d", {{0, 38.0, 21.0, 0.0, 800.0, 0.0, 0, 0.0}, {0, 38.0, 21.0, 0.0, 800.0, 0.0, 0, 0.0}}};
  CHECK(capture([&] { validate_trip(t); }).code() == Errc::OutOfOrderTimestamp);
  t.samples[1].timestamp_ms = 1;
  t.samples[1].throttle_pct = 101.0;
  CHECK(capture([&] { validate_trip(t); }).code() == Errc::InvariantViolation);
  CHECK(find_invalid_field(t.samples[1]) == "throttle_pct");
  CHECK(find_invalid_field(t.samples[0]).empty());
}
