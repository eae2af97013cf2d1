// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ecodrive/error.hpp"
#include "ecodrive/json_io.hpp"
#include "ecodrive/obd.hpp"
#include "ecodrive/scoring.hpp"
#include "ecodrive/service.hpp"
#include "ecodrive/store.hpp"
#include "ecodrive/tripgen.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ecodrive;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr double kSigmoidRelTol = 1e-12;
constexpr double kSigmoidBudgetS = 1.0;
constexpr double kVarianceTol = 1e-9;
constexpr double kVarianceBudgetS = 1.0;
constexpr double kHistogramTol = 1e-12;
constexpr double kCsvTol = 1e-6;
constexpr double kOrderingBudgetS = 30.0;

struct Outcome {
  bool pass = true;
  std::string details;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s %s (%s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.details.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1 Hz trip heading north with the given RPM trace.
TripRecord rpm_trip(const std::vector<double>& rpm) {
  TripRecord t{"acc", "acc", {}};
  for (std::size_t k = 0; k < rpm.size(); ++k) {
    const double lat = 38.0 + (60.0 / 3.6) * static_cast<double>(k) / 6371008.8 * 180.0 / std::numbers::pi;
    t.samples.push_back({1000LL * static_cast<std::int64_t>(k), lat, 21.7, 60.0, rpm[k], 15.0, 0, 0.0});
  }
  return t;
}

Outcome sigmoid_conformance() {
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto t0 = Clock::now();
  double worst = 0.0;
  int non_monotone = 0;
  for (int i = 0; i < 1000; ++i) {
    SigmoidParams p;
    p.a2 = 0.5 * u01(rng);
    p.a4 = 0.5 + 2.5 * u01(rng);
    p.a1 = (0.01 + 0.99 * u01(rng)) * p.a4 * (1.0 - p.a2);
    p.a3 = std::exp(std::log(1e-3) + (std::log(5.0) - std::log(1e-3)) * u01(rng));
    p.x0 = -1000.0 + 5000.0 * u01(rng);
    if (!p.valid()) return {false, "generated invalid params"};
    const double span = 30.0 / p.a3;
    const double x = p.x0 + span * (2.0 * u01(rng) - 1.0);
    const double y = p.x0 + span * (2.0 * u01(rng) - 1.0);
    const double got = sigmoid(x, p);
    const auto want = oracle::sigmoid(x, p);
    const double rel = static_cast<double>(boost::multiprecision::abs((oracle::big(got) - want) / want));
    worst = std::max(worst, rel);
    const double lo = std::min(x, y), hi = std::max(x, y);
    if (lo < hi && sigmoid(lo, p) < sigmoid(hi, p)) ++non_monotone;
  }
  const double elapsed = seconds_since(t0);
  const bool pass = worst <= kSigmoidRelTol && non_monotone == 0 && elapsed < kSigmoidBudgetS;
  return {pass, "1000 cases, max rel err " + fmt(worst) + " <= " + fmt(kSigmoidRelTol) + ", " +
                    std::to_string(non_monotone) + " monotonicity violations, " + fmt(elapsed) + " s < " +
                    fmt(kSigmoidBudgetS) + " s"};
}

Outcome rpm_variance_conformance() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const ScoringConfig cfg;
  const auto t0 = Clock::now();
  double worst = 0.0;
  int ag_mismatch = 0, oversize = 0;
  for (int i = 0; i < 1000; ++i) {
    const double centre = 800.0 + 4000.0 * u01(rng);
    const double spread = 1500.0 * u01(rng);
    // 31 samples span 30 s; the window [0, 30 s) holds the first 30.
    std::vector<double> rpm(31);
    for (auto& r : rpm) r = std::max(0.0, centre + spread * (2.0 * u01(rng) - 1.0));
    const auto w = extract_windows(rpm_trip(rpm), cfg);
    rpm.pop_back();
    if (w.size() != 1 || w[0].sample_count != 30) {
      ++oversize;
      continue;
    }
    const auto want = static_cast<double>(oracle::population_variance(rpm));
    worst = std::max(worst, std::abs(w[0].rpm_variance - want) / std::max(1.0, want));
    const double ag = std::clamp(w[0].rpm_variance / cfg.mu, 0.0, 1.0);
    if (aggressiveness_rpm(w[0], cfg) != ag) ++ag_mismatch;
  }
  const double elapsed = seconds_since(t0);
  const bool pass = worst <= kVarianceTol && ag_mismatch == 0 && oversize == 0 && elapsed < kVarianceBudgetS;
  return {pass, "1000 windows of 30 samples, max rel err " + fmt(worst) + " <= " + fmt(kVarianceTol) + ", " +
                    std::to_string(ag_mismatch) + " AG_RPM mismatches, " + std::to_string(oversize) +
                    " bad windows, " + fmt(elapsed) + " s < " + fmt(kVarianceBudgetS) + " s"};
}

Outcome braking_intensity_conformance() {
  auto bi = [](int a, int s) {
    WindowFeatures f;
    f.abrupt_brakes = a;
    f.smooth_brakes = s;
    return braking_intensity_agg(f);
  };
  int wrong = 0, out_of_range = 0, non_monotone = 0;
  for (int a = 0; a <= 20; ++a) {
    for (int s = 0; s <= 20; ++s) {
      const double v = bi(a, s);
      const double want = a + s == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(a + s);
      if (v != want) ++wrong;
      if (v < 0.0 || v > 1.0) ++out_of_range;
      if (a < 20 && bi(a + 1, s) < v) ++non_monotone;
      if (s < 20 && bi(a, s + 1) > v) ++non_monotone;
    }
  }
  const bool pass = wrong == 0 && out_of_range == 0 && non_monotone == 0 && bi(0, 0) == 0.0;
  return {pass, "441 pairs, " + std::to_string(wrong) + " mismatches, " + std::to_string(out_of_range) +
                    " out of [0,1], " + std::to_string(non_monotone) + " monotonicity violations, BI(0,0)=" +
                    fmt(bi(0, 0))};
}

Outcome histogram_conformance() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n_edges = 1 + rng() % 5;
    std::vector<double> edges;
    double e = 0.5 * u01(rng);
    for (std::size_t k = 0; k < n_edges; ++k) {
      e += 0.1 + 1.5 * u01(rng);
      edges.push_back(e);
    }
    std::vector<double> weights(n_edges + 1);
    for (auto& w : weights) w = u01(rng);
    std::vector<double> events(rng() % 21);
    for (auto& v : events) {
      // About a quarter of the events sit exactly on an edge.
      v = rng() % 4 == 0 ? edges[rng() % edges.size()] : (e + 1.0) * u01(rng);
    }
    const double got = weighted_histogram_score(events, edges, weights);
    worst = std::max(worst, std::abs(got - oracle::histogram(events, edges, weights)));
  }
  return {worst <= kHistogramTol, "1000 instances, max abs err " + fmt(worst) + " <= " + fmt(kHistogramTol)};
}

Outcome windowing_invariants() {
  const ScoringConfig cfg;
  const double W = cfg.window_s;
  int bad = 0;
  std::string first;
  for (int d = 30; d <= 600; ++d) {
    const auto trip = rpm_trip(std::vector<double>(static_cast<std::size_t>(d) + 1, 1500.0));
    const auto w = extract_windows(trip, cfg);
    const int full = static_cast<int>(d / W);
    const double rest = d - full * W;
    const std::size_t expected = static_cast<std::size_t>(full) + (2.0 * rest >= W ? 1 : 0);
    bool ok = w.size() == expected && !w.empty() && w.front().start_ms == trip.samples.front().timestamp_ms;
    double covered = 0.0;
    std::size_t samples = 0;
    for (std::size_t i = 0; ok && i < w.size(); ++i) {
      covered += w[i].duration_s();
      samples += w[i].sample_count;
      if (i > 0 && w[i].start_ms != w[i - 1].end_ms) ok = false;
      if (i + 1 < w.size() && (w[i].duration_s() != W || w[i].sample_count != static_cast<std::size_t>(W))) ok = false;
      if (w[i].duration_s() > W) ok = false;
    }
    ok = ok && covered <= d + 1e-9 && covered >= d - W / 2.0 - 1e-9 && samples <= trip.samples.size();
    if (!ok) {
      ++bad;
      if (first.empty()) first = ", first failure at " + std::to_string(d) + " s";
    }
  }
  return {bad == 0, "571 durations 30..600 s at 1 Hz, " + std::to_string(bad) + " violations" + first};
}

Outcome score_ordering() {
  const auto t0 = Clock::now();
  int wins = 0;
  std::string losers;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto [smooth, aggressive] = tripgen::generate_paired(tripgen::default_urban_route(), seed);
    const int s = score_trip(smooth).trip_ecoscore;
    const int a = score_trip(aggressive).trip_ecoscore;
    if (s > a) {
      ++wins;
    } else if (losers.size() < 60) {
      losers += " seed " + std::to_string(seed) + ": " + std::to_string(s) + "<=" + std::to_string(a);
    }
  }
  const double elapsed = seconds_since(t0);
  return {wins == 100 && elapsed < kOrderingBudgetS,
          std::to_string(wins) + "/100 smooth > aggressive, " + fmt(elapsed) + " s < " + fmt(kOrderingBudgetS) +
              " s" + losers};
}

Outcome obd_conformance() {
  int wrong = 0;
  std::size_t checked = 0;
  for (unsigned a = 0; a < 256; ++a) {
    const auto b = static_cast<std::uint8_t>(a);
    const std::vector<std::uint8_t> speed{0x41, 0x0D, b}, throttle{0x41, 0x11, b}, coolant{0x41, 0x05, b};
    wrong += obd::decode_frame(speed).value != oracle::obd_speed(a);
    wrong += obd::decode_frame(throttle).value != oracle::obd_throttle(a);
    wrong += obd::decode_frame(coolant).value != oracle::obd_coolant(a);
    checked += 3;
  }
  std::mt19937 rng(1234);
  for (int i = 0; i < 10000; ++i) {
    const unsigned a = rng() & 0xFF, b = rng() & 0xFF;
    const std::vector<std::uint8_t> frame{0x41, 0x0C, static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)};
    const auto r = obd::decode_frame(frame);
    wrong += r.channel != obd::Channel::Rpm || r.value != oracle::obd_rpm(a, b);
    ++checked;
  }
  return {wrong == 0, std::to_string(checked) + " frames (768 exhaustive + 10000 random RPM), " +
                          std::to_string(wrong) + " mismatches, bit-exact"};
}

Outcome csv_round_trip() {
  const auto urban = tripgen::default_urban_route();
  const tripgen::Route curvy{{600, 50, 0.004}, {900, 70, -0.002}, {400, 30, 0.01}};
  double worst = 0.0;
  int structural = 0;
  std::size_t samples = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto style = static_cast<tripgen::DrivingStyle>(i % 3);
    const auto seed = static_cast<std::uint64_t>(1000 + i);
    const std::int64_t period = i % 4 == 0 ? 250 : 1000;
    const auto t = tripgen::generate_trip(tripgen::profile_for(style, seed), i % 2 ? urban : curvy, period);
    const auto csv = encode_trip_csv(t);
    const auto back = decode_trip_csv(csv, t.trip_id, t.driver_id);
    samples += t.samples.size();
    if (back.samples.size() != t.samples.size() || back.trip_id != t.trip_id || back.driver_id != t.driver_id ||
        encode_trip_csv(back) != csv) {
      ++structural;
      continue;
    }
    for (std::size_t k = 0; k < t.samples.size(); ++k) {
      const auto& a = t.samples[k];
      const auto& b = back.samples[k];
      if (a.timestamp_ms != b.timestamp_ms || a.brake != b.brake) ++structural;
      for (double diff : {a.lat - b.lat, a.lon - b.lon, a.speed_kmh - b.speed_kmh, a.rpm - b.rpm,
                          a.throttle_pct - b.throttle_pct, a.hr_bpm - b.hr_bpm}) {
        worst = std::max(worst, std::abs(diff));
      }
    }
  }
  return {structural == 0 && worst <= kCsvTol,
          "1000 trips, " + std::to_string(samples) + " samples, max field err " + fmt(worst) + " <= " +
              fmt(kCsvTol) + ", " + std::to_string(structural) + " structural mismatches"};
}

Outcome gamification_replay() {
  testutil::TempDir dir;
  std::mt19937_64 rng(500);
  int uploads = 0, accepts = 0, rejected = 0;
  std::map<std::string, game::PlayerProfile> live;
  {
    TripStore store(dir.path(), {}, game::default_rules());
    const auto route = tripgen::default_highway_route();
    const auto urban = tripgen::default_urban_route();
    for (int op = 0; op < 500; ++op) {
      const std::string driver = "driver-" + std::to_string(rng() % 20);
      const auto profile = store.profile(driver);
      if (profile && rng() % 3 == 0) {
        // Mostly Available missions, sometimes an arbitrary one to exercise rejection.
        std::vector<std::string> candidates;
        for (const auto& [id, st] : profile->missions) {
          if (st == game::MissionState::Available || rng() % 4 == 0) candidates.push_back(id);
        }
        if (candidates.empty()) candidates.push_back(profile->missions.begin()->first);
        try {
          store.accept_mission(driver, candidates[rng() % candidates.size()]);
          ++accepts;
        } catch (const Error&) {
          ++rejected;
        }
      } else {
        const auto style = static_cast<tripgen::DrivingStyle>(rng() % 3);
        const auto trip = tripgen::generate_trip(tripgen::profile_for(style, 10000 + static_cast<std::uint64_t>(op)),
                                                 rng() % 2 ? route : urban);
        store.upload(driver, encode_trip_csv(trip));
        ++uploads;
      }
    }
    for (const auto& p : store.profiles()) live[p.driver_id] = p;
  }
  const auto replayed = TripStore::replay(dir.path(), game::default_rules());
  int mismatched = 0;
  for (const auto& [id, p] : live) {
    const auto it = replayed.find(id);
    if (it == replayed.end() || it->second != p) ++mismatched;
  }
  if (replayed.size() != live.size()) ++mismatched;
  return {mismatched == 0 && live.size() == 20,
          "500 ops (" + std::to_string(uploads) + " uploads, " + std::to_string(accepts) + " accepts, " +
              std::to_string(rejected) + " rejected) over " + std::to_string(live.size()) + " drivers, " +
              std::to_string(mismatched) + " replay mismatches"};
}

Outcome service_contract() {
  testutil::TempDir dir;
  ServerConfig cfg;
  cfg.port = 0;
  cfg.storage_dir = (dir / "store").string();
  cfg.request_log = false;
  Server server(cfg);
  const int port = server.bind();
  std::thread runner([&] { server.run(); });
  while (!server.running()) std::this_thread::yield();

  std::vector<std::string> failed;
  int checks = 0;
  auto expect = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok) failed.push_back(what);
  };
  auto status_is = [](const httplib::Result& r, int s) { return r && r->status == s; };
  auto error_is = [](const httplib::Result& r, const std::string& e) {
    if (!r) return false;
    const auto j = json::parse(r->body, nullptr, false);
    return j.is_object() && j.value("error", "") == e;
  };

  httplib::Client c("127.0.0.1", port);
  c.set_read_timeout(30);
  auto upload = [&](const std::string& driver, const std::string& csv) {
    return c.Post("/api/v1/trips", httplib::Headers{{"X-Driver-Id", driver}}, csv, "text/csv");
  };

  // Fixtures: 5 drivers x 3 trips.
  std::vector<std::pair<std::string, std::string>> trips;  // trip id, csv
  for (int d = 0; d < 5; ++d) {
    for (int k = 0; k < 3; ++k) {
      const auto style = static_cast<tripgen::DrivingStyle>((d + k) % 3);
      const auto csv = encode_trip_csv(tripgen::generate_trip(
          tripgen::profile_for(style, static_cast<std::uint64_t>(100 * d + k)),
          k == 0 ? tripgen::default_highway_route() : tripgen::default_urban_route()));
      const auto r = upload("fixture-" + std::to_string(d), csv);
      expect(status_is(r, 201), "upload 201");
      if (r && r->status == 201) trips.emplace_back(json::parse(r->body).at("trip_id"), csv);
    }
  }

  for (const auto& [id, csv] : trips) {
    const auto r = c.Get("/api/v1/trips/" + id);
    expect(status_is(r, 200), "GET trip 200");
    if (!status_is(r, 200)) continue;
    const auto j = json::parse(r->body);
    const auto local = score_trip(decode_trip_csv(csv, id, j.at("driver_id")));
    expect(j.at("window_count") == local.windows.size() && j.at("score").at("windows").size() == local.windows.size(),
           "window count");
    expect(j.at("trip_ecoscore") == local.trip_ecoscore, "ecoscore equals local re-score");
    const auto raw = c.Get("/api/v1/trips/" + id + "/csv");
    expect(status_is(raw, 200) && raw->body == csv, "GET trip csv");
  }

  if (!trips.empty()) {
    const auto dup = upload("fixture-0", trips.front().second);
    expect(status_is(dup, 409) && error_is(dup, "DuplicateTrip"), "duplicate upload 409");
  }
  auto r = upload("fixture-0", std::string(kTripCsvHeader) + "\n0,1,2,3,4,5,0,60\n1000,1,2,fast,4,5,0,60\n");
  expect(status_is(r, 400) && error_is(r, "MalformedRow") && json::parse(r->body).value("line", 0) == 3 &&
             json::parse(r->body).value("field", "") == "speed_kmh",
         "malformed CSV 400 with line and field");
  r = upload("fixture-0", std::string(kTripCsvHeader) + "\n");
  expect(status_is(r, 422) && error_is(r, "TripTooShort"), "header-only 422");
  r = c.Post("/api/v1/trips", trips.empty() ? "" : trips.front().second, "text/csv");
  expect(status_is(r, 400), "missing driver header 400");

  r = c.Get("/api/v1/trips/trip-424242");
  expect(status_is(r, 404) && error_is(r, "UnknownTrip"), "unknown trip 404");
  r = c.Get("/api/v1/trips/trip-424242/csv");
  expect(status_is(r, 404), "unknown trip csv 404");
  r = c.Get("/api/v1/drivers/nobody/profile");
  expect(status_is(r, 404) && error_is(r, "UnknownDriver"), "unknown driver 404");
  r = c.Post("/api/v1/drivers/fixture-0/missions/no-such-mission/accept");
  expect(status_is(r, 404) && error_is(r, "UnknownMission"), "unknown mission 404");
  r = c.Get("/api/v1/no-such-route");
  expect(status_is(r, 404), "unknown route 404");

  r = c.Get("/api/v1/leaderboard?n=3");
  expect(status_is(r, 200) && json::parse(r->body).get<std::vector<game::LeaderboardEntry>>() ==
                                  server.store().leaderboard(3),
         "leaderboard n=3 matches store");
  r = c.Get("/api/v1/leaderboard?n=zero");
  expect(status_is(r, 400), "bad leaderboard n 400");

  for (int d = 0; d < 5; ++d) {
    const std::string id = "fixture-" + std::to_string(d);
    r = c.Get("/api/v1/drivers/" + id + "/profile");
    expect(status_is(r, 200), "GET profile 200");
    if (!status_is(r, 200)) continue;
    const auto p = json::parse(r->body).get<game::PlayerProfile>();
    expect(p == *server.store().profile(id), "profile matches store");
    for (const auto& [mid, st] : p.missions) {
      const auto a = c.Post("/api/v1/drivers/" + id + "/missions/" + mid + "/accept");
      if (st == game::MissionState::Available) {
        expect(status_is(a, 200) && json::parse(a->body).value("state", "") == "Accepted", "accept Available 200");
      } else {
        expect(status_is(a, 409) && error_is(a, "MissionNotAvailable"), "accept non-Available 409");
      }
    }
  }
  r = c.Get("/api/v1/missions");
  expect(status_is(r, 200), "GET missions 200");

  server.stop();
  runner.join();

  std::string details = std::to_string(checks - static_cast<int>(failed.size())) + "/" + std::to_string(checks) +
                        " endpoint checks, " + std::to_string(trips.size()) +
                        " fixture trips, dashboard not built";
  for (std::size_t i = 0; i < failed.size() && i < 5; ++i) details += "; failed: " + failed[i];
  return {failed.empty() && trips.size() == 15, details};
}

}  // namespace

int main() {
  report("sigmoid-conformance", sigmoid_conformance);
  report("rpm-variance-conformance", rpm_variance_conformance);
  report("braking-intensity-conformance", braking_intensity_conformance);
  report("weighted-histogram-oracle", histogram_conformance);
  report("windowing-invariants", windowing_invariants);
  report("score-ordering", score_ordering);
  report("obd-decoder", obd_conformance);
  report("csv-round-trip", csv_round_trip);
  report("gamification-replay", gamification_replay);
  report("service-contract", service_contract);
  std::printf("%s: %d failed\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures);
  return failures == 0 ? 0 : 1;
}
