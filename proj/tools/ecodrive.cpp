#include <signal.h>

#include <atomic>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "ecodrive/error.hpp"
#include "ecodrive/json_io.hpp"
#include "ecodrive/obd.hpp"
#include "ecodrive/scoring.hpp"
#include "ecodrive/service.hpp"
#include "ecodrive/telemetry.hpp"
#include "ecodrive/tripgen.hpp"

namespace {

using namespace ecodrive;
using nlohmann::json;

enum Exit { kOk = 0, kRuntime = 1, kInput = 2, kRejected = 3 };

// Map a domain exception onto the exit-code convention.
int report(const Error& e) {
  std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
  switch (e.code()) {
    case Errc::TripTooShort:
    case Errc::TooFewSamples:
    case Errc::DuplicateTrip:
    case Errc::MissionNotAvailable:
      return kRejected;
    default:
      return kInput;
  }
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  return read_text_file(path);
}

ScoringConfig config_or_default(const std::string& path) {
  return path.empty() ? ScoringConfig{} : load_scoring_config(path);
}

tripgen::Route route_from(const std::string& spec) {
  if (spec == "builtin:urban") return tripgen::default_urban_route();
  if (spec == "builtin:highway") return tripgen::default_highway_route();
  return tripgen::parse_route(read_text_file(spec));
}

std::string stem(const std::string& path) {
  return path == "-" ? "stdin" : std::filesystem::path(path).stem().string();
}

int cmd_score(const std::string& path, const std::string& config, bool as_json,
              const std::string& trip_id, const std::string& driver_id) {
  const auto cfg = config_or_default(config);
  const auto trip = decode_trip_csv(read_input(path), trip_id.empty() ? stem(path) : trip_id,
                                    driver_id.empty() ? "local" : driver_id);
  const auto score = score_trip(trip, cfg);
  if (as_json) {
    std::cout << json(score).dump(2) << '\n';
    return kOk;
  }
  std::printf("%6s %8s %8s %6s %6s %6s %6s %6s %6s %6s %6s %6s\n", "window", "start_s", "end_s", "eco",
              "agg", "shift", "brake", "accel", "rpm", "cruise", "abrupt", "smooth");
  for (const auto& w : score.windows) {
    const auto& f = w.features;
    std::printf("%6zu %8.1f %8.1f %6.3f %6.3f %6.3f %6.3f %6.3f %6.3f %6.3f %6d %6d\n", w.window_index,
                static_cast<double>(f.start_ms - trip.samples.front().timestamp_ms) / 1000.0,
                static_cast<double>(f.end_ms - trip.samples.front().timestamp_ms) / 1000.0, w.eco_score,
                w.aggressiveness, w.parameters.shift_up, w.parameters.braking, w.parameters.acceleration,
                w.parameters.rpm, w.parameters.cruising, f.abrupt_brakes, f.smooth_brakes);
  }
  std::printf("eco_mean %.4f\nagg_mean %.4f\ntrip_ecoscore %d\n", score.eco_mean, score.agg_mean,
              score.trip_ecoscore);
  return kOk;
}

int cmd_decode(const std::string& path, bool as_json) {
  const auto trip = decode_trip_csv(read_input(path), stem(path), "local");
  if (as_json) {
    json samples = json::array();
    for (const auto& s : trip.samples) {
      samples.push_back({{"timestamp_ms", s.timestamp_ms}, {"lat", s.lat}, {"lon", s.lon},
                         {"speed_kmh", s.speed_kmh}, {"rpm", s.rpm}, {"throttle_pct", s.throttle_pct},
                         {"brake", s.brake}, {"hr_bpm", s.hr_bpm}});
    }
    std::cout << json{{"trip_id", trip.trip_id}, {"samples", samples}}.dump(2) << '\n';
    return kOk;
  }
  std::cout << "samples " << trip.samples.size() << '\n'
            << "duration_s " << format_real(static_cast<double>(trip.duration_ms()) / 1000.0) << '\n';
  if (!trip.samples.empty()) {
    std::cout << "first_timestamp_ms " << trip.samples.front().timestamp_ms << '\n'
              << "last_timestamp_ms " << trip.samples.back().timestamp_ms << '\n';
  }
  return kOk;
}

int cmd_simulate(const std::string& style, const std::string& route_spec, std::uint64_t seed,
                 const std::string& out, std::int64_t period_ms) {
  const auto route = route_from(route_spec);
  const auto trip = tripgen::generate_trip(tripgen::profile_for(tripgen::parse_style(style), seed), route,
                                           period_ms);
  const auto csv = encode_trip_csv(trip);
  if (out == "-") {
    std::cout << csv;
    return kOk;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  f << csv;
  if (!f.flush()) {
    std::cerr << "error: cannot write " << out << '\n';
    return kRuntime;
  }
  return kOk;
}

int cmd_obd_decode(const std::string& path) {
  const auto result = obd::decode_hex_log(read_input(path));
  if (!result.readings.empty()) std::cout << "timestamp_ms,channel,value\n";
  for (const auto& r : result.readings) {
    std::cout << r.timestamp_ms << ',' << obd::to_string(r.reading.channel) << ','
              << format_real(r.reading.value) << '\n';
  }
  for (const auto& e : result.errors) std::cerr << "line " << e.line << ": " << e.message << '\n';
  return result.errors.empty() ? kOk : kRuntime;
}

int cmd_serve(const std::string& config_path) {
  ServerConfig cfg;
  try {
    cfg = load_server_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }

  // Signals are taken synchronously by a watcher thread, never in a handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<Server> owned;
  int port = 0;
  try {
    owned = std::make_unique<Server>(cfg);
    port = owned->bind();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  Server& server = *owned;
  std::cerr << "listening on http://" << cfg.bind_address << ':' << port << std::endl;

  std::atomic<bool> done{false};
  std::thread watcher([&] {
    const timespec tick{0, 200'000'000};
    while (!done.load()) {
      if (sigtimedwait(&signals, nullptr, &tick) > 0) {
        server.stop();
        return;
      }
    }
  });
  server.run();
  done = true;
  watcher.join();
  std::cerr << "stopped" << std::endl;
  return kOk;
}

struct Url {
  std::string host;
  int port = 80;
};

Url parse_url(const std::string& url) {
  std::string rest = url;
  if (rest.starts_with("http://")) rest = rest.substr(7);
  while (!rest.empty() && rest.back() == '/') rest.pop_back();
  Url u;
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos) {
    u.host = rest;
  } else {
    u.host = rest.substr(0, colon);
    u.port = std::stoi(rest.substr(colon + 1));
  }
  if (u.host.empty()) throw std::invalid_argument("bad url '" + url + "'");
  return u;
}

int cmd_load_fixtures(const std::string& url, int drivers, int trips, std::uint64_t seed,
                      const std::string& route_spec) {
  const auto route = route_from(route_spec);
  const auto target = parse_url(url);
  httplib::Client client(target.host, target.port);
  client.set_read_timeout(30, 0);

  constexpr tripgen::DrivingStyle styles[] = {tripgen::DrivingStyle::Smooth, tripgen::DrivingStyle::Mixed,
                                              tripgen::DrivingStyle::Aggressive};
  std::mt19937_64 rng(seed);
  int uploaded = 0;
  for (int t = 0; t < trips; ++t) {
    for (int d = 0; d < drivers; ++d) {
      const std::string driver = "driver-" + std::to_string(d + 1);
      const auto style = styles[static_cast<std::size_t>(d) % 3];
      const auto trip = tripgen::generate_trip(tripgen::profile_for(style, rng()), route);
      auto res = client.Post("/api/v1/trips", httplib::Headers{{"X-Driver-Id", driver}},
                             encode_trip_csv(trip), "text/csv");
      if (!res) {
        std::cerr << "error: cannot reach " << url << ": " << httplib::to_string(res.error()) << '\n';
        return kRuntime;
      }
      if (res->status != 201) {
        std::cerr << "error: upload for " << driver << " returned " << res->status << ": " << res->body << '\n';
        return kRuntime;
      }
      ++uploaded;
      // Take on every mission the upload made available.
      for (const auto& ev : json::parse(res->body).at("events")) {
        if (ev.at("type") != "MissionAvailable") continue;
        const auto path =
            "/api/v1/drivers/" + driver + "/missions/" + ev.at("id").get<std::string>() + "/accept";
        auto acc = client.Post(path);
        if (!acc || acc->status != 200) {
          std::cerr << "error: accept " << path << " failed\n";
          return kRuntime;
        }
      }
    }
  }
  std::cout << "uploaded " << uploaded << " trips for " << drivers << " drivers\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eco-driving telemetry scoring and gamification"};
  app.require_subcommand(1);

  std::string path, config, trip_id, driver_id;
  bool as_json = false;

  auto* score = app.add_subcommand("score", "Score a trip CSV");
  score->add_option("trip", path, "Trip CSV file, - for stdin")->required();
  score->add_option("--config", config, "Scoring config file");
  score->add_flag("--json", as_json, "Print the TripScore as JSON");
  score->add_option("--trip-id", trip_id, "Trip id (default: file stem)");
  score->add_option("--driver-id", driver_id, "Driver id (default: local)");

  auto* decode = app.add_subcommand("decode", "Validate a trip CSV and summarize it");
  decode->add_option("trip", path, "Trip CSV file, - for stdin")->required();
  decode->add_flag("--json", as_json, "Print decoded samples as JSON");

  std::string style = "smooth", route, out;
  std::uint64_t seed = 1;
  std::int64_t period_ms = 1000;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic trip");
  simulate->add_option("--profile", style, "smooth, aggressive or mixed")
      ->check(CLI::IsMember({"smooth", "aggressive", "mixed"}));
  simulate->add_option("--route", route, "Route file, or builtin:urban / builtin:highway")->required();
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("-o,--output", out, "Output CSV, - for stdout")->required();
  simulate->add_option("--period-ms", period_ms, "Sample period")->check(CLI::PositiveNumber);

  auto* obd_decode = app.add_subcommand("obd-decode", "Decode an OBD-II hex log to channel readings");
  obd_decode->add_option("hexlog", path, "Hex log file, - for stdin")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", config, "Server config file")->required();

  std::string url = "http://127.0.0.1:8080";
  int drivers = 5, trips = 3;
  std::string fixture_route = "builtin:urban";
  auto* fixtures = app.add_subcommand("load-fixtures", "Upload simulated trips to a running server");
  fixtures->add_option("--url", url, "Server base URL");
  fixtures->add_option("--drivers", drivers, "Number of drivers")->check(CLI::PositiveNumber);
  fixtures->add_option("--trips", trips, "Trips per driver")->check(CLI::PositiveNumber);
  fixtures->add_option("--seed", seed, "Random seed");
  fixtures->add_option("--route", fixture_route, "Route file, or builtin:urban / builtin:highway");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*score) return cmd_score(path, config, as_json, trip_id, driver_id);
    if (*decode) return cmd_decode(path, as_json);
    if (*simulate) return cmd_simulate(style, route, seed, out, period_ms);
    if (*obd_decode) return cmd_obd_decode(path);
    if (*serve) return cmd_serve(config);
    if (*fixtures) return cmd_load_fixtures(url, drivers, trips, seed, fixture_route);
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kInput;
}
