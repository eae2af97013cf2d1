#include "ecodrive/service.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>

#include <httplib.h>
#include <json.hpp>

#include "ecodrive/error.hpp"
#include "ecodrive/json_io.hpp"
#include "ecodrive/scoring_config.hpp"
#include "ecodrive/telemetry.hpp"

namespace ecodrive {

namespace fs = std::filesystem;
using nlohmann::json;

ServerConfig parse_server_config(std::string_view text, const std::string& base_dir) {
  ServerConfig cfg;
  auto resolve = [&](const std::string& v) {
    if (v.empty()) return v;
    const fs::path p(v);
    return p.is_absolute() ? v : (fs::path(base_dir) / p).lexically_normal().string();
  };
  for (const auto& kv : parse_key_values(text)) {
    auto fail = [&](const std::string& why) {
      throw ParseError(Errc::InvalidConfig, kv.line, kv.key,
                       "line " + std::to_string(kv.line) + ": " + why);
    };
    if (kv.key == "bind_address") {
      cfg.bind_address = kv.value;
    } else if (kv.key == "port") {
      int port = -1;
      auto [ptr, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), port);
      if (ec != std::errc{} || ptr != kv.value.data() + kv.value.size() || port < 0 || port > 65535) {
        fail("port must be an integer in [0, 65535]");
      }
      cfg.port = port;
    } else if (kv.key == "storage_dir") {
      cfg.storage_dir = resolve(kv.value);
    } else if (kv.key == "scoring_config") {
      cfg.scoring_config = resolve(kv.value);
    } else if (kv.key == "rules") {
      cfg.rules = resolve(kv.value);
    } else if (kv.key == "static_dir") {
      cfg.static_dir = resolve(kv.value);
    } else if (kv.key == "request_log") {
      if (kv.value != "true" && kv.value != "false") fail("request_log must be true or false");
      cfg.request_log = kv.value == "true";
    } else {
      fail("unknown key '" + kv.key + "'");
    }
  }
  if (cfg.storage_dir.empty()) throw Error(Errc::InvalidConfig, "storage_dir must not be empty");
  return cfg;
}

ServerConfig load_server_config(const std::string& path) {
  const auto text = read_text_file(path);
  const auto parent = fs::path(path).parent_path();
  return parse_server_config(text, parent.empty() ? "." : parent.string());
}

namespace {

int status_for(Errc code) {
  switch (code) {
    case Errc::MalformedHeader:
    case Errc::MalformedRow:
    case Errc::OutOfOrderTimestamp:
    case Errc::InvariantViolation:
    case Errc::InvalidDriverId:
      return 400;
    case Errc::TripTooShort:
    case Errc::TooFewSamples:
    case Errc::NotUniformlySampled:
      return 422;
    case Errc::DuplicateTrip:
    case Errc::MissionNotAvailable:
      return 409;
    case Errc::UnknownDriver:
    case Errc::UnknownMission:
    case Errc::UnknownTrip:
      return 404;
    default:
      return 500;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view error, const std::string& message) {
  send_json(res, status, json{{"error", error}, {"message", message}});
}

void send_error(httplib::Response& res, const Error& e) {
  json body{{"error", to_string(e.code())}, {"message", e.what()}};
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
    body["line"] = pe->line();
    body["field"] = pe->field();
  }
  send_json(res, status_for(e.code()), body);
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  };
}

json trip_json(const StoredTrip& t) {
  return json{{"trip_id", t.trip_id},
              {"driver_id", t.driver_id},
              {"received_at_ms", t.received_at_ms},
              {"content_hash", t.content_hash},
              {"config_hash", t.config_hash},
              {"window_count", t.score.windows.size()},
              {"trip_ecoscore", t.score.trip_ecoscore},
              {"score", t.score}};
}

}  // namespace

struct Server::Impl {
  ServerConfig cfg;
  TripStore store;
  httplib::Server http;
  std::mutex log_mutex;

  static ScoringConfig scoring_for(const ServerConfig& c) {
    return c.scoring_config.empty() ? ScoringConfig{} : load_scoring_config(c.scoring_config);
  }
  static game::RuleSet rules_for(const ServerConfig& c) {
    return c.rules.empty() ? game::default_rules() : game::load_rules(c.rules);
  }

  explicit Impl(const ServerConfig& c)
      : cfg(c), store(c.storage_dir, scoring_for(c), rules_for(c)) {
    routes();
  }

  void routes() {
    http.set_payload_max_length(64 * 1024 * 1024);
    http.Post("/api/v1/trips", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_header("X-Driver-Id")) {
        send_error(res, 400, "MissingDriverId", "X-Driver-Id header is required");
        return;
      }
      auto result = store.upload(req.get_header_value("X-Driver-Id"), req.body);
      send_json(res, 201,
                json{{"trip_id", result.trip->trip_id},
                     {"driver_id", result.trip->driver_id},
                     {"trip_ecoscore", result.trip->score.trip_ecoscore},
                     {"events", result.events}});
    }));

    http.Get(R"(/api/v1/trips/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto t = store.trip(req.matches[1]);
      if (!t) throw Error(Errc::UnknownTrip, "unknown trip '" + std::string(req.matches[1]) + "'");
      send_json(res, 200, trip_json(*t));
    }));

    http.Get(R"(/api/v1/trips/([^/]+)/csv)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto t = store.trip(req.matches[1]);
      if (!t) throw Error(Errc::UnknownTrip, "unknown trip '" + std::string(req.matches[1]) + "'");
      res.set_content(t->csv, "text/csv");
    }));

    http.Get(R"(/api/v1/drivers/([^/]+)/profile)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto p = store.profile(req.matches[1]);
               if (!p) throw Error(Errc::UnknownDriver, "unknown driver '" + std::string(req.matches[1]) + "'");
               send_json(res, 200, *p);
             }));

    http.Post(R"(/api/v1/drivers/([^/]+)/missions/([^/]+)/accept)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
                const std::string mission = req.matches[2];
                const auto p = store.accept_mission(req.matches[1], mission);
                send_json(res, 200,
                          json{{"driver_id", p.driver_id},
                               {"mission_id", mission},
                               {"state", to_string(p.missions.at(mission))},
                               {"profile", p}});
              }));

    http.Get("/api/v1/leaderboard", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::size_t n = 10;
      if (req.has_param("n")) {
        const auto v = req.get_param_value("n");
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        if (ec != std::errc{} || ptr != v.data() + v.size() || n == 0) {
          send_error(res, 400, "BadParameter", "n must be a positive integer");
          return;
        }
      }
      send_json(res, 200, json(store.leaderboard(n)));
    }));

    http.Get("/api/v1/missions", guarded([this](const httplib::Request&, httplib::Response& res) {
      json missions = json::array();
      for (const auto& m : store.rules().missions) {
        missions.push_back({{"id", m.id}, {"prerequisite_card", m.prerequisite_card}, {"trophy", m.trophy}});
      }
      send_json(res, 200, json{{"missions", missions}, {"avatar_parts", store.rules().avatar_parts}});
    }));

    if (!cfg.static_dir.empty() && !http.set_mount_point("/", cfg.static_dir)) {
      throw Error(Errc::InvalidConfig, "static_dir '" + cfg.static_dir + "' is not a directory");
    }

    http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      send_error(res, res.status, res.status == 404 ? "NotFound" : "HttpError",
                 "no route for " + req.method + " " + req.path);
      return httplib::Server::HandlerResponse::Handled;
    });

    if (cfg.request_log) {
      http.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
        using namespace std::chrono;
        const auto ts = duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
        const json line{{"ts_ms", ts},
                        {"method", req.method},
                        {"path", req.path},
                        {"status", res.status},
                        {"remote", req.remote_addr},
                        {"bytes_in", req.body.size()},
                        {"bytes_out", res.body.size()}};
        std::lock_guard lock(log_mutex);
        std::cout << line.dump(-1, ' ', false, json::error_handler_t::replace) << std::endl;
      });
    }
  }
};

Server::Server(const ServerConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
Server::~Server() { stop(); }

int Server::bind() {
  auto& c = impl_->cfg;
  if (c.port == 0) {
    const int port = impl_->http.bind_to_any_port(c.bind_address);
    if (port < 0) throw std::runtime_error("cannot bind " + c.bind_address);
    return port;
  }
  if (!impl_->http.bind_to_port(c.bind_address, c.port)) {
    throw std::runtime_error("cannot bind " + c.bind_address + ":" + std::to_string(c.port));
  }
  return c.port;
}

void Server::run() { impl_->http.listen_after_bind(); }
void Server::stop() {
  if (impl_) impl_->http.stop();
}
bool Server::running() const { return impl_->http.is_running(); }
TripStore& Server::store() { return impl_->store; }

}  // namespace ecodrive
