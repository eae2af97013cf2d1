#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "ecodrive/store.hpp"

namespace ecodrive {

/// `key = value` service configuration. Relative paths are resolved against
/// the directory holding the config file.
struct ServerConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string storage_dir = "ecodrive-data";
  std::string scoring_config;  // empty: built-in defaults
  std::string rules;           // empty: built-in rules
  std::string static_dir;      // empty: no static mount
  bool request_log = true;
};

ServerConfig parse_server_config(std::string_view text, const std::string& base_dir = ".");
ServerConfig load_server_config(const std::string& path);

/// HTTP front end over a TripStore.
class Server {
 public:
  explicit Server(const ServerConfig& cfg);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the listening socket and returns the bound port.
  int bind();
  /// Serves until stop(); call bind() first.
  void run();
  void stop();
  bool running() const;

  TripStore& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ecodrive
