#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ecodrive/gamification.hpp"
#include "ecodrive/scoring.hpp"

namespace ecodrive {

struct StoredTrip {
  std::string trip_id;
  std::string driver_id;
  std::int64_t received_at_ms = 0;
  std::string content_hash;  // sha256 of the raw CSV, hex
  std::string config_hash;   // names the scoring-<hash>.cfg snapshot
  std::string csv;
  TripScore score;
};

struct UploadResult {
  std::shared_ptr<const StoredTrip> trip;
  std::vector<game::GameEvent> events;
};

std::string sha256_hex(std::string_view data);

/// Append-only trip log plus per-driver profile snapshots under one
/// directory. Opening a directory replays its log.
class TripStore {
 public:
  TripStore(std::filesystem::path dir, ScoringConfig cfg, game::RuleSet rules);
  TripStore(const TripStore&) = delete;
  TripStore& operator=(const TripStore&) = delete;

  /// Decode, score, apply gamification and persist, all or nothing.
  /// Throws ParseError for bad CSV, Error(TripTooShort), Error(DuplicateTrip).
  UploadResult upload(const std::string& driver_id, std::string csv);

  /// Throws UnknownDriver, UnknownMission, MissionNotAvailable.
  game::PlayerProfile accept_mission(const std::string& driver_id, const std::string& mission_id);

  std::shared_ptr<const StoredTrip> trip(const std::string& trip_id) const;
  std::optional<game::PlayerProfile> profile(const std::string& driver_id) const;
  std::vector<game::PlayerProfile> profiles() const;
  std::vector<game::LeaderboardEntry> leaderboard(std::size_t n) const;
  std::size_t trip_count() const;

  const ScoringConfig& config() const noexcept { return cfg_; }
  const game::RuleSet& rules() const noexcept { return rules_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

  /// Profiles rebuilt from the log alone, re-scoring every stored CSV with
  /// the config snapshot it was scored under.
  static std::map<std::string, game::PlayerProfile> replay(const std::filesystem::path& dir,
                                                           const game::RuleSet& rules);

 private:
  struct DriverState {
    std::mutex write;
    std::set<std::string> hashes;
  };

  DriverState& driver_state(const std::string& driver_id);
  void append_log(const std::string& line);
  void write_snapshot(const game::PlayerProfile& p);
  void load();

  std::filesystem::path dir_;
  ScoringConfig cfg_;
  std::string cfg_hash_;
  game::RuleSet rules_;

  std::mutex drivers_mutex_;
  std::map<std::string, std::unique_ptr<DriverState>> drivers_;

  std::mutex log_mutex_;
  std::uint64_t next_trip_ = 1;

  mutable std::shared_mutex data_mutex_;
  std::map<std::string, std::shared_ptr<const StoredTrip>> trips_;
  std::map<std::string, game::PlayerProfile> profiles_;
};

}  // namespace ecodrive
