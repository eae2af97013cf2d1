#include "ecodrive/store.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ecodrive/error.hpp"
#include "ecodrive/json_io.hpp"
#include "ecodrive/telemetry.hpp"

namespace ecodrive {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kLogName = "trips.log";

std::string hex(std::string_view bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xF]);
  }
  return out;
}

void check_driver_id(const std::string& id) {
  const bool ok = !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
           c == '_' || c == '.' || c == '@';
  });
  if (!ok) {
    throw Error(Errc::InvalidDriverId,
                "driver id must be 1-128 characters from [A-Za-z0-9._@-]");
  }
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

fs::path config_snapshot_path(const fs::path& dir, const std::string& hash) {
  return dir / ("scoring-" + hash + ".cfg");
}

std::string config_hash(const ScoringConfig& cfg) {
  return sha256_hex(serialize_scoring_config(cfg)).substr(0, 16);
}

void write_atomically(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(Errc::StorageFailure, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::StorageFailure, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::uint64_t trip_number(const std::string& trip_id) {
  std::uint64_t n = 0;
  if (trip_id.starts_with("trip-")) {
    std::from_chars(trip_id.data() + 5, trip_id.data() + trip_id.size(), n);
  }
  return n;
}

struct ReplayState {
  std::map<std::string, std::shared_ptr<const StoredTrip>> trips;
  std::map<std::string, game::PlayerProfile> profiles;
  std::map<std::string, std::set<std::string>> hashes;
  std::uint64_t next_trip = 1;
};

// Reads the log, dropping a torn final line left by an interrupted write.
ReplayState replay_log(const fs::path& dir, const game::RuleSet& rules, bool repair) {
  ReplayState st;
  const fs::path log_path = dir / kLogName;
  if (!fs::exists(log_path)) return st;

  std::string text = read_text_file(log_path.string());
  std::map<std::string, ScoringConfig> configs;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    ++line_no;
    if (eol == std::string::npos) {
      if (repair) fs::resize_file(log_path, pos);
      break;
    }
    const std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::StorageFailure, "trips.log line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto kind = rec.value("kind", std::string{});
    const auto driver = rec.at("driver_id").get<std::string>();
    if (kind == "trip") {
      auto trip = std::make_shared<StoredTrip>();
      rec.at("trip_id").get_to(trip->trip_id);
      trip->driver_id = driver;
      rec.at("received_at_ms").get_to(trip->received_at_ms);
      rec.at("content_hash").get_to(trip->content_hash);
      rec.at("config_hash").get_to(trip->config_hash);
      rec.at("csv").get_to(trip->csv);

      auto cfg_it = configs.find(trip->config_hash);
      if (cfg_it == configs.end()) {
        const auto path = config_snapshot_path(dir, trip->config_hash);
        cfg_it = configs.emplace(trip->config_hash, load_scoring_config(path.string())).first;
      }
      trip->score = score_trip(decode_trip_csv(trip->csv, trip->trip_id, driver), cfg_it->second);

      auto prof = st.profiles.find(driver);
      if (prof == st.profiles.end()) prof = st.profiles.emplace(driver, game::new_profile(driver, rules)).first;
      prof->second = game::apply_trip(prof->second, trip->score, rules).profile;
      st.hashes[driver].insert(trip->content_hash);
      st.next_trip = std::max(st.next_trip, trip_number(trip->trip_id) + 1);
      st.trips.emplace(trip->trip_id, std::move(trip));
    } else if (kind == "accept") {
      auto prof = st.profiles.find(driver);
      if (prof == st.profiles.end()) {
        throw Error(Errc::StorageFailure,
                    "trips.log line " + std::to_string(line_no) + ": accept before any trip");
      }
      prof->second = game::accept_mission(prof->second, rec.at("mission_id").get<std::string>());
    } else {
      throw Error(Errc::StorageFailure, "trips.log line " + std::to_string(line_no) + ": unknown record kind");
    }
  }
  return st;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::StorageFailure, "sha256 failed");
  }
  return hex(std::string_view(reinterpret_cast<const char*>(digest), len));
}

TripStore::TripStore(fs::path dir, ScoringConfig cfg, game::RuleSet rules)
    : dir_(std::move(dir)), cfg_(std::move(cfg)), rules_(std::move(rules)) {
  cfg_.validate();
  rules_.validate();
  cfg_hash_ = config_hash(cfg_);
  load();
}

void TripStore::load() {
  std::error_code ec;
  fs::create_directories(dir_ / "profiles", ec);
  if (ec) throw Error(Errc::StorageFailure, "cannot create " + dir_.string() + ": " + ec.message());

  const auto snap = config_snapshot_path(dir_, cfg_hash_);
  if (!fs::exists(snap)) write_atomically(snap, serialize_scoring_config(cfg_));

  auto st = replay_log(dir_, rules_, true);
  trips_ = std::move(st.trips);
  profiles_ = std::move(st.profiles);
  next_trip_ = st.next_trip;
  for (auto& [driver, hashes] : st.hashes) driver_state(driver).hashes = std::move(hashes);
  for (const auto& [driver, p] : profiles_) write_snapshot(p);
}

std::map<std::string, game::PlayerProfile> TripStore::replay(const fs::path& dir,
                                                             const game::RuleSet& rules) {
  return replay_log(dir, rules, false).profiles;
}

TripStore::DriverState& TripStore::driver_state(const std::string& driver_id) {
  std::lock_guard lock(drivers_mutex_);
  auto& slot = drivers_[driver_id];
  if (!slot) slot = std::make_unique<DriverState>();
  return *slot;
}

void TripStore::append_log(const std::string& line) {
  const auto path = dir_ / kLogName;
  std::FILE* f = std::fopen(path.c_str(), "ab");
  if (f == nullptr) throw Error(Errc::StorageFailure, "cannot open " + path.string());
  const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() && std::fputc('\n', f) != EOF &&
                  std::fflush(f) == 0;
  std::fclose(f);
  if (!ok) throw Error(Errc::StorageFailure, "cannot append to " + path.string());
}

void TripStore::write_snapshot(const game::PlayerProfile& p) {
  write_atomically(dir_ / "profiles" / (hex(p.driver_id) + ".json"), json(p).dump(2) + "\n");
}

UploadResult TripStore::upload(const std::string& driver_id, std::string csv) {
  check_driver_id(driver_id);
  TripRecord record = decode_trip_csv(csv, "", driver_id);
  const std::string hash = sha256_hex(csv);

  auto& ds = driver_state(driver_id);
  std::lock_guard driver_lock(ds.write);
  if (ds.hashes.contains(hash)) {
    throw Error(Errc::DuplicateTrip, "driver '" + driver_id + "' already uploaded this trip");
  }
  TripScore score = score_trip(record, cfg_);

  game::PlayerProfile current = profile(driver_id).value_or(game::new_profile(driver_id, rules_));

  auto trip = std::make_shared<StoredTrip>();
  game::TripOutcome outcome;
  {
    std::lock_guard log_lock(log_mutex_);
    trip->trip_id = "trip-" + std::to_string(next_trip_);
    trip->driver_id = driver_id;
    trip->received_at_ms = now_ms();
    trip->content_hash = hash;
    trip->config_hash = cfg_hash_;
    score.trip_id = trip->trip_id;
    trip->score = std::move(score);
    outcome = game::apply_trip(current, trip->score, rules_);

    const json rec{{"kind", "trip"},
                   {"trip_id", trip->trip_id},
                   {"driver_id", driver_id},
                   {"received_at_ms", trip->received_at_ms},
                   {"content_hash", hash},
                   {"config_hash", cfg_hash_},
                   {"csv", csv}};
    append_log(rec.dump());
    ++next_trip_;
  }
  trip->csv = std::move(csv);
  {
    std::unique_lock data_lock(data_mutex_);
    trips_[trip->trip_id] = trip;
    profiles_[driver_id] = outcome.profile;
  }
  ds.hashes.insert(hash);
  write_snapshot(outcome.profile);
  return {trip, std::move(outcome.events)};
}

game::PlayerProfile TripStore::accept_mission(const std::string& driver_id, const std::string& mission_id) {
  auto& ds = driver_state(driver_id);
  std::lock_guard driver_lock(ds.write);
  auto current = profile(driver_id);
  if (!current) throw Error(Errc::UnknownDriver, "unknown driver '" + driver_id + "'");
  auto next = game::accept_mission(*current, mission_id);
  {
    std::lock_guard log_lock(log_mutex_);
    append_log(json{{"kind", "accept"}, {"driver_id", driver_id}, {"mission_id", mission_id}}.dump());
  }
  {
    std::unique_lock data_lock(data_mutex_);
    profiles_[driver_id] = next;
  }
  write_snapshot(next);
  return next;
}

std::shared_ptr<const StoredTrip> TripStore::trip(const std::string& trip_id) const {
  std::shared_lock lock(data_mutex_);
  const auto it = trips_.find(trip_id);
  return it == trips_.end() ? nullptr : it->second;
}

std::optional<game::PlayerProfile> TripStore::profile(const std::string& driver_id) const {
  std::shared_lock lock(data_mutex_);
  const auto it = profiles_.find(driver_id);
  if (it == profiles_.end()) return std::nullopt;
  return it->second;
}

std::vector<game::PlayerProfile> TripStore::profiles() const {
  std::shared_lock lock(data_mutex_);
  std::vector<game::PlayerProfile> out;
  out.reserve(profiles_.size());
  for (const auto& [id, p] : profiles_) out.push_back(p);
  return out;
}

std::vector<game::LeaderboardEntry> TripStore::leaderboard(std::size_t n) const {
  const auto all = profiles();
  return game::leaderboard(all, n);
}

std::size_t TripStore::trip_count() const {
  std::shared_lock lock(data_mutex_);
  return trips_.size();
}

}  // namespace ecodrive
