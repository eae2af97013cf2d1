#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecodrive/scoring.hpp"

namespace ecodrive::game {

enum class Comparison { Ge, Gt, Le, Lt, Eq };

/// Statistic over the trip history, evaluated after the current trip is
/// appended. `threshold` only matters for CountAtLeast / StreakAtLeast.
struct HistoryMetric {
  enum class Kind { Trips, Best, Last, Points, CountAtLeast, StreakAtLeast };
  Kind kind = Kind::Trips;
  int threshold = 0;

  bool operator==(const HistoryMetric&) const = default;
};

enum class TripMetric {
  TripEcoscore,
  EcoMean,
  AggMean,
  AbruptBrakes,
  SmoothBrakes,
  ShiftUps,
  CruisingWindows,
  Windows,
};

/// Badge or knowledge-card award rule.
struct HistoryRule {
  std::string id;
  HistoryMetric metric;
  Comparison op = Comparison::Ge;
  double value = 0.0;

  bool operator==(const HistoryRule&) const = default;
};

struct MissionRule {
  std::string id;
  std::string prerequisite_card;
  TripMetric metric = TripMetric::TripEcoscore;
  Comparison op = Comparison::Ge;
  double value = 0.0;
  std::string trophy;

  bool operator==(const MissionRule&) const = default;
};

struct RuleSet {
  double points_scale = 1.0;
  std::int64_t level_points = 500;
  std::vector<HistoryRule> badges;
  std::vector<HistoryRule> cards;
  std::vector<MissionRule> missions;
  /// Unlocked one per trophy, in this order.
  std::vector<std::string> avatar_parts;

  /// Throws MalformedRules on dangling prerequisites, duplicate ids or
  /// non-positive level size.
  void validate() const;
  bool operator==(const RuleSet&) const = default;
};

/// Declarative rules text. See data/default.rules for the grammar.
RuleSet parse_rules(std::string_view text);
std::string format_rules(const RuleSet& rules);
RuleSet load_rules(const std::string& path);
/// Built-in copy of data/default.rules.
const RuleSet& default_rules();
std::string_view default_rules_text() noexcept;

enum class MissionState { Locked, Available, Accepted, Completed };
std::string_view to_string(MissionState s) noexcept;
MissionState parse_mission_state(std::string_view s);

struct TripEntry {
  std::string trip_id;
  int trip_ecoscore = 0;

  bool operator==(const TripEntry&) const = default;
};

struct PlayerProfile {
  std::string driver_id;
  std::int64_t skill_points = 0;
  int level = 1;
  std::set<std::string> badges;
  std::set<std::string> knowledge_cards;
  std::map<std::string, MissionState> missions;
  std::set<std::string> trophies;
  std::set<std::string> avatar_parts;
  std::vector<TripEntry> trip_history;

  bool operator==(const PlayerProfile&) const = default;
};

/// Empty profile with every catalog mission Locked.
PlayerProfile new_profile(std::string driver_id, const RuleSet& rules);

enum class EventType {
  TripRecorded,
  PointsAwarded,
  LevelUp,
  BadgeEarned,
  CardAwarded,
  MissionAvailable,
  MissionCompleted,
  TrophyAwarded,
  AvatarPartUnlocked,
};
std::string_view to_string(EventType t) noexcept;
EventType parse_event_type(std::string_view s);

struct GameEvent {
  EventType type;
  std::string id;          // trip, badge, card, mission, trophy or part id
  std::int64_t value = 0;  // ecoscore, points or level where relevant

  bool operator==(const GameEvent&) const = default;
};

struct TripOutcome {
  PlayerProfile profile;
  std::vector<GameEvent> events;
};

std::int64_t points_for(int trip_ecoscore, const RuleSet& rules) noexcept;
double trip_metric(const TripScore& score, TripMetric metric) noexcept;

/// Pure transition for one scored trip. Throws UnknownDriver when the score
/// belongs to someone else and DuplicateTrip when the trip id is in history.
TripOutcome apply_trip(const PlayerProfile& profile, const TripScore& score, const RuleSet& rules);

/// Available -> Accepted. Throws UnknownMission or MissionNotAvailable.
PlayerProfile accept_mission(const PlayerProfile& profile, const std::string& mission_id);

struct LeaderboardEntry {
  std::string driver_id;
  std::int64_t skill_points = 0;
  std::size_t badge_count = 0;
  std::size_t trophy_count = 0;

  bool operator==(const LeaderboardEntry&) const = default;
};

/// Points descending, then trophies descending, then driver id ascending.
bool ranks_before(const LeaderboardEntry& a, const LeaderboardEntry& b) noexcept;
std::vector<LeaderboardEntry> leaderboard(std::span<const PlayerProfile> profiles, std::size_t n);

}  // namespace ecodrive::game
