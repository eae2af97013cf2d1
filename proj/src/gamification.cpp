#include "ecodrive/gamification.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ecodrive/error.hpp"
#include "ecodrive/scoring_config.hpp"

namespace ecodrive::game {

namespace {

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void rules_error(std::size_t line, const std::string& why) {
  throw ParseError(Errc::MalformedRules, line, "", "line " + std::to_string(line) + ": " + why);
}

template <typename T>
bool parse_num(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_comparison(std::string_view s, Comparison& out) {
  if (s == ">=") out = Comparison::Ge;
  else if (s == ">") out = Comparison::Gt;
  else if (s == "<=") out = Comparison::Le;
  else if (s == "<") out = Comparison::Lt;
  else if (s == "==") out = Comparison::Eq;
  else return false;
  return true;
}

std::string_view to_string(Comparison c) {
  switch (c) {
    case Comparison::Ge: return ">=";
    case Comparison::Gt: return ">";
    case Comparison::Le: return "<=";
    case Comparison::Lt: return "<";
    case Comparison::Eq: return "==";
  }
  return "?";
}

bool compare(double lhs, Comparison op, double rhs) {
  switch (op) {
    case Comparison::Ge: return lhs >= rhs;
    case Comparison::Gt: return lhs > rhs;
    case Comparison::Le: return lhs <= rhs;
    case Comparison::Lt: return lhs < rhs;
    case Comparison::Eq: return lhs == rhs;
  }
  return false;
}

bool parse_history_metric(std::string_view s, HistoryMetric& out) {
  using K = HistoryMetric::Kind;
  if (s == "trips") out = {K::Trips, 0};
  else if (s == "best") out = {K::Best, 0};
  else if (s == "last") out = {K::Last, 0};
  else if (s == "points") out = {K::Points, 0};
  else if (s.starts_with("count_ge:")) {
    out.kind = K::CountAtLeast;
    return parse_num(s.substr(9), out.threshold);
  } else if (s.starts_with("streak_ge:")) {
    out.kind = K::StreakAtLeast;
    return parse_num(s.substr(10), out.threshold);
  } else {
    return false;
  }
  return true;
}

std::string format_history_metric(const HistoryMetric& m) {
  using K = HistoryMetric::Kind;
  switch (m.kind) {
    case K::Trips: return "trips";
    case K::Best: return "best";
    case K::Last: return "last";
    case K::Points: return "points";
    case K::CountAtLeast: return "count_ge:" + std::to_string(m.threshold);
    case K::StreakAtLeast: return "streak_ge:" + std::to_string(m.threshold);
  }
  return "?";
}

constexpr std::pair<std::string_view, TripMetric> kTripMetrics[] = {
    {"trip_ecoscore", TripMetric::TripEcoscore},
    {"eco_mean", TripMetric::EcoMean},
    {"agg_mean", TripMetric::AggMean},
    {"abrupt_brakes", TripMetric::AbruptBrakes},
    {"smooth_brakes", TripMetric::SmoothBrakes},
    {"shift_ups", TripMetric::ShiftUps},
    {"cruising_windows", TripMetric::CruisingWindows},
    {"windows", TripMetric::Windows},
};

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

double history_metric(const PlayerProfile& p, const HistoryMetric& m) {
  using K = HistoryMetric::Kind;
  const auto& h = p.trip_history;
  switch (m.kind) {
    case K::Trips:
      return static_cast<double>(h.size());
    case K::Best: {
      int best = 0;
      for (const auto& t : h) best = std::max(best, t.trip_ecoscore);
      return best;
    }
    case K::Last:
      return h.empty() ? 0.0 : h.back().trip_ecoscore;
    case K::Points:
      return static_cast<double>(p.skill_points);
    case K::CountAtLeast:
      return static_cast<double>(std::count_if(
          h.begin(), h.end(), [&](const TripEntry& t) { return t.trip_ecoscore >= m.threshold; }));
    case K::StreakAtLeast: {
      std::size_t streak = 0;
      for (auto it = h.rbegin(); it != h.rend() && it->trip_ecoscore >= m.threshold; ++it) ++streak;
      return static_cast<double>(streak);
    }
  }
  return 0.0;
}

}  // namespace

void RuleSet::validate() const {
  auto fail = [](const std::string& why) { throw Error(Errc::MalformedRules, why); };
  if (level_points <= 0) fail("level_points must be positive");
  if (!(points_scale >= 0.0) || !std::isfinite(points_scale)) fail("points_scale must be non-negative");

  std::set<std::string> seen;
  for (const auto& b : badges) {
    if (!seen.insert("badge:" + b.id).second) fail("duplicate badge '" + b.id + "'");
  }
  std::set<std::string> card_ids;
  for (const auto& c : cards) {
    if (!card_ids.insert(c.id).second) fail("duplicate card '" + c.id + "'");
  }
  std::set<std::string> mission_ids;
  std::set<std::string> trophy_ids;
  for (const auto& m : missions) {
    if (!mission_ids.insert(m.id).second) fail("duplicate mission '" + m.id + "'");
    if (!card_ids.contains(m.prerequisite_card)) {
      fail("mission '" + m.id + "' requires unknown card '" + m.prerequisite_card + "'");
    }
    if (!trophy_ids.insert(m.trophy).second) fail("trophy '" + m.trophy + "' granted by two missions");
  }
  std::set<std::string> parts;
  for (const auto& a : avatar_parts) {
    if (!parts.insert(a).second) fail("duplicate avatar part '" + a + "'");
  }
}

RuleSet parse_rules(std::string_view text) {
  RuleSet rules;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto w = split_words(line);
    if (w.empty()) continue;

    if (w[0] == "set") {
      if (w.size() != 3) rules_error(line_no, "expected 'set <key> <value>'");
      if (w[1] == "points_scale") {
        if (!parse_num(w[2], rules.points_scale)) rules_error(line_no, "bad points_scale");
      } else if (w[1] == "level_points") {
        if (!parse_num(w[2], rules.level_points)) rules_error(line_no, "bad level_points");
      } else {
        rules_error(line_no, "unknown setting '" + std::string(w[1]) + "'");
      }
    } else if (w[0] == "badge" || w[0] == "card") {
      if (w.size() != 6 || w[2] != "when") {
        rules_error(line_no, "expected '" + std::string(w[0]) + " <id> when <metric> <op> <number>'");
      }
      HistoryRule r;
      r.id = std::string(w[1]);
      if (!parse_history_metric(w[3], r.metric)) rules_error(line_no, "unknown history metric '" + std::string(w[3]) + "'");
      if (!parse_comparison(w[4], r.op)) rules_error(line_no, "unknown operator '" + std::string(w[4]) + "'");
      if (!parse_num(w[5], r.value)) rules_error(line_no, "bad number '" + std::string(w[5]) + "'");
      (w[0] == "badge" ? rules.badges : rules.cards).push_back(std::move(r));
    } else if (w[0] == "mission") {
      if (w.size() != 10 || w[2] != "requires" || w[4] != "objective" || w[8] != "trophy") {
        rules_error(line_no,
                    "expected 'mission <id> requires <card> objective <metric> <op> <number> trophy <id>'");
      }
      MissionRule m;
      m.id = std::string(w[1]);
      m.prerequisite_card = std::string(w[3]);
      const auto metric = std::find_if(std::begin(kTripMetrics), std::end(kTripMetrics),
                                       [&](const auto& e) { return e.first == w[5]; });
      if (metric == std::end(kTripMetrics)) rules_error(line_no, "unknown trip metric '" + std::string(w[5]) + "'");
      m.metric = metric->second;
      if (!parse_comparison(w[6], m.op)) rules_error(line_no, "unknown operator '" + std::string(w[6]) + "'");
      if (!parse_num(w[7], m.value)) rules_error(line_no, "bad number '" + std::string(w[7]) + "'");
      m.trophy = std::string(w[9]);
      rules.missions.push_back(std::move(m));
    } else if (w[0] == "avatar") {
      if (w.size() != 2) rules_error(line_no, "expected 'avatar <part-id>'");
      rules.avatar_parts.emplace_back(w[1]);
    } else {
      rules_error(line_no, "unknown directive '" + std::string(w[0]) + "'");
    }
  }
  rules.validate();
  return rules;
}

std::string format_rules(const RuleSet& rules) {
  std::ostringstream out;
  out << "set points_scale " << format_number(rules.points_scale) << '\n';
  out << "set level_points " << rules.level_points << '\n';
  for (const auto& b : rules.badges) {
    out << "badge " << b.id << " when " << format_history_metric(b.metric) << ' ' << to_string(b.op)
        << ' ' << format_number(b.value) << '\n';
  }
  for (const auto& c : rules.cards) {
    out << "card " << c.id << " when " << format_history_metric(c.metric) << ' ' << to_string(c.op)
        << ' ' << format_number(c.value) << '\n';
  }
  for (const auto& m : rules.missions) {
    const auto metric = std::find_if(std::begin(kTripMetrics), std::end(kTripMetrics),
                                     [&](const auto& e) { return e.second == m.metric; });
    out << "mission " << m.id << " requires " << m.prerequisite_card << " objective "
        << metric->first << ' ' << to_string(m.op) << ' ' << format_number(m.value) << " trophy "
        << m.trophy << '\n';
  }
  for (const auto& a : rules.avatar_parts) out << "avatar " << a << '\n';
  return out.str();
}

const RuleSet& default_rules() {
  static const RuleSet rules = parse_rules(default_rules_text());
  return rules;
}

std::string_view to_string(MissionState s) noexcept {
  switch (s) {
    case MissionState::Locked: return "Locked";
    case MissionState::Available: return "Available";
    case MissionState::Accepted: return "Accepted";
    case MissionState::Completed: return "Completed";
  }
  return "Unknown";
}

MissionState parse_mission_state(std::string_view s) {
  for (auto st : {MissionState::Locked, MissionState::Available, MissionState::Accepted,
                  MissionState::Completed}) {
    if (to_string(st) == s) return st;
  }
  throw Error(Errc::InvalidConfig, "unknown mission state '" + std::string(s) + "'");
}

std::string_view to_string(EventType t) noexcept {
  switch (t) {
    case EventType::TripRecorded: return "TripRecorded";
    case EventType::PointsAwarded: return "PointsAwarded";
    case EventType::LevelUp: return "LevelUp";
    case EventType::BadgeEarned: return "BadgeEarned";
    case EventType::CardAwarded: return "CardAwarded";
    case EventType::MissionAvailable: return "MissionAvailable";
    case EventType::MissionCompleted: return "MissionCompleted";
    case EventType::TrophyAwarded: return "TrophyAwarded";
    case EventType::AvatarPartUnlocked: return "AvatarPartUnlocked";
  }
  return "Unknown";
}

EventType parse_event_type(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(EventType::AvatarPartUnlocked); ++i) {
    const auto t = static_cast<EventType>(i);
    if (to_string(t) == s) return t;
  }
  throw Error(Errc::InvalidConfig, "unknown event type '" + std::string(s) + "'");
}

PlayerProfile new_profile(std::string driver_id, const RuleSet& rules) {
  PlayerProfile p;
  p.driver_id = std::move(driver_id);
  for (const auto& m : rules.missions) p.missions.emplace(m.id, MissionState::Locked);
  return p;
}

std::int64_t points_for(int trip_ecoscore, const RuleSet& rules) noexcept {
  return std::max<std::int64_t>(0, std::llround(rules.points_scale * trip_ecoscore));
}

double trip_metric(const TripScore& score, TripMetric metric) noexcept {
  auto sum = [&](auto field) {
    double total = 0.0;
    for (const auto& w : score.windows) total += field(w);
    return total;
  };
  switch (metric) {
    case TripMetric::TripEcoscore: return score.trip_ecoscore;
    case TripMetric::EcoMean: return score.eco_mean;
    case TripMetric::AggMean: return score.agg_mean;
    case TripMetric::AbruptBrakes: return sum([](const WindowScore& w) { return w.features.abrupt_brakes; });
    case TripMetric::SmoothBrakes: return sum([](const WindowScore& w) { return w.features.smooth_brakes; });
    case TripMetric::ShiftUps: return sum([](const WindowScore& w) { return w.features.shift_up_events; });
    case TripMetric::CruisingWindows: return sum([](const WindowScore& w) { return w.features.cruising ? 1 : 0; });
    case TripMetric::Windows: return static_cast<double>(score.windows.size());
  }
  return 0.0;
}

TripOutcome apply_trip(const PlayerProfile& profile, const TripScore& score, const RuleSet& rules) {
  if (score.driver_id != profile.driver_id) {
    throw Error(Errc::UnknownDriver, "trip '" + score.trip_id + "' belongs to driver '" +
                                         score.driver_id + "', not '" + profile.driver_id + "'");
  }
  for (const auto& t : profile.trip_history) {
    if (t.trip_id == score.trip_id) throw Error(Errc::DuplicateTrip, "trip '" + score.trip_id + "' already recorded");
  }

  TripOutcome out{profile, {}};
  auto& p = out.profile;
  auto& events = out.events;
  for (const auto& m : rules.missions) p.missions.try_emplace(m.id, MissionState::Locked);

  p.trip_history.push_back({score.trip_id, score.trip_ecoscore});
  events.push_back({EventType::TripRecorded, score.trip_id, score.trip_ecoscore});

  const auto points = points_for(score.trip_ecoscore, rules);
  if (points > 0) {
    p.skill_points += points;
    events.push_back({EventType::PointsAwarded, "", points});
  }
  const int level = 1 + static_cast<int>(p.skill_points / rules.level_points);
  if (level != p.level) {
    p.level = level;
    events.push_back({EventType::LevelUp, "", level});
  }

  for (const auto& b : rules.badges) {
    if (!p.badges.contains(b.id) && compare(history_metric(p, b.metric), b.op, b.value)) {
      p.badges.insert(b.id);
      events.push_back({EventType::BadgeEarned, b.id, 0});
    }
  }
  for (const auto& c : rules.cards) {
    if (!p.knowledge_cards.contains(c.id) && compare(history_metric(p, c.metric), c.op, c.value)) {
      p.knowledge_cards.insert(c.id);
      events.push_back({EventType::CardAwarded, c.id, 0});
    }
  }

  // Missions accepted before this trip are judged on it; ones unlocked by
  // this trip only become available.
  std::vector<const MissionRule*> accepted;
  for (const auto& m : rules.missions) {
    if (p.missions[m.id] == MissionState::Accepted) accepted.push_back(&m);
  }
  for (const auto& m : rules.missions) {
    auto& state = p.missions[m.id];
    if (state == MissionState::Locked && p.knowledge_cards.contains(m.prerequisite_card)) {
      state = MissionState::Available;
      events.push_back({EventType::MissionAvailable, m.id, 0});
    }
  }
  for (const MissionRule* m : accepted) {
    if (!compare(trip_metric(score, m->metric), m->op, m->value)) continue;
    p.missions[m->id] = MissionState::Completed;
    events.push_back({EventType::MissionCompleted, m->id, 0});
    if (p.trophies.insert(m->trophy).second) {
      events.push_back({EventType::TrophyAwarded, m->trophy, 0});
      const std::size_t unlocked = std::min(p.trophies.size(), rules.avatar_parts.size());
      for (std::size_t i = 0; i < unlocked; ++i) {
        if (p.avatar_parts.insert(rules.avatar_parts[i]).second) {
          events.push_back({EventType::AvatarPartUnlocked, rules.avatar_parts[i], 0});
        }
      }
    }
  }
  return out;
}

PlayerProfile accept_mission(const PlayerProfile& profile, const std::string& mission_id) {
  const auto it = profile.missions.find(mission_id);
  if (it == profile.missions.end()) throw Error(Errc::UnknownMission, "unknown mission '" + mission_id + "'");
  if (it->second != MissionState::Available) {
    throw Error(Errc::MissionNotAvailable, "mission '" + mission_id + "' is " +
                                               std::string(to_string(it->second)) + ", not Available");
  }
  PlayerProfile out = profile;
  out.missions[mission_id] = MissionState::Accepted;
  return out;
}

bool ranks_before(const LeaderboardEntry& a, const LeaderboardEntry& b) noexcept {
  if (a.skill_points != b.skill_points) return a.skill_points > b.skill_points;
  if (a.trophy_count != b.trophy_count) return a.trophy_count > b.trophy_count;
  return a.driver_id < b.driver_id;
}

std::vector<LeaderboardEntry> leaderboard(std::span<const PlayerProfile> profiles, std::size_t n) {
  std::vector<LeaderboardEntry> entries;
  entries.reserve(profiles.size());
  for (const auto& p : profiles) {
    entries.push_back({p.driver_id, p.skill_points, p.badges.size(), p.trophies.size()});
  }
  const auto top = std::min(n, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(top), entries.end(),
                    ranks_before);
  entries.resize(top);
  return entries;
}

RuleSet load_rules(const std::string& path) { return parse_rules(read_text_file(path)); }

}  // namespace ecodrive::game
