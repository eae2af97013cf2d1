#include "ecodrive/json_io.hpp"

namespace ecodrive {

using nlohmann::json;

void to_json(json& j, const EcoParameters& p) {
  j = json{{"shift_up", p.shift_up},
           {"braking", p.braking},
           {"acceleration", p.acceleration},
           {"rpm", p.rpm},
           {"cruising", p.cruising}};
}

void from_json(const json& j, EcoParameters& p) {
  j.at("shift_up").get_to(p.shift_up);
  j.at("braking").get_to(p.braking);
  j.at("acceleration").get_to(p.acceleration);
  j.at("rpm").get_to(p.rpm);
  j.at("cruising").get_to(p.cruising);
}

void to_json(json& j, const WindowFeatures& f) {
  j = json{{"start_ms", f.start_ms},
           {"end_ms", f.end_ms},
           {"sample_count", f.sample_count},
           {"rpm_mean", f.rpm_mean},
           {"rpm_variance", f.rpm_variance},
           {"throttle_variance", f.throttle_variance},
           {"speed_mean", f.speed_mean},
           {"speed_variance", f.speed_variance},
           {"accel_p95_mps2", f.accel_p95_mps2},
           {"lateral_accel_p95_mps2", f.lateral_accel_p95_mps2},
           {"abrupt_brakes", f.abrupt_brakes},
           {"smooth_brakes", f.smooth_brakes},
           {"brake_peak_decels", f.brake_peak_decels},
           {"brake_durations_s", f.brake_durations_s},
           {"accel_peaks", f.accel_peaks},
           {"shift_up_events", f.shift_up_events},
           {"high_rpm_unshifted_s", f.high_rpm_unshifted_s},
           {"event_rate_per_min", f.event_rate_per_min},
           {"hr_mean_bpm", f.hr_mean_bpm},
           {"cruising", f.cruising}};
}

void from_json(const json& j, WindowFeatures& f) {
  j.at("start_ms").get_to(f.start_ms);
  j.at("end_ms").get_to(f.end_ms);
  j.at("sample_count").get_to(f.sample_count);
  j.at("rpm_mean").get_to(f.rpm_mean);
  j.at("rpm_variance").get_to(f.rpm_variance);
  j.at("throttle_variance").get_to(f.throttle_variance);
  j.at("speed_mean").get_to(f.speed_mean);
  j.at("speed_variance").get_to(f.speed_variance);
  j.at("accel_p95_mps2").get_to(f.accel_p95_mps2);
  j.at("lateral_accel_p95_mps2").get_to(f.lateral_accel_p95_mps2);
  j.at("abrupt_brakes").get_to(f.abrupt_brakes);
  j.at("smooth_brakes").get_to(f.smooth_brakes);
  j.at("brake_peak_decels").get_to(f.brake_peak_decels);
  j.at("brake_durations_s").get_to(f.brake_durations_s);
  j.at("accel_peaks").get_to(f.accel_peaks);
  j.at("shift_up_events").get_to(f.shift_up_events);
  j.at("high_rpm_unshifted_s").get_to(f.high_rpm_unshifted_s);
  j.at("event_rate_per_min").get_to(f.event_rate_per_min);
  j.at("hr_mean_bpm").get_to(f.hr_mean_bpm);
  j.at("cruising").get_to(f.cruising);
}

void to_json(json& j, const WindowScore& w) {
  j = json{{"window_index", w.window_index},
           {"parameters", w.parameters},
           {"eco_score", w.eco_score},
           {"aggressiveness", w.aggressiveness},
           {"acceleration_histogram", w.acceleration_histogram},
           {"features", w.features}};
}

void from_json(const json& j, WindowScore& w) {
  j.at("window_index").get_to(w.window_index);
  j.at("parameters").get_to(w.parameters);
  j.at("eco_score").get_to(w.eco_score);
  j.at("aggressiveness").get_to(w.aggressiveness);
  j.at("acceleration_histogram").get_to(w.acceleration_histogram);
  j.at("features").get_to(w.features);
}

void to_json(json& j, const TripScore& s) {
  j = json{{"trip_id", s.trip_id},
           {"driver_id", s.driver_id},
           {"windows", s.windows},
           {"eco_mean", s.eco_mean},
           {"agg_mean", s.agg_mean},
           {"trip_ecoscore", s.trip_ecoscore}};
}

void from_json(const json& j, TripScore& s) {
  j.at("trip_id").get_to(s.trip_id);
  j.at("driver_id").get_to(s.driver_id);
  j.at("windows").get_to(s.windows);
  j.at("eco_mean").get_to(s.eco_mean);
  j.at("agg_mean").get_to(s.agg_mean);
  j.at("trip_ecoscore").get_to(s.trip_ecoscore);
}

}  // namespace ecodrive

namespace ecodrive::game {

using nlohmann::json;

void to_json(json& j, const TripEntry& t) {
  j = json{{"trip_id", t.trip_id}, {"trip_ecoscore", t.trip_ecoscore}};
}

void from_json(const json& j, TripEntry& t) {
  j.at("trip_id").get_to(t.trip_id);
  j.at("trip_ecoscore").get_to(t.trip_ecoscore);
}

void to_json(json& j, const PlayerProfile& p) {
  json missions = json::object();
  for (const auto& [id, state] : p.missions) missions[id] = std::string(to_string(state));
  j = json{{"driver_id", p.driver_id},
           {"skill_points", p.skill_points},
           {"level", p.level},
           {"badges", p.badges},
           {"knowledge_cards", p.knowledge_cards},
           {"missions", std::move(missions)},
           {"trophies", p.trophies},
           {"avatar_parts", p.avatar_parts},
           {"trip_history", p.trip_history}};
}

void from_json(const json& j, PlayerProfile& p) {
  j.at("driver_id").get_to(p.driver_id);
  j.at("skill_points").get_to(p.skill_points);
  j.at("level").get_to(p.level);
  j.at("badges").get_to(p.badges);
  j.at("knowledge_cards").get_to(p.knowledge_cards);
  p.missions.clear();
  for (const auto& [id, state] : j.at("missions").items()) {
    p.missions.emplace(id, parse_mission_state(state.get<std::string>()));
  }
  j.at("trophies").get_to(p.trophies);
  j.at("avatar_parts").get_to(p.avatar_parts);
  j.at("trip_history").get_to(p.trip_history);
}

void to_json(json& j, const GameEvent& e) {
  j = json{{"type", std::string(to_string(e.type))}, {"id", e.id}, {"value", e.value}};
}

void from_json(const json& j, GameEvent& e) {
  e.type = parse_event_type(j.at("type").get<std::string>());
  j.at("id").get_to(e.id);
  j.at("value").get_to(e.value);
}

void to_json(json& j, const LeaderboardEntry& e) {
  j = json{{"driver_id", e.driver_id},
           {"skill_points", e.skill_points},
           {"badge_count", e.badge_count},
           {"trophy_count", e.trophy_count}};
}

void from_json(const json& j, LeaderboardEntry& e) {
  j.at("driver_id").get_to(e.driver_id);
  j.at("skill_points").get_to(e.skill_points);
  j.at("badge_count").get_to(e.badge_count);
  j.at("trophy_count").get_to(e.trophy_count);
}

}  // namespace ecodrive::game
