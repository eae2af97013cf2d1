#pragma once

#include <json.hpp>

#include "ecodrive/gamification.hpp"
#include "ecodrive/scoring.hpp"

namespace ecodrive {

void to_json(nlohmann::json& j, const EcoParameters& p);
void from_json(const nlohmann::json& j, EcoParameters& p);
void to_json(nlohmann::json& j, const WindowFeatures& f);
void from_json(const nlohmann::json& j, WindowFeatures& f);
void to_json(nlohmann::json& j, const WindowScore& w);
void from_json(const nlohmann::json& j, WindowScore& w);
void to_json(nlohmann::json& j, const TripScore& s);
void from_json(const nlohmann::json& j, TripScore& s);

}  // namespace ecodrive

namespace ecodrive::game {

void to_json(nlohmann::json& j, const TripEntry& t);
void from_json(const nlohmann::json& j, TripEntry& t);
void to_json(nlohmann::json& j, const PlayerProfile& p);
void from_json(const nlohmann::json& j, PlayerProfile& p);
void to_json(nlohmann::json& j, const GameEvent& e);
void from_json(const nlohmann::json& j, GameEvent& e);
void to_json(nlohmann::json& j, const LeaderboardEntry& e);
void from_json(const nlohmann::json& j, LeaderboardEntry& e);

}  // namespace ecodrive::game
