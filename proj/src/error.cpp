#include "ecodrive/error.hpp"

namespace ecodrive {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::OutOfOrderTimestamp: return "OutOfOrderTimestamp";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::UnknownPid: return "UnknownPid";
    case Errc::WrongPayloadLength: return "WrongPayloadLength";
    case Errc::NotAResponseFrame: return "NotAResponseFrame";
    case Errc::BadBinSpec: return "BadBinSpec";
    case Errc::TripTooShort: return "TripTooShort";
    case Errc::NotUniformlySampled: return "NotUniformlySampled";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyRoute: return "EmptyRoute";
    case Errc::MalformedRoute: return "MalformedRoute";
    case Errc::DuplicateTrip: return "DuplicateTrip";
    case Errc::UnknownDriver: return "UnknownDriver";
    case Errc::MissionNotAvailable: return "MissionNotAvailable";
    case Errc::UnknownMission: return "UnknownMission";
    case Errc::MalformedRules: return "MalformedRules";
    case Errc::StorageFailure: return "StorageFailure";
    case Errc::UnknownTrip: return "UnknownTrip";
    case Errc::InvalidDriverId: return "InvalidDriverId";
  }
  return "Unknown";
}

}  // namespace ecodrive
