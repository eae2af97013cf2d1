#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace ecodrive {

enum class Errc {
  // trip CSV
  MalformedHeader,
  MalformedRow,
  OutOfOrderTimestamp,
  InvariantViolation,
  TooFewSamples,
  // OBD
  UnknownPid,
  WrongPayloadLength,
  NotAResponseFrame,
  // scoring
  BadBinSpec,
  TripTooShort,
  NotUniformlySampled,
  InvalidConfig,
  // simulator
  EmptyRoute,
  MalformedRoute,
  // gamification
  DuplicateTrip,
  UnknownDriver,
  MissionNotAvailable,
  UnknownMission,
  MalformedRules,
  // persistence
  StorageFailure,
  UnknownTrip,
  InvalidDriverId,
};

std::string_view to_string(Errc code) noexcept;

/// Base exception for every domain failure. The code is stable and is what
/// the service and the CLI map onto status codes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Input-format failure carrying the 1-based line and, when known, the field.
class ParseError : public Error {
 public:
  ParseError(Errc code, std::size_t line, std::string field,
             const std::string& message)
      : Error(code, message), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace ecodrive
