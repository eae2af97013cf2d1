#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecodrive::obd {

inline constexpr std::uint8_t kMode01Response = 0x41;

enum class Pid : std::uint8_t {
  CoolantTemp = 0x05,
  Rpm = 0x0C,
  Speed = 0x0D,
  Throttle = 0x11,
};

enum class Channel { Speed, Rpm, Throttle, CoolantTemp };

std::string_view to_string(Channel c) noexcept;

/// Payload length for a supported PID, nullopt for anything else.
std::optional<std::size_t> payload_length(std::uint8_t pid) noexcept;

/// Physical range of a channel, inclusive.
struct ChannelRange {
  double min;
  double max;
};
ChannelRange channel_range(Channel c) noexcept;

struct ChannelReading {
  Channel channel;
  double value;  ///< km/h, RPM, percent or degrees Celsius

  bool operator==(const ChannelReading&) const = default;
};

/// Decodes one pre-extracted mode-01 response frame: [0x41, pid, payload...].
/// Throws ecodrive::Error with NotAResponseFrame, UnknownPid or
/// WrongPayloadLength.
ChannelReading decode_frame(std::span<const std::uint8_t> raw);

struct TimedReading {
  std::int64_t timestamp_ms;
  ChannelReading reading;

  bool operator==(const TimedReading&) const = default;
};

struct LineError {
  std::size_t line;  // 1-based
  std::string message;
};

struct HexLogResult {
  std::vector<TimedReading> readings;
  std::vector<LineError> errors;
};

/// Replays a recorded session: one `timestamp_ms XX XX XX` frame per line.
/// Blank lines are skipped; every other undecodable line lands in `errors`.
HexLogResult decode_hex_log(std::string_view text);

}  // namespace ecodrive::obd
