#include "ecodrive/obd.hpp"

#include <charconv>
#include <cstdio>

#include "ecodrive/error.hpp"

namespace ecodrive::obd {

namespace {

std::string hex_byte(std::uint8_t b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", b);
  return buf;
}

int hex_digit(char c) noexcept {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string_view to_string(Channel c) noexcept {
  switch (c) {
    case Channel::Speed: return "speed_kmh";
    case Channel::Rpm: return "rpm";
    case Channel::Throttle: return "throttle_pct";
    case Channel::CoolantTemp: return "coolant_temp_c";
  }
  return "unknown";
}

std::optional<std::size_t> payload_length(std::uint8_t pid) noexcept {
  switch (static_cast<Pid>(pid)) {
    case Pid::Speed:
    case Pid::Throttle:
    case Pid::CoolantTemp:
      return 1;
    case Pid::Rpm:
      return 2;
  }
  return std::nullopt;
}

ChannelRange channel_range(Channel c) noexcept {
  switch (c) {
    case Channel::Speed: return {0.0, 255.0};
    case Channel::Rpm: return {0.0, 16383.75};
    case Channel::Throttle: return {0.0, 100.0};
    case Channel::CoolantTemp: return {-40.0, 215.0};
  }
  return {0.0, 0.0};
}

ChannelReading decode_frame(std::span<const std::uint8_t> raw) {
  if (raw.size() < 2 || raw[0] != kMode01Response) {
    throw Error(Errc::NotAResponseFrame,
                raw.empty() ? std::string("empty frame")
                            : "mode byte " + hex_byte(raw[0]) + " is not a mode-01 response");
  }
  const std::uint8_t pid = raw[1];
  const auto expected = payload_length(pid);
  if (!expected) throw Error(Errc::UnknownPid, "unsupported PID " + hex_byte(pid));

  const auto payload = raw.subspan(2);
  if (payload.size() != *expected) {
    throw Error(Errc::WrongPayloadLength,
                "PID " + hex_byte(pid) + " expects " + std::to_string(*expected) +
                    " payload byte(s), got " + std::to_string(payload.size()));
  }

  const double a = payload[0];
  switch (static_cast<Pid>(pid)) {
    case Pid::Speed:
      return {Channel::Speed, a};
    case Pid::Rpm:
      return {Channel::Rpm, (256.0 * a + payload[1]) / 4.0};
    case Pid::Throttle:
      return {Channel::Throttle, a * 100.0 / 255.0};
    case Pid::CoolantTemp:
      return {Channel::CoolantTemp, a - 40.0};
  }
  throw Error(Errc::UnknownPid, "unsupported PID " + hex_byte(pid));
}

HexLogResult decode_hex_log(std::string_view text) {
  HexLogResult result;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    auto reject = [&](std::string why) {
      result.errors.push_back({line_no, std::move(why)});
    };

    const auto space = line.find(' ');
    if (space == std::string_view::npos) {
      reject("expected '<timestamp_ms> <hex bytes>'");
      continue;
    }
    std::int64_t ts = 0;
    const auto ts_text = line.substr(0, space);
    auto [ptr, ec] = std::from_chars(ts_text.data(), ts_text.data() + ts_text.size(), ts);
    if (ts_text.empty() || ec != std::errc{} || ptr != ts_text.data() + ts_text.size() || ts < 0) {
      reject("bad timestamp '" + std::string(ts_text) + "'");
      continue;
    }

    std::vector<std::uint8_t> bytes;
    bool ok = true;
    std::string_view rest = line.substr(space + 1);
    while (ok) {
      const auto next = rest.find(' ');
      const auto tok = rest.substr(0, next);
      const int hi = tok.size() == 2 ? hex_digit(tok[0]) : -1;
      const int lo = tok.size() == 2 ? hex_digit(tok[1]) : -1;
      if (hi < 0 || lo < 0) {
        reject("bad hex byte '" + std::string(tok) + "'");
        ok = false;
        break;
      }
      bytes.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
      if (next == std::string_view::npos) break;
      rest = rest.substr(next + 1);
    }
    if (!ok) continue;

    try {
      result.readings.push_back({ts, decode_frame(bytes)});
    } catch (const Error& e) {
      reject(std::string(ecodrive::to_string(e.code())) + ": " + e.what());
    }
  }
  return result;
}

}  // namespace ecodrive::obd
