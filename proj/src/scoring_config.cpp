#include "ecodrive/scoring_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "ecodrive/error.hpp"

namespace ecodrive {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& why) { throw Error(Errc::InvalidConfig, why); }

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_list(std::string_view text, std::vector<double>& out) {
  out.clear();
  text = trim(text);
  if (text.empty()) return true;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    double v = 0.0;
    if (!parse_double(item, v)) return false;
    out.push_back(v);
    if (comma == std::string_view::npos) return true;
    start = comma + 1;
  }
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_exact(v[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const ScoringConfig&)> get;
  std::function<bool(ScoringConfig&, std::string_view)> set;
};

Field real_field(std::string key, double ScoringConfig::*m) {
  return {std::move(key), [m](const ScoringConfig& c) { return format_exact(c.*m); },
          [m](ScoringConfig& c, std::string_view v) { return parse_double(v, c.*m); }};
}

void add_sigmoid(std::vector<Field>& fields, const std::string& name,
                 SigmoidParams ScoringConfig::*p) {
  const std::pair<const char*, double SigmoidParams::*> parts[] = {
      {"a1", &SigmoidParams::a1}, {"a2", &SigmoidParams::a2}, {"a3", &SigmoidParams::a3},
      {"a4", &SigmoidParams::a4}, {"x0", &SigmoidParams::x0}};
  for (const auto& [suffix, m] : parts) {
    fields.push_back({"sigmoid." + name + "." + suffix,
                      [p, m = m](const ScoringConfig& c) { return format_exact(c.*p.*m); },
                      [p, m = m](ScoringConfig& c, std::string_view v) {
                        return parse_double(v, c.*p.*m);
                      }});
  }
}

void add_histogram(std::vector<Field>& fields, const std::string& name,
                   HistogramSpec ScoringConfig::*h) {
  fields.push_back({name + ".edges",
                    [h](const ScoringConfig& c) { return format_list((c.*h).edges); },
                    [h](ScoringConfig& c, std::string_view v) { return parse_list(v, (c.*h).edges); }});
  fields.push_back({name + ".weights",
                    [h](const ScoringConfig& c) { return format_list((c.*h).weights); },
                    [h](ScoringConfig& c, std::string_view v) { return parse_list(v, (c.*h).weights); }});
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(real_field("window_s", &ScoringConfig::window_s));
    f.push_back({"resample_period_ms",
                 [](const ScoringConfig& c) { return std::to_string(c.resample_period_ms); },
                 [](ScoringConfig& c, std::string_view v) {
                   v = trim(v);
                   auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), c.resample_period_ms);
                   return !v.empty() && ec == std::errc{} && ptr == v.data() + v.size();
                 }});
    f.push_back(real_field("mu", &ScoringConfig::mu));
    f.push_back(real_field("mu_throttle", &ScoringConfig::mu_throttle));
    add_sigmoid(f, "shift_up", &ScoringConfig::shift_up);
    add_sigmoid(f, "acceleration", &ScoringConfig::acceleration);
    add_sigmoid(f, "rpm", &ScoringConfig::rpm);
    add_sigmoid(f, "cruising", &ScoringConfig::cruising);
    add_sigmoid(f, "lateral", &ScoringConfig::lateral);
    add_histogram(f, "braking_histogram", &ScoringConfig::braking_histogram);
    add_histogram(f, "acceleration_histogram", &ScoringConfig::acceleration_histogram);
    f.push_back(real_field("abrupt_brake_decel_mps2", &ScoringConfig::abrupt_brake_decel_mps2));
    f.push_back(real_field("shift_rpm_drop", &ScoringConfig::shift_rpm_drop));
    f.push_back(real_field("shift_window_s", &ScoringConfig::shift_window_s));
    f.push_back(real_field("shift_lookahead_s", &ScoringConfig::shift_lookahead_s));
    f.push_back(real_field("accel_event_mps2", &ScoringConfig::accel_event_mps2));
    f.push_back(real_field("cruise_min_speed_kmh", &ScoringConfig::cruise_min_speed_kmh));
    f.push_back(real_field("cruise_max_std_kmh", &ScoringConfig::cruise_max_std_kmh));
    f.push_back(real_field("hr_rest_bpm", &ScoringConfig::hr_rest_bpm));
    f.push_back(real_field("hr_max_bpm", &ScoringConfig::hr_max_bpm));
    f.push_back(real_field("w_e", &ScoringConfig::w_e));
    f.push_back(real_field("w_a", &ScoringConfig::w_a));
    const std::pair<const char*, double CombinationWeights::*> weights[] = {
        {"shift_up", &CombinationWeights::shift_up},
        {"braking", &CombinationWeights::braking},
        {"acceleration", &CombinationWeights::acceleration},
        {"rpm", &CombinationWeights::rpm},
        {"cruising", &CombinationWeights::cruising}};
    for (const auto& [name, m] : weights) {
      f.push_back({std::string("weight.") + name,
                   [m = m](const ScoringConfig& c) { return format_exact(c.weights.*m); },
                   [m = m](ScoringConfig& c, std::string_view v) { return parse_double(v, c.weights.*m); }});
    }
    return f;
  }();
  return table;
}

void validate_histogram(const HistogramSpec& h, const std::string& name) {
  if (h.weights.size() != h.edges.size() + 1) {
    bad(name + ": expected " + std::to_string(h.edges.size() + 1) + " weights");
  }
  for (std::size_t i = 1; i < h.edges.size(); ++i) {
    if (!(h.edges[i] > h.edges[i - 1])) bad(name + ": edges must be strictly increasing");
  }
  for (double w : h.weights) {
    if (!(w >= 0.0 && w <= 1.0)) bad(name + ": weights must lie in [0, 1]");
  }
}

}  // namespace

bool SigmoidParams::valid() const noexcept {
  return a1 > 0.0 && a3 > 0.0 && a4 > 0.0 && a2 >= 0.0 && a2 + a1 / a4 <= 1.0 &&
         std::isfinite(x0);
}

void ScoringConfig::validate() const {
  if (!(window_s > 0.0)) bad("window_s must be positive");
  if (resample_period_ms <= 0) bad("resample_period_ms must be positive");
  if (static_cast<double>(resample_period_ms) > window_s * 1000.0) {
    bad("resample_period_ms must not exceed the window");
  }
  if (!(mu > 0.0)) bad("mu must be positive");
  if (!(mu_throttle > 0.0)) bad("mu_throttle must be positive");
  const std::pair<const char*, const SigmoidParams*> sigmoids[] = {
      {"shift_up", &shift_up}, {"acceleration", &acceleration}, {"rpm", &rpm},
      {"cruising", &cruising}, {"lateral", &lateral}};
  for (const auto& [name, p] : sigmoids) {
    if (!p->valid()) bad(std::string("sigmoid.") + name + " violates a1,a3,a4 > 0, a2 >= 0, a2 + a1/a4 <= 1");
  }
  validate_histogram(braking_histogram, "braking_histogram");
  validate_histogram(acceleration_histogram, "acceleration_histogram");
  if (!(abrupt_brake_decel_mps2 > 0.0)) bad("abrupt_brake_decel_mps2 must be positive");
  if (!(shift_rpm_drop > 0.0)) bad("shift_rpm_drop must be positive");
  if (!(shift_window_s > 0.0)) bad("shift_window_s must be positive");
  if (!(shift_lookahead_s >= 0.0)) bad("shift_lookahead_s must be non-negative");
  if (!(accel_event_mps2 > 0.0)) bad("accel_event_mps2 must be positive");
  if (!(cruise_max_std_kmh >= 0.0)) bad("cruise_max_std_kmh must be non-negative");
  if (!(hr_max_bpm > hr_rest_bpm) || !(hr_rest_bpm >= 0.0)) bad("hr_max_bpm must exceed hr_rest_bpm");
  if (!(w_e >= 0.0) || !(w_a >= 0.0)) bad("w_e and w_a must be non-negative");
  const double ws[] = {weights.shift_up, weights.braking, weights.acceleration, weights.rpm,
                       weights.cruising};
  double sum = 0.0;
  for (double w : ws) {
    if (!(w >= 0.0)) bad("combination weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) bad("combination weights must sum to 1");
}

std::string format_exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(Errc::InvalidConfig, line_no, "",
                       "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    if (key.empty() || !seen.insert(key).second) {
      throw ParseError(Errc::InvalidConfig, line_no, key,
                       "line " + std::to_string(line_no) + ": empty or duplicate key '" + key + "'");
    }
    out.push_back({line_no, std::move(key), std::string(trim(line.substr(eq + 1)))});
  }
  return out;
}

ScoringConfig parse_scoring_config(std::string_view text) {
  ScoringConfig cfg;
  for (const auto& kv : parse_key_values(text)) {
    const Field* field = nullptr;
    for (const auto& f : fields()) {
      if (f.key == kv.key) {
        field = &f;
        break;
      }
    }
    if (!field) {
      throw ParseError(Errc::InvalidConfig, kv.line, kv.key,
                       "line " + std::to_string(kv.line) + ": unknown key '" + kv.key + "'");
    }
    if (!field->set(cfg, kv.value)) {
      throw ParseError(Errc::InvalidConfig, kv.line, kv.key,
                       "line " + std::to_string(kv.line) + ": bad value for '" + kv.key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string serialize_scoring_config(const ScoringConfig& cfg) {
  std::ostringstream out;
  out << "# ecodrive scoring configuration\n";
  for (const auto& f : fields()) out << f.key << " = " << f.get(cfg) << '\n';
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::StorageFailure, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScoringConfig load_scoring_config(const std::string& path) {
  return parse_scoring_config(read_text_file(path));
}

}  // namespace ecodrive
