#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ecodrive/error.hpp"
#include "ecodrive/gamification.hpp"
#include "ecodrive/json_io.hpp"
#include "ecodrive/obd.hpp"
#include "ecodrive/scoring.hpp"
#include "ecodrive/scoring_config.hpp"
#include "ecodrive/store.hpp"
#include "ecodrive/telemetry.hpp"
#include "ecodrive/tripgen.hpp"

namespace py = pybind11;
using namespace ecodrive;
using nlohmann::json;

namespace {

// JSON crosses the boundary as text; Python's json module does the rest.
py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
json from_py(const py::object& o) {
  return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

ScoringConfig config_from(const std::optional<std::string>& text) {
  return text ? parse_scoring_config(*text) : ScoringConfig{};
}

tripgen::Route route_from(const std::string& spec) {
  if (spec == "builtin:urban") return tripgen::default_urban_route();
  if (spec == "builtin:highway") return tripgen::default_highway_route();
  return tripgen::parse_route(spec);
}

game::RuleSet rules_from(const std::optional<std::string>& text) {
  return text ? game::parse_rules(*text) : game::default_rules();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Eco-driving telemetry scoring and gamification";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
        inst.attr("line") = pe->line();
        inst.attr("field") = pe->field();
      }
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def(
      "decode_trip_csv",
      [](const std::string& csv) {
        const auto t = decode_trip_csv(csv, "", "");
        py::list rows;
        for (const auto& s : t.samples) {
          py::dict d;
          d["timestamp_ms"] = s.timestamp_ms;
          d["lat"] = s.lat;
          d["lon"] = s.lon;
          d["speed_kmh"] = s.speed_kmh;
          d["rpm"] = s.rpm;
          d["throttle_pct"] = s.throttle_pct;
          d["brake"] = s.brake;
          d["hr_bpm"] = s.hr_bpm;
          rows.append(d);
        }
        return rows;
      },
      py::arg("csv"), "Decode trip CSV text into a list of sample dicts.");

  m.def(
      "encode_trip_csv",
      [](const py::list& rows) {
        TripRecord t;
        for (const auto& r : rows) {
          const auto d = r.cast<py::dict>();
          t.samples.push_back({d["timestamp_ms"].cast<std::int64_t>(), d["lat"].cast<double>(),
                               d["lon"].cast<double>(), d["speed_kmh"].cast<double>(), d["rpm"].cast<double>(),
                               d["throttle_pct"].cast<double>(), d["brake"].cast<int>(),
                               d["hr_bpm"].cast<double>()});
        }
        validate_trip(t);
        return encode_trip_csv(t);
      },
      py::arg("samples"), "Encode sample dicts as trip CSV text.");

  m.def(
      "score_csv",
      [](const std::string& csv, const std::string& trip_id, const std::string& driver_id,
         const std::optional<std::string>& config) {
        return to_py(json(score_trip(decode_trip_csv(csv, trip_id, driver_id), config_from(config))));
      },
      py::arg("csv"), py::arg("trip_id") = "trip", py::arg("driver_id") = "local", py::arg("config") = py::none(),
      "Score trip CSV text; returns the TripScore as a dict.");

  m.def(
      "sigmoid",
      [](double x, double a1, double a2, double a3, double a4, double x0) {
        return sigmoid(x, SigmoidParams{a1, a2, a3, a4, x0});
      },
      py::arg("x"), py::arg("a1"), py::arg("a2"), py::arg("a3"), py::arg("a4"), py::arg("x0"));

  m.def("default_config_text", [] { return serialize_scoring_config(ScoringConfig{}); });
  m.def("default_rules_text", [] { return std::string(game::default_rules_text()); });

  m.def(
      "simulate",
      [](const std::string& profile, const std::string& route, std::uint64_t seed, std::int64_t period_ms) {
        const auto p = tripgen::profile_for(tripgen::parse_style(profile), seed);
        return encode_trip_csv(tripgen::generate_trip(p, route_from(route), period_ms));
      },
      py::arg("profile"), py::arg("route") = "builtin:urban", py::arg("seed") = 1, py::arg("period_ms") = 1000,
      "Generate a synthetic trip; route is builtin:urban, builtin:highway or route text.");

  m.def(
      "decode_frame",
      [](const py::bytes& frame) {
        const std::string raw = frame;
        const std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
        const auto r = obd::decode_frame(bytes);
        return py::make_tuple(std::string(obd::to_string(r.channel)), r.value);
      },
      py::arg("frame"), "Decode one mode-01 response frame to (channel, value).");

  m.def(
      "decode_hex_log",
      [](const std::string& text) {
        const auto r = obd::decode_hex_log(text);
        py::list readings, errors;
        for (const auto& t : r.readings) {
          readings.append(py::make_tuple(t.timestamp_ms, std::string(obd::to_string(t.reading.channel)), t.reading.value));
        }
        for (const auto& e : r.errors) errors.append(py::make_tuple(e.line, e.message));
        return py::make_tuple(readings, errors);
      },
      py::arg("text"));

  m.def(
      "new_profile",
      [](const std::string& driver, const std::optional<std::string>& rules) {
        return to_py(json(game::new_profile(driver, rules_from(rules))));
      },
      py::arg("driver_id"), py::arg("rules") = py::none());

  m.def(
      "apply_trip",
      [](const py::object& profile, const py::object& score, const std::optional<std::string>& rules) {
        const auto out = game::apply_trip(from_py(profile).get<game::PlayerProfile>(),
                                          from_py(score).get<TripScore>(), rules_from(rules));
        return py::make_tuple(to_py(json(out.profile)), to_py(json(out.events)));
      },
      py::arg("profile"), py::arg("score"), py::arg("rules") = py::none(),
      "Apply one scored trip; returns (profile, events).");

  m.def(
      "accept_mission",
      [](const py::object& profile, const std::string& mission) {
        return to_py(json(game::accept_mission(from_py(profile).get<game::PlayerProfile>(), mission)));
      },
      py::arg("profile"), py::arg("mission_id"));

  m.def(
      "leaderboard",
      [](const py::list& profiles, std::size_t n) {
        std::vector<game::PlayerProfile> ps;
        for (const auto& p : profiles) ps.push_back(from_py(py::reinterpret_borrow<py::object>(p)).get<game::PlayerProfile>());
        return to_py(json(game::leaderboard(ps, n)));
      },
      py::arg("profiles"), py::arg("n") = 10);

  m.def(
      "replay",
      [](const std::string& dir, const std::optional<std::string>& rules) {
        return to_py(json(TripStore::replay(dir, rules_from(rules))));
      },
      py::arg("storage_dir"), py::arg("rules") = py::none(), "Rebuild every profile from a storage directory.");
}
