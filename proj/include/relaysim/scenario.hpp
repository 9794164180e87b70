#ifndef RELAYSIM_SCENARIO_HPP
#define RELAYSIM_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relaysim/adaptive.hpp"
#include "relaysim/errors.hpp"
#include "relaysim/faultsolver.hpp"
#include "relaysim/mlp.hpp"
#include "relaysim/network.hpp"
#include "relaysim/windfarm.hpp"

namespace relaysim {

/// Relay-side options of a scenario: solver fidelity, how the in-feed factor
/// is applied, whether adaptive resetting is active, and the setting rules.
struct RelayOptions {
  SolverMode mode = SolverMode::full;
  KMode k_mode = KMode::complex_k;
  bool adaptive = true;
  std::string model_file;  // optional trained regressor for the speed path
  SettingRules rules;
};

/// Uniform wind-speed grid for sweeps and dataset generation.
struct SweepSpec {
  double start_mps = 4.0;
  double stop_mps = 25.0;
  double step_mps = 0.5;

  std::vector<double> speeds() const {
    const int n =
        static_cast<int>(std::floor((stop_mps - start_mps) / step_mps +
                                    1e-9)) +
        1;
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      v.push_back(start_mps + step_mps * static_cast<double>(i));
    }
    return v;
  }
};

/// A timed event in a simulation script.
struct SimEventSpec {
  enum class Kind { fault_on, fault_off, wind_change };
  double t_s = 0.0;
  Kind kind = Kind::fault_on;
  double speed_mps = 0.0;  // wind_change only
};

struct SimulationSpec {
  double dt_s = 0.001;
  double duration_s = 2.0;
  double initial_wind_mps = 0.0;
  std::vector<SimEventSpec> events;
};

struct OutputSpec {
  std::string csv;
  std::string svg;
  std::string model;
  std::string curve;
};

/// Complete parsed scenario.
struct ScenarioConfig {
  NetworkModel network;
  WindFarm farm;
  WindState wind;
  FaultScenario fault;
  RelayOptions relay;
  std::optional<SweepSpec> sweep;
  TrainingConfig training;
  std::optional<SimulationSpec> simulation;
  OutputSpec output;

  ZoneSettings static_settings() const {
    return make_static_settings(network, relay.rules);
  }
};

// --- strict JSON helpers -----------------------------------------------------

namespace cfgdetail {

using njson = nlohmann::json;

inline void check_keys(const njson& j, const std::string& ctx,
                       std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) ==
        allowed.end()) {
      throw ConfigError(ctx + ": unknown key \"" + it.key() + "\"");
    }
  }
}

inline const njson& require(const njson& j, const char* key,
                            const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(ctx + ": missing required key \"" + key + "\"");
  }
  return *it;
}

inline double num(const njson& j, const std::string& ctx) {
  if (!j.is_number()) throw ConfigError(ctx + ": expected a number");
  return j.get<double>();
}

inline double opt_num(const njson& j, const char* key, const std::string& ctx,
                      double fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : num(*it, ctx + "." + key);
}

inline int opt_int(const njson& j, const char* key, const std::string& ctx,
                   int fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) {
    throw ConfigError(ctx + "." + key + ": expected an integer");
  }
  return it->get<int>();
}

inline std::string str(const njson& j, const std::string& ctx) {
  if (!j.is_string()) throw ConfigError(ctx + ": expected a string");
  return j.get<std::string>();
}

inline std::string opt_str(const njson& j, const char* key,
                           const std::string& ctx,
                           const std::string& fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : str(*it, ctx + "." + key);
}

inline bool opt_bool(const njson& j, const char* key, const std::string& ctx,
                     bool fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) {
    throw ConfigError(ctx + "." + key + ": expected true or false");
  }
  return it->get<bool>();
}

/// Impedances are written in polar form: {"mag": Ω, "angle_deg": degrees}.
inline Complex polar_ohm(const njson& j, const std::string& ctx) {
  check_keys(j, ctx, {"mag", "angle_deg"});
  const double mag = num(require(j, "mag", ctx), ctx + ".mag");
  const double deg = num(require(j, "angle_deg", ctx), ctx + ".angle_deg");
  return std::polar(mag, deg * std::numbers::pi / 180.0);
}

inline NetworkModel parse_network(const njson& j) {
  const std::string ctx = "network";
  check_keys(j, ctx,
             {"nominal_voltage_kv", "frequency_hz", "grid", "infeed_bus",
              "lines"});
  const double kv =
      num(require(j, "nominal_voltage_kv", ctx), ctx + ".nominal_voltage_kv");
  const double hz = opt_num(j, "frequency_hz", ctx, 60.0);

  const njson& jg = require(j, "grid", ctx);
  check_keys(jg, ctx + ".grid",
             {"bus", "emf_kv_ln", "emf_angle_deg", "z1_ohm", "z2_ohm",
              "z0_ohm"});
  GridSource grid;
  grid.bus = str(require(jg, "bus", ctx + ".grid"), ctx + ".grid.bus");
  const double emf_kv =
      opt_num(jg, "emf_kv_ln", ctx + ".grid", kv / std::sqrt(3.0));
  const double emf_deg = opt_num(jg, "emf_angle_deg", ctx + ".grid", 0.0);
  grid.emf = Phasor::polar_deg(emf_kv * 1e3, emf_deg);
  grid.z1 = polar_ohm(require(jg, "z1_ohm", ctx + ".grid"),
                      ctx + ".grid.z1_ohm");
  grid.z2 = jg.contains("z2_ohm")
                ? polar_ohm(jg.at("z2_ohm"), ctx + ".grid.z2_ohm")
                : grid.z1;
  grid.z0 = jg.contains("z0_ohm")
                ? polar_ohm(jg.at("z0_ohm"), ctx + ".grid.z0_ohm")
                : grid.z1;

  const njson& jl = require(j, "lines", ctx);
  if (!jl.is_array() || jl.empty()) {
    throw ConfigError(ctx + ".lines: expected a non-empty array");
  }
  std::vector<LineSection> lines;
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string lctx = ctx + ".lines[" + std::to_string(i) + "]";
    const njson& e = jl[i];
    check_keys(e, lctx,
               {"id", "from", "to", "length_km", "z1_per_km", "z0_per_km"});
    LineSection s;
    s.id = str(require(e, "id", lctx), lctx + ".id");
    s.from_bus = str(require(e, "from", lctx), lctx + ".from");
    s.to_bus = str(require(e, "to", lctx), lctx + ".to");
    s.length_km = num(require(e, "length_km", lctx), lctx + ".length_km");
    s.z1_per_km =
        polar_ohm(require(e, "z1_per_km", lctx), lctx + ".z1_per_km");
    s.z0_per_km =
        polar_ohm(require(e, "z0_per_km", lctx), lctx + ".z0_per_km");
    lines.push_back(std::move(s));
  }
  const std::string infeed =
      str(require(j, "infeed_bus", ctx), ctx + ".infeed_bus");
  try {
    return NetworkModel(std::move(lines), std::move(grid), infeed, kv, hz);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
}

inline WindFarm parse_windfarm(const njson& j, double network_kv) {
  const std::string ctx = "windfarm";
  check_keys(j, ctx,
             {"n_turbines", "rated_power_mw", "cut_in_mps", "rated_speed_mps",
              "cut_out_mps", "fault_current_limit_pu", "connection_bus",
              "nominal_voltage_kv"});
  WindFarm f;
  f.n_turbines = opt_int(j, "n_turbines", ctx, 0);
  if (!j.contains("n_turbines")) {
    throw ConfigError(ctx + ": missing required key \"n_turbines\"");
  }
  f.rated_power_mw =
      num(require(j, "rated_power_mw", ctx), ctx + ".rated_power_mw");
  f.cut_in_mps = num(require(j, "cut_in_mps", ctx), ctx + ".cut_in_mps");
  f.rated_speed_mps =
      num(require(j, "rated_speed_mps", ctx), ctx + ".rated_speed_mps");
  f.cut_out_mps = num(require(j, "cut_out_mps", ctx), ctx + ".cut_out_mps");
  f.fault_current_limit_pu =
      opt_num(j, "fault_current_limit_pu", ctx, 1.2);
  f.connection_bus =
      str(require(j, "connection_bus", ctx), ctx + ".connection_bus");
  const double kv = opt_num(j, "nominal_voltage_kv", ctx, network_kv);
  f.nominal_v_ln = kv * 1e3 / std::sqrt(3.0);
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("windfarm: ") + e.what());
  }
  return f;
}

inline WindState parse_wind(const njson& j) {
  const std::string ctx = "wind";
  check_keys(j, ctx, {"mean_mps", "offsets_mps"});
  WindState w;
  w.mean_speed_mps = num(require(j, "mean_mps", ctx), ctx + ".mean_mps");
  if (w.mean_speed_mps < 0.0) {
    throw ConfigError(ctx + ".mean_mps: must be >= 0");
  }
  if (j.contains("offsets_mps")) {
    const njson& jo = j.at("offsets_mps");
    if (!jo.is_array()) {
      throw ConfigError(ctx + ".offsets_mps: expected an array");
    }
    for (std::size_t i = 0; i < jo.size(); ++i) {
      w.per_turbine_offset_mps.push_back(
          num(jo[i], ctx + ".offsets_mps[" + std::to_string(i) + "]"));
    }
  }
  return w;
}

inline FaultScenario parse_fault(const njson& j, const NetworkModel& net) {
  const std::string ctx = "fault";
  check_keys(j, ctx, {"type", "line", "distance_km", "resistance_ohm"});
  FaultScenario f;
  const std::string type = str(require(j, "type", ctx), ctx + ".type");
  if (type == "slg_a") {
    f.type = FaultType::slg_a;
  } else if (type == "three_phase") {
    f.type = FaultType::three_phase;
  } else {
    throw ConfigError(ctx + ".type: expected \"slg_a\" or \"three_phase\"");
  }
  f.line = str(require(j, "line", ctx), ctx + ".line");
  if (!net.has_line(f.line)) {
    throw ConfigError(ctx + ".line: no line named \"" + f.line + "\"");
  }
  f.distance_km = num(require(j, "distance_km", ctx), ctx + ".distance_km");
  const double len = net.line(f.line).length_km;
  if (!(f.distance_km >= 0.0 && f.distance_km <= len)) {
    throw ConfigError(ctx + ".distance_km: must lie within [0, " +
                      std::to_string(len) + "]");
  }
  f.resistance_ohm = opt_num(j, "resistance_ohm", ctx, 0.0);
  if (f.resistance_ohm < 0.0) {
    throw ConfigError(ctx + ".resistance_ohm: must be >= 0");
  }
  return f;
}

inline RelayOptions parse_relay(const njson& j) {
  const std::string ctx = "relay";
  check_keys(j, ctx,
             {"mode", "k_mode", "adaptive", "model_file", "zone1_fraction",
              "zone2_remote_fraction", "zone3_remote_fraction", "t2_s",
              "t3_s"});
  RelayOptions r;
  const std::string mode = opt_str(j, "mode", ctx, "full");
  if (mode == "full") {
    r.mode = SolverMode::full;
  } else if (mode == "reduced") {
    r.mode = SolverMode::reduced;
  } else {
    throw ConfigError(ctx + ".mode: expected \"reduced\" or \"full\"");
  }
  const std::string kmode = opt_str(j, "k_mode", ctx, "complex");
  if (kmode == "complex") {
    r.k_mode = KMode::complex_k;
  } else if (kmode == "scalar") {
    r.k_mode = KMode::scalar_k;
  } else {
    throw ConfigError(ctx + ".k_mode: expected \"complex\" or \"scalar\"");
  }
  r.adaptive = opt_bool(j, "adaptive", ctx, true);
  r.model_file = opt_str(j, "model_file", ctx, "");
  r.rules.zone1_fraction = opt_num(j, "zone1_fraction", ctx, 0.85);
  r.rules.zone2_remote_fraction =
      opt_num(j, "zone2_remote_fraction", ctx, 0.5);
  r.rules.zone3_remote_fraction =
      opt_num(j, "zone3_remote_fraction", ctx, 0.8);
  r.rules.t2_s = opt_num(j, "t2_s", ctx, 0.3);
  r.rules.t3_s = opt_num(j, "t3_s", ctx, 1.0);
  if (!(r.rules.zone1_fraction > 0.0 && r.rules.zone1_fraction < 1.0)) {
    throw ConfigError(ctx + ".zone1_fraction: must lie in (0, 1)");
  }
  if (!(r.rules.zone2_remote_fraction > 0.0)) {
    throw ConfigError(ctx + ".zone2_remote_fraction: must be > 0");
  }
  if (!(r.rules.zone3_remote_fraction > r.rules.zone2_remote_fraction)) {
    throw ConfigError(
        ctx + ".zone3_remote_fraction: must exceed zone2_remote_fraction");
  }
  if (!(r.rules.t2_s > 0.0 && r.rules.t3_s > r.rules.t2_s)) {
    throw ConfigError(ctx + ": delays must satisfy 0 < t2_s < t3_s");
  }
  return r;
}

inline SweepSpec parse_sweep(const njson& j) {
  const std::string ctx = "sweep";
  check_keys(j, ctx, {"start_mps", "stop_mps", "step_mps"});
  SweepSpec s;
  s.start_mps = num(require(j, "start_mps", ctx), ctx + ".start_mps");
  s.stop_mps = num(require(j, "stop_mps", ctx), ctx + ".stop_mps");
  s.step_mps = num(require(j, "step_mps", ctx), ctx + ".step_mps");
  if (!(s.step_mps > 0.0)) {
    throw ConfigError(ctx + ".step_mps: must be > 0");
  }
  if (!(s.start_mps >= 0.0 && s.stop_mps <= 30.0 &&
        s.start_mps <= s.stop_mps)) {
    throw ConfigError(ctx + ": need 0 <= start_mps <= stop_mps <= 30");
  }
  return s;
}

inline TrainingConfig parse_training(const njson& j) {
  const std::string ctx = "training";
  check_keys(j, ctx,
             {"train_fraction", "learning_rate", "max_epochs", "target_rmse",
              "seed", "hidden_units"});
  TrainingConfig t;
  t.train_fraction = opt_num(j, "train_fraction", ctx, t.train_fraction);
  t.learning_rate = opt_num(j, "learning_rate", ctx, t.learning_rate);
  t.max_epochs = opt_int(j, "max_epochs", ctx, t.max_epochs);
  t.target_rmse = opt_num(j, "target_rmse", ctx, t.target_rmse);
  t.seed = static_cast<std::uint64_t>(
      opt_int(j, "seed", ctx, static_cast<int>(t.seed)));
  t.hidden_units = opt_int(j, "hidden_units", ctx, t.hidden_units);
  try {
    validate(t);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("training: ") + e.what());
  }
  return t;
}

inline SimulationSpec parse_simulation(const njson& j) {
  const std::string ctx = "simulation";
  check_keys(j, ctx, {"dt_ms", "duration_s", "wind_mps", "events"});
  SimulationSpec s;
  const double dt_ms = opt_num(j, "dt_ms", ctx, 1.0);
  if (!(dt_ms > 0.0 && dt_ms <= 5.0)) {
    throw ConfigError(ctx + ".dt_ms: must lie in (0, 5]");
  }
  s.dt_s = dt_ms * 1e-3;
  s.duration_s = num(require(j, "duration_s", ctx), ctx + ".duration_s");
  if (!(s.duration_s > 0.0)) {
    throw ConfigError(ctx + ".duration_s: must be > 0");
  }
  s.initial_wind_mps = opt_num(j, "wind_mps", ctx, 0.0);
  if (s.initial_wind_mps < 0.0) {
    throw ConfigError(ctx + ".wind_mps: must be >= 0");
  }
  if (j.contains("events")) {
    const njson& je = j.at("events");
    if (!je.is_array()) throw ConfigError(ctx + ".events: expected an array");
    for (std::size_t i = 0; i < je.size(); ++i) {
      const std::string ectx = ctx + ".events[" + std::to_string(i) + "]";
      const njson& e = je[i];
      check_keys(e, ectx, {"t_s", "event", "speed_mps"});
      SimEventSpec ev;
      ev.t_s = num(require(e, "t_s", ectx), ectx + ".t_s");
      if (ev.t_s < 0.0) throw ConfigError(ectx + ".t_s: must be >= 0");
      const std::string kind = str(require(e, "event", ectx), ectx + ".event");
      if (kind == "fault_on") {
        ev.kind = SimEventSpec::Kind::fault_on;
      } else if (kind == "fault_off") {
        ev.kind = SimEventSpec::Kind::fault_off;
      } else if (kind == "wind") {
        ev.kind = SimEventSpec::Kind::wind_change;
      } else {
        throw ConfigError(ectx +
                          ".event: expected \"fault_on\", \"fault_off\", or "
                          "\"wind\"");
      }
      if (ev.kind == SimEventSpec::Kind::wind_change) {
        ev.speed_mps =
            num(require(e, "speed_mps", ectx), ectx + ".speed_mps");
        if (ev.speed_mps < 0.0) {
          throw ConfigError(ectx + ".speed_mps: must be >= 0");
        }
      } else if (e.contains("speed_mps")) {
        throw ConfigError(ectx + ".speed_mps: only valid for wind events");
      }
      s.events.push_back(ev);
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const SimEventSpec& a, const SimEventSpec& b) {
                       return a.t_s < b.t_s;
                     });
  }
  return s;
}

inline OutputSpec parse_output(const njson& j) {
  const std::string ctx = "output";
  check_keys(j, ctx, {"csv", "svg", "model", "curve"});
  OutputSpec o;
  o.csv = opt_str(j, "csv", ctx, "");
  o.svg = opt_str(j, "svg", ctx, "");
  o.model = opt_str(j, "model", ctx, "");
  o.curve = opt_str(j, "curve", ctx, "");
  return o;
}

}  // namespace cfgdetail

/// Parse and validate a scenario from JSON text.  Unknown keys anywhere in
/// the document are errors; every diagnostic names the offending field.
inline ScenarioConfig parse_config(const std::string& text) {
  namespace cd = cfgdetail;
  cd::njson j;
  try {
    j = cd::njson::parse(text);
  } catch (const cd::njson::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  cd::check_keys(j, "config",
                 {"network", "windfarm", "wind", "fault", "relay", "sweep",
                  "training", "simulation", "output"});
  NetworkModel net = cd::parse_network(cd::require(j, "network", "config"));
  WindFarm farm = cd::parse_windfarm(cd::require(j, "windfarm", "config"),
                                     net.nominal_voltage_kv());
  if (farm.connection_bus != net.infeed_bus()) {
    throw ConfigError(
        "windfarm.connection_bus must equal network.infeed_bus");
  }
  if (!net.has_bus(farm.connection_bus)) {
    throw ConfigError("windfarm.connection_bus: no bus named \"" +
                      farm.connection_bus + "\"");
  }
  WindState wind = cd::parse_wind(cd::require(j, "wind", "config"));
  FaultScenario fault = cd::parse_fault(cd::require(j, "fault", "config"), net);
  RelayOptions relay = j.contains("relay") ? cd::parse_relay(j.at("relay"))
                                           : RelayOptions{};
  std::optional<SweepSpec> sweep;
  if (j.contains("sweep")) sweep = cd::parse_sweep(j.at("sweep"));
  TrainingConfig training = j.contains("training")
                                ? cd::parse_training(j.at("training"))
                                : TrainingConfig{};
  std::optional<SimulationSpec> simulation;
  if (j.contains("simulation")) {
    simulation = cd::parse_simulation(j.at("simulation"));
  }
  OutputSpec output = j.contains("output") ? cd::parse_output(j.at("output"))
                                           : OutputSpec{};
  return ScenarioConfig{std::move(net), std::move(farm), std::move(wind),
                        std::move(fault), std::move(relay), sweep, training,
                        simulation, std::move(output)};
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

/// The built-in study system: a 132 kV, 60 Hz radial pair of remote lines
/// behind a 100 km protected line, with a 15 MW wind farm at the end of the
/// shorter remote line and the study fault 16 km down the longer one.
inline ScenarioConfig make_default_config() {
  const double kv = 132.0;
  const double deg = std::numbers::pi / 180.0;

  std::vector<LineSection> lines;
  lines.push_back(LineSection{"AB", "A", "B", 100.0,
                              std::polar(0.30, 80.0 * deg),
                              std::polar(0.82, 75.0 * deg)});
  lines.push_back(LineSection{"BC1", "B", "C1", 20.0,
                              std::polar(0.40, 80.0 * deg),
                              std::polar(0.40 * 82.0 / 30.0, 75.0 * deg)});
  lines.push_back(LineSection{"BC2", "B", "C2", 40.0,
                              std::polar(0.249375, 80.0 * deg),
                              std::polar(0.249375 * 82.0 / 30.0, 75.0 * deg)});

  GridSource grid;
  grid.bus = "A";
  grid.emf = Phasor(kv * 1e3 / std::sqrt(3.0), 0.0);
  // 0.1 pu on a 100 MVA / 132 kV base with X/R = 10.
  grid.z1 = std::polar(0.1 * kv * kv / 100.0, std::atan(10.0));
  grid.z2 = grid.z1;
  grid.z0 = grid.z1;

  NetworkModel net(std::move(lines), std::move(grid), "C1", kv, 60.0);

  WindFarm farm;
  farm.n_turbines = 5;
  farm.rated_power_mw = 3.0;
  farm.cut_in_mps = 4.0;
  farm.rated_speed_mps = 12.0;
  farm.cut_out_mps = 25.0;
  farm.fault_current_limit_pu = 1.2;
  farm.connection_bus = "C1";
  farm.nominal_v_ln = kv * 1e3 / std::sqrt(3.0);
  farm.validate();

  ScenarioConfig cfg{std::move(net),
                     std::move(farm),
                     WindState{12.0, {}},
                     FaultScenario{FaultType::slg_a, "BC2", 16.0, 0.0},
                     RelayOptions{},
                     SweepSpec{4.0, 25.0, 0.5},
                     TrainingConfig{},
                     std::nullopt,
                     OutputSpec{}};
  return cfg;
}

}  // namespace relaysim

#endif  // RELAYSIM_SCENARIO_HPP
