#ifndef RELAYSIM_PIPELINE_HPP
#define RELAYSIM_PIPELINE_HPP

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "relaysim/adaptive.hpp"
#include "relaysim/errors.hpp"
#include "relaysim/mlp.hpp"
#include "relaysim/relay.hpp"
#include "relaysim/scenario.hpp"
#include "relaysim/svgplot.hpp"
#include "relaysim/textio.hpp"

namespace relaysim {

// --- wind-speed sweep --------------------------------------------------------

struct SweepRow {
  SpeedPoint pt;
  int zone_static = 0;
  int zone_adaptive = 0;
};

inline const char* kSweepHeader =
    "speed_mps,p_mw,i_remote_re,i_remote_im,i_relay_re,i_relay_im,k_re,k_im,"
    "z_re,z_im,zone_static,zone_adaptive";

/// Solve the configured fault across the sweep grid.  zone_static classifies
/// against the conventional settings; zone_adaptive against the settings the
/// online update loop would have in force at that operating point (telemetry
/// path, since the solved phasors are available).
inline std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg) {
  if (!cfg.sweep.has_value()) {
    throw ConfigError("sweep: section required for this command");
  }
  const std::vector<double> speeds = cfg.sweep->speeds();
  if (speeds.empty()) throw ConfigError("sweep: grid is empty");

  const ZoneSettings settings = cfg.static_settings();
  const AdaptiveScheme scheme(cfg.network, settings, cfg.farm,
                              cfg.relay.k_mode,
                              cfg.relay.rules.zone2_remote_fraction);
  std::vector<SweepRow> rows;
  rows.reserve(speeds.size());
  for (double v : speeds) {
    SweepRow row;
    row.pt = solve_at_speed(cfg.network, cfg.farm, cfg.fault, v,
                            cfg.relay.mode);
    row.zone_static =
        static_cast<int>(classify_zone(settings, row.pt.z_apparent));
    AdaptiveInput in;
    in.farm_online = row.pt.p_mw > 0.0;
    in.i_remote = row.pt.i_remote;
    in.i_relay = row.pt.i_relay;
    in.wind_speed_mps = v;
    row.zone_adaptive = static_cast<int>(
        classify_zone(scheme.update(in).settings, row.pt.z_apparent));
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os,
                            const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const SweepRow& r : rows) {
    const Complex irem = r.pt.i_remote.as_complex();
    const Complex irel = r.pt.i_relay.as_complex();
    os << fmt17(r.pt.speed_mps) << ',' << fmt17(r.pt.p_mw) << ','
       << fmt17(irem.real()) << ',' << fmt17(irem.imag()) << ','
       << fmt17(irel.real()) << ',' << fmt17(irel.imag()) << ','
       << fmt17(r.pt.k.real()) << ',' << fmt17(r.pt.k.imag()) << ','
       << fmt17(r.pt.z_apparent.real()) << ',' << fmt17(r.pt.z_apparent.imag())
       << ',' << r.zone_static << ',' << r.zone_adaptive << '\n';
  }
}

/// Read a sweep CSV back.  Column order is free; every sweep column must be
/// present (the error names the first missing one); extra columns are
/// ignored.
inline std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw CsvFormatError("empty CSV: missing header row");
  }
  const std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  const std::vector<std::string> wanted = split_csv_line(kSweepHeader);
  for (const std::string& name : wanted) {
    if (col.find(name) == col.end()) {
      throw CsvFormatError("missing column \"" + name + "\"");
    }
  }

  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() < header.size()) {
      throw CsvFormatError("row " + std::to_string(line_no) +
                           ": expected " + std::to_string(header.size()) +
                           " fields");
    }
    auto fld = [&](const char* name) -> const std::string& {
      return f[col.at(name)];
    };
    auto d = [&](const char* name) {
      return parse_double_field(fld(name), std::string("column ") + name);
    };
    SweepRow r;
    r.pt.speed_mps = d("speed_mps");
    r.pt.p_mw = d("p_mw");
    r.pt.i_remote =
        Phasor::from_complex({d("i_remote_re"), d("i_remote_im")});
    r.pt.i_relay = Phasor::from_complex({d("i_relay_re"), d("i_relay_im")});
    r.pt.k = Complex{d("k_re"), d("k_im")};
    r.pt.z_apparent = Complex{d("z_re"), d("z_im")};
    r.zone_static = parse_int_field(fld("zone_static"), "column zone_static");
    r.zone_adaptive =
        parse_int_field(fld("zone_adaptive"), "column zone_adaptive");
    rows.push_back(r);
  }
  return rows;
}

inline std::string render_sweep_svg(const ZoneSettings& settings,
                                    const std::vector<SweepRow>& rows) {
  std::vector<PlotPoint> pts;
  pts.reserve(rows.size());
  for (const SweepRow& r : rows) {
    pts.push_back(PlotPoint{r.pt.z_apparent, r.zone_static});
  }
  return render_rx_svg(settings, pts);
}

// --- single solve ------------------------------------------------------------

struct SolveReport {
  FaultSolution sol;
  double wind_mps = 0.0;
  double p_mw = 0.0;
  ZoneSettings static_settings;
  Zone zone_static = Zone::none;
  bool adaptive_enabled = false;
  ZoneSettings adaptive_settings;
  Zone zone_adaptive = Zone::none;
  bool fallback = false;
};

inline SolveReport run_solve(const ScenarioConfig& cfg) {
  SolveReport rep;
  rep.static_settings = cfg.static_settings();
  rep.wind_mps = cfg.wind.mean_speed_mps;
  rep.p_mw = power_output(cfg.farm, cfg.wind);
  rep.sol = solve_scenario(cfg.network, cfg.farm, cfg.wind, cfg.fault,
                           cfg.relay.mode);
  rep.zone_static = classify_zone(rep.static_settings, rep.sol.z_apparent);
  rep.adaptive_enabled = cfg.relay.adaptive;
  rep.adaptive_settings = rep.static_settings;
  rep.zone_adaptive = rep.zone_static;
  if (cfg.relay.adaptive) {
    AdaptiveScheme scheme(cfg.network, rep.static_settings, cfg.farm,
                          cfg.relay.k_mode,
                          cfg.relay.rules.zone2_remote_fraction);
    AdaptiveInput in;
    in.farm_online = rep.p_mw > 0.0;
    in.i_remote = rep.sol.i_remote;
    in.i_relay = rep.sol.i_relay_loop;
    in.wind_speed_mps = cfg.wind.mean_speed_mps;
    const AdaptiveUpdate u = scheme.update(in);
    rep.adaptive_settings = u.settings;
    rep.fallback = u.fallback;
    rep.zone_adaptive = classify_zone(u.settings, rep.sol.z_apparent);
  }
  return rep;
}

inline std::string format_zone(Zone z) {
  switch (z) {
    case Zone::zone1: return "zone-1";
    case Zone::zone2: return "zone-2";
    case Zone::zone3: return "zone-3";
    default: return "outside";
  }
}

/// Human-readable summary followed by a stable machine-readable block.
inline std::string format_solve_report(const SolveReport& r) {
  std::string s;
  const Complex z = r.sol.z_apparent;
  const Complex k = r.sol.k_remote;
  s += "Fault study summary\n";
  s += "  wind speed        : " + fmt17(r.wind_mps) + " m/s\n";
  s += "  farm output       : " + fmt17(r.p_mw) + " MW\n";
  s += "  apparent impedance: " + fmt17(z.real()) + " + " +
       fmt17(z.imag()) + "j ohm\n";
  s += "  in-feed factor    : " + fmt17(k.real()) + " + " +
       fmt17(k.imag()) + "j\n";
  s += "  static zone       : " + format_zone(r.zone_static) + "\n";
  if (r.adaptive_enabled) {
    s += "  adaptive zone     : " + format_zone(r.zone_adaptive) +
         (r.fallback ? " (static fallback: K out of range)" : "") + "\n";
    s += "  adaptive z2 reach : " +
         fmt17(r.adaptive_settings.z2_reach.real()) + " + " +
         fmt17(r.adaptive_settings.z2_reach.imag()) + "j ohm\n";
  }
  s += "---\n";
  s += "z_re=" + fmt17(z.real()) + "\n";
  s += "z_im=" + fmt17(z.imag()) + "\n";
  s += "k_re=" + fmt17(k.real()) + "\n";
  s += "k_im=" + fmt17(k.imag()) + "\n";
  s += "i_remote_re=" + fmt17(r.sol.i_remote.as_complex().real()) + "\n";
  s += "i_remote_im=" + fmt17(r.sol.i_remote.as_complex().imag()) + "\n";
  s += "zone_static=" + std::to_string(static_cast<int>(r.zone_static)) +
       "\n";
  s += "zone_adaptive=" + std::to_string(static_cast<int>(r.zone_adaptive)) +
       "\n";
  s += "fallback=" + std::string(r.fallback ? "1" : "0") + "\n";
  return s;
}

// --- training / evaluation ---------------------------------------------------

inline Dataset build_dataset(const ScenarioConfig& cfg) {
  if (!cfg.sweep.has_value()) {
    throw ConfigError("sweep: section required to generate a dataset");
  }
  return generate_dataset(cfg.network, cfg.farm, cfg.fault,
                          cfg.sweep->speeds(), cfg.relay.mode,
                          cfg.relay.k_mode,
                          cfg.relay.rules.zone2_remote_fraction);
}

struct TrainArtifacts {
  MlpModel model;
  TrainingReport report;
  Dataset data;
};

inline TrainArtifacts run_train(const ScenarioConfig& cfg) {
  Dataset data = build_dataset(cfg);
  auto [model, report] = train(data, cfg.training);
  return TrainArtifacts{std::move(model), std::move(report),
                        std::move(data)};
}

inline void write_curve_csv(std::ostream& os, const TrainingReport& report) {
  os << "epoch,train_rmse,val_rmse\n";
  for (std::size_t i = 0; i < report.curve.size(); ++i) {
    os << (i + 1) << ',' << fmt17(report.curve[i].train_rmse) << ','
       << fmt17(report.curve[i].val_rmse) << '\n';
  }
}

struct EvalReport {
  double val_rmse = 0.0;
  double max_abs_err = 0.0;
  std::size_t n_val = 0;
};

/// Evaluate a saved model on the validation split of the config's dataset
/// (same grid, same seed, same split as training).
inline EvalReport run_eval(const ScenarioConfig& cfg, const MlpModel& model) {
  const Dataset data = build_dataset(cfg);
  if (data.size() < 20) {
    throw DatasetTooSmall("evaluation needs at least 20 rows");
  }
  const auto [train_idx, val_idx] = train_val_split(data.size(), cfg.training);
  EvalReport rep;
  rep.n_val = val_idx.size();
  double acc = 0.0;
  for (std::size_t i : val_idx) {
    const Dataset::Row& row = data.rows()[i];
    const double err = mlp_forward(model, row.speed_mps) - row.target_ohm;
    acc += err * err;
    rep.max_abs_err = std::max(rep.max_abs_err, std::abs(err));
  }
  rep.val_rmse = std::sqrt(acc / static_cast<double>(val_idx.size()));
  return rep;
}

inline std::string format_eval_report(const EvalReport& r) {
  std::string s;
  s += "Validation report\n";
  s += "  rows        : " + std::to_string(r.n_val) + "\n";
  s += "  rmse        : " + fmt17(r.val_rmse) + " ohm\n";
  s += "  max abs err : " + fmt17(r.max_abs_err) + " ohm\n";
  s += "---\n";
  s += "val_rmse=" + fmt17(r.val_rmse) + "\n";
  s += "max_abs_err=" + fmt17(r.max_abs_err) + "\n";
  return s;
}

// --- timed simulation ----------------------------------------------------------

struct TripRecord {
  double time_s = 0.0;
  int zone = 0;
  Complex z_at_pickup{};
  ZoneSettings settings_in_force;
  double wind_mps = 0.0;
};

inline const char* kTripHeader =
    "time_s,zone,z_re,z_im,wind_mps,z1_reach_re,z1_reach_im,z2_reach_re,"
    "z2_reach_im,z3_reach_re,z3_reach_im,t1_s,t2_s,t3_s,k0_re,k0_im";

/// Step the relay through the event script at the configured rate.  The
/// fault's electrical solution is recomputed whenever an event changes the
/// operating point; between events the phasor state is stationary.  With
/// adaptive resetting on, wind-change events re-run the update loop through
/// the trained regressor (the only evidence available pre-fault).
inline std::vector<TripRecord> run_simulation(const ScenarioConfig& cfg) {
  if (!cfg.simulation.has_value()) {
    throw ConfigError("simulation: section required for this command");
  }
  const SimulationSpec& sim = *cfg.simulation;
  const ZoneSettings static_settings = cfg.static_settings();

  std::optional<AdaptiveScheme> scheme;
  if (cfg.relay.adaptive) {
    scheme.emplace(cfg.network, static_settings, cfg.farm, cfg.relay.k_mode,
                   cfg.relay.rules.zone2_remote_fraction);
    if (cfg.relay.model_file.empty()) {
      throw ConfigError(
          "relay.model_file: adaptive simulation needs a trained model");
    }
    scheme->set_model(load_model(cfg.relay.model_file));
  }

  double wind = sim.initial_wind_mps;
  bool fault_on = false;
  std::optional<Complex> z_now;

  RelayState state;
  state.settings = static_settings;

  auto refresh_settings = [&]() {
    if (!scheme.has_value()) return;
    AdaptiveInput in;
    in.farm_online = power_output(cfg.farm, WindState{wind, {}}) > 0.0;
    in.wind_speed_mps = wind;
    state.settings = scheme->update(in).settings;
  };
  auto refresh_fault = [&]() {
    if (fault_on) {
      z_now = solve_scenario(cfg.network, cfg.farm, WindState{wind, {}},
                             cfg.fault, cfg.relay.mode)
                  .z_apparent;
    } else {
      z_now.reset();
    }
  };
  refresh_settings();

  const long n_steps = std::lround(sim.duration_s / sim.dt_s);
  std::vector<TripRecord> trips;
  std::size_t next_event = 0;
  for (long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * sim.dt_s;
    bool changed = false;
    while (next_event < sim.events.size() &&
           sim.events[next_event].t_s <= t + sim.dt_s / 2.0) {
      const SimEventSpec& ev = sim.events[next_event];
      switch (ev.kind) {
        case SimEventSpec::Kind::fault_on:
          fault_on = true;
          break;
        case SimEventSpec::Kind::fault_off:
          fault_on = false;
          break;
        case SimEventSpec::Kind::wind_change:
          wind = ev.speed_mps;
          refresh_settings();
          break;
      }
      changed = true;
      ++next_event;
    }
    if (changed || (fault_on && !z_now.has_value())) refresh_fault();

    const StepDecision d = relay_step(state, z_now, sim.dt_s);
    if (d.tripped_now) {
      trips.push_back(TripRecord{t + sim.dt_s, static_cast<int>(d.zone),
                                 z_now.value_or(Complex{}), state.settings,
                                 wind});
      break;  // the element latches; nothing further can happen
    }
  }
  return trips;
}

inline void write_trips_csv(std::ostream& os,
                            const std::vector<TripRecord>& trips) {
  os << kTripHeader << '\n';
  for (const TripRecord& r : trips) {
    const ZoneSettings& s = r.settings_in_force;
    os << fmt17(r.time_s) << ',' << r.zone << ',' << fmt17(r.z_at_pickup.real())
       << ',' << fmt17(r.z_at_pickup.imag()) << ',' << fmt17(r.wind_mps) << ','
       << fmt17(s.z1_reach.real()) << ',' << fmt17(s.z1_reach.imag()) << ','
       << fmt17(s.z2_reach.real()) << ',' << fmt17(s.z2_reach.imag()) << ','
       << fmt17(s.z3_reach.real()) << ',' << fmt17(s.z3_reach.imag()) << ','
       << fmt17(s.t1_s) << ',' << fmt17(s.t2_s) << ',' << fmt17(s.t3_s) << ','
       << fmt17(s.k0.real()) << ',' << fmt17(s.k0.imag()) << '\n';
  }
}

// --- small file helpers --------------------------------------------------------

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path);
  os << content;
  if (!os.good()) throw InputError("failed writing: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open: " + path);
  return std::string((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
}

}  // namespace relaysim

#endif  // RELAYSIM_PIPELINE_HPP
