#ifndef RELAYSIM_ADAPTIVE_HPP
#define RELAYSIM_ADAPTIVE_HPP

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relaysim/errors.hpp"
#include "relaysim/faultsolver.hpp"
#include "relaysim/mlp.hpp"
#include "relaysim/network.hpp"
#include "relaysim/relay.hpp"
#include "relaysim/windfarm.hpp"

namespace relaysim {

enum class SolverMode { reduced, full };

/// Zone-reach fractions and delays used to derive settings from a network.
struct SettingRules {
  double zone1_fraction = 0.85;
  double zone2_remote_fraction = 0.5;
  double zone3_remote_fraction = 0.8;
  double t2_s = 0.3;
  double t3_s = 1.0;
};

/// Conventional settings for the relay protecting the line out of the grid
/// bus: zone 1 a fraction of the line, zones 2/3 the line plus fractions of
/// the smallest remote line, k0 from the protected line's own impedances.
inline ZoneSettings make_static_settings(const NetworkModel& model,
                                         const SettingRules& rules = {}) {
  const Complex z_ab = model.protected_line().z1_total();
  const std::vector<Complex> remotes =
      remote_line_z1s(model, model.junction_bus());
  ZoneSettings s;
  s.z1_reach = zone1_reach(z_ab, rules.zone1_fraction);
  s.z2_reach = zone2_static(z_ab, remotes, rules.zone2_remote_fraction);
  s.z3_reach = zone3_reach(z_ab, remotes, rules.zone3_remote_fraction);
  s.t2_s = rules.t2_s;
  s.t3_s = rules.t3_s;
  s.k0 = residual_comp_factor(model.protected_line());
  s.validate();
  return s;
}

/// Solve one fault scenario in the requested fidelity.
///
/// The full mode runs the sequence-network solver.  The reduced mode
/// collapses the system onto the classic single-loop circuit: grid source
/// behind its impedance, relay branch impedance to the junction, faulted
/// stretch, fault resistance, with the in-feed injected at the fault point.
/// Its in-feed magnitude is the farm's limited fault current at nominal
/// voltage, phase-aligned with the loop current the grid alone would drive.
inline FaultSolution solve_scenario(const NetworkModel& model,
                                    const WindFarm& farm,
                                    const WindState& wind,
                                    const FaultScenario& fault,
                                    SolverMode mode,
                                    const SolveOptions& options = {}) {
  if (mode == SolverMode::full) {
    return solve_fault(model, farm, wind, fault, options);
  }
  const LineSection& target = model.line(fault.line);
  if (fault.distance_km < 0.0 || fault.distance_km > target.length_km) {
    throw std::invalid_argument("fault distance outside line " + fault.line);
  }
  if (fault.resistance_ohm < 0.0) {
    throw std::invalid_argument("fault resistance must be >= 0");
  }
  const LineSection& prot = model.protected_line();
  Complex z_a, z_f;
  if (target.id == prot.id) {
    z_a = target.z1_per_km * fault.distance_km;
    z_f = Complex{};
  } else if (target.from_bus == model.junction_bus()) {
    z_a = prot.z1_total();
    z_f = target.z1_per_km * fault.distance_km;
  } else {
    throw std::invalid_argument(
        "reduced model needs the fault on the protected line or on a line "
        "leaving the junction");
  }
  const Complex z_src = model.grid().z1;
  const Phasor e_a = model.grid().emf;
  const Complex i_alone =
      e_a.as_complex() / (z_src + z_a + z_f + fault.resistance_ohm);
  const Phasor v_nominal(farm.nominal_v_ln, 0.0);
  const double infeed_mag = fault_current(farm, wind, v_nominal).magnitude();
  const Phasor i_remote(infeed_mag, std::arg(i_alone));
  return solve_reduced(z_a, z_f, e_a, i_remote, fault.resistance_ohm, z_src);
}

/// How the in-feed factor enters the adaptive reach: as the full complex
/// value or collapsed to its magnitude.
enum class KMode { complex_k, scalar_k };

inline Complex apply_k_mode(Complex k, KMode mode) {
  return mode == KMode::scalar_k ? Complex{std::abs(k), 0.0} : k;
}

namespace detail {

/// Rethrow the in-flight solver exception with the wind speed attached,
/// preserving its concrete type.
[[noreturn]] inline void rethrow_with_speed(double speed_mps) {
  const std::string tag =
      " (at wind speed " + format_g17(speed_mps) + " m/s)";
  try {
    throw;
  } catch (const SingularNetwork& e) {
    throw SingularNetwork(e.what() + tag);
  } catch (const NoConvergence& e) {
    throw NoConvergence(e.what() + tag);
  } catch (const DegenerateLoop& e) {
    throw DegenerateLoop(e.what() + tag);
  } catch (const ZeroLoopCurrent& e) {
    throw ZeroLoopCurrent(e.what() + tag);
  } catch (const ZeroRelayCurrent& e) {
    throw ZeroRelayCurrent(e.what() + tag);
  } catch (const ZeroVoltage& e) {
    throw ZeroVoltage(e.what() + tag);
  } catch (const KOutOfRange& e) {
    throw KOutOfRange(e.what() + tag);
  } catch (const NumericError& e) {
    throw NumericError(e.what() + tag);
  }
}

}  // namespace detail

/// One solved sweep point, the raw material for datasets and CSV rows.
struct SpeedPoint {
  double speed_mps = 0.0;
  double p_mw = 0.0;
  Phasor i_remote;
  Phasor i_relay;  // ground-compensated loop current
  Complex k{};
  Complex z_apparent{};
};

inline SpeedPoint solve_at_speed(const NetworkModel& model,
                                 const WindFarm& farm,
                                 const FaultScenario& fault, double speed_mps,
                                 SolverMode mode,
                                 const SolveOptions& options = {}) {
  const WindState wind{speed_mps, {}};
  try {
    const FaultSolution sol = solve_scenario(model, farm, wind, fault, mode,
                                             options);
    return SpeedPoint{speed_mps,       power_output(farm, wind),
                      sol.i_remote,    sol.i_relay_loop,
                      sol.k_remote,    sol.z_apparent};
  } catch (const NumericError&) {
    detail::rethrow_with_speed(speed_mps);
  }
}

/// Build the (wind speed -> adaptive zone-2 reach magnitude) training table:
/// solve the fixed fault at each grid speed, form the in-feed factor, and
/// record the magnitude of the adapted reach.  Rows keep grid order.
inline Dataset generate_dataset(const NetworkModel& model,
                                const WindFarm& farm,
                                const FaultScenario& fault,
                                const std::vector<double>& speeds,
                                SolverMode mode = SolverMode::full,
                                KMode k_mode = KMode::complex_k,
                                double zone2_fraction = 0.5) {
  const Complex z_ab = model.protected_line().z1_total();
  const std::vector<Complex> remotes =
      remote_line_z1s(model, model.junction_bus());
  Dataset data;
  for (double v : speeds) {
    const SpeedPoint pt = solve_at_speed(model, farm, fault, v, mode);
    try {
      const Complex reach = zone2_adaptive(
          z_ab, remotes, apply_k_mode(pt.k, k_mode), zone2_fraction);
      data.add(v, std::abs(reach));
    } catch (const NumericError&) {
      detail::rethrow_with_speed(v);
    }
  }
  return data;
}

/// Inputs to one pass of the online update loop.
struct AdaptiveInput {
  bool farm_online = false;
  std::optional<Phasor> i_remote;  // telemetry pair: both or neither
  std::optional<Phasor> i_relay;
  std::optional<double> wind_speed_mps;
};

enum class AdaptiveBranch {
  offline_static,   // farm dark: conventional setting
  telemetry,        // live phasors: in-feed factor applied directly
  mlp,              // wind speed through the trained network
  speed_bypass,     // speed outside the producing band: conventional setting
  fallback_static,  // telemetry k untrusted: conventional setting, flagged
};

struct AdaptiveUpdate {
  ZoneSettings settings;
  AdaptiveBranch branch = AdaptiveBranch::offline_static;
  bool fallback = false;  // true when KOutOfRange forced the static reach
};

/// Online zone-2 resetting.  Holds everything derivable offline (static
/// settings, line impedances, the farm's producing band) plus the optional
/// trained regressor for the speed-only path.
class AdaptiveScheme {
 public:
  AdaptiveScheme(const NetworkModel& model, ZoneSettings static_settings,
                 const WindFarm& farm, KMode k_mode = KMode::complex_k,
                 double zone2_fraction = 0.5)
      : z_ab_(model.protected_line().z1_total()),
        remotes_(remote_line_z1s(model, model.junction_bus())),
        static_settings_(static_settings),
        cut_in_(farm.cut_in_mps),
        cut_out_(farm.cut_out_mps),
        k_mode_(k_mode),
        fraction_(zone2_fraction) {
    static_settings_.validate();
  }

  void set_model(MlpModel m) { model_ = std::move(m); }
  const std::optional<MlpModel>& model() const { return model_; }
  const ZoneSettings& static_settings() const { return static_settings_; }

  /// One pass of the update loop: pick the best available evidence for the
  /// in-feed factor and reset zone 2, leaving zones 1 and 3 untouched.
  AdaptiveUpdate update(const AdaptiveInput& in) const {
    if (!in.farm_online) {
      return AdaptiveUpdate{static_settings_, AdaptiveBranch::offline_static,
                            false};
    }
    if (in.i_remote.has_value() && in.i_relay.has_value()) {
      const Complex k = apply_k_mode(
          infeed_factor(*in.i_remote, *in.i_relay), k_mode_);
      Complex reach;
      try {
        reach = zone2_adaptive(z_ab_, remotes_, k, fraction_);
      } catch (const KOutOfRange&) {
        return AdaptiveUpdate{static_settings_,
                              AdaptiveBranch::fallback_static, true};
      }
      return AdaptiveUpdate{with_zone2(reach), AdaptiveBranch::telemetry,
                            false};
    }
    if (in.wind_speed_mps.has_value()) {
      const double v = *in.wind_speed_mps;
      if (v < cut_in_ || v >= cut_out_) {
        return AdaptiveUpdate{static_settings_, AdaptiveBranch::speed_bypass,
                              false};
      }
      if (!model_.has_value()) {
        throw InputError(
            "wind-speed update requires a trained model; none is loaded");
      }
      const double mag = mlp_forward(*model_, v);
      const Complex reach =
          std::polar(mag, std::arg(static_settings_.z2_reach));
      return AdaptiveUpdate{with_zone2(reach), AdaptiveBranch::mlp, false};
    }
    throw std::invalid_argument(
        "online update needs telemetry phasors or a wind speed");
  }

 private:
  ZoneSettings with_zone2(Complex reach) const {
    ZoneSettings s = static_settings_;
    s.z2_reach = reach;
    s.validate();  // throws NestingViolation if the reach broke the nesting
    return s;
  }

  Complex z_ab_;
  std::vector<Complex> remotes_;
  ZoneSettings static_settings_;
  double cut_in_ = 0.0;
  double cut_out_ = 0.0;
  KMode k_mode_;
  double fraction_ = 0.5;
  std::optional<MlpModel> model_;
};

/// Free-function form of the update loop for one-shot callers.
inline ZoneSettings adaptive_update(const AdaptiveScheme& scheme,
                                    const AdaptiveInput& input,
                                    bool* fallback_flag = nullptr) {
  const AdaptiveUpdate u = scheme.update(input);
  if (fallback_flag != nullptr) *fallback_flag = u.fallback;
  return u.settings;
}

}  // namespace relaysim

#endif  // RELAYSIM_ADAPTIVE_HPP
