#ifndef RELAYSIM_WINDFARM_HPP
#define RELAYSIM_WINDFARM_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "relaysim/errors.hpp"
#include "relaysim/phasor.hpp"

namespace relaysim {

/// Aggregated wind farm tied to one bus.  All turbines share a cubic power
/// curve; the farm injects balanced positive-sequence current at unity power
/// factor and rides through faults as a limited current source.
struct WindFarm {
  int n_turbines = 0;
  double rated_power_mw = 0.0;  // per turbine
  double cut_in_mps = 0.0;
  double rated_speed_mps = 0.0;
  double cut_out_mps = 0.0;
  double fault_current_limit_pu = 1.0;  // >= 1, relative to rated current
  std::string connection_bus;
  double nominal_v_ln = 0.0;  // line-to-neutral RMS volts for rated current

  void validate() const {
    if (n_turbines < 1) throw std::invalid_argument("need >= 1 turbine");
    if (!(rated_power_mw > 0.0)) {
      throw std::invalid_argument("rated power must be positive");
    }
    if (!(0.0 < cut_in_mps && cut_in_mps < rated_speed_mps &&
          rated_speed_mps < cut_out_mps)) {
      throw std::invalid_argument(
          "need 0 < cut-in < rated speed < cut-out");
    }
    if (!(fault_current_limit_pu >= 1.0)) {
      throw std::invalid_argument("fault current limit must be >= 1 pu");
    }
    if (!(nominal_v_ln > 0.0)) {
      throw std::invalid_argument("nominal voltage must be positive");
    }
    if (connection_bus.empty()) {
      throw std::invalid_argument("connection bus must be named");
    }
  }

  double total_rated_mw() const { return n_turbines * rated_power_mw; }

  /// Rated balanced per-phase current magnitude at nominal voltage.
  double rated_current() const {
    return total_rated_mw() * 1e6 / (3.0 * nominal_v_ln);
  }
};

/// Instantaneous wind condition: a mean speed plus optional per-turbine
/// deviations (missing entries mean zero deviation).
struct WindState {
  double mean_speed_mps = 0.0;
  std::vector<double> per_turbine_offset_mps;

  double turbine_speed(int i) const {
    const double off =
        i < static_cast<int>(per_turbine_offset_mps.size())
            ? per_turbine_offset_mps[static_cast<std::size_t>(i)]
            : 0.0;
    return mean_speed_mps + off;
  }
};

/// Cubic power curve of a single turbine:
///   0 below cut-in and at/above cut-out,
///   rated * (v^3 - ci^3) / (vr^3 - ci^3) between cut-in and rated speed,
///   rated between rated speed and cut-out.
inline double turbine_power_mw(const WindFarm& farm, double speed_mps) {
  if (speed_mps < farm.cut_in_mps || speed_mps >= farm.cut_out_mps) return 0.0;
  if (speed_mps >= farm.rated_speed_mps) return farm.rated_power_mw;
  const double v3 = speed_mps * speed_mps * speed_mps;
  const double ci3 = farm.cut_in_mps * farm.cut_in_mps * farm.cut_in_mps;
  const double vr3 = farm.rated_speed_mps * farm.rated_speed_mps *
                     farm.rated_speed_mps;
  return farm.rated_power_mw * (v3 - ci3) / (vr3 - ci3);
}

/// Total farm output in MW for the given wind condition.
inline double power_output(const WindFarm& farm, const WindState& wind) {
  double p = 0.0;
  for (int i = 0; i < farm.n_turbines; ++i) {
    p += turbine_power_mw(farm, wind.turbine_speed(i));
  }
  return p;
}

/// Steady-state injected current at the connection bus: constant power at
/// unity power factor, so the current is in phase with the bus voltage with
/// magnitude P / (3 |V|).  Zero output gives the canonical zero phasor.
inline Phasor prefault_current(const WindFarm& farm, const WindState& wind,
                               const Phasor& v_bus) {
  const double p_mw = power_output(farm, wind);
  if (p_mw == 0.0) return Phasor{};
  if (v_bus.magnitude() == 0.0) {
    throw ZeroVoltage("cannot inject constant power into zero voltage");
  }
  return Phasor(p_mw * 1e6 / (3.0 * v_bus.magnitude()), v_bus.angle());
}

/// Injected current while a fault depresses the terminal voltage: the
/// constant-power current, clamped at fault_current_limit_pu times rated.
/// At exactly zero voltage the converter rides through at the clamp value,
/// holding `fallback_angle` (typically the pre-fault current angle).
inline Phasor fault_current(const WindFarm& farm, const WindState& wind,
                            const Phasor& v_bus, double fallback_angle = 0.0) {
  const double p_mw = power_output(farm, wind);
  if (p_mw == 0.0) return Phasor{};
  const double clamp = farm.fault_current_limit_pu * farm.rated_current();
  if (v_bus.magnitude() == 0.0) return Phasor(clamp, fallback_angle);
  const double wanted = p_mw * 1e6 / (3.0 * v_bus.magnitude());
  return Phasor(std::min(wanted, clamp), v_bus.angle());
}

}  // namespace relaysim

#endif  // RELAYSIM_WINDFARM_HPP
