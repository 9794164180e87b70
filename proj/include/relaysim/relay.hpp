#ifndef RELAYSIM_RELAY_HPP
#define RELAYSIM_RELAY_HPP

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>

#include "relaysim/errors.hpp"
#include "relaysim/phasor.hpp"

namespace relaysim {

enum class Zone { none = 0, zone1 = 1, zone2 = 2, zone3 = 3 };

/// Distance-element configuration: three mho reaches with strictly nested
/// magnitudes, their time delays, and the residual compensation factor used
/// to form the measured ground-loop impedance.
struct ZoneSettings {
  Complex z1_reach{};
  Complex z2_reach{};
  Complex z3_reach{};
  double t1_s = 0.0;
  double t2_s = 0.3;
  double t3_s = 1.0;
  Complex k0{};

  void validate() const {
    if (!(std::abs(z1_reach) > 0.0)) {
      throw NestingViolation("zone-1 reach must be nonzero");
    }
    if (!(std::abs(z1_reach) < std::abs(z2_reach) &&
          std::abs(z2_reach) < std::abs(z3_reach))) {
      throw NestingViolation("zone reaches must satisfy |Z1| < |Z2| < |Z3|");
    }
    if (!(t1_s == 0.0 && t1_s < t2_s && t2_s < t3_s)) {
      throw NestingViolation("zone delays must satisfy 0 = t1 < t2 < t3");
    }
  }
};

/// Under-reaching zone 1: a fixed fraction of the protected line.
inline Complex zone1_reach(Complex z_ab, double fraction = 0.85) {
  return fraction * z_ab;
}

/// Conventional (static) zone-2 reach: the whole protected line plus a
/// fraction of the smallest remote line leaving the junction,
///   Z2 = Z_AB + fraction * min |Z_remote|.
/// The minimum is taken over magnitudes; its winner enters as a complex value
/// so the reach keeps a physical angle.
inline Complex zone2_static(Complex z_ab, std::span<const Complex> remote_z1s,
                            double fraction = 0.5) {
  if (remote_z1s.empty()) {
    throw EmptyRemotes("zone-2 rule needs at least one remote line");
  }
  const Complex* min_z = &remote_z1s[0];
  for (const Complex& z : remote_z1s) {
    if (std::abs(z) < std::abs(*min_z)) min_z = &z;
  }
  return z_ab + fraction * (*min_z);
}

/// Over-reaching backup zone 3, same shape with a larger remote fraction.
inline Complex zone3_reach(Complex z_ab, std::span<const Complex> remote_z1s,
                           double fraction = 0.8) {
  return zone2_static(z_ab, remote_z1s, fraction);
}

/// In-feed factor K = 1 + I_remote / I_relay: how much the impedance of
/// anything beyond the junction is inflated in the relay's view when a
/// remote source feeds the same fault.
inline Complex infeed_factor(const Phasor& i_remote, const Phasor& i_relay) {
  if (i_relay.magnitude() == 0.0) {
    throw ZeroRelayCurrent("in-feed factor undefined at zero relay current");
  }
  return 1.0 + i_remote.as_complex() / i_relay.as_complex();
}

/// Magnitude band within which a measured in-feed factor is trusted for
/// adaptive resetting.
inline constexpr double kMinTrustedK = 0.5;
inline constexpr double kMaxTrustedK = 20.0;

/// Adaptive zone-2 reach: the static rule with the remote-line term scaled by
/// the live in-feed factor,
///   Z2 = Z_AB + fraction * min |Z_remote| * K.
/// Throws KOutOfRange when |K| leaves [0.5, 20] - such factors indicate a
/// measurement or topology upset, and callers fall back to the static reach.
inline Complex zone2_adaptive(Complex z_ab,
                              std::span<const Complex> remote_z1s,
                              Complex k_remote, double fraction = 0.5) {
  const double k_mag = std::abs(k_remote);
  if (k_mag < kMinTrustedK || k_mag > kMaxTrustedK) {
    throw KOutOfRange("in-feed factor magnitude outside [0.5, 20]");
  }
  if (remote_z1s.empty()) {
    throw EmptyRemotes("zone-2 rule needs at least one remote line");
  }
  const Complex* min_z = &remote_z1s[0];
  for (const Complex& z : remote_z1s) {
    if (std::abs(z) < std::abs(*min_z)) min_z = &z;
  }
  return z_ab + fraction * (*min_z) * k_remote;
}

/// Self-polarized mho characteristic: the disc whose diameter runs from the
/// origin to the reach point.  Boundary points count as inside.
inline bool mho_contains(Complex reach, Complex z) {
  if (!(std::abs(reach) > 0.0)) {
    throw std::invalid_argument("mho reach must be nonzero");
  }
  const Complex center = reach / 2.0;
  return std::abs(z - center) <= std::abs(reach) / 2.0;
}

/// Innermost zone whose characteristic contains z (Zone::none if outside
/// all three).
inline Zone classify_zone(const ZoneSettings& s, Complex z) {
  if (mho_contains(s.z1_reach, z)) return Zone::zone1;
  if (mho_contains(s.z2_reach, z)) return Zone::zone2;
  if (mho_contains(s.z3_reach, z)) return Zone::zone3;
  return Zone::none;
}

/// Running state of the timed distance element.
struct RelayState {
  ZoneSettings settings;
  double clock1_s = 0.0;  // accumulated continuous in-zone time
  double clock2_s = 0.0;
  double clock3_s = 0.0;
  Zone tripped = Zone::none;  // latched once tripped
};

struct StepDecision {
  bool tripped_now = false;
  Zone zone = Zone::none;  // the latched trip zone, if any
};

/// Advance the element by one time step with the current measured impedance
/// (std::nullopt when no valid loop measurement exists, e.g. load is
/// negligible).  Each zone clock accumulates while its characteristic
/// contains the measurement and resets on dropout; the element trips the
/// lowest zone whose accumulated time has reached its delay, then latches.
inline StepDecision relay_step(RelayState& state, std::optional<Complex> z,
                               double dt_s) {
  if (!(dt_s > 0.0) || dt_s > 0.005 + 1e-12) {
    throw std::invalid_argument("step must satisfy 0 < dt <= 5 ms");
  }
  if (state.tripped != Zone::none) {
    return StepDecision{false, state.tripped};
  }
  bool in1 = false, in2 = false, in3 = false;
  if (z.has_value()) {
    in1 = mho_contains(state.settings.z1_reach, *z);
    in2 = mho_contains(state.settings.z2_reach, *z);
    in3 = mho_contains(state.settings.z3_reach, *z);
  }
  state.clock1_s = in1 ? state.clock1_s + dt_s : 0.0;
  state.clock2_s = in2 ? state.clock2_s + dt_s : 0.0;
  state.clock3_s = in3 ? state.clock3_s + dt_s : 0.0;

  if (in1 && state.clock1_s >= state.settings.t1_s) {
    state.tripped = Zone::zone1;
  } else if (in2 && state.clock2_s >= state.settings.t2_s) {
    state.tripped = Zone::zone2;
  } else if (in3 && state.clock3_s >= state.settings.t3_s) {
    state.tripped = Zone::zone3;
  }
  if (state.tripped != Zone::none) {
    return StepDecision{true, state.tripped};
  }
  return StepDecision{};
}

}  // namespace relaysim

#endif  // RELAYSIM_RELAY_HPP
