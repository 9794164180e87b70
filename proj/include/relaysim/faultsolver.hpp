#ifndef RELAYSIM_FAULTSOLVER_HPP
#define RELAYSIM_FAULTSOLVER_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "relaysim/errors.hpp"
#include "relaysim/linalg.hpp"
#include "relaysim/network.hpp"
#include "relaysim/phasor.hpp"
#include "relaysim/windfarm.hpp"

namespace relaysim {

enum class FaultType { slg_a, three_phase };

/// A shunt fault placed along a line section.
struct FaultScenario {
  FaultType type = FaultType::slg_a;
  std::string line;
  double distance_km = 0.0;    // from the section's from-bus
  double resistance_ohm = 0.0; // per-phase fault resistance
};

/// What the relay at the grid bus measures.
struct RelayMeasurement {
  ThreePhaseSet v_abc;
  ThreePhaseSet i_abc;
  Phasor i_residual;  // ia + ib + ic
};

/// Complete solved operating point from the relay's perspective.
struct FaultSolution {
  RelayMeasurement relay;
  Phasor i_remote;      // in-feed current injected behind the fault
  Phasor i_relay_loop;  // ground-compensated relay loop current
  Complex z_apparent{};
  Complex k_remote{};   // 1 + i_remote / i_relay_loop
  int iterations = 0;   // in-feed fixed-point passes (0 for the reduced model)
};

/// Residual compensation factor of a line: k0 = (Z0 - Z1) / (3 Z1).
inline Complex residual_comp_factor(const LineSection& line) {
  const Complex z1 = line.z1_total();
  return (line.z0_total() - z1) / (3.0 * z1);
}

/// Ground-loop apparent impedance Va / (Ia + k0 * Ires).
inline Complex apparent_impedance(const RelayMeasurement& m, Complex k0) {
  const Complex loop =
      m.i_abc.a.as_complex() + k0 * m.i_residual.as_complex();
  const double scale = std::max(1.0, m.i_abc.a.magnitude());
  if (std::abs(loop) < 1e-12 * scale) {
    throw ZeroLoopCurrent("compensated loop current is zero");
  }
  return m.v_abc.a.as_complex() / loop;
}

/// Single-loop fault model: a source e_a behind z_src drives the relay branch
/// impedance z_a, then the faulted stretch z_f, into fault resistance r.
/// A remote source feeds i_remote directly into the fault point, so the
/// voltage-loop equation reads
///
///   e_a = (z_src + z_a + z_f + r) * i_relay + (z_f + r) * i_remote
///
/// which yields the classic over-reach result: the relay sees
/// z_apparent = z_a + (z_f + r) * (1 + i_remote / i_relay).
inline FaultSolution solve_reduced(Complex z_a, Complex z_f, Phasor e_a,
                                   Phasor i_remote, double r_fault,
                                   Complex z_src = Complex{}) {
  const Complex series = z_src + z_a + z_f + r_fault;
  const double scale =
      std::max(1.0, std::abs(z_src) + std::abs(z_a) + std::abs(z_f) +
                        std::abs(r_fault));
  if (std::abs(series) < 1e-12 * scale) {
    throw DegenerateLoop("loop impedance vanishes");
  }
  const Complex irem = i_remote.as_complex();
  const Complex irel =
      (e_a.as_complex() - (z_f + r_fault) * irem) / series;
  if (std::abs(irel) == 0.0) {
    throw ZeroRelayCurrent("reduced loop carries no relay current");
  }
  const Complex v_relay = e_a.as_complex() - z_src * irel;

  FaultSolution out;
  // The loop model is single-phase; render it as a balanced positive-sequence
  // set so downstream consumers see an ordinary measurement (zero residual).
  const Phasor va = Phasor::from_complex(v_relay);
  const Phasor ia = Phasor::from_complex(irel);
  out.relay.v_abc = from_sequence(SequenceSet{Phasor{}, va, Phasor{}});
  out.relay.i_abc = from_sequence(SequenceSet{Phasor{}, ia, Phasor{}});
  out.relay.i_residual = out.relay.i_abc.a + out.relay.i_abc.b +
                         out.relay.i_abc.c;
  out.i_remote = i_remote;
  out.i_relay_loop = ia;
  out.z_apparent = v_relay / irel;
  out.k_remote = 1.0 + irem / irel;
  out.iterations = 0;
  return out;
}

/// Iteration controls for the full solver.
struct SolveOptions {
  double tol = 1e-9;        // relative in-feed current tolerance
  int max_iterations = 100; // fixed-point cap before NoConvergence
};

/// Everything the full solver knows at convergence, for independent
/// cross-checking: final per-sequence bus voltages and the exact injection
/// vectors they solve against.
struct FullSolveDetail {
  FaultSolution solution;
  std::vector<std::string> buses;  // faulted-network bus order
  std::vector<Complex> v0, v1, v2;
  std::vector<Complex> rhs0, rhs1, rhs2;
  std::vector<LineSection> sections;  // faulted-network line sections
  std::string fault_bus;
  std::string relay_section;
  Complex i_fault_seq{};  // sequence-domain fault current injection
};

namespace detail {

inline std::vector<Complex> add_scaled(std::vector<Complex> base,
                                       std::size_t at, Complex value) {
  base[at] += value;
  return base;
}

}  // namespace detail

/// Full phasor-domain solve: graft a fault node into the network, connect the
/// sequence networks per fault type, and iterate the wind in-feed current to
/// a fixed point.  Voltages are line-to-neutral RMS phasors.
inline FullSolveDetail solve_fault_detailed(
    const NetworkModel& model, const WindFarm& farm, const WindState& wind,
    const FaultScenario& scenario, const SolveOptions& options = {}) {
  if (scenario.resistance_ohm < 0.0) {
    throw std::invalid_argument("fault resistance must be >= 0");
  }
  if (!model.has_line(scenario.line)) {
    throw std::invalid_argument("unknown faulted line: " + scenario.line);
  }
  if (farm.connection_bus != model.infeed_bus()) {
    throw std::invalid_argument("farm bus differs from network in-feed bus");
  }

  const FaultedNetwork faulted =
      with_fault_node(model, scenario.line, scenario.distance_km);
  const NetworkModel& net = faulted.net;
  const std::size_t n = net.buses().size();
  const std::size_t i_grid = net.bus_index(net.grid().bus);
  const std::size_t i_farm = net.bus_index(net.infeed_bus());
  const std::size_t i_fault = net.bus_index(faulted.fault_bus);

  const LuDecomposition lu1(build_sequence_matrix(net, Sequence::positive));
  const LuDecomposition lu2(build_sequence_matrix(net, Sequence::negative));
  const LuDecomposition lu0(build_sequence_matrix(net, Sequence::zero));

  // Thevenin impedances at the fault node, one per sequence.
  std::vector<Complex> unit(n, Complex{});
  unit[i_fault] = Complex{1.0, 0.0};
  const std::vector<Complex> col1 = lu1.solve(unit);
  const std::vector<Complex> col2 = lu2.solve(unit);
  const std::vector<Complex> col0 = lu0.solve(unit);
  const Complex zth1 = col1[i_fault];
  const Complex zth2 = col2[i_fault];
  const Complex zth0 = col0[i_fault];

  // Grid EMF enters the positive-sequence network as a Norton injection.
  const Complex emf_inj = net.grid().emf.as_complex() / net.grid().z1;
  std::vector<Complex> rhs_base(n, Complex{});
  rhs_base[i_grid] = emf_inj;

  const double rated = farm.rated_current();
  const double i_tol_scale = std::max(1.0, rated);
  const double p_mw = power_output(farm, wind);

  // --- pre-fault operating point (healthy network, wind injecting) ---------
  Complex i_pre{};
  std::vector<Complex> v_pre = lu1.solve(rhs_base);
  if (p_mw > 0.0) {
    bool settled = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      const Phasor v_farm = Phasor::from_complex(v_pre[i_farm]);
      const Complex i_next = prefault_current(farm, wind, v_farm).as_complex();
      if (std::abs(i_next - i_pre) <= options.tol * i_tol_scale) {
        settled = true;
        break;
      }
      i_pre = i_next;
      v_pre = lu1.solve(detail::add_scaled(rhs_base, i_farm, i_pre));
    }
    if (!settled) {
      throw NoConvergence("pre-fault in-feed iteration did not settle");
    }
  }
  const double pre_angle = std::arg(v_pre[i_farm]);

  // --- during-fault fixed point on the in-feed current ---------------------
  const bool slg = scenario.type == FaultType::slg_a;
  const Complex den = slg ? zth1 + zth2 + zth0 + 3.0 * scenario.resistance_ohm
                          : zth1 + scenario.resistance_ohm;

  Complex i_wf =
      fault_current(farm, wind, Phasor::from_complex(v_pre[i_farm]), pre_angle)
          .as_complex();
  std::vector<Complex> rhs1, v1_full;
  Complex i_seq{};
  bool converged = false;
  int iterations = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    ++iterations;
    rhs1 = detail::add_scaled(rhs_base, i_farm, i_wf);
    const std::vector<Complex> v_nf = lu1.solve(rhs1);
    i_seq = v_nf[i_fault] / den;
    v1_full.assign(n, Complex{});
    for (std::size_t b = 0; b < n; ++b) {
      v1_full[b] = v_nf[b] - i_seq * col1[b];
    }
    const Complex i_next =
        fault_current(farm, wind, Phasor::from_complex(v1_full[i_farm]),
                      pre_angle)
            .as_complex();
    if (std::abs(i_next - i_wf) <= options.tol * i_tol_scale) {
      converged = true;
      break;
    }
    i_wf = i_next;
  }
  if (!converged) {
    throw NoConvergence("in-feed fixed point did not settle");
  }

  FullSolveDetail d;
  d.buses = net.buses();
  d.sections = net.lines();
  d.fault_bus = faulted.fault_bus;
  d.relay_section = net.protected_line().id;
  d.i_fault_seq = i_seq;

  // Final consistent injections and voltages for every sequence network.
  d.rhs1 = detail::add_scaled(std::move(rhs1), i_fault, -i_seq);
  d.v1 = std::move(v1_full);
  d.rhs2.assign(n, Complex{});
  d.rhs0.assign(n, Complex{});
  d.v2.assign(n, Complex{});
  d.v0.assign(n, Complex{});
  if (slg) {
    d.rhs2[i_fault] = -i_seq;
    d.rhs0[i_fault] = -i_seq;
    for (std::size_t b = 0; b < n; ++b) {
      d.v2[b] = -i_seq * col2[b];
      d.v0[b] = -i_seq * col0[b];
    }
  }

  // --- relay quantities -----------------------------------------------------
  const LineSection& sect = net.protected_line();
  const std::size_t u = net.bus_index(sect.from_bus);
  const std::size_t v = net.bus_index(sect.to_bus);
  const Complex i1 = (d.v1[u] - d.v1[v]) / sect.z_total(Sequence::positive);
  const Complex i2 = (d.v2[u] - d.v2[v]) / sect.z_total(Sequence::negative);
  const Complex i0 = (d.v0[u] - d.v0[v]) / sect.z_total(Sequence::zero);

  FaultSolution& sol = d.solution;
  sol.relay.v_abc = from_sequence(SequenceSet{
      Phasor::from_complex(d.v0[u]), Phasor::from_complex(d.v1[u]),
      Phasor::from_complex(d.v2[u])});
  sol.relay.i_abc = from_sequence(SequenceSet{Phasor::from_complex(i0),
                                              Phasor::from_complex(i1),
                                              Phasor::from_complex(i2)});
  sol.relay.i_residual =
      sol.relay.i_abc.a + sol.relay.i_abc.b + sol.relay.i_abc.c;

  const Complex k0 = residual_comp_factor(model.protected_line());
  const Complex loop = sol.relay.i_abc.a.as_complex() +
                       k0 * sol.relay.i_residual.as_complex();
  sol.i_remote = Phasor::from_complex(i_wf);
  sol.i_relay_loop = Phasor::from_complex(loop);
  sol.z_apparent = apparent_impedance(sol.relay, k0);
  sol.k_remote = 1.0 + i_wf / loop;
  sol.iterations = iterations;
  return d;
}

inline FaultSolution solve_fault(const NetworkModel& model,
                                 const WindFarm& farm, const WindState& wind,
                                 const FaultScenario& scenario,
                                 const SolveOptions& options = {}) {
  return solve_fault_detailed(model, farm, wind, scenario, options).solution;
}

}  // namespace relaysim

#endif  // RELAYSIM_FAULTSOLVER_HPP
