#ifndef RELAYSIM_NETWORK_HPP
#define RELAYSIM_NETWORK_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "relaysim/errors.hpp"
#include "relaysim/linalg.hpp"
#include "relaysim/phasor.hpp"

namespace relaysim {

enum class Sequence { zero, positive, negative };

/// A series line section between two buses.  Impedances are per-km; shunt
/// admittance is neglected (short-line model).  Negative-sequence impedance
/// equals positive-sequence, as for any static series element.
struct LineSection {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double length_km = 0.0;
  Complex z1_per_km{};
  Complex z0_per_km{};

  Complex z1_total() const { return z1_per_km * length_km; }
  Complex z0_total() const { return z0_per_km * length_km; }
  Complex z_total(Sequence s) const {
    return s == Sequence::zero ? z0_total() : z1_total();
  }
};

/// Equivalent source behind an impedance, one per sequence network.
/// The EMF drives the positive-sequence network only.
struct GridSource {
  std::string bus;
  Phasor emf;  // line-to-neutral RMS volts
  Complex z1{};
  Complex z2{};
  Complex z0{};

  Complex z(Sequence s) const {
    switch (s) {
      case Sequence::zero: return z0;
      case Sequence::positive: return z1;
      case Sequence::negative: return z2;
    }
    return z1;
  }
};

/// Connected multi-terminal network: one grid source, series line sections,
/// and a designated in-feed bus where a generation source may inject current.
///
/// Bus indices are assigned by sorting bus names, so the nodal matrix layout
/// is a pure function of the set of sections, independent of listing order.
class NetworkModel {
 public:
  NetworkModel(std::vector<LineSection> lines, GridSource grid,
               std::string infeed_bus, double nominal_voltage_kv_ll,
               double frequency_hz)
      : lines_(std::move(lines)),
        grid_(std::move(grid)),
        infeed_bus_(std::move(infeed_bus)),
        nominal_voltage_kv_(nominal_voltage_kv_ll),
        frequency_hz_(frequency_hz) {
    rebuild_index();
    validate();
  }

  const std::vector<LineSection>& lines() const { return lines_; }
  const GridSource& grid() const { return grid_; }
  const std::string& infeed_bus() const { return infeed_bus_; }
  double nominal_voltage_kv() const { return nominal_voltage_kv_; }
  double frequency_hz() const { return frequency_hz_; }

  /// Nominal line-to-neutral voltage in volts.
  double nominal_v_ln() const {
    return nominal_voltage_kv_ * 1e3 / std::sqrt(3.0);
  }

  const std::vector<std::string>& buses() const { return buses_; }

  std::size_t bus_index(const std::string& name) const {
    auto it = bus_index_.find(name);
    if (it == bus_index_.end()) {
      throw std::invalid_argument("unknown bus: " + name);
    }
    return it->second;
  }

  bool has_bus(const std::string& name) const {
    return bus_index_.count(name) != 0;
  }

  const LineSection& line(const std::string& id) const {
    for (const LineSection& s : lines_) {
      if (s.id == id) return s;
    }
    throw std::invalid_argument("unknown line: " + id);
  }

  bool has_line(const std::string& id) const {
    return std::any_of(lines_.begin(), lines_.end(),
                       [&](const LineSection& s) { return s.id == id; });
  }

  /// The single section leaving the grid bus; the relay under study sits at
  /// its sending end.
  const LineSection& protected_line() const {
    return line(protected_line_id_);
  }

  /// Receiving end of the protected line: where remote lines branch off.
  const std::string& junction_bus() const {
    return protected_line().to_bus;
  }

  NetworkModel with_line(LineSection extra) const {
    std::vector<LineSection> ls = lines_;
    ls.push_back(std::move(extra));
    return NetworkModel(std::move(ls), grid_, infeed_bus_,
                        nominal_voltage_kv_, frequency_hz_);
  }

  NetworkModel without_line(const std::string& id) const {
    std::vector<LineSection> ls;
    ls.reserve(lines_.size());
    bool found = false;
    for (const LineSection& s : lines_) {
      if (s.id == id) {
        found = true;
      } else {
        ls.push_back(s);
      }
    }
    if (!found) throw std::invalid_argument("unknown line: " + id);
    return NetworkModel(std::move(ls), grid_, infeed_bus_,
                        nominal_voltage_kv_, frequency_hz_);
  }

 private:
  void rebuild_index() {
    std::set<std::string> names;
    for (const LineSection& s : lines_) {
      names.insert(s.from_bus);
      names.insert(s.to_bus);
    }
    names.insert(grid_.bus);
    names.insert(infeed_bus_);
    buses_.assign(names.begin(), names.end());
    bus_index_.clear();
    for (std::size_t i = 0; i < buses_.size(); ++i) bus_index_[buses_[i]] = i;
  }

  void validate() {
    if (lines_.empty()) throw std::invalid_argument("network has no lines");
    if (!(nominal_voltage_kv_ > 0.0)) {
      throw std::invalid_argument("nominal voltage must be positive");
    }
    if (!(frequency_hz_ > 0.0)) {
      throw std::invalid_argument("frequency must be positive");
    }
    if (!(grid_.emf.magnitude() > 0.0)) {
      throw std::invalid_argument("grid source EMF must be nonzero");
    }
    std::set<std::string> ids;
    for (const LineSection& s : lines_) {
      if (!ids.insert(s.id).second) {
        throw std::invalid_argument("duplicate line id: " + s.id);
      }
      if (!(s.length_km > 0.0)) {
        throw std::invalid_argument("line " + s.id +
                                    ": length must be positive");
      }
      if (s.from_bus == s.to_bus) {
        throw std::invalid_argument("line " + s.id + ": loops onto one bus");
      }
      if (std::abs(s.z1_per_km) == 0.0 || std::abs(s.z0_per_km) == 0.0) {
        throw std::invalid_argument("line " + s.id +
                                    ": impedance must be nonzero");
      }
    }
    // Connectivity: every bus reachable from the grid bus over line sections.
    std::set<std::string> seen{grid_.bus};
    bool grew = true;
    while (grew) {
      grew = false;
      for (const LineSection& s : lines_) {
        const bool f = seen.count(s.from_bus), t = seen.count(s.to_bus);
        if (f != t) {
          seen.insert(f ? s.to_bus : s.from_bus);
          grew = true;
        }
      }
    }
    if (seen.size() != buses_.size()) {
      throw std::invalid_argument("network is not connected");
    }
    // Exactly one section leaves the grid bus, oriented away from it; that is
    // the protected line the relay looks down.
    protected_line_id_.clear();
    for (const LineSection& s : lines_) {
      if (s.from_bus == grid_.bus || s.to_bus == grid_.bus) {
        if (!protected_line_id_.empty()) {
          throw std::invalid_argument(
              "exactly one line may connect to the grid bus");
        }
        if (s.from_bus != grid_.bus) {
          throw std::invalid_argument(
              "the protected line must be oriented from the grid bus");
        }
        protected_line_id_ = s.id;
      }
    }
    if (protected_line_id_.empty()) {
      throw std::invalid_argument("no line connects to the grid bus");
    }
  }

  std::vector<LineSection> lines_;
  GridSource grid_;
  std::string infeed_bus_;
  double nominal_voltage_kv_ = 0.0;
  double frequency_hz_ = 0.0;
  std::vector<std::string> buses_;
  std::map<std::string, std::size_t> bus_index_;
  std::string protected_line_id_;
};

/// Nodal admittance matrix for the requested sequence network.  Line sections
/// contribute the usual -y off-diagonal / +y diagonal stamps; the grid source
/// contributes its shunt admittance 1/z at its bus.  The EMF itself enters as
/// a current injection when solving, not here.
inline ComplexMatrix build_sequence_matrix(const NetworkModel& model,
                                           Sequence seq) {
  const std::size_t n = model.buses().size();
  ComplexMatrix y(n);
  for (const LineSection& s : model.lines()) {
    const Complex z = s.z_total(seq);
    if (std::abs(z) == 0.0) {
      throw SingularNetwork("line " + s.id + " has zero impedance");
    }
    const Complex adm = 1.0 / z;
    const std::size_t i = model.bus_index(s.from_bus);
    const std::size_t j = model.bus_index(s.to_bus);
    y(i, i) += adm;
    y(j, j) += adm;
    y(i, j) -= adm;
    y(j, i) -= adm;
  }
  const Complex zg = model.grid().z(seq);
  if (std::abs(zg) == 0.0) {
    throw SingularNetwork("grid source has zero impedance");
  }
  y(model.bus_index(model.grid().bus), model.bus_index(model.grid().bus)) +=
      1.0 / zg;
  return y;
}

/// Driving-point impedance seen from `bus` in the given sequence network:
/// inject 1 A, read the voltage at the same bus.
inline Complex thevenin_impedance(const NetworkModel& model,
                                  const std::string& bus, Sequence seq) {
  const ComplexMatrix y = build_sequence_matrix(model, seq);
  std::vector<Complex> rhs(model.buses().size(), Complex{});
  rhs[model.bus_index(bus)] = Complex{1.0, 0.0};
  return lu_solve(y, rhs)[model.bus_index(bus)];
}

/// Smallest positive-sequence line impedance among the sections leaving
/// `junction`, by magnitude; ties break toward the lexicographically smaller
/// section id.  Returns (section id, total Z1).
inline std::pair<std::string, Complex> min_remote_line_z1(
    const NetworkModel& model, const std::string& junction) {
  const LineSection* best = nullptr;
  double best_mag = 0.0;
  for (const LineSection& s : model.lines()) {
    if (s.from_bus != junction) continue;
    const double mag = std::abs(s.z1_total());
    if (best == nullptr || mag < best_mag ||
        (mag == best_mag && s.id < best->id)) {
      best = &s;
      best_mag = mag;
    }
  }
  if (best == nullptr) {
    throw NoRemoteLines("no line sections leave bus " + junction);
  }
  return {best->id, best->z1_total()};
}

/// All positive-sequence total impedances of sections leaving `junction`,
/// in section-id order (deterministic).
inline std::vector<Complex> remote_line_z1s(const NetworkModel& model,
                                            const std::string& junction) {
  std::vector<const LineSection*> outgoing;
  for (const LineSection& s : model.lines()) {
    if (s.from_bus == junction) outgoing.push_back(&s);
  }
  std::sort(outgoing.begin(), outgoing.end(),
            [](const LineSection* a, const LineSection* b) {
              return a->id < b->id;
            });
  std::vector<Complex> zs;
  zs.reserve(outgoing.size());
  for (const LineSection* s : outgoing) zs.push_back(s->z1_total());
  return zs;
}

/// Result of grafting a fault node into a network.
struct FaultedNetwork {
  NetworkModel net;
  std::string fault_bus;
};

/// Insert a node at `distance_km` down line `line_id`.  Distances within
/// 1e-9 km of either end snap to the existing terminal bus instead of
/// creating a zero-length stub.
inline FaultedNetwork with_fault_node(const NetworkModel& model,
                                      const std::string& line_id,
                                      double distance_km) {
  const LineSection& target = model.line(line_id);
  if (distance_km < -1e-9 || distance_km > target.length_km + 1e-9) {
    throw std::invalid_argument("fault distance outside line " + line_id);
  }
  const double snap = 1e-9;
  if (distance_km <= snap) {
    return FaultedNetwork{model, target.from_bus};
  }
  if (distance_km >= target.length_km - snap) {
    return FaultedNetwork{model, target.to_bus};
  }
  std::string fault_bus = "__fault__";
  while (model.has_bus(fault_bus)) fault_bus += "_";

  std::vector<LineSection> lines;
  lines.reserve(model.lines().size() + 1);
  for (const LineSection& s : model.lines()) {
    if (s.id != line_id) {
      lines.push_back(s);
      continue;
    }
    LineSection head = s;
    head.id = s.id + "#1";
    head.to_bus = fault_bus;
    head.length_km = distance_km;
    LineSection tail = s;
    tail.id = s.id + "#2";
    tail.from_bus = fault_bus;
    tail.length_km = s.length_km - distance_km;
    lines.push_back(std::move(head));
    lines.push_back(std::move(tail));
  }
  return FaultedNetwork{
      NetworkModel(std::move(lines), model.grid(), model.infeed_bus(),
                   model.nominal_voltage_kv(), model.frequency_hz()),
      fault_bus};
}

}  // namespace relaysim

#endif  // RELAYSIM_NETWORK_HPP
