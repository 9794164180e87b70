#ifndef RELAYSIM_TESTS_NODAL_ORACLE_HPP
#define RELAYSIM_TESTS_NODAL_ORACLE_HPP

// Brute-force nodal oracle used only by tests.  It assembles the sequence
// admittance matrix with its own element loop (independent of the library's
// stamp code) and solves with Eigen's full-pivot LU (independent of the
// library's solver), so an agreement between both routes checks assembly and
// factorization at once.

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "relaysim/network.hpp"

namespace oracle {

using relaysim::Complex;
using relaysim::NetworkModel;
using relaysim::Sequence;

inline Eigen::MatrixXcd assemble(const NetworkModel& net, Sequence seq) {
  const std::vector<std::string>& buses = net.buses();
  const auto n = static_cast<Eigen::Index>(buses.size());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  // Element loop: for every ordered bus pair, add the admittance of each
  // section joining them (deliberately quadratic and index-free).
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      for (const relaysim::LineSection& s : net.lines()) {
        const bool joins =
            (s.from_bus == buses[static_cast<std::size_t>(i)] &&
             s.to_bus == buses[static_cast<std::size_t>(j)]) ||
            (s.to_bus == buses[static_cast<std::size_t>(i)] &&
             s.from_bus == buses[static_cast<std::size_t>(j)]);
        if (!joins) continue;
        const Complex adm = 1.0 / s.z_total(seq);
        y(i, j) -= adm;
        y(i, i) += adm;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (buses[static_cast<std::size_t>(i)] == net.grid().bus) {
      y(i, i) += 1.0 / net.grid().z(seq);
    }
  }
  return y;
}

inline std::vector<Complex> solve(const NetworkModel& net, Sequence seq,
                                  const std::vector<Complex>& rhs) {
  const Eigen::MatrixXcd y = assemble(net, seq);
  Eigen::VectorXcd b(y.rows());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    b(i) = rhs[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXcd x = y.fullPivLu().solve(b);
  std::vector<Complex> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[static_cast<std::size_t>(i)] = x(i);
  }
  return out;
}

}  // namespace oracle

#endif  // RELAYSIM_TESTS_NODAL_ORACLE_HPP
