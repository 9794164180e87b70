#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "relaysim/linalg.hpp"
#include "relaysim/network.hpp"
#include "support/nodal_oracle.hpp"

using relaysim::Complex;
using relaysim::ComplexMatrix;
using relaysim::GridSource;
using relaysim::LineSection;
using relaysim::NetworkModel;
using relaysim::Phasor;
using relaysim::Sequence;

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

GridSource test_grid() {
  GridSource g;
  g.bus = "A";
  g.emf = Phasor(76210.0, 0.0);
  g.z1 = std::polar(5.0, 84.0 * kDeg);
  g.z2 = g.z1;
  g.z0 = std::polar(8.0, 82.0 * kDeg);
  return g;
}

LineSection section(const std::string& id, const std::string& from,
                    const std::string& to, double km, double z1_mag) {
  LineSection s;
  s.id = id;
  s.from_bus = from;
  s.to_bus = to;
  s.length_km = km;
  s.z1_per_km = std::polar(z1_mag, 80.0 * kDeg);
  s.z0_per_km = std::polar(z1_mag * 82.0 / 30.0, 75.0 * kDeg);
  return s;
}

/// Grid at A, protected line A->B, two remote sections B->C1 and B->C2.
NetworkModel teed_network() {
  return NetworkModel({section("ab", "A", "B", 100.0, 0.30),
                       section("bc1", "B", "C1", 20.0, 0.40),
                       section("bc2", "B", "C2", 40.0, 0.25)},
                      test_grid(), "C1", 132.0, 60.0);
}

}  // namespace

TEST_CASE("bus indexing is sorted and order-independent") {
  const NetworkModel net = teed_network();
  const std::vector<std::string> want{"A", "B", "C1", "C2"};
  CHECK(net.buses() == want);
  CHECK(net.bus_index("A") == 0);
  CHECK(net.bus_index("C2") == 3);
  CHECK_THROWS_AS(net.bus_index("nope"), std::invalid_argument);

  // Same sections listed in a different order produce the same layout.
  const NetworkModel shuffled({section("bc2", "B", "C2", 40.0, 0.25),
                               section("ab", "A", "B", 100.0, 0.30),
                               section("bc1", "B", "C1", 20.0, 0.40)},
                              test_grid(), "C1", 132.0, 60.0);
  CHECK(shuffled.buses() == want);
  CHECK(relaysim::build_sequence_matrix(shuffled, Sequence::positive) ==
        relaysim::build_sequence_matrix(net, Sequence::positive));
}

TEST_CASE("protected line and junction are derived from the grid bus") {
  const NetworkModel net = teed_network();
  CHECK(net.protected_line().id == "ab");
  CHECK(net.junction_bus() == "B");
  CHECK(net.nominal_v_ln() == Catch::Approx(132e3 / std::sqrt(3.0)));
}

TEST_CASE("model validation rejects malformed networks") {
  const GridSource g = test_grid();
  // Disconnected island.
  CHECK_THROWS_AS(NetworkModel({section("ab", "A", "B", 10.0, 0.3),
                                section("xy", "X", "Y", 10.0, 0.3)},
                               g, "B", 132.0, 60.0),
                  std::invalid_argument);
  // Two sections at the grid bus.
  CHECK_THROWS_AS(NetworkModel({section("ab", "A", "B", 10.0, 0.3),
                                section("ac", "A", "C", 10.0, 0.3)},
                               g, "B", 132.0, 60.0),
                  std::invalid_argument);
  // Section oriented into the grid bus.
  CHECK_THROWS_AS(NetworkModel({section("ba", "B", "A", 10.0, 0.3)}, g, "B",
                               132.0, 60.0),
                  std::invalid_argument);
  // Duplicate ids.
  CHECK_THROWS_AS(NetworkModel({section("ab", "A", "B", 10.0, 0.3),
                                section("ab", "B", "C", 10.0, 0.3)},
                               g, "B", 132.0, 60.0),
                  std::invalid_argument);
  // Nonpositive length.
  CHECK_THROWS_AS(NetworkModel({section("ab", "A", "B", 0.0, 0.3)}, g, "B",
                               132.0, 60.0),
                  std::invalid_argument);
  // Self loop.
  CHECK_THROWS_AS(NetworkModel({section("aa", "A", "A", 10.0, 0.3)}, g, "A",
                               132.0, 60.0),
                  std::invalid_argument);
  // Zero line impedance.
  CHECK_THROWS_AS(NetworkModel({section("ab", "A", "B", 10.0, 0.0)}, g, "B",
                               132.0, 60.0),
                  std::invalid_argument);
  // Empty network / bad scalars.
  CHECK_THROWS_AS(NetworkModel({}, g, "A", 132.0, 60.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(NetworkModel({section("ab", "A", "B", 10.0, 0.3)}, g, "B",
                               0.0, 60.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(NetworkModel({section("ab", "A", "B", 10.0, 0.3)}, g, "B",
                               132.0, -60.0),
                  std::invalid_argument);
  GridSource dead = g;
  dead.emf = Phasor(0.0, 0.0);
  CHECK_THROWS_AS(NetworkModel({section("ab", "A", "B", 10.0, 0.3)}, dead,
                               "B", 132.0, 60.0),
                  std::invalid_argument);
}

TEST_CASE("radial Thevenin impedances match hand sums") {
  const NetworkModel net = teed_network();
  const Complex zg1 = test_grid().z1;
  const Complex z_ab = section("ab", "A", "B", 100.0, 0.30).z1_total();
  const Complex z_bc1 = section("bc1", "B", "C1", 20.0, 0.40).z1_total();

  // At the grid bus the dead-end branches carry no current: Zth = Zgrid.
  const Complex at_a = relaysim::thevenin_impedance(net, "A",
                                                    Sequence::positive);
  CHECK(std::abs(at_a - zg1) < 1e-9 * std::abs(zg1));

  // Down the radial path impedances add in series.
  const Complex at_b = relaysim::thevenin_impedance(net, "B",
                                                    Sequence::positive);
  CHECK(std::abs(at_b - (zg1 + z_ab)) < 1e-9 * std::abs(zg1 + z_ab));

  const Complex at_c1 = relaysim::thevenin_impedance(net, "C1",
                                                     Sequence::positive);
  const Complex want_c1 = zg1 + z_ab + z_bc1;
  CHECK(std::abs(at_c1 - want_c1) < 1e-9 * std::abs(want_c1));

  // Zero sequence uses the zero-sequence parameters.
  const Complex zg0 = test_grid().z0;
  const Complex z_ab0 = section("ab", "A", "B", 100.0, 0.30).z0_total();
  const Complex at_b0 = relaysim::thevenin_impedance(net, "B",
                                                     Sequence::zero);
  CHECK(std::abs(at_b0 - (zg0 + z_ab0)) < 1e-9 * std::abs(zg0 + z_ab0));
}

TEST_CASE("library nodal solve agrees with the independent assembly/solver") {
  const NetworkModel base = teed_network();
  std::mt19937 gen(101);
  std::uniform_real_distribution<double> re(-100.0, 100.0);
  for (const NetworkModel& net :
       {base, relaysim::with_fault_node(base, "bc2", 16.0).net}) {
    for (Sequence seq :
         {Sequence::zero, Sequence::positive, Sequence::negative}) {
      const ComplexMatrix y = relaysim::build_sequence_matrix(net, seq);
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<Complex> rhs(net.buses().size());
        for (Complex& v : rhs) v = Complex{re(gen), re(gen)};
        const std::vector<Complex> lib = relaysim::lu_solve(y, rhs);
        const std::vector<Complex> ora = oracle::solve(net, seq, rhs);
        double scale = 0.0;
        for (const Complex& v : ora) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < lib.size(); ++i) {
          CHECK(std::abs(lib[i] - ora[i]) < 1e-10 * std::max(1.0, scale));
        }
      }
    }
  }
}

TEST_CASE("dense complex LU matches Eigen on random systems") {
  std::mt19937 gen(211);
  std::uniform_real_distribution<double> re(-10.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 7;
    ComplexMatrix m(n);
    Eigen::MatrixXcd em(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const Complex v{re(gen), re(gen)};
        m(i, j) = v;
        em(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      }
    }
    std::vector<Complex> rhs(n);
    Eigen::VectorXcd b(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] = Complex{re(gen), re(gen)};
      b(static_cast<Eigen::Index>(i)) = rhs[i];
    }
    const std::vector<Complex> got = relaysim::lu_solve(m, rhs);
    const Eigen::VectorXcd want = em.fullPivLu().solve(b);
    double scale = want.cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(got[i] - want(static_cast<Eigen::Index>(i))) <
            1e-9 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("singular systems are reported, not silently solved") {
  ComplexMatrix m(2);
  m(0, 0) = Complex{1.0, 1.0};
  m(0, 1) = Complex{2.0, 2.0};
  m(1, 0) = Complex{2.0, 2.0};
  m(1, 1) = Complex{4.0, 4.0};
  CHECK_THROWS_AS(relaysim::lu_solve(m, {Complex{1, 0}, Complex{0, 0}}),
                  relaysim::SingularNetwork);
}

TEST_CASE("shortest remote section selection and tie-breaking") {
  const NetworkModel net = teed_network();
  const auto [id, z] = relaysim::min_remote_line_z1(net, "B");
  CHECK(id == "bc1");  // |20*0.40| = 8 < |40*0.25| = 10
  CHECK(std::abs(z - section("bc1", "B", "C1", 20.0, 0.40).z1_total()) <
        1e-12);

  // Equal magnitudes: lexicographically smaller id wins.
  const NetworkModel tie({section("ab", "A", "B", 100.0, 0.30),
                          section("r2", "B", "C2", 20.0, 0.40),
                          section("r1", "B", "C1", 20.0, 0.40)},
                         test_grid(), "C1", 132.0, 60.0);
  CHECK(relaysim::min_remote_line_z1(tie, "B").first == "r1");

  CHECK_THROWS_AS(relaysim::min_remote_line_z1(net, "C1"),
                  relaysim::NoRemoteLines);

  const std::vector<Complex> all = relaysim::remote_line_z1s(net, "B");
  REQUIRE(all.size() == 2);
  CHECK(std::abs(all[0] - section("bc1", "B", "C1", 20.0, 0.40).z1_total()) <
        1e-12);
  CHECK(std::abs(all[1] - section("bc2", "B", "C2", 40.0, 0.25).z1_total()) <
        1e-12);
}

TEST_CASE("fault node insertion splits the section and conserves impedance") {
  const NetworkModel net = teed_network();
  const auto [fnet, fbus] = relaysim::with_fault_node(net, "bc2", 16.0);
  CHECK(fbus == "__fault__");
  CHECK(fnet.lines().size() == 4);
  CHECK(fnet.has_line("bc2#1"));
  CHECK(fnet.has_line("bc2#2"));
  CHECK_FALSE(fnet.has_line("bc2"));
  const LineSection& head = fnet.line("bc2#1");
  const LineSection& tail = fnet.line("bc2#2");
  CHECK(head.from_bus == "B");
  CHECK(head.to_bus == fbus);
  CHECK(tail.from_bus == fbus);
  CHECK(tail.to_bus == "C2");
  CHECK(head.length_km == Catch::Approx(16.0));
  CHECK(tail.length_km == Catch::Approx(24.0));
  const Complex orig = net.line("bc2").z1_total();
  CHECK(std::abs(head.z1_total() + tail.z1_total() - orig) <
        1e-12 * std::abs(orig));

  // Distances at (or within 1e-9 km of) the ends reuse the terminal bus.
  CHECK(relaysim::with_fault_node(net, "bc2", 0.0).fault_bus == "B");
  CHECK(relaysim::with_fault_node(net, "bc2", 1e-10).fault_bus == "B");
  CHECK(relaysim::with_fault_node(net, "bc2", 40.0).fault_bus == "C2");
  CHECK(relaysim::with_fault_node(net, "bc2", 40.0 - 1e-10).fault_bus ==
        "C2");
  CHECK_THROWS_AS(relaysim::with_fault_node(net, "bc2", 41.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(relaysim::with_fault_node(net, "nope", 1.0),
                  std::invalid_argument);
}

TEST_CASE("line addition and removal re-validate the topology") {
  const NetworkModel net = teed_network();
  const NetworkModel more = net.with_line(section("c1d", "C1", "D", 5.0,
                                                  0.3));
  CHECK(more.lines().size() == 4);
  CHECK(more.has_bus("D"));

  const NetworkModel fewer = more.without_line("c1d");
  CHECK(fewer.lines().size() == 3);
  CHECK_FALSE(fewer.has_bus("D"));
  CHECK_THROWS_AS(net.without_line("nope"), std::invalid_argument);
  // Removing the only section to a bus on the path disconnects the network.
  CHECK_THROWS_AS(net.without_line("ab"), std::invalid_argument);
  // Adding a second section at the grid bus violates the single-relay shape.
  CHECK_THROWS_AS(net.with_line(section("ax", "A", "X", 5.0, 0.3)),
                  std::invalid_argument);
}

TEST_CASE("matrix assembly is bitwise deterministic") {
  const NetworkModel a = teed_network();
  const NetworkModel b = teed_network();
  for (Sequence seq :
       {Sequence::zero, Sequence::positive, Sequence::negative}) {
    CHECK(relaysim::build_sequence_matrix(a, seq) ==
          relaysim::build_sequence_matrix(b, seq));
  }
}
