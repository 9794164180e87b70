#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "relaysim/adaptive.hpp"
#include "relaysim/scenario.hpp"

using relaysim::AdaptiveBranch;
using relaysim::AdaptiveInput;
using relaysim::AdaptiveScheme;
using relaysim::AdaptiveUpdate;
using relaysim::Complex;
using relaysim::Dataset;
using relaysim::FaultScenario;
using relaysim::FaultSolution;
using relaysim::FaultType;
using relaysim::KMode;
using relaysim::MlpModel;
using relaysim::NetworkModel;
using relaysim::Phasor;
using relaysim::ScenarioConfig;
using relaysim::SolverMode;
using relaysim::SpeedPoint;
using relaysim::WindState;
using relaysim::ZoneSettings;
using Catch::Approx;

namespace {

const ScenarioConfig& default_config() {
  static const ScenarioConfig cfg = relaysim::make_default_config();
  return cfg;
}

}  // namespace

TEST_CASE("static settings derive from the network as expected") {
  const ScenarioConfig& cfg = default_config();
  const ZoneSettings s = cfg.static_settings();
  // Protected line 30 ohm at 80 deg; shortest remote 8 ohm (20 km x 0.40).
  CHECK(std::abs(s.z1_reach) == Approx(25.5).epsilon(1e-12));
  CHECK(std::abs(s.z2_reach) == Approx(34.0).epsilon(1e-12));
  CHECK(std::abs(s.z3_reach) == Approx(36.4).epsilon(1e-12));
  CHECK(std::arg(s.z2_reach) == Approx(80.0 * 3.14159265358979323846 / 180.0));
  CHECK(s.t1_s == 0.0);
  CHECK(s.t2_s == 0.3);
  CHECK(s.t3_s == 1.0);
  // k0 from the protected line's own constants.
  const Complex want_k0 =
      relaysim::residual_comp_factor(cfg.network.protected_line());
  CHECK(std::abs(s.k0 - want_k0) < 1e-15);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("reduced scenario solving collapses onto the single loop") {
  const ScenarioConfig& cfg = default_config();
  const WindState calm{0.0, {}};

  // With the farm idle the loop is purely series: z = z_a + z_f + r.
  const FaultSolution on_line = relaysim::solve_scenario(
      cfg.network, cfg.farm, calm, {FaultType::slg_a, "AB", 50.0, 0.0},
      SolverMode::reduced);
  const Complex want_on =
      cfg.network.line("AB").z1_per_km * 50.0;
  CHECK(std::abs(on_line.z_apparent - want_on) < 1e-9 * std::abs(want_on));

  const FaultSolution beyond = relaysim::solve_scenario(
      cfg.network, cfg.farm, calm, {FaultType::slg_a, "BC2", 16.0, 2.0},
      SolverMode::reduced);
  const Complex want_beyond = cfg.network.line("AB").z1_total() +
                              cfg.network.line("BC2").z1_per_km * 16.0 + 2.0;
  CHECK(std::abs(beyond.z_apparent - want_beyond) <
        1e-9 * std::abs(want_beyond));

  // With wind, the in-feed inflates only the post-junction stretch.
  const WindState rated{12.0, {}};
  const FaultSolution windy = relaysim::solve_scenario(
      cfg.network, cfg.farm, rated, {FaultType::slg_a, "BC2", 16.0, 0.0},
      SolverMode::reduced);
  CHECK(std::abs(windy.k_remote) > 1.0);
  CHECK(std::abs(windy.z_apparent) > std::abs(beyond.z_apparent - 2.0));
  // In-feed magnitude is the converter's limited current at nominal voltage.
  const double wanted = relaysim::power_output(cfg.farm, rated) * 1e6 /
                        (3.0 * cfg.farm.nominal_v_ln);
  CHECK(windy.i_remote.magnitude() ==
        Approx(std::min(wanted, 1.2 * cfg.farm.rated_current()))
            .epsilon(1e-12));

  // The reduced geometry covers exactly two shapes.
  CHECK_THROWS_AS(
      relaysim::solve_scenario(cfg.network, cfg.farm, calm,
                               {FaultType::slg_a, "AB", 101.0, 0.0},
                               SolverMode::reduced),
      std::invalid_argument);
  CHECK_THROWS_AS(
      relaysim::solve_scenario(cfg.network, cfg.farm, calm,
                               {FaultType::slg_a, "AB", 10.0, -0.5},
                               SolverMode::reduced),
      std::invalid_argument);
}

TEST_CASE("full scenario solving delegates to the network solver") {
  const ScenarioConfig& cfg = default_config();
  const WindState rated{12.0, {}};
  const FaultScenario fs{FaultType::slg_a, "BC2", 16.0, 0.0};
  const FaultSolution via_scenario = relaysim::solve_scenario(
      cfg.network, cfg.farm, rated, fs, SolverMode::full);
  const FaultSolution direct =
      relaysim::solve_fault(cfg.network, cfg.farm, rated, fs);
  CHECK(via_scenario.z_apparent == direct.z_apparent);
  CHECK(via_scenario.k_remote == direct.k_remote);
}

TEST_CASE("k-mode selection keeps or collapses the angle") {
  const Complex k{1.2, 0.9};
  CHECK(relaysim::apply_k_mode(k, KMode::complex_k) == k);
  const Complex scalar = relaysim::apply_k_mode(k, KMode::scalar_k);
  CHECK(scalar.imag() == 0.0);
  CHECK(scalar.real() == Approx(std::abs(k)).epsilon(1e-15));
}

TEST_CASE("speed-point solving reports the operating point") {
  const ScenarioConfig& cfg = default_config();
  const SpeedPoint pt = relaysim::solve_at_speed(
      cfg.network, cfg.farm, cfg.fault, 10.0, SolverMode::full);
  CHECK(pt.speed_mps == 10.0);
  CHECK(pt.p_mw ==
        Approx(relaysim::power_output(cfg.farm, WindState{10.0, {}})));
  CHECK(std::abs(pt.k) > 1.0);
  CHECK(pt.i_remote.magnitude() > 0.0);

  // Solver failures surface with the wind speed attached, type preserved.
  relaysim::SolveOptions strangled;
  strangled.max_iterations = 0;
  try {
    relaysim::solve_at_speed(cfg.network, cfg.farm, cfg.fault, 7.25,
                             SolverMode::full, strangled);
    FAIL("expected NoConvergence");
  } catch (const relaysim::NoConvergence& e) {
    CHECK(std::string(e.what()).find("7.25") != std::string::npos);
    CHECK(std::string(e.what()).find("wind speed") != std::string::npos);
  }
}

TEST_CASE("dataset generation tabulates the adapted reach per grid speed") {
  const ScenarioConfig& cfg = default_config();
  const std::vector<double> speeds = cfg.sweep->speeds();
  REQUIRE(speeds.size() == 43);
  const Dataset data = relaysim::generate_dataset(
      cfg.network, cfg.farm, cfg.fault, speeds, SolverMode::full,
      KMode::complex_k, 0.5);
  REQUIRE(data.size() == 43);

  const Complex z_ab = cfg.network.protected_line().z1_total();
  const std::vector<Complex> remotes =
      relaysim::remote_line_z1s(cfg.network, cfg.network.junction_bus());
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    CHECK(data.rows()[i].speed_mps == speeds[i]);  // grid order kept
    const SpeedPoint pt = relaysim::solve_at_speed(
        cfg.network, cfg.farm, cfg.fault, speeds[i], SolverMode::full);
    const Complex want = relaysim::zone2_adaptive(z_ab, remotes, pt.k, 0.5);
    CHECK(data.rows()[i].target_ohm ==
          Approx(std::abs(want)).epsilon(1e-12));
  }
  // Below cut-in the farm is dark, so the target equals the static reach.
  CHECK(data.rows()[0].target_ohm == Approx(34.0).epsilon(1e-9));
  // At rated wind the in-feed pushes the reach outward.
  CHECK(data.rows()[16].target_ohm > 34.0);
}

TEST_CASE("offline farm always yields the static settings exactly") {
  const ScenarioConfig& cfg = default_config();
  const ZoneSettings stat = cfg.static_settings();
  const AdaptiveScheme scheme(cfg.network, stat, cfg.farm);
  const AdaptiveUpdate u = scheme.update(AdaptiveInput{false, {}, {}, {}});
  CHECK(u.branch == AdaptiveBranch::offline_static);
  CHECK_FALSE(u.fallback);
  CHECK(u.settings.z2_reach == stat.z2_reach);  // bitwise, not approximate
  CHECK(u.settings.z1_reach == stat.z1_reach);
  CHECK(u.settings.z3_reach == stat.z3_reach);
}

TEST_CASE("telemetry branch applies the live in-feed factor") {
  const ScenarioConfig& cfg = default_config();
  const ZoneSettings stat = cfg.static_settings();
  const AdaptiveScheme scheme(cfg.network, stat, cfg.farm);

  const Phasor irem(50.0, 0.1), irel(100.0, 0.0);
  const AdaptiveUpdate u = scheme.update(
      AdaptiveInput{true, irem, irel, std::nullopt});
  CHECK(u.branch == AdaptiveBranch::telemetry);
  const Complex k = relaysim::infeed_factor(irem, irel);
  const Complex z_ab = cfg.network.protected_line().z1_total();
  const std::vector<Complex> remotes =
      relaysim::remote_line_z1s(cfg.network, cfg.network.junction_bus());
  CHECK(std::abs(u.settings.z2_reach -
                 relaysim::zone2_adaptive(z_ab, remotes, k)) < 1e-12);
  // Zones 1 and 3 are never touched by the update.
  CHECK(u.settings.z1_reach == stat.z1_reach);
  CHECK(u.settings.z3_reach == stat.z3_reach);

  // Untrusted in-feed factors force the static reach and raise the flag.
  const AdaptiveUpdate bad = scheme.update(
      AdaptiveInput{true, Phasor(2500.0, 0.0), irel, std::nullopt});
  CHECK(bad.branch == AdaptiveBranch::fallback_static);
  CHECK(bad.fallback);
  CHECK(bad.settings.z2_reach == stat.z2_reach);

  // Telemetry wins over a simultaneously supplied wind speed.
  const AdaptiveUpdate both = scheme.update(
      AdaptiveInput{true, irem, irel, 12.0});
  CHECK(both.branch == AdaptiveBranch::telemetry);
}

TEST_CASE("speed branch consults the regressor inside the producing band") {
  const ScenarioConfig& cfg = default_config();
  const ZoneSettings stat = cfg.static_settings();
  AdaptiveScheme scheme(cfg.network, stat, cfg.farm);

  // Outside [cut-in, cut-out) the static settings apply without a model.
  for (double v : {0.0, 3.9, 25.0, 29.0}) {
    const AdaptiveUpdate u = scheme.update(
        AdaptiveInput{true, std::nullopt, std::nullopt, v});
    CHECK(u.branch == AdaptiveBranch::speed_bypass);
    CHECK(u.settings.z2_reach == stat.z2_reach);
  }

  // Inside the band a model is mandatory.
  CHECK_THROWS_AS(
      scheme.update(AdaptiveInput{true, std::nullopt, std::nullopt, 12.0}),
      relaysim::InputError);

  // With a model, the reach magnitude is the regression output and the angle
  // stays on the static characteristic.
  MlpModel m = MlpModel::zeros(3);
  m.output_norm.mean = 35.2;  // constant-output network
  scheme.set_model(m);
  const AdaptiveUpdate u = scheme.update(
      AdaptiveInput{true, std::nullopt, std::nullopt, 12.0});
  CHECK(u.branch == AdaptiveBranch::mlp);
  CHECK(std::abs(u.settings.z2_reach) == Approx(35.2).epsilon(1e-12));
  CHECK(std::arg(u.settings.z2_reach) ==
        Approx(std::arg(stat.z2_reach)).epsilon(1e-12));

  // A regressor output that breaks zone nesting is a hard error.
  MlpModel wild = MlpModel::zeros(3);
  wild.output_norm.mean = 80.0;  // beyond zone 3
  scheme.set_model(wild);
  CHECK_THROWS_AS(
      scheme.update(AdaptiveInput{true, std::nullopt, std::nullopt, 12.0}),
      relaysim::NestingViolation);
  MlpModel timid = MlpModel::zeros(3);
  timid.output_norm.mean = 10.0;  // under zone 1
  scheme.set_model(timid);
  CHECK_THROWS_AS(
      scheme.update(AdaptiveInput{true, std::nullopt, std::nullopt, 12.0}),
      relaysim::NestingViolation);

  // No evidence at all is a caller error.
  CHECK_THROWS_AS(
      scheme.update(AdaptiveInput{true, std::nullopt, std::nullopt,
                                  std::nullopt}),
      std::invalid_argument);
}

TEST_CASE("trained regressor tracks the solver-derived reach within 2%") {
  const ScenarioConfig& cfg = default_config();
  const std::vector<double> speeds = cfg.sweep->speeds();
  const Dataset data = relaysim::generate_dataset(
      cfg.network, cfg.farm, cfg.fault, speeds);
  relaysim::TrainingConfig tcfg;
  tcfg.max_epochs = 2000;
  const auto [model, report] = relaysim::train(data, tcfg);

  const ZoneSettings stat = cfg.static_settings();
  AdaptiveScheme scheme(cfg.network, stat, cfg.farm);
  scheme.set_model(model);
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    const AdaptiveUpdate u = scheme.update(
        AdaptiveInput{true, std::nullopt, std::nullopt, speeds[i]});
    if (u.branch == AdaptiveBranch::speed_bypass) {
      // Only at or beyond cut-out, where the static reach is the answer.
      CHECK(speeds[i] >= cfg.farm.cut_out_mps);
      CHECK(u.settings.z2_reach == stat.z2_reach);
      continue;
    }
    REQUIRE(u.branch == AdaptiveBranch::mlp);
    CHECK(std::abs(std::abs(u.settings.z2_reach) - data.rows()[i].target_ohm)
          < 0.02 * data.rows()[i].target_ohm);
  }

  // Free-function form forwards settings and the fallback flag.
  bool flag = true;
  const ZoneSettings via_free = relaysim::adaptive_update(
      scheme, AdaptiveInput{true, std::nullopt, std::nullopt, 12.0}, &flag);
  CHECK_FALSE(flag);
  CHECK(std::abs(via_free.z2_reach) ==
        Approx(relaysim::mlp_forward(model, 12.0)).epsilon(1e-12));
}
