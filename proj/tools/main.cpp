// relaysim: phasor-domain fault studies and distance-relay zone analysis for
// a transmission line with remote wind-farm in-feed.
//
// Subcommands:
//   solve     solve the configured fault once and report what the relay sees
//   sweep     solve across the wind-speed grid and write the sweep CSV
//   plot      render a sweep CSV as an R-X plane SVG
//   train     fit the wind-speed -> zone-2 reach regressor, write model file
//   eval      evaluate a saved model on the config's validation split
//   simulate  run the timed event script and write trip records
//
// Exit codes: 0 success, 2 input/config error, 3 numerical/solver error.

#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "relaysim/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string mode;      // "", "reduced", "full"
  std::string adaptive;  // "", "on", "off"
  std::optional<long long> seed;
  std::string out;
  std::string csv;    // plot input
  std::string model;  // eval input
  std::string curve;  // train curve output
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "scenario config JSON")->required();
  cmd->add_option("--mode", o.mode, "solver mode: reduced|full")
      ->check(CLI::IsMember({"reduced", "full"}));
  cmd->add_option("--adaptive", o.adaptive, "adaptive resetting: on|off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--seed", o.seed, "training/split seed");
}

relaysim::ScenarioConfig load_with_overrides(const Options& o) {
  relaysim::ScenarioConfig cfg = relaysim::load_config(o.config);
  if (o.mode == "reduced") cfg.relay.mode = relaysim::SolverMode::reduced;
  if (o.mode == "full") cfg.relay.mode = relaysim::SolverMode::full;
  if (o.adaptive == "on") cfg.relay.adaptive = true;
  if (o.adaptive == "off") cfg.relay.adaptive = false;
  if (o.seed.has_value()) {
    cfg.training.seed = static_cast<std::uint64_t>(*o.seed);
  }
  return cfg;
}

std::string pick_path(const std::string& flag_value,
                      const std::string& config_value, const char* what) {
  if (!flag_value.empty()) return flag_value;
  if (!config_value.empty()) return config_value;
  throw relaysim::ConfigError(std::string("no path for ") + what +
                              ": pass --out or set it in the config");
}

int cmd_solve(const Options& o) {
  const relaysim::ScenarioConfig cfg = load_with_overrides(o);
  const relaysim::SolveReport rep = relaysim::run_solve(cfg);
  std::cout << relaysim::format_solve_report(rep);
  return 0;
}

int cmd_sweep(const Options& o) {
  const relaysim::ScenarioConfig cfg = load_with_overrides(o);
  const std::vector<relaysim::SweepRow> rows = relaysim::run_sweep(cfg);
  const std::string path = pick_path(o.out, cfg.output.csv, "the sweep CSV");
  std::ostringstream os;
  relaysim::write_sweep_csv(os, rows);
  relaysim::write_text_file(path, os.str());
  std::cout << "wrote " << rows.size() << " rows to " << path << "\n";
  return 0;
}

int cmd_plot(const Options& o) {
  const relaysim::ScenarioConfig cfg = load_with_overrides(o);
  const std::string csv_path =
      !o.csv.empty() ? o.csv
                     : pick_path("", cfg.output.csv, "the sweep CSV input");
  std::istringstream is(relaysim::read_text_file(csv_path));
  const std::vector<relaysim::SweepRow> rows = relaysim::read_sweep_csv(is);
  const std::string svg =
      relaysim::render_sweep_svg(cfg.static_settings(), rows);
  const std::string path = pick_path(o.out, cfg.output.svg, "the SVG");
  relaysim::write_text_file(path, svg);
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  const relaysim::ScenarioConfig cfg = load_with_overrides(o);
  const relaysim::TrainArtifacts art = relaysim::run_train(cfg);
  const std::string model_path =
      pick_path(o.out, cfg.output.model, "the model file");
  relaysim::save_model(art.model, model_path);
  const std::string curve_path =
      !o.curve.empty() ? o.curve : cfg.output.curve;
  if (!curve_path.empty()) {
    std::ostringstream os;
    relaysim::write_curve_csv(os, art.report);
    relaysim::write_text_file(curve_path, os.str());
  }
  std::cout << "trained " << art.report.epochs << " epochs on "
            << art.data.size() << " rows\n";
  std::cout << "final_train_rmse=" << relaysim::fmt17(
                   art.report.final_train_rmse)
            << "\n";
  std::cout << "final_val_rmse=" << relaysim::fmt17(art.report.final_val_rmse)
            << "\n";
  std::cout << "model=" << model_path << "\n";
  return 0;
}

int cmd_eval(const Options& o) {
  const relaysim::ScenarioConfig cfg = load_with_overrides(o);
  std::string model_path = o.model;
  if (model_path.empty()) model_path = cfg.relay.model_file;
  if (model_path.empty()) model_path = cfg.output.model;
  if (model_path.empty()) {
    throw relaysim::ConfigError(
        "no model file: pass --model or set relay.model_file");
  }
  const relaysim::MlpModel model = relaysim::load_model(model_path);
  const relaysim::EvalReport rep = relaysim::run_eval(cfg, model);
  std::cout << relaysim::format_eval_report(rep);
  return 0;
}

int cmd_simulate(const Options& o) {
  const relaysim::ScenarioConfig cfg = load_with_overrides(o);
  const std::vector<relaysim::TripRecord> trips =
      relaysim::run_simulation(cfg);
  const std::string path = pick_path(o.out, cfg.output.csv, "the trip CSV");
  std::ostringstream os;
  relaysim::write_trips_csv(os, trips);
  relaysim::write_text_file(path, os.str());
  std::cout << "wrote " << trips.size() << " trip record(s) to " << path
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phasor-domain fault studies with adaptive zone-2 resetting"};
  app.require_subcommand(1);

  Options o;
  CLI::App* solve = app.add_subcommand("solve", "solve one fault scenario");
  CLI::App* sweep = app.add_subcommand("sweep", "sweep the wind-speed grid");
  CLI::App* plot = app.add_subcommand("plot", "render a sweep CSV as SVG");
  CLI::App* train = app.add_subcommand("train", "fit the reach regressor");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved model");
  CLI::App* simulate =
      app.add_subcommand("simulate", "run the timed event script");
  for (CLI::App* cmd : {solve, sweep, plot, train, eval, simulate}) {
    add_common(cmd, o);
  }
  sweep->add_option("--out", o.out, "output CSV path");
  plot->add_option("--csv", o.csv, "input sweep CSV path");
  plot->add_option("--out", o.out, "output SVG path");
  train->add_option("--out", o.out, "output model path");
  train->add_option("--curve", o.curve, "training-curve CSV path");
  eval->add_option("--model", o.model, "model file to evaluate");
  simulate->add_option("--out", o.out, "output trip CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (plot->parsed()) return cmd_plot(o);
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o);
    if (simulate->parsed()) return cmd_simulate(o);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const relaysim::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const relaysim::NumericError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
