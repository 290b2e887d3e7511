#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace vchan::cli {

void CommonOptions::register_on(CLI::App* cmd) {
  // Lets the root-level --config (and any other root option) be written
  // after the subcommand name.
  cmd->fallthrough();
  cmd->add_option("--output", output_dir,
                  "Directory for output files and manifest.json (default: primary "
                  "payload to standard output, no files)");
  cmd->add_option("--seed", seed, "Master RNG seed for stochastic subcommands")
      ->capture_default_str();
  cmd->add_option("--format", format, "Payload format for emitted data files")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

std::optional<std::filesystem::path> CommonOptions::output() const {
  if (output_dir.empty()) return std::nullopt;
  return std::filesystem::path(output_dir);
}

void GridOptions::register_on(CLI::App* cmd) {
  cmd->add_option("--t-start", t_start, "Window start, seconds (samples at t > start)")
      ->capture_default_str();
  cmd->add_option("--t-end", t_end, "Window end, seconds (samples at t <= end)")
      ->capture_default_str();
  cmd->add_option("--rate", rate_hz, "Sampling rate, Hz")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void VerticalOptions::register_on(CLI::App* cmd) {
  cmd->add_option("--amplitude", amplitude, "Vertical model a (signal units)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--spread", spread, "Vertical model b (s/cm^2)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--gravity-slope", gravity_slope,
                  "Vertical model e, linear decay (signal units per second)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--distance", distance, "Emitter-receiver distance d, cm")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

namespace {

void register_eval(CLI::App& app) {
  auto o = std::make_shared<EvalOptions>();
  CLI::App* cmd = app.add_subcommand(
      "eval", "Evaluate a channel model over a time grid and emit a trace");
  cmd->add_option("model", o->model, "Which model to evaluate")
      ->required()
      ->check(CLI::IsMember({"diffusion", "vertical"}));
  o->common.register_on(cmd);
  o->grid.register_on(cmd);
  cmd->add_option("--molecules", o->molecules, "diffusion: released molecule count M")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--diffusion-coefficient", o->diffusion_coefficient,
                  "diffusion: D, cm^2/s (default: isopropyl alcohol in air)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--dimension", o->dimension, "diffusion: spatial dimension n")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
  cmd->add_option("--diffusion-distance", o->diffusion_distance,
                  "diffusion: emitter-receiver distance d, cm")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  o->vertical.register_on(cmd);
  cmd->add_flag("--clamp-negative", o->clamp_negative,
                "Write vertical model values below zero as 0 (plot convenience)");
  cmd->callback([o] { run_eval(*o); });
}

void register_synth(CLI::App& app) {
  auto o = std::make_shared<SynthOptions>();
  CLI::App* cmd = app.add_subcommand(
      "synth", "Generate synthetic sensor traces from the vertical model");
  o->common.register_on(cmd);
  o->grid.register_on(cmd);
  o->vertical.register_on(cmd);
  cmd->add_option("--noise-sigma", o->noise_sigma,
                  "Standard deviation of added Gaussian noise (signal units)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--trials", o->trials, "Number of trials to generate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->callback([o] { run_synth(*o); });
}

void register_fit(CLI::App& app) {
  auto o = std::make_shared<FitOptions>();
  CLI::App* cmd = app.add_subcommand(
      "fit", "Fit vertical model coefficients (a, b, e) to one or more traces");
  cmd->add_option("traces", o->trace_files, "Trace CSV files, one per trial")
      ->required()
      ->check(CLI::ExistingFile);
  o->common.register_on(cmd);
  cmd->add_option("--distance", [o](const std::vector<std::string>& v) {
        o->distance = std::stod(v.front());
        return true;
      },
      "Emitter-receiver distance d, cm (default: per-trace metadata, else 10)");
  cmd->add_option("--baseline", o->baseline,
                  "Baseline removal: none, auto (mean of first 5 samples) or a value")
      ->capture_default_str();
  cmd->add_flag("--normalize", o->normalize, "Peak-normalize each trace before fitting");
  cmd->add_option("--window", o->window_bounds,
                  "Fit window START END, seconds; keeps START < t <= END")
      ->expected(2)
      ->capture_default_str();
  cmd->add_option("--max-iterations", o->max_iterations, "Solver iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--initial", o->initial, "Initial guess a0 b0 e0 (default: data-driven)")
      ->expected(3);
  cmd->add_flag("--keep-going", o->keep_going,
                "Report converged trials even if some trials fail");
  cmd->callback([o] { run_fit(*o); });
}

void register_compare(CLI::App& app) {
  auto o = std::make_shared<CompareOptions>();
  CLI::App* cmd = app.add_subcommand(
      "compare", "Average trials, normalize, and compare against the vertical model");
  cmd->add_option("traces", o->trace_files, "Trace CSV files, one per trial")
      ->required()
      ->check(CLI::ExistingFile);
  o->common.register_on(cmd);
  o->vertical.register_on(cmd);
  cmd->add_option("--window", o->window_bounds,
                  "Comparison window START END, seconds; keeps START < t <= END")
      ->expected(2)
      ->capture_default_str();
  cmd->callback([o] { run_compare(*o); });
}

void register_simulate(CLI::App& app) {
  auto o = std::make_shared<SimulateOptions>();
  CLI::App* cmd = app.add_subcommand(
      "simulate", "Run the particle random-walk simulator from a JSON config");
  cmd->add_option("config-json", o->config_file, "Simulation config JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  o->common.register_on(cmd);
  cmd->add_option("--threads", [o](const std::vector<std::string>& v) {
        o->threads = std::stoi(v.front());
        return true;
      },
      "Worker thread count (0 = hardware concurrency); results do not depend on it");
  cmd->callback([o, cmd] {
    o->seed_given = cmd->count("--seed") > 0;
    run_simulate(*o);
  });
}

}  // namespace
}  // namespace vchan::cli

int main(int argc, char** argv) {
  CLI::App app{
      "vchan: 1-D molecular diffusion channel toolkit (model evaluation, "
      "Monte Carlo simulation, trace preprocessing, coefficient fitting)"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "Read options from an INI/TOML file with one [subcommand] section "
                 "per subcommand; command-line flags override the file");

  vchan::cli::register_eval(app);
  vchan::cli::register_synth(app);
  vchan::cli::register_fit(app);
  vchan::cli::register_compare(app);
  vchan::cli::register_simulate(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "vchan: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
