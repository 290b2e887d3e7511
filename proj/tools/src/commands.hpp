#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace CLI {
class App;
}

namespace vchan::cli {

/// Flags every subcommand accepts. Without --output the primary payload goes
/// to standard output and no files (and no manifest) are written.
struct CommonOptions {
  std::string output_dir;  // empty = stdout only
  std::uint64_t seed = 0;
  std::string format = "csv";

  void register_on(CLI::App* cmd);
  std::optional<std::filesystem::path> output() const;
  OutputFormat parsed_format() const { return output_format_from_string(format); }
};

/// Time grid flags shared by eval and synth: (t_start, t_end] sampled at
/// rate_hz. Defaults cover the toolkit's standard 11 s observation window.
struct GridOptions {
  double t_start = 0.0;
  double t_end = 11.0;
  double rate_hz = 10.0;

  void register_on(CLI::App* cmd);
  std::vector<double> grid() const { return make_time_grid(t_start, t_end, rate_hz); }
};

/// Vertical model coefficient flags. Defaults are the toolkit's reference
/// coefficient set (the bundled example fit at d = 0.1).
struct VerticalOptions {
  double amplitude = 1.8788;
  double spread = 60.4567;
  double gravity_slope = 0.0301;
  double distance = 0.1;

  void register_on(CLI::App* cmd);
};

struct EvalOptions {
  CommonOptions common;
  GridOptions grid;
  std::string model;  // "diffusion" | "vertical"
  // Diffusion parameters; defaults are the measured-medium values the rest
  // of the toolkit uses (D for isopropyl alcohol in air, 10 cm separation).
  double molecules = 1.0;
  double diffusion_coefficient = 0.0993;
  int dimension = 1;
  double diffusion_distance = 10.0;
  VerticalOptions vertical;
  bool clamp_negative = false;
};

struct SynthOptions {
  CommonOptions common;
  GridOptions grid;
  VerticalOptions vertical;
  double noise_sigma = 0.0;
  int trials = 1;
};

struct FitOptions {
  CommonOptions common;
  std::vector<std::string> trace_files;
  std::optional<double> distance;  // unset = per-trace metadata, then 10 cm
  std::string baseline = "none";   // none | auto | <number>
  bool normalize = false;
  std::vector<double> window_bounds = {0.0, 11.0};
  int max_iterations = 200;
  std::vector<double> initial;  // empty or {a0, b0, e0}
  bool keep_going = false;
};

struct CompareOptions {
  CommonOptions common;
  std::vector<std::string> trace_files;
  VerticalOptions vertical;
  std::vector<double> window_bounds = {0.0, 11.0};
};

struct SimulateOptions {
  CommonOptions common;
  std::string config_file;
  bool seed_given = false;
  std::optional<int> threads;
};

void run_eval(const EvalOptions& o);
void run_synth(const SynthOptions& o);
void run_fit(const FitOptions& o);
void run_compare(const CompareOptions& o);
void run_simulate(const SimulateOptions& o);

}  // namespace vchan::cli
