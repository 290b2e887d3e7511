#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vchan/channel_models.hpp"
#include "vchan/time_series.hpp"

namespace vchan {

/// Monte Carlo random-walk configuration. Particles start at the origin and
/// take Euler-Maruyama steps drift*dt + sqrt(2*D*dt)*xi with xi standard
/// normal. The Gaussian increments make each step distributionally exact for
/// constant coefficients, so time_step only sets snapshot granularity.
struct SimConfig {
  std::int64_t particle_count = 0;
  double time_step = 0.0;              // seconds, > 0
  double duration = 0.0;               // seconds, >= time_step
  double diffusion_coefficient = 0.0;  // cm^2/s, > 0
  double drift = 0.0;                  // cm/s, any sign
  std::uint64_t rng_seed = 0;
  double measurement_distance = 0.0;   // cm
  double bin_width = 0.0;              // cm, > 0
  std::vector<double> snapshot_times;  // each in (0, duration]; empty = {duration}
  int threads = 0;                     // 0 = hardware concurrency

  std::vector<double> resolved_snapshot_times() const;
  void validate() const;
};

/// Parse a SimConfig from a JSON document with the same field names as the
/// struct. Violations are reported with the offending JSON path.
SimConfig sim_config_from_json(const std::string& text);
std::string sim_config_to_json(const SimConfig& cfg);

/// Binned particle positions at one snapshot. Bin k (0-based) is centered at
/// (first_bin_index + k) * bin_width and covers one bin_width; concentration
/// estimates are counts / (particle_count * bin_width), so the histogram
/// mass sums to <= 1 with the remainder tracked in out_of_range.
struct ConcentrationProfile {
  double time = 0.0;
  double bin_width = 0.0;
  std::int64_t particle_count = 0;
  std::int64_t first_bin_index = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t out_of_range = 0;
  double mean_position = 0.0;      // over all particles, not just binned ones
  double position_variance = 0.0;

  double bin_center(std::size_t k) const {
    return (static_cast<double>(first_bin_index) + static_cast<double>(k)) * bin_width;
  }
  double concentration(std::size_t k) const {
    return static_cast<double>(counts[k]) /
           (static_cast<double>(particle_count) * bin_width);
  }
};

/// Run the random walk and histogram particle positions at each requested
/// snapshot. Deterministic given rng_seed: per-particle streams are keyed by
/// particle index (see vchan/rng.hpp), and partial results are merged in a
/// fixed chunk order, so the output is bit-identical for any thread count.
std::vector<ConcentrationProfile> simulate(const SimConfig& cfg);

/// L1 distance between the histogram's concentration estimate and an
/// analytic density, evaluated at bin centers, plus the out-of-range mass.
double l1_distance(const ConcentrationProfile& profile,
                   const std::function<double(double)>& density);

/// Evaluate the vertical model on `grid` and add seeded Gaussian noise of
/// standard deviation noise_sigma. Deterministic given rng_seed. Stands in
/// for measured sensor traces in tests and demos.
TimeSeries synthetic_trace(const VerticalChannelParams& params,
                           const std::vector<double>& grid, double noise_sigma,
                           std::uint64_t rng_seed,
                           const std::string& trial_id = "synthetic");

}  // namespace vchan
