#include "vchan/particle_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "vchan/rng.hpp"

namespace vchan {
namespace {

using nlohmann::json;

constexpr std::int64_t kChunkSize = 8192;  // particles per work unit; fixed so
                                           // merges are thread-count independent

struct SnapshotPlan {
  std::int64_t steps;   // whole steps from t = 0
  double realized_time; // steps * time_step
};

std::vector<SnapshotPlan> plan_snapshots(const SimConfig& cfg) {
  std::vector<SnapshotPlan> plan;
  for (double t : cfg.resolved_snapshot_times()) {
    const std::int64_t steps = std::max<std::int64_t>(1, std::llround(t / cfg.time_step));
    plan.push_back({steps, static_cast<double>(steps) * cfg.time_step});
  }
  return plan;
}

// Per-chunk accumulation for one snapshot; merged in chunk order.
struct ChunkPartial {
  std::vector<std::uint64_t> counts;
  std::uint64_t out_of_range = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

}  // namespace

std::vector<double> SimConfig::resolved_snapshot_times() const {
  if (snapshot_times.empty()) return {duration};
  std::vector<double> times = snapshot_times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

void SimConfig::validate() const {
  if (particle_count < 1) {
    throw std::invalid_argument("particle_count must be >= 1");
  }
  if (!(time_step > 0.0) || !std::isfinite(time_step)) {
    throw std::invalid_argument("time_step must be positive and finite");
  }
  if (!(duration >= time_step) || !std::isfinite(duration)) {
    throw std::invalid_argument("duration must be >= time_step and finite");
  }
  if (!(diffusion_coefficient > 0.0) || !std::isfinite(diffusion_coefficient)) {
    throw std::invalid_argument("diffusion_coefficient must be positive and finite");
  }
  if (!std::isfinite(drift)) {
    throw std::invalid_argument("drift must be finite");
  }
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw std::invalid_argument("bin_width must be positive and finite");
  }
  if (!std::isfinite(measurement_distance)) {
    throw std::invalid_argument("measurement_distance must be finite");
  }
  if (threads < 0) {
    throw std::invalid_argument("threads must be >= 0");
  }
  for (double t : snapshot_times) {
    if (!(t > 0.0) || !(t <= duration) || !std::isfinite(t)) {
      throw std::invalid_argument("snapshot_times entries must lie in (0, duration]");
    }
  }
}

namespace {

double require_number(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw std::invalid_argument(std::string("$.") + key + ": required field missing");
  }
  if (!j[key].is_number()) {
    throw std::invalid_argument(std::string("$.") + key + ": must be a number");
  }
  return j[key].get<double>();
}

double optional_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    throw std::invalid_argument(std::string("$.") + key + ": must be a number");
  }
  return j[key].get<double>();
}

}  // namespace

SimConfig sim_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("$: config must be a JSON object");
  }
  static const std::set<std::string> known = {
      "particle_count", "time_step",  "duration",       "diffusion_coefficient",
      "drift",          "rng_seed",   "measurement_distance",
      "bin_width",      "snapshot_times", "threads"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw std::invalid_argument("$." + item.key() + ": unknown field");
    }
  }

  SimConfig cfg;
  cfg.particle_count = static_cast<std::int64_t>(require_number(j, "particle_count"));
  cfg.time_step = require_number(j, "time_step");
  cfg.duration = require_number(j, "duration");
  cfg.diffusion_coefficient = require_number(j, "diffusion_coefficient");
  cfg.bin_width = require_number(j, "bin_width");
  cfg.drift = optional_number(j, "drift", 0.0);
  cfg.measurement_distance = optional_number(j, "measurement_distance", 0.0);
  cfg.threads = static_cast<int>(optional_number(j, "threads", 0.0));
  if (j.contains("rng_seed")) {
    if (!j["rng_seed"].is_number_integer() && !j["rng_seed"].is_number_unsigned()) {
      throw std::invalid_argument("$.rng_seed: must be an integer");
    }
    cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();
  }
  if (j.contains("snapshot_times")) {
    if (!j["snapshot_times"].is_array()) {
      throw std::invalid_argument("$.snapshot_times: must be an array of numbers");
    }
    for (std::size_t i = 0; i < j["snapshot_times"].size(); ++i) {
      const auto& v = j["snapshot_times"][i];
      if (!v.is_number()) {
        throw std::invalid_argument("$.snapshot_times[" + std::to_string(i) +
                                    "]: must be a number");
      }
      cfg.snapshot_times.push_back(v.get<double>());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("$: ") + e.what());
  }
  return cfg;
}

std::string sim_config_to_json(const SimConfig& cfg) {
  json j;
  j["particle_count"] = cfg.particle_count;
  j["time_step"] = cfg.time_step;
  j["duration"] = cfg.duration;
  j["diffusion_coefficient"] = cfg.diffusion_coefficient;
  j["drift"] = cfg.drift;
  j["rng_seed"] = cfg.rng_seed;
  j["measurement_distance"] = cfg.measurement_distance;
  j["bin_width"] = cfg.bin_width;
  j["snapshot_times"] = cfg.resolved_snapshot_times();
  j["threads"] = cfg.threads;
  return j.dump(2);
}

std::vector<ConcentrationProfile> simulate(const SimConfig& cfg) {
  cfg.validate();
  const auto plan = plan_snapshots(cfg);
  const std::size_t n_snaps = plan.size();
  const std::int64_t n = cfg.particle_count;
  const double dt = cfg.time_step;
  const double step_sigma = std::sqrt(2.0 * cfg.diffusion_coefficient * dt);
  const double drift_step = cfg.drift * dt;
  const double w = cfg.bin_width;

  // One fixed histogram range for every snapshot: cloud center plus six
  // standard deviations at the final time, never fewer than a few bins.
  const double spread = 6.0 * std::sqrt(2.0 * cfg.diffusion_coefficient * cfg.duration);
  const double lo_pos = std::min(0.0, cfg.drift * cfg.duration) - std::max(spread, 2.0 * w);
  const double hi_pos = std::max(0.0, cfg.drift * cfg.duration) + std::max(spread, 2.0 * w);
  const std::int64_t k_lo = std::llround(lo_pos / w);
  const std::int64_t k_hi = std::llround(hi_pos / w);
  const std::size_t n_bins = static_cast<std::size_t>(k_hi - k_lo + 1);

  const std::size_t n_chunks =
      static_cast<std::size_t>((n + kChunkSize - 1) / kChunkSize);
  // partials[chunk * n_snaps + snap]
  std::vector<ChunkPartial> partials(n_chunks * n_snaps);
  for (auto& part : partials) part.counts.assign(n_bins, 0);

  const auto run_chunk = [&](std::size_t chunk) {
    const std::int64_t begin = static_cast<std::int64_t>(chunk) * kChunkSize;
    const std::int64_t end = std::min(begin + kChunkSize, n);
    for (std::int64_t particle = begin; particle < end; ++particle) {
      GaussianStream stream(stream_seed(cfg.rng_seed, static_cast<std::uint64_t>(particle)));
      double pos = 0.0;
      std::int64_t step = 0;
      for (std::size_t s = 0; s < n_snaps; ++s) {
        for (; step < plan[s].steps; ++step) {
          pos += drift_step + step_sigma * stream.next_normal();
        }
        ChunkPartial& part = partials[chunk * n_snaps + s];
        const std::int64_t k = std::llround(pos / w);
        if (k >= k_lo && k <= k_hi) {
          ++part.counts[static_cast<std::size_t>(k - k_lo)];
        } else {
          ++part.out_of_range;
        }
        part.sum += pos;
        part.sum_sq += pos * pos;
      }
    }
  };

  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_chunks));
  if (n_threads <= 1) {
    for (std::size_t chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) {
      workers.emplace_back([&] {
        for (std::size_t chunk = next.fetch_add(1); chunk < n_chunks;
             chunk = next.fetch_add(1)) {
          run_chunk(chunk);
        }
      });
    }
    for (auto& worker : workers) worker.join();
  }

  // Merge partials in chunk order; identical for any worker count.
  std::vector<ConcentrationProfile> profiles(n_snaps);
  for (std::size_t s = 0; s < n_snaps; ++s) {
    ConcentrationProfile& prof = profiles[s];
    prof.time = plan[s].realized_time;
    prof.bin_width = w;
    prof.particle_count = n;
    prof.first_bin_index = k_lo;
    prof.counts.assign(n_bins, 0);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t chunk = 0; chunk < n_chunks; ++chunk) {
      const ChunkPartial& part = partials[chunk * n_snaps + s];
      for (std::size_t b = 0; b < n_bins; ++b) prof.counts[b] += part.counts[b];
      prof.out_of_range += part.out_of_range;
      sum += part.sum;
      sum_sq += part.sum_sq;
    }
    prof.mean_position = sum / static_cast<double>(n);
    prof.position_variance =
        std::max(0.0, sum_sq / static_cast<double>(n) - prof.mean_position * prof.mean_position);
  }
  return profiles;
}

double l1_distance(const ConcentrationProfile& profile,
                   const std::function<double(double)>& density) {
  double dist = 0.0;
  for (std::size_t k = 0; k < profile.counts.size(); ++k) {
    dist += profile.bin_width *
            std::abs(profile.concentration(k) - density(profile.bin_center(k)));
  }
  dist += static_cast<double>(profile.out_of_range) /
          static_cast<double>(profile.particle_count);
  return dist;
}

TimeSeries synthetic_trace(const VerticalChannelParams& params,
                           const std::vector<double>& grid, double noise_sigma,
                           std::uint64_t rng_seed, const std::string& trial_id) {
  params.validate();
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw std::invalid_argument("noise_sigma must be >= 0 and finite");
  }
  if (grid.empty()) {
    throw std::invalid_argument("synthetic_trace needs a non-empty time grid");
  }
  GaussianStream stream(rng_seed);
  std::vector<Sample> samples;
  samples.reserve(grid.size());
  for (double t : grid) {
    if (!(t > 0.0)) {
      throw std::invalid_argument("synthetic_trace grid times must be > 0");
    }
    double v = vertical_response(params, t);
    if (noise_sigma > 0.0) v += noise_sigma * stream.next_normal();
    samples.push_back({t, v});
  }
  TraceMetadata meta;
  meta.trial_id = trial_id;
  meta.distance_cm = params.distance;
  meta.units = SignalUnits::RawAnalog;
  return TimeSeries(std::move(samples), std::move(meta));
}

}  // namespace vchan
