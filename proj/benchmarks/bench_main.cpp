#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "vchan/channel_models.hpp"
#include "vchan/lm_fitter.hpp"
#include "vchan/particle_sim.hpp"
#include "vchan/trace_pipeline.hpp"

namespace {

const vchan::VerticalChannelParams kRef{1.8788, 60.4567, 0.0301, 0.1};

std::vector<double> ten_hz_grid() {
  std::vector<double> grid(110);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = static_cast<double>(k + 1) / 10.0;
  }
  return grid;
}

void BM_DiffusionResponse(benchmark::State& state) {
  vchan::DiffusionParams p;
  p.molecule_count = 1.0;
  p.diffusion_coefficient = 0.0993;
  p.dimension = static_cast<int>(state.range(0));
  p.distance = 10.0;
  double t = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vchan::diffusion_response(p, t));
    t = t < 100.0 ? t + 0.1 : 0.1;
  }
}
BENCHMARK(BM_DiffusionResponse)->Arg(1)->Arg(2)->Arg(3);

void BM_VerticalResponse(benchmark::State& state) {
  double t = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vchan::vertical_response(kRef, t));
    t = t < 11.0 ? t + 0.1 : 0.1;
  }
}
BENCHMARK(BM_VerticalResponse);

void BM_VerticalGradient(benchmark::State& state) {
  double t = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vchan::vertical_response_gradient(kRef, t));
    t = t < 11.0 ? t + 0.1 : 0.1;
  }
}
BENCHMARK(BM_VerticalGradient);

void BM_PeakTime(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(vchan::peak_time(kRef));
  }
}
BENCHMARK(BM_PeakTime);

void BM_FitVerticalModel(benchmark::State& state) {
  const double sigma = static_cast<double>(state.range(0)) / 1000.0;
  const vchan::TimeSeries trace = vchan::synthetic_trace(kRef, ten_hz_grid(), sigma, 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vchan::fit_vertical_model(trace, kRef.distance));
  }
}
BENCHMARK(BM_FitVerticalModel)->Arg(0)->Arg(10)->ArgName("sigma_milli")->Unit(benchmark::kMicrosecond);

void BM_Simulate(benchmark::State& state) {
  vchan::SimConfig cfg;
  cfg.particle_count = state.range(0);
  cfg.time_step = 0.05;
  cfg.duration = 1.0;
  cfg.diffusion_coefficient = 0.25;
  cfg.bin_width = 0.05;
  cfg.rng_seed = 7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vchan::simulate(cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.particle_count);
}
BENCHMARK(BM_Simulate)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_SerializeParse(benchmark::State& state) {
  const vchan::TimeSeries trace = vchan::synthetic_trace(kRef, ten_hz_grid(), 0.01, 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vchan::parse_trace(vchan::serialize_trace(trace)));
  }
}
BENCHMARK(BM_SerializeParse)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
