#include <algorithm>
#include <iostream>

#include "commands.hpp"
#include "vchan/channel_models.hpp"

namespace vchan::cli {
namespace {

nlohmann::json resolved_config(const EvalOptions& o) {
  nlohmann::json c;
  c["model"] = o.model;
  c["t_start"] = o.grid.t_start;
  c["t_end"] = o.grid.t_end;
  c["rate_hz"] = o.grid.rate_hz;
  c["clamp_negative"] = o.clamp_negative;
  c["format"] = o.common.format;
  c["seed"] = o.common.seed;
  if (o.model == "diffusion") {
    c["molecules"] = o.molecules;
    c["diffusion_coefficient"] = o.diffusion_coefficient;
    c["dimension"] = o.dimension;
    c["distance"] = o.diffusion_distance;
  } else {
    c["amplitude"] = o.vertical.amplitude;
    c["spread"] = o.vertical.spread;
    c["gravity_slope"] = o.vertical.gravity_slope;
    c["distance"] = o.vertical.distance;
  }
  return c;
}

TimeSeries evaluate(const EvalOptions& o) {
  const std::vector<double> grid = o.grid.grid();
  std::vector<Sample> samples;
  samples.reserve(grid.size());
  TraceMetadata meta;
  meta.trial_id = o.model;
  if (o.model == "diffusion") {
    const DiffusionParams p{o.molecules, o.diffusion_coefficient, o.dimension,
                            o.diffusion_distance};
    p.validate();
    meta.distance_cm = p.distance;
    for (double t : grid) samples.push_back({t, diffusion_response(p, t)});
  } else {
    const VerticalChannelParams p{o.vertical.amplitude, o.vertical.spread,
                                  o.vertical.gravity_slope, o.vertical.distance};
    p.validate();
    meta.distance_cm = p.distance;
    for (double t : grid) {
      double v = vertical_response(p, t);
      if (o.clamp_negative) v = std::max(v, 0.0);
      samples.push_back({t, v});
    }
  }
  return TimeSeries(std::move(samples), std::move(meta));
}

}  // namespace

void run_eval(const EvalOptions& o) {
  RunContext ctx("eval", o.common.output(), o.common.parsed_format());
  ctx.set_config(resolved_config(o));
  try {
    const TimeSeries trace = evaluate(o);
    const std::string payload = trace_payload(trace, ctx.format());
    if (ctx.writes_files()) {
      ctx.write_output("eval_" + o.model + file_extension(ctx.format()), payload);
    } else {
      std::cout << payload;
    }
    ctx.finalize(true, "");
  } catch (const std::exception& e) {
    ctx.finalize(false, e.what());
    throw;
  }
}

}  // namespace vchan::cli
