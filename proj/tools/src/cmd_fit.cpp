#include <cstdlib>
#include <iostream>
#include <set>
#include <stdexcept>

#include "commands.hpp"
#include "vchan/lm_fitter.hpp"
#include "vchan/trace_pipeline.hpp"

namespace vchan::cli {
namespace {

constexpr double kDefaultDistance = 10.0;  // cm

nlohmann::json resolved_config(const FitOptions& o) {
  nlohmann::json c;
  c["trace_files"] = o.trace_files;
  if (o.distance) {
    c["distance"] = *o.distance;
  } else {
    c["distance"] = "per-trace metadata, else " + format_double(kDefaultDistance);
  }
  c["baseline"] = o.baseline;
  c["normalize"] = o.normalize;
  c["window"] = o.window_bounds;
  c["max_iterations"] = o.max_iterations;
  if (!o.initial.empty()) c["initial"] = o.initial;
  c["keep_going"] = o.keep_going;
  c["format"] = o.common.format;
  c["seed"] = o.common.seed;
  return c;
}

/// none | auto | <number>. Returns the baseline to subtract, nullopt = none.
std::optional<double> resolve_baseline(const std::string& mode, const TimeSeries& trace) {
  if (mode == "none") return std::nullopt;
  if (mode == "auto") return estimate_baseline(trace);
  const char* begin = mode.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw std::invalid_argument("--baseline must be none, auto or a number, got '" +
                                mode + "'");
  }
  return value;
}

struct TrialFit {
  std::string trial_id;
  TimeSeries processed;
  FitResult result;
};

TrialFit fit_one(const FitOptions& o, RunContext& ctx, const std::string& file) {
  TrialFit out;
  out.trial_id = std::filesystem::path(file).stem().string();
  TimeSeries trace = parse_trace(ctx.read_input(file));
  if (!trace.metadata().trial_id.empty()) out.trial_id = trace.metadata().trial_id;

  trace = window(trace, o.window_bounds[0], o.window_bounds[1]);
  if (const auto baseline = resolve_baseline(o.baseline, trace)) {
    trace = subtract_baseline(trace, *baseline);
  }
  if (o.normalize) trace = normalize_peak(trace);

  const double distance =
      o.distance ? *o.distance : trace.metadata().distance_cm.value_or(kDefaultDistance);

  FitConfig cfg;
  cfg.max_iterations = o.max_iterations;
  if (!o.initial.empty()) cfg.initial_guess = {o.initial[0], o.initial[1], o.initial[2]};
  out.result = fit_vertical_model(trace, distance, cfg);
  out.processed = std::move(trace);
  return out;
}

std::string trial_summary(const TrialFit& t) {
  const VerticalChannelParams& p = t.result.params;
  return t.trial_id + ": a=" + format_double(p.amplitude) + " b=" +
         format_double(p.spread) + " e=" + format_double(p.gravity_slope) + " rss=" +
         format_double(t.result.residual_sum_of_squares) + " iterations=" +
         std::to_string(t.result.iterations) +
         (t.result.converged ? " converged=yes" : " converged=no");
}

TimeSeries fitted_curve(const TrialFit& t) {
  std::vector<Sample> samples;
  samples.reserve(t.processed.size());
  for (const Sample& s : t.processed.samples()) {
    samples.push_back({s.t, vertical_response(t.result.params, s.t)});
  }
  TraceMetadata meta;
  meta.trial_id = "fitted_" + t.trial_id;
  meta.distance_cm = t.result.params.distance;
  meta.units = t.processed.metadata().units;
  return TimeSeries(std::move(samples), std::move(meta));
}

}  // namespace

void run_fit(const FitOptions& o) {
  RunContext ctx("fit", o.common.output(), o.common.parsed_format());
  ctx.set_config(resolved_config(o));
  try {
    if (o.trace_files.empty()) {
      throw std::invalid_argument("fit needs at least one trace file");
    }
    if (!o.initial.empty() && o.initial.size() != 3) {
      throw std::invalid_argument("--initial takes exactly three values: a0 b0 e0");
    }
    if (o.window_bounds.size() != 2 || !(o.window_bounds[0] < o.window_bounds[1])) {
      throw std::invalid_argument("--window takes START END with START < END");
    }

    std::vector<TrialFit> fits;
    for (const std::string& file : o.trace_files) {
      try {
        fits.push_back(fit_one(o, ctx, file));
      } catch (const std::exception& e) {
        const std::string msg =
            "trial '" + std::filesystem::path(file).stem().string() + "' (" + file +
            "): " + e.what();
        if (!o.keep_going) throw std::runtime_error(msg);
        std::cerr << "vchan fit: skipping " << msg << '\n';
      }
    }
    if (fits.empty()) {
      throw std::runtime_error("no trials could be fitted");
    }

    std::vector<FitResult> converged;
    for (const TrialFit& t : fits) {
      if (t.result.converged) converged.push_back(t.result);
    }
    if (converged.empty()) {
      throw std::runtime_error("no converged trials to average");
    }
    const VerticalChannelParams avg = average_fit(converged);

    nlohmann::json report;
    report["schema"] = "1";
    auto& trials = report["trials"] = nlohmann::json::array();
    for (const TrialFit& t : fits) {
      std::cout << trial_summary(t) << '\n';
      trials.push_back({{"trial_id", t.trial_id},
                        {"a", t.result.params.amplitude},
                        {"b", t.result.params.spread},
                        {"e", t.result.params.gravity_slope},
                        {"rss", t.result.residual_sum_of_squares},
                        {"iterations", t.result.iterations},
                        {"converged", t.result.converged}});
    }
    report["average"] = {{"a", avg.amplitude}, {"b", avg.spread}, {"e", avg.gravity_slope}};
    std::cout << "average: a=" << format_double(avg.amplitude)
              << " b=" << format_double(avg.spread)
              << " e=" << format_double(avg.gravity_slope) << '\n';

    if (ctx.writes_files()) {
      ctx.write_output("fit_report.json", report.dump(2) + "\n");
      std::set<std::string> used;
      for (const TrialFit& t : fits) {
        std::string name = "fitted_" + sanitize_for_filename(t.trial_id);
        while (!used.insert(name).second) name += "_dup";
        ctx.write_output(name + file_extension(ctx.format()),
                         trace_payload(fitted_curve(t), ctx.format()));
      }
    } else {
      std::cout << report.dump(2) << '\n';
    }
    ctx.finalize(true, "");
  } catch (const std::exception& e) {
    ctx.finalize(false, e.what());
    throw;
  }
}

}  // namespace vchan::cli
