#include <iostream>
#include <stdexcept>

#include "commands.hpp"
#include "vchan/channel_models.hpp"
#include "vchan/trace_pipeline.hpp"

namespace vchan::cli {
namespace {

nlohmann::json resolved_config(const CompareOptions& o) {
  nlohmann::json c;
  c["trace_files"] = o.trace_files;
  c["amplitude"] = o.vertical.amplitude;
  c["spread"] = o.vertical.spread;
  c["gravity_slope"] = o.vertical.gravity_slope;
  c["distance"] = o.vertical.distance;
  c["window"] = o.window_bounds;
  c["format"] = o.common.format;
  c["seed"] = o.common.seed;
  return c;
}

std::string span_text(double lo, double hi) {
  return "[" + format_double(lo) + ", " + format_double(hi) + "]";
}

}  // namespace

void run_compare(const CompareOptions& o) {
  RunContext ctx("compare", o.common.output(), o.common.parsed_format());
  ctx.set_config(resolved_config(o));
  try {
    if (o.trace_files.empty()) {
      throw std::invalid_argument("compare needs at least one trace file");
    }
    if (o.window_bounds.size() != 2 || !(o.window_bounds[0] < o.window_bounds[1])) {
      throw std::invalid_argument("--window takes START END with START < END");
    }
    const VerticalChannelParams params{o.vertical.amplitude, o.vertical.spread,
                                       o.vertical.gravity_slope, o.vertical.distance};
    params.validate();

    std::vector<TimeSeries> traces;
    for (const std::string& file : o.trace_files) {
      traces.push_back(
          window(parse_trace(ctx.read_input(file)), o.window_bounds[0], o.window_bounds[1]));
    }

    // All trials are aligned on the first trace's windowed grid; spans that
    // cannot cover it are a hard error (no extrapolation).
    std::vector<double> grid;
    grid.reserve(traces.front().size());
    for (const Sample& s : traces.front().samples()) grid.push_back(s.t);
    for (std::size_t i = 1; i < traces.size(); ++i) {
      const TimeSeries& t = traces[i];
      if (t.start_time() > grid.front() || t.end_time() < grid.back()) {
        throw std::runtime_error(
            "trace '" + o.trace_files[i] + "' spans " +
            span_text(t.start_time(), t.end_time()) +
            " but the comparison grid spans " + span_text(grid.front(), grid.back()));
      }
      traces[i] = resample(t, grid);
    }

    const TimeSeries experiment = normalize_peak(average_trials(TrialSet(traces)));

    std::vector<Sample> model_samples;
    model_samples.reserve(grid.size());
    for (double t : grid) model_samples.push_back({t, vertical_response(params, t)});
    TraceMetadata model_meta;
    model_meta.trial_id = "model";
    model_meta.distance_cm = params.distance;
    const TimeSeries model = normalize_peak(TimeSeries(std::move(model_samples), model_meta));

    const double lag = experiment.time_at(experiment.argmax()) - model.time_at(model.argmax());

    std::string payload;
    if (ctx.format() == OutputFormat::Json) {
      nlohmann::json j;
      j["schema"] = "1";
      j["peak_lag_seconds"] = lag;
      auto& rows = j["rows"] = nlohmann::json::array();
      for (std::size_t i = 0; i < experiment.size(); ++i) {
        rows.push_back({grid[i], experiment.value_at(i), model.value_at(i)});
      }
      payload = j.dump(2) + "\n";
    } else {
      payload = "# columns=t,experiment,model\n# peak_lag_seconds=" + format_double(lag) +
                "\n";
      for (std::size_t i = 0; i < experiment.size(); ++i) {
        payload += format_double(grid[i]) + "," + format_double(experiment.value_at(i)) +
                   "," + format_double(model.value_at(i)) + "\n";
      }
    }

    if (ctx.writes_files()) {
      ctx.write_output(std::string("compare") + file_extension(ctx.format()), payload);
      std::cout << "peak_lag_seconds=" << format_double(lag) << '\n';
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
