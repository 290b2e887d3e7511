#include "vchan/trace_pipeline.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace vchan {
namespace {

// 9 significant digits; enough that decimal -> double -> decimal is stable.
std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

double parse_number(const std::string& field, std::size_t line_no) {
  if (field.empty()) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": empty numeric field");
  }
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE || !std::isfinite(value)) {
    throw std::invalid_argument("line " + std::to_string(line_no) + ": non-numeric field '" +
                                field + "'");
  }
  return value;
}

void apply_metadata_line(TraceMetadata& meta, const std::string& line, std::size_t line_no) {
  std::string body = line.substr(1);
  if (!body.empty() && body.front() == ' ') body.erase(0, 1);
  const auto eq = body.find('=');
  if (eq == std::string::npos) return;  // free-form comment
  const std::string key = body.substr(0, eq);
  const std::string value = body.substr(eq + 1);
  if (key == "trial_id") {
    meta.trial_id = value;
  } else if (key == "distance_cm") {
    meta.distance_cm = parse_number(value, line_no);
  } else if (key == "units") {
    meta.units = signal_units_from_string(value);
  } else if (key == "trials_averaged") {
    meta.trials_averaged = static_cast<int>(parse_number(value, line_no));
  }
  // Unknown keys are ignored.
}

}  // namespace

TimeSeries parse_trace(std::istream& in) {
  std::vector<Sample> samples;
  TraceMetadata meta;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      apply_metadata_line(meta, line, line_no);
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected exactly one comma in '" + line + "'");
    }
    const double t = parse_number(line.substr(0, comma), line_no);
    const double v = parse_number(line.substr(comma + 1), line_no);
    if (!samples.empty() && t <= samples.back().t) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": timestamps must be strictly increasing");
    }
    samples.push_back({t, v});
  }
  if (samples.empty()) {
    throw std::invalid_argument("trace has no data rows");
  }
  return TimeSeries(std::move(samples), std::move(meta));
}

TimeSeries parse_trace(const std::string& text) {
  std::istringstream in(text);
  return parse_trace(in);
}

TimeSeries parse_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trace file: " + path.string());
  }
  try {
    return parse_trace(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string serialize_trace(const TimeSeries& trace) {
  std::string out;
  const TraceMetadata& meta = trace.metadata();
  if (!meta.trial_id.empty()) {
    out += "# trial_id=" + meta.trial_id + "\n";
  }
  if (meta.distance_cm) {
    out += "# distance_cm=" + format_number(*meta.distance_cm) + "\n";
  }
  out += "# units=" + to_string(meta.units) + "\n";
  if (meta.trials_averaged > 1) {
    out += "# trials_averaged=" + std::to_string(meta.trials_averaged) + "\n";
  }
  for (const Sample& s : trace.samples()) {
    out += format_number(s.t);
    out += ',';
    out += format_number(s.v);
    out += '\n';
  }
  return out;
}

void write_trace_file(const std::filesystem::path& path, const TimeSeries& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open output file: " + path.string());
  }
  out << serialize_trace(trace);
  if (!out) {
    throw std::runtime_error("failed writing trace file: " + path.string());
  }
}

double estimate_baseline(const TimeSeries& trace, std::size_t leading_samples) {
  if (leading_samples == 0) {
    throw std::invalid_argument("estimate_baseline needs at least one sample");
  }
  const std::size_t n = std::min(leading_samples, trace.size());
  if (n == 0) {
    throw std::invalid_argument("estimate_baseline on empty trace");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += trace.value_at(i);
  return sum / static_cast<double>(n);
}

TimeSeries subtract_baseline(const TimeSeries& trace, double baseline) {
  if (!std::isfinite(baseline)) {
    throw std::invalid_argument("baseline must be finite");
  }
  std::vector<Sample> samples = trace.samples();
  for (Sample& s : samples) s.v -= baseline;
  return TimeSeries(std::move(samples), trace.metadata());
}

TimeSeries normalize_peak(const TimeSeries& trace) {
  if (trace.empty()) {
    throw std::invalid_argument("normalize_peak on empty trace");
  }
  const double peak = trace.max_value();
  if (!(peak > 0.0)) {
    throw std::domain_error("normalize_peak requires a positive maximum, got " +
                            std::to_string(peak));
  }
  std::vector<Sample> samples = trace.samples();
  for (Sample& s : samples) s.v /= peak;
  TraceMetadata meta = trace.metadata();
  meta.units = SignalUnits::Normalized;
  return TimeSeries(std::move(samples), std::move(meta));
}

TrialSet::TrialSet(std::vector<TimeSeries> traces) : traces_(std::move(traces)) {
  if (traces_.empty()) {
    throw std::invalid_argument("TrialSet must not be empty");
  }
  const auto& d0 = traces_.front().metadata().distance_cm;
  for (std::size_t i = 1; i < traces_.size(); ++i) {
    if (traces_[i].metadata().distance_cm != d0) {
      throw std::invalid_argument("TrialSet trials disagree on distance (trial " +
                                  std::to_string(i) + ")");
    }
  }
}

TimeSeries average_trials(const TrialSet& set) {
  const auto& traces = set.traces();
  const TimeSeries& first = traces.front();
  for (std::size_t k = 1; k < traces.size(); ++k) {
    if (traces[k].size() != first.size()) {
      throw std::invalid_argument("average_trials: trial " + std::to_string(k) +
                                  " has a different sample count; resample first");
    }
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (traces[k].time_at(i) != first.time_at(i)) {
        throw std::invalid_argument("average_trials: trial " + std::to_string(k) +
                                    " is on a different time grid; resample first");
      }
    }
    if (traces[k].metadata().units != first.metadata().units) {
      throw std::invalid_argument("average_trials: trials mix raw and normalized units");
    }
  }

  std::vector<Sample> samples(first.size());
  const double n = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    double sum = 0.0;
    for (const TimeSeries& ts : traces) sum += ts.value_at(i);
    samples[i] = {first.time_at(i), sum / n};
  }

  TraceMetadata meta = first.metadata();
  meta.trial_id = "average";
  meta.trials_averaged = 0;
  for (const TimeSeries& ts : traces) meta.trials_averaged += ts.metadata().trials_averaged;
  return TimeSeries(std::move(samples), std::move(meta));
}

TimeSeries window(const TimeSeries& trace, double t_start, double t_end) {
  if (!(t_start < t_end)) {
    throw std::invalid_argument("window requires t_start < t_end");
  }
  std::vector<Sample> kept;
  for (const Sample& s : trace.samples()) {
    if (s.t > t_start && s.t <= t_end) kept.push_back(s);
  }
  if (kept.empty()) {
    throw std::invalid_argument("window (" + std::to_string(t_start) + ", " +
                                std::to_string(t_end) + "] contains no samples");
  }
  return TimeSeries(std::move(kept), trace.metadata());
}

TimeSeries resample(const TimeSeries& trace, const std::vector<double>& grid) {
  if (trace.size() < 1) {
    throw std::invalid_argument("resample on empty trace");
  }
  const auto& src = trace.samples();
  std::vector<Sample> samples;
  samples.reserve(grid.size());
  std::size_t j = 0;
  for (double g : grid) {
    if (g < src.front().t || g > src.back().t) {
      throw std::invalid_argument("resample: grid point " + std::to_string(g) +
                                  " outside trace span [" + std::to_string(src.front().t) +
                                  ", " + std::to_string(src.back().t) + "]");
    }
    while (j + 1 < src.size() && src[j + 1].t <= g) ++j;
    // src[j].t <= g, and g <= src[j+1].t when j+1 exists
    double v;
    if (src[j].t == g) {
      v = src[j].v;
    } else {
      const Sample& a = src[j];
      const Sample& b = src[j + 1];
      v = a.v + (b.v - a.v) * ((g - a.t) / (b.t - a.t));
    }
    samples.push_back({g, v});
  }
  return TimeSeries(std::move(samples), trace.metadata());
}

}  // namespace vchan
