#include "common.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "vchan/trace_pipeline.hpp"

namespace vchan::cli {

OutputFormat output_format_from_string(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw std::invalid_argument("unknown format '" + text + "' (expected csv or json)");
}

const char* file_extension(OutputFormat format) {
  return format == OutputFormat::Json ? ".json" : ".csv";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

RunContext::RunContext(std::string subcommand,
                       std::optional<std::filesystem::path> output_dir,
                       OutputFormat format)
    : output_dir_(std::move(output_dir)),
      format_(format),
      start_(std::chrono::steady_clock::now()) {
  manifest_["schema"] = "1";
  manifest_["subcommand"] = std::move(subcommand);
  manifest_["inputs"] = nlohmann::json::array();
  manifest_["outputs"] = nlohmann::json::array();
}

void RunContext::set_config(nlohmann::json config) {
  manifest_["config"] = std::move(config);
}

std::string RunContext::read_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open input file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = std::move(buf).str();
  manifest_["inputs"].push_back(
      {{"path", path.string()}, {"fnv1a64", fnv1a64_hex(bytes)}});
  return bytes;
}

void RunContext::write_output(const std::string& name, const std::string& bytes) {
  if (!output_dir_) {
    throw std::logic_error("write_output called without an output directory");
  }
  std::filesystem::create_directories(*output_dir_);
  const std::filesystem::path path = *output_dir_ / name;
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << bytes) || !out.flush()) {
    throw std::runtime_error("cannot write output file: " + path.string());
  }
  manifest_["outputs"].push_back(name);
}

void RunContext::finalize(bool success, const std::string& error) {
  if (finalized_) return;
  finalized_ = true;
  manifest_["success"] = success;
  if (!success) manifest_["error"] = error;
  manifest_["duration_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  if (!output_dir_) return;
  std::filesystem::create_directories(*output_dir_);
  std::ofstream out(*output_dir_ / "manifest.json", std::ios::binary);
  out << manifest_.dump(2) << '\n';
}

std::vector<double> make_time_grid(double t_start, double t_end, double rate_hz) {
  if (!(rate_hz > 0.0)) {
    throw std::invalid_argument("--rate must be positive");
  }
  if (!(t_end > t_start)) {
    throw std::invalid_argument("--t-end must be greater than --t-start");
  }
  constexpr std::size_t kMaxPoints = 10'000'000;
  std::vector<double> grid;
  for (std::size_t k = 1;; ++k) {
    const double t = t_start + static_cast<double>(k) / rate_hz;
    if (t > t_end) break;
    if (grid.size() >= kMaxPoints) {
      throw std::invalid_argument("time grid exceeds 10^7 points; reduce --rate or "
                                  "narrow the window");
    }
    grid.push_back(t);
  }
  if (grid.empty()) {
    throw std::invalid_argument("empty time grid: no sample point falls in (" +
                                format_double(t_start) + ", " + format_double(t_end) +
                                "] at " + format_double(rate_hz) + " Hz");
  }
  return grid;
}

nlohmann::json trace_to_json(const TimeSeries& trace) {
  nlohmann::json j;
  j["schema"] = "1";
  j["trial_id"] = trace.metadata().trial_id;
  if (trace.metadata().distance_cm) j["distance_cm"] = *trace.metadata().distance_cm;
  j["units"] = to_string(trace.metadata().units);
  j["trials_averaged"] = trace.metadata().trials_averaged;
  auto& samples = j["samples"] = nlohmann::json::array();
  for (const Sample& s : trace.samples()) samples.push_back({s.t, s.v});
  return j;
}

std::string trace_payload(const TimeSeries& trace, OutputFormat format) {
  if (format == OutputFormat::Json) return trace_to_json(trace).dump(2) + "\n";
  return serialize_trace(trace);
}

std::string sanitize_for_filename(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    if (!keep) c = '_';
  }
  return out;
}

}  // namespace vchan::cli
