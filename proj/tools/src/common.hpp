#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vchan/time_series.hpp"

namespace vchan::cli {

enum class OutputFormat { Csv, Json };

OutputFormat output_format_from_string(const std::string& text);
const char* file_extension(OutputFormat format);

/// %.9g, the same precision the trace CSV serializer uses.
std::string format_double(double v);

/// FNV-1a 64-bit digest, hex encoded. Fast, dependency-free fingerprint for
/// the run manifest; not a cryptographic hash.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

/// State threaded through one subcommand run: where outputs go, the payload
/// format, and the manifest under construction. The manifest records the
/// resolved configuration, digests of every input read, the list of files
/// written, success or failure, and the wall-clock duration; it is written
/// as manifest.json next to the outputs whenever an output directory is set.
class RunContext {
 public:
  RunContext(std::string subcommand, std::optional<std::filesystem::path> output_dir,
             OutputFormat format);

  bool writes_files() const { return output_dir_.has_value(); }
  OutputFormat format() const { return format_; }

  /// Resolved configuration with all defaults materialized.
  void set_config(nlohmann::json config);

  /// Read a whole file, record its digest. The digest covers the exact bytes
  /// parsed (the file is read once, here).
  std::string read_input(const std::filesystem::path& path);

  /// Write `bytes` to `name` under the output directory and record it.
  /// Requires an output directory.
  void write_output(const std::string& name, const std::string& bytes);

  /// Stamp success/error and duration, then write manifest.json if an output
  /// directory is set. Call exactly once, on both success and failure paths.
  void finalize(bool success, const std::string& error);

 private:
  std::optional<std::filesystem::path> output_dir_;
  OutputFormat format_;
  std::chrono::steady_clock::time_point start_;
  nlohmann::json manifest_;
  bool finalized_ = false;
};

/// Sampling grid t_start + k/rate_hz for k = 1, 2, ... while t <= t_end;
/// the half-open start excludes the models' t = 0 singularity. Throws on an
/// empty grid or one over 10^7 points.
std::vector<double> make_time_grid(double t_start, double t_end, double rate_hz);

nlohmann::json trace_to_json(const TimeSeries& trace);

/// Trace rendered in the requested format (CSV per the trace format, or the
/// JSON object from trace_to_json).
std::string trace_payload(const TimeSeries& trace, OutputFormat format);

/// File-name-safe version of a trial id: [A-Za-z0-9_-] kept, the rest '_'.
std::string sanitize_for_filename(const std::string& id);

}  // namespace vchan::cli
