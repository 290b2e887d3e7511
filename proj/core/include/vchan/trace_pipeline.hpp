#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vchan/time_series.hpp"

namespace vchan {

/// Default fitting window, seconds. Samples with 0 < t <= 11 are kept.
inline constexpr double kDefaultWindowStart = 0.0;
inline constexpr double kDefaultWindowEnd = 11.0;

/// Parse the trace CSV format: optional '#' comment lines carrying
/// key=value metadata (trial_id, distance_cm, units, trials_averaged),
/// then rows "t_seconds,value" with '.' as decimal separator.
/// Rejects malformed rows, non-numeric fields, non-increasing timestamps
/// and inputs with no data rows.
TimeSeries parse_trace(std::istream& in);
TimeSeries parse_trace(const std::string& text);
TimeSeries parse_trace_file(const std::filesystem::path& path);

/// Serialize to the trace CSV format with 9 significant digits. Serialized
/// text is a fixed point: parsing it and serializing again is byte-identical,
/// and any trace whose values came from the format (every parsed trace) is
/// recovered exactly by parse_trace. Values carrying more than 9 significant
/// digits are rounded once, on first serialization.
std::string serialize_trace(const TimeSeries& trace);
void write_trace_file(const std::filesystem::path& path, const TimeSeries& trace);

/// Mean of the first `leading_samples` values; the sensor's resting level
/// before a release.
double estimate_baseline(const TimeSeries& trace, std::size_t leading_samples = 5);

/// Subtract a constant baseline from every value. Metadata is preserved.
TimeSeries subtract_baseline(const TimeSeries& trace, double baseline);

/// Divide every value by the trace maximum so the peak is exactly 1 and tag
/// the result as normalized. Throws std::domain_error if the maximum is not
/// positive. Idempotent, and the argmax sample index is unchanged.
TimeSeries normalize_peak(const TimeSeries& trace);

/// A set of trials of the same experiment: non-empty, all sharing the same
/// metadata distance.
class TrialSet {
 public:
  explicit TrialSet(std::vector<TimeSeries> traces);
  const std::vector<TimeSeries>& traces() const { return traces_; }

 private:
  std::vector<TimeSeries> traces_;
};

/// Pointwise arithmetic mean across trials. All traces must already share an
/// identical sampling grid (use resample first); mismatched grids are an
/// error. The result's metadata records how many trials went in.
TimeSeries average_trials(const TrialSet& set);

/// Keep samples with t_start < t <= t_end. The half-open lower edge excludes
/// the t = 0 model singularity. Throws if the window is empty of samples.
TimeSeries window(const TimeSeries& trace, double t_start, double t_end);

/// Linear interpolation onto `grid` (strictly increasing, inside the trace's
/// time span; no extrapolation). Grid points that hit existing timestamps
/// reproduce the stored values exactly.
TimeSeries resample(const TimeSeries& trace, const std::vector<double>& grid);

}  // namespace vchan
