#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace vchan {

/// Whether trace values are raw sensor units or have been peak-normalized.
enum class SignalUnits { RawAnalog, Normalized };

std::string to_string(SignalUnits units);
SignalUnits signal_units_from_string(const std::string& text);

struct Sample {
  double t = 0.0;  // seconds
  double v = 0.0;  // signal units

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct TraceMetadata {
  std::string trial_id;
  std::optional<double> distance_cm;
  SignalUnits units = SignalUnits::RawAnalog;
  int trials_averaged = 1;

  friend bool operator==(const TraceMetadata&, const TraceMetadata&) = default;
};

/// Ordered (time, value) samples from a sensor trace or a model evaluation.
/// Timestamps are strictly increasing and every field is finite; the
/// constructor rejects anything else. Instances are immutable values apart
/// from their metadata and are safe to share across threads.
class TimeSeries {
 public:
  TimeSeries() = default;
  explicit TimeSeries(std::vector<Sample> samples, TraceMetadata metadata = {});

  const std::vector<Sample>& samples() const { return samples_; }
  const TraceMetadata& metadata() const { return metadata_; }
  TraceMetadata& metadata() { return metadata_; }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  double time_at(std::size_t i) const { return samples_[i].t; }
  double value_at(std::size_t i) const { return samples_[i].v; }

  /// Index of the maximum value (first one on ties).
  std::size_t argmax() const;
  double max_value() const;

  double start_time() const { return samples_.front().t; }
  double end_time() const { return samples_.back().t; }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<Sample> samples_;
  TraceMetadata metadata_;
};

}  // namespace vchan
