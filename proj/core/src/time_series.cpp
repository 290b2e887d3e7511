#include "vchan/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vchan {

std::string to_string(SignalUnits units) {
  return units == SignalUnits::Normalized ? "normalized" : "raw-analog";
}

SignalUnits signal_units_from_string(const std::string& text) {
  if (text == "raw-analog") return SignalUnits::RawAnalog;
  if (text == "normalized") return SignalUnits::Normalized;
  throw std::invalid_argument("unknown units tag '" + text +
                              "' (expected raw-analog or normalized)");
}

TimeSeries::TimeSeries(std::vector<Sample> samples, TraceMetadata metadata)
    : samples_(std::move(samples)), metadata_(std::move(metadata)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i].t) || !std::isfinite(samples_[i].v)) {
      throw std::invalid_argument("non-finite sample at index " + std::to_string(i));
    }
    if (i > 0 && samples_[i].t <= samples_[i - 1].t) {
      throw std::invalid_argument("timestamps must be strictly increasing (index " +
                                  std::to_string(i) + ": " + std::to_string(samples_[i - 1].t) +
                                  " -> " + std::to_string(samples_[i].t) + ")");
    }
  }
  if (metadata_.distance_cm && !std::isfinite(*metadata_.distance_cm)) {
    throw std::invalid_argument("distance_cm must be finite");
  }
  if (metadata_.trials_averaged < 1) {
    throw std::invalid_argument("trials_averaged must be >= 1");
  }
}

std::size_t TimeSeries::argmax() const {
  if (samples_.empty()) throw std::logic_error("argmax of empty trace");
  auto it = std::max_element(samples_.begin(), samples_.end(),
                             [](const Sample& a, const Sample& b) { return a.v < b.v; });
  return static_cast<std::size_t>(it - samples_.begin());
}

double TimeSeries::max_value() const { return samples_[argmax()].v; }

}  // namespace vchan
