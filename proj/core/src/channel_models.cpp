#include "vchan/channel_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vchan {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Golden-section constants for peak_time (absolute time tolerance, budget).
constexpr double kPeakBracketLow = 1e-6;   // s
constexpr double kPeakTolerance = 1e-6;    // s
constexpr int kPeakIterationBudget = 200;

void require_positive_time(double t) {
  if (!(t > 0.0)) {
    throw std::domain_error("time must be > 0, got " + std::to_string(t));
  }
  if (!std::isfinite(t)) {
    throw std::domain_error("time must be finite");
  }
}

// First derivative of the vertical response with respect to t.
double vertical_slope(const VerticalChannelParams& p, double t) {
  const double c = p.spread * p.distance * p.distance;
  const double decay = std::exp(-c / t);
  return p.amplitude * decay * (c * std::pow(t, -2.5) - 0.5 * std::pow(t, -1.5)) -
         p.gravity_slope;
}

// Second derivative with respect to t.
double vertical_curvature(const VerticalChannelParams& p, double t) {
  const double c = p.spread * p.distance * p.distance;
  const double decay = std::exp(-c / t);
  const double inner = c * std::pow(t, -2.5) - 0.5 * std::pow(t, -1.5);
  return p.amplitude * decay *
         ((c / (t * t)) * inner - 2.5 * c * std::pow(t, -3.5) + 0.75 * std::pow(t, -2.5));
}

}  // namespace

void DiffusionParams::validate() const {
  if (!(molecule_count > 0.0) || !std::isfinite(molecule_count)) {
    throw std::invalid_argument("molecule_count must be positive and finite");
  }
  if (!(diffusion_coefficient > 0.0) || !std::isfinite(diffusion_coefficient)) {
    throw std::invalid_argument("diffusion_coefficient must be positive and finite");
  }
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
  if (!(distance >= 0.0) || !std::isfinite(distance)) {
    throw std::invalid_argument("distance must be >= 0 and finite");
  }
}

void VerticalChannelParams::validate() const {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw std::invalid_argument("amplitude must be positive and finite");
  }
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    throw std::invalid_argument("spread must be positive and finite");
  }
  if (!(gravity_slope >= 0.0) || !std::isfinite(gravity_slope)) {
    throw std::invalid_argument("gravity_slope must be >= 0 and finite");
  }
  if (!(distance >= 0.0) || !std::isfinite(distance)) {
    throw std::invalid_argument("distance must be >= 0 and finite");
  }
}

double diffusion_response(const DiffusionParams& p, double t) {
  p.validate();
  require_positive_time(t);
  const double x = 4.0 * kPi * p.diffusion_coefficient * t;
  double norm;
  switch (p.dimension) {
    case 1: norm = std::sqrt(x); break;
    case 2: norm = x; break;
    default: norm = x * std::sqrt(x); break;
  }
  const double arg = p.distance * p.distance / (4.0 * p.diffusion_coefficient * t);
  return p.molecule_count / norm * std::exp(-arg);
}

double vertical_response(const VerticalChannelParams& p, double t) {
  p.validate();
  require_positive_time(t);
  const double arg = p.spread * p.distance * p.distance / t;
  return p.amplitude / std::sqrt(t) * std::exp(-arg) - p.gravity_slope * t;
}

VerticalGradient vertical_response_gradient(const VerticalChannelParams& p, double t) {
  p.validate();
  require_positive_time(t);
  const double d2 = p.distance * p.distance;
  const double decay = std::exp(-p.spread * d2 / t);
  VerticalGradient g;
  g.d_amplitude = decay / std::sqrt(t);
  g.d_spread = -p.amplitude * d2 * std::pow(t, -1.5) * decay;
  g.d_gravity_slope = -t;
  return g;
}

double peak_time(const VerticalChannelParams& p) {
  p.validate();
  if (!(p.distance > 0.0)) {
    throw std::invalid_argument("peak_time requires distance > 0 (the response has no "
                                "interior maximum at d = 0)");
  }

  const double diffusion_peak = 2.0 * p.spread * p.distance * p.distance;
  const double t_lo = kPeakBracketLow;
  const double t_hi = std::max(10.0 * diffusion_peak, 100.0);
  const auto f = [&](double t) { return vertical_response(p, t); };

  // Coarse log-spaced scan to isolate the peak. The -e*t term makes the
  // response dip before the diffusion pulse rises, so a blind golden section
  // over (t_lo, t_hi) is not guaranteed a unimodal interval.
  constexpr int kScanPoints = 128;
  const double log_lo = std::log(t_lo);
  const double step = (std::log(t_hi) - log_lo) / (kScanPoints - 1);
  double best_f = f(t_lo);
  int best_i = 0;
  for (int i = 1; i < kScanPoints; ++i) {
    const double t = std::exp(log_lo + i * step);
    const double ft = f(t);
    if (ft > best_f) {
      best_f = ft;
      best_i = i;
    }
  }
  const double scan_lo = std::exp(log_lo + std::max(best_i - 1, 0) * step);
  const double scan_hi = std::exp(log_lo + std::min(best_i + 1, kScanPoints - 1) * step);
  double lo = scan_lo;
  double hi = scan_hi;

  // Golden-section search on the bracketed interval.
  constexpr double kInvPhi = 0.6180339887498949;
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int used = 0;
  while (hi - lo > kPeakTolerance) {
    if (++used > kPeakIterationBudget) {
      throw std::runtime_error("peak_time: golden-section search did not reach tolerance "
                               "within the iteration budget");
    }
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  double t = 0.5 * (lo + hi);

  // Newton refinement on f'(t) = 0, safeguarded to the scan bracket. The
  // golden section alone stops at kPeakTolerance, far short of the closed
  // form 2 b d^2 that the e = 0 case must reproduce.
  double slope = vertical_slope(p, t);
  for (int i = 0; i < 60; ++i) {
    const double curv = vertical_curvature(p, t);
    if (!(curv < 0.0) || !std::isfinite(slope)) break;  // not locally concave
    const double dt = slope / curv;
    double next = t - dt;
    if (!(next > scan_lo && next < scan_hi)) break;
    const double next_slope = vertical_slope(p, next);
    if (!std::isfinite(next_slope) || std::abs(next_slope) > std::abs(slope)) break;
    t = next;
    slope = next_slope;
    if (std::abs(dt) <= 1e-14 * std::max(1.0, t)) break;
  }

  // With a strong gravity term the response stays below zero everywhere and
  // only approaches its supremum (zero) as t -> 0: there is no maximum to
  // report, and whatever the search settled on would be meaningless.
  if (!(f(t) > 0.0)) {
    throw std::domain_error("peak_time: the gravity term keeps the response below zero "
                            "everywhere, so no maximum is attained");
  }
  return t;
}

double uniform_acceleration_velocity(const KinematicsParams& k, double t) {
  if (!std::isfinite(k.initial_velocity) || !std::isfinite(k.acceleration)) {
    throw std::invalid_argument("kinematics parameters must be finite");
  }
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::domain_error("time must be >= 0 and finite");
  }
  return k.initial_velocity + k.acceleration * t;
}

}  // namespace vchan
