#pragma once

namespace vchan {

/// Free-diffusion pulse response parameters: an instantaneous release of
/// `molecule_count` molecules observed at `distance` in an n-dimensional
/// unbounded medium.
struct DiffusionParams {
  double molecule_count = 1.0;         // M, dimensionless count, > 0
  double diffusion_coefficient = 1.0;  // D, cm^2/s, > 0
  int dimension = 1;                   // n in {1, 2, 3}
  double distance = 0.0;               // d, cm, >= 0

  void validate() const;  // throws std::invalid_argument on violation
};

/// Coefficients of the gravity-corrected vertical channel response
///
///   f(t) = (a / sqrt(t)) * exp(-b d^2 / t) - e t ,   t > 0.
///
/// The pure-diffusion part corresponds to a = M / sqrt(4 pi D) and
/// b = 1 / (4 D); that correspondence is documentation, not enforced here.
/// a and e carry normalized-signal units (the traces these coefficients are
/// fitted to are typically peak-normalized), b is s/cm^2.
struct VerticalChannelParams {
  double amplitude = 1.0;      // a > 0
  double spread = 1.0;         // b > 0
  double gravity_slope = 0.0;  // e >= 0
  double distance = 1.0;       // d, cm, >= 0

  void validate() const;
};

/// Uniformly accelerated motion, v(t) = v0 + acc * t.
struct KinematicsParams {
  double initial_velocity = 0.0;  // cm/s
  double acceleration = 0.0;      // cm/s^2, any sign
};

struct VerticalGradient {
  double d_amplitude = 0.0;      // df/da
  double d_spread = 0.0;         // df/db
  double d_gravity_slope = 0.0;  // df/de
};

/// Concentration M / (4 pi D t)^(n/2) * exp(-d^2 / (4 D t)) at time t > 0.
/// Throws std::domain_error for t <= 0.
double diffusion_response(const DiffusionParams& p, double t);

/// Vertical channel signal at time t > 0. May go negative for large t; the
/// raw signed value is returned (clamping is a presentation concern).
double vertical_response(const VerticalChannelParams& p, double t);

/// Analytic partials of vertical_response with respect to (a, b, e):
///   df/da = t^(-1/2) exp(-b d^2 / t)
///   df/db = -a d^2 t^(-3/2) exp(-b d^2 / t)
///   df/de = -t
VerticalGradient vertical_response_gradient(const VerticalChannelParams& p, double t);

/// Time t > 0 at which vertical_response attains its maximum. Requires
/// distance > 0 (with d = 0 the response is strictly decreasing and has no
/// interior peak). For gravity_slope = 0 the result equals 2 b d^2. Throws
/// std::domain_error when the gravity term keeps the response below zero
/// everywhere; the supremum then sits at t -> 0 and no maximum is attained.
///
/// Implementation: coarse log-spaced scan to bracket the peak, golden-section
/// search down to 1e-6 s, then Newton refinement on the stationarity
/// condition f'(t) = 0. Throws std::runtime_error if the search fails to
/// reach its tolerance within the iteration budget.
double peak_time(const VerticalChannelParams& p);

/// v(t) = v0 + acc * t for t >= 0. Throws std::domain_error for t < 0.
double uniform_acceleration_velocity(const KinematicsParams& k, double t);

}  // namespace vchan
