#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "vchan/channel_models.hpp"
#include "vchan/time_series.hpp"

namespace vchan {

/// Levenberg-Marquardt controls for fitting the vertical model's (a, b, e).
///
/// When initial_guess is unset it is derived from the data: with t_pk the
/// observed peak time and v_pk the peak value,
///   a0 = v_pk * sqrt(t_pk),  b0 = t_pk / (2 d^2),  e0 = 0.01,
/// which inverts the e = 0 peak-time formula and lands in the right basin
/// even when a and b differ by orders of magnitude.
struct FitConfig {
  std::optional<std::array<double, 3>> initial_guess;  // {a0, b0, e0}
  int max_iterations = 200;
  double cost_tolerance = 1e-10;  // stop when the relative cost decrease of an
                                  // accepted step falls below this
  double step_tolerance = 1e-10;  // stop when |step| <= step_tolerance * (|params| +
                                  // step_tolerance)
  double initial_damping = 1e-3;
  double damping_up_factor = 10.0;
  double damping_down_factor = 0.1;
  std::array<double, 3> lower_bounds = {1e-12, 1e-12, 0.0};  // a, b, e

  void validate() const;
};

struct FitResult {
  VerticalChannelParams params;
  double residual_sum_of_squares = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Cost after each accepted step, starting with the cost at the initial
  /// guess. Non-increasing by construction.
  std::vector<double> per_iteration_cost;
};

/// Fit (a, b, e) of the vertical model to a trace at fixed distance d by
/// damped Gauss-Newton steps with Marquardt scaling (lambda * diag(JtJ)) and
/// the analytic Jacobian. Parameters are kept inside the lower-bound box by
/// projection. Needs >= 4 samples, all with t > 0, and d > 0.
///
/// Failure to decrease the cost from the initial guess after exhausting the
/// damping escalation is reported as converged = false, not an exception.
FitResult fit_vertical_model(const TimeSeries& trace, double distance,
                             const FitConfig& cfg = {});

/// Same, on raw samples in any order (they are sorted by time internally, so
/// the result is independent of input order).
FitResult fit_vertical_model(std::span<const Sample> samples, double distance,
                             const FitConfig& cfg = {});

/// Arithmetic mean of the fitted coefficients across trials. All results
/// must be converged and share the same distance.
VerticalChannelParams average_fit(const std::vector<FitResult>& results);

/// One damped normal-equations step: solves
///   (JtJ + lambda * diag(JtJ)) * step = -gradient
/// by Gaussian elimination with partial pivoting. Returns nullopt when the
/// damped matrix is numerically singular. With lambda = 0 this is the pure
/// Gauss-Newton step; as lambda grows the step turns toward scaled steepest
/// descent. Exposed for diagnostics and tests.
std::optional<std::array<double, 3>> solve_damped_normal_equations(
    const std::array<std::array<double, 3>, 3>& jtj, const std::array<double, 3>& gradient,
    double lambda);

}  // namespace vchan
