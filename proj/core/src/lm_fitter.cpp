#include "vchan/lm_fitter.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <stdexcept>

namespace vchan {
namespace {

constexpr double kMaxDamping = 1e14;
constexpr double kMinDamping = 1e-12;

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

double norm(const Vec3& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

Vec3 clamp_to_bounds(Vec3 p, const Vec3& lower) {
  for (int i = 0; i < 3; ++i) p[i] = std::max(p[i], lower[i]);
  return p;
}

VerticalChannelParams make_params(const Vec3& p, double distance) {
  return VerticalChannelParams{p[0], p[1], p[2], distance};
}

double cost_at(const Vec3& p, double distance, std::span<const Sample> samples) {
  const VerticalChannelParams vp = make_params(p, distance);
  double cost = 0.0;
  for (const Sample& s : samples) {
    const double r = s.v - vertical_response(vp, s.t);
    cost += r * r;
  }
  return cost;
}

// JtJ and Jt*r for residuals r_i = v_i - f(p, t_i); the residual Jacobian is
// the negated model gradient, which cancels in JtJ and flips Jt*r.
void normal_equations(const Vec3& p, double distance, std::span<const Sample> samples,
                      Mat3& jtj, Vec3& grad) {
  jtj = {};
  grad = {};
  const VerticalChannelParams vp = make_params(p, distance);
  for (const Sample& s : samples) {
    const VerticalGradient g = vertical_response_gradient(vp, s.t);
    const Vec3 row = {g.d_amplitude, g.d_spread, g.d_gravity_slope};
    const double r = s.v - vertical_response(vp, s.t);
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) jtj[i][j] += row[i] * row[j];
      grad[i] -= row[i] * r;  // d(cost)/2 d p_i
    }
  }
  jtj[1][0] = jtj[0][1];
  jtj[2][0] = jtj[0][2];
  jtj[2][1] = jtj[1][2];
}

Vec3 default_initial_guess(std::span<const Sample> samples, double distance,
                           const Vec3& lower) {
  std::size_t peak = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].v > samples[peak].v) peak = i;
  }
  const double t_pk = samples[peak].t;
  const double v_pk = std::max(samples[peak].v, 1e-3);
  Vec3 p = {v_pk * std::sqrt(t_pk), t_pk / (2.0 * distance * distance), 0.01};
  return clamp_to_bounds(p, lower);
}

}  // namespace

void FitConfig::validate() const {
  if (max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be >= 1");
  }
  if (!(cost_tolerance > 0.0) || !(step_tolerance > 0.0)) {
    throw std::invalid_argument("tolerances must be positive");
  }
  if (!(initial_damping > 0.0) || !std::isfinite(initial_damping)) {
    throw std::invalid_argument("initial_damping must be positive and finite");
  }
  if (!(damping_up_factor > 1.0) || !(damping_down_factor > 0.0) ||
      !(damping_down_factor < 1.0)) {
    throw std::invalid_argument("damping factors must satisfy up > 1 > down > 0");
  }
  if (!(lower_bounds[0] > 0.0) || !(lower_bounds[1] > 0.0) || !(lower_bounds[2] >= 0.0)) {
    throw std::invalid_argument("lower bounds must keep a > 0, b > 0, e >= 0");
  }
  if (initial_guess) {
    for (double v : *initial_guess) {
      if (!std::isfinite(v)) throw std::invalid_argument("initial_guess must be finite");
    }
  }
}

std::optional<Vec3> solve_damped_normal_equations(const Mat3& jtj, const Vec3& gradient,
                                                  double lambda) {
  // Marquardt scaling: damp each diagonal entry proportionally so the step
  // stays sane when a and b live on different scales. A zero diagonal entry
  // falls back to the largest one so damping still regularizes.
  double max_diag = 0.0;
  for (int i = 0; i < 3; ++i) max_diag = std::max(max_diag, jtj[i][i]);
  if (!(max_diag > 0.0)) return std::nullopt;

  double a[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = jtj[i][j];
    const double diag = jtj[i][i] > 0.0 ? jtj[i][i] : max_diag;
    a[i][i] += lambda * diag;
    a[i][3] = -gradient[i];
  }

  // Gaussian elimination with partial pivoting on the 3x4 tableau.
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    if (std::abs(a[pivot][col]) < 1e-300) return std::nullopt;
    if (pivot != col) std::swap(a[pivot], a[col]);
    for (int row = col + 1; row < 3; ++row) {
      const double factor = a[row][col] / a[col][col];
      for (int j = col; j < 4; ++j) a[row][j] -= factor * a[col][j];
    }
  }
  Vec3 x{};
  for (int i = 2; i >= 0; --i) {
    double rhs = a[i][3];
    for (int j = i + 1; j < 3; ++j) rhs -= a[i][j] * x[j];
    x[i] = rhs / a[i][i];
  }
  for (double v : x) {
    if (!std::isfinite(v)) return std::nullopt;
  }
  return x;
}

FitResult fit_vertical_model(std::span<const Sample> samples, double distance,
                             const FitConfig& cfg) {
  cfg.validate();
  if (!(distance > 0.0) || !std::isfinite(distance)) {
    throw std::invalid_argument("fit_vertical_model requires distance > 0");
  }
  if (samples.size() < 4) {
    throw std::invalid_argument("fit_vertical_model needs at least 4 samples, got " +
                                std::to_string(samples.size()));
  }
  std::vector<Sample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), [](const Sample& x, const Sample& y) {
    return x.t != y.t ? x.t < y.t : x.v < y.v;
  });
  for (const Sample& s : sorted) {
    if (!(s.t > 0.0)) {
      throw std::invalid_argument("fit_vertical_model requires all sample times > 0");
    }
    if (!std::isfinite(s.t) || !std::isfinite(s.v)) {
      throw std::invalid_argument("fit_vertical_model requires finite samples");
    }
  }

  const Vec3 lower = cfg.lower_bounds;
  Vec3 p = cfg.initial_guess ? clamp_to_bounds(*cfg.initial_guess, lower)
                             : default_initial_guess(sorted, distance, lower);

  FitResult result;
  double cost = cost_at(p, distance, sorted);
  result.per_iteration_cost.push_back(cost);

  double lambda = cfg.initial_damping;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    result.iterations = iter;

    Mat3 jtj;
    Vec3 grad;
    normal_equations(p, distance, sorted, jtj, grad);

    bool stepped = false;
    while (lambda <= kMaxDamping) {
      const auto step = solve_damped_normal_equations(jtj, grad, lambda);
      if (!step) {
        lambda *= cfg.damping_up_factor;
        continue;
      }
      if (norm(*step) <= cfg.step_tolerance * (norm(p) + cfg.step_tolerance)) {
        result.converged = true;  // cannot move further
        break;
      }
      const Vec3 trial = clamp_to_bounds({p[0] + (*step)[0], p[1] + (*step)[1],
                                          p[2] + (*step)[2]},
                                         lower);
      const double trial_cost = cost_at(trial, distance, sorted);
      if (trial_cost < cost) {
        const double decrease = (cost - trial_cost) / std::max(cost, DBL_MIN);
        p = trial;
        cost = trial_cost;
        result.per_iteration_cost.push_back(cost);
        lambda = std::max(lambda * cfg.damping_down_factor, kMinDamping);
        stepped = true;
        if (decrease <= cfg.cost_tolerance) result.converged = true;
        break;
      }
      lambda *= cfg.damping_up_factor;
    }
    if (result.converged || !stepped) break;
  }

  result.params = make_params(p, distance);
  result.residual_sum_of_squares = cost;
  return result;
}

FitResult fit_vertical_model(const TimeSeries& trace, double distance, const FitConfig& cfg) {
  return fit_vertical_model(std::span<const Sample>(trace.samples()), distance, cfg);
}

VerticalChannelParams average_fit(const std::vector<FitResult>& results) {
  if (results.empty()) {
    throw std::invalid_argument("average_fit needs at least one result");
  }
  const double d = results.front().params.distance;
  Vec3 sum = {};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const FitResult& r = results[i];
    if (!r.converged) {
      throw std::invalid_argument("average_fit: result " + std::to_string(i) +
                                  " did not converge");
    }
    if (r.params.distance != d) {
      throw std::invalid_argument("average_fit: result " + std::to_string(i) +
                                  " has a different distance");
    }
    sum[0] += r.params.amplitude;
    sum[1] += r.params.spread;
    sum[2] += r.params.gravity_slope;
  }
  const double n = static_cast<double>(results.size());
  return VerticalChannelParams{sum[0] / n, sum[1] / n, sum[2] / n, d};
}

}  // namespace vchan
