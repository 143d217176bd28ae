#include "subdiv/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace subdiv {

EulerParams::EulerParams(double h, unsigned substeps) : h_(h), substeps_(substeps) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("Euler step h must be positive");
  if (substeps == 0) throw std::invalid_argument("Euler substeps must be at least 1");
}

Point euler_backward(const ContinuousSystem& sys, std::span<const double> x, const EulerParams& p) {
  const std::size_t d = sys.dim();
  Point y(x.begin(), x.end()), g(d), scratch(d);
  const double theta = p.theta();
  for (unsigned k = 0; k < p.substeps(); ++k) {
    eval_field(sys, y, g, scratch);
    for (std::size_t i = 0; i < d; ++i) y[i] -= theta * g[i];
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw EvaluationError("Euler iterate became non-finite");
  }
  return y;
}

double enclosure_radius(double L, double P, double h, unsigned substeps, double subdiameter) {
  if (L < 0.0 || P < 0.0 || subdiameter < 0.0) {
    throw std::invalid_argument("enclosure radius needs nonnegative L, P and subdiameter");
  }
  if (!(h > 0.0)) throw std::invalid_argument("enclosure radius needs h > 0");
  if (substeps == 0) throw std::invalid_argument("enclosure radius needs N >= 1");
  const double growth = std::exp(L * h);
  return growth * subdiameter + P * h * std::expm1(L * h) / (2.0 * substeps);
}

double euler_defect(const ContinuousSystem& sys, std::span<const double> x, const EulerParams& p) {
  const Point y = euler_backward(sys, x, p);
  const Point g = eval_field(sys, x);
  double m = 0.0;
  for (std::size_t i = 0; i < sys.dim(); ++i) m = std::max(m, std::abs((y[i] - x[i]) / p.h() + g[i]));
  return m;
}

namespace {

struct Rk4Stepper {
  const ContinuousSystem& sys;
  std::size_t d;
  Point k1, k2, k3, k4, tmp, scratch;

  explicit Rk4Stepper(const ContinuousSystem& s)
      : sys(s), d(s.dim()), k1(d), k2(d), k3(d), k4(d), tmp(d), scratch(d) {}

  // One step of size s of y' = -g(y).
  void step(Point& y, double s) {
    eval_field(sys, y, k1, scratch);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] - 0.5 * s * k1[i];
    eval_field(sys, tmp, k2, scratch);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] - 0.5 * s * k2[i];
    eval_field(sys, tmp, k3, scratch);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = y[i] - s * k3[i];
    eval_field(sys, tmp, k4, scratch);
    for (std::size_t i = 0; i < d; ++i) y[i] -= s / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
};

}  // namespace

Point rk4_backward(const ContinuousSystem& sys, std::span<const double> x, double h, unsigned steps) {
  if (steps == 0) throw std::invalid_argument("RK4 needs at least one step");
  Rk4Stepper stepper(sys);
  Point y(x.begin(), x.end());
  for (unsigned i = 0; i < steps; ++i) stepper.step(y, h / steps);
  return y;
}

Point reference_backward_flow(const ContinuousSystem& sys, std::span<const double> x, double h,
                              double tol) {
  if (h < 0.0) throw std::invalid_argument("reference flow duration must be nonnegative");
  Point y(x.begin(), x.end());
  if (h == 0.0) return y;

  Rk4Stepper stepper(sys);
  const double max_step = h / 100.0;
  const double min_step = h * 1e-12;
  double step = max_step;
  double t = 0.0;
  Point full(y.size()), half(y.size());
  while (t < h) {
    const double s = std::min(step, h - t);
    full = y;
    stepper.step(full, s);
    half = y;
    stepper.step(half, 0.5 * s);
    stepper.step(half, 0.5 * s);
    const double err = max_norm_distance(full, half) / 15.0;
    // Below this the estimate is rounding noise of the state itself.
    const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, max_norm(y));
    const double allowed = std::max(tol * s / h, noise);
    if (err <= allowed) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = half[i] + (half[i] - full[i]) / 15.0;
      t = (s == h - t) ? h : t + s;
      const double grow = err > 0.0 ? 0.9 * std::pow(allowed / err, 0.2) : 2.0;
      step = std::min(max_step, s * std::clamp(grow, 1.0, 2.0));
    } else {
      step = s * std::max(0.1, 0.9 * std::pow(allowed / err, 0.2));
      if (step < min_step) throw EvaluationError("reference integrator step size underflow");
    }
    for (double v : y) {
      if (!std::isfinite(v)) throw EvaluationError("reference trajectory became non-finite");
    }
  }
  return y;
}

}  // namespace subdiv
