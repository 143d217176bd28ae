#pragma once

#include <span>

#include "subdiv/systems.hpp"

namespace subdiv {

// Macro step h split into N equal Euler substeps of size theta = h/N.
class EulerParams {
 public:
  EulerParams(double h, unsigned substeps);

  double h() const { return h_; }
  unsigned substeps() const { return substeps_; }
  double theta() const { return h_ / substeps_; }

 private:
  double h_;
  unsigned substeps_;
};

// phi_E(-h, x): N explicit Euler steps of the time-reversed field,
// y <- y - theta g(y).
Point euler_backward(const ContinuousSystem& sys, std::span<const double> x, const EulerParams& p);

// r = e^{Lh} varrho + P h (e^{Lh} - 1) / (2N): radius of a max-norm ball
// around phi_E(-h, z) that contains phi(-h, x) for every x within varrho
// of z.
double enclosure_radius(double L, double P, double h, unsigned substeps, double subdiameter);

// |h^-1 (phi_E(-h, x) - x) + g(x)|, bounded by L P h / 2.
double euler_defect(const ContinuousSystem& sys, std::span<const double> x, const EulerParams& p);

// Classical RK4 on the time-reversed field with a fixed number of steps.
Point rk4_backward(const ContinuousSystem& sys, std::span<const double> x, double h, unsigned steps);

// Numerical stand-in for the exact phi(-h, x): RK4 with step doubling and
// Richardson extrapolation, steps capped at h/100, accumulated local error
// estimate below tol. An oracle, not an enclosure.
Point reference_backward_flow(const ContinuousSystem& sys, std::span<const double> x, double h,
                              double tol = 1e-10);

}  // namespace subdiv
