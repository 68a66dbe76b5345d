#pragma once

#include "relusgd/input_model.hpp"
#include "relusgd/network.hpp"
#include "relusgd/risk.hpp"

// The Lyapunov function V(phi) = ||phi||^2 + |c - 2 xi|^2, its gradient, the
// exact pairing/descent identities it satisfies along generalized-gradient
// steps, and the two step-size bounds derived from it.

namespace relusgd {

double lyapunov_value(const ParamVector& phi, double xi);

GradientVector lyapunov_gradient(const ParamVector& phi, double xi);

struct LyapunovReport {
  double lyapunov = 0.0;     // V(phi)
  double pairing = 0.0;      // <grad V(phi), g>
  double eight_risk = 0.0;   // 8 * risk
  double descent_lhs = 0.0;  // V(phi - step g) - V(phi)
  double descent_rhs = 0.0;  // step^2 ||g||^2 + step^2 g_dd^2 - 8 step risk
};

// <grad V, G^n> = 8 L^n; exact up to rounding.
LyapunovReport pairing_identity(const ParamVector& phi,
                                const EmpiricalBatch& batch, double xi);

// <grad V, G> = 8 L for a constant target; tolerance is tight only on the
// exact integration backends.
LyapunovReport pairing_identity_true(const ParamVector& phi,
                                     const RiskModel& model);

// Both sides of V(theta - step G^n) - V(theta)
//   = step^2 ||G^n||^2 + step^2 |G^n_dd|^2 - 8 step L^n.
LyapunovReport descent_identity(const ParamVector& theta, double step,
                                const EmpiricalBatch& batch, double xi);

// [ a^2 (d+1) V(phi0) + 1 ]^-1
double step_bound_v(const ParamVector& phi0, double domain_bound,
                    int input_dim, double xi);

// [ 18 A^5 (||phi0|| + 1)^2 ]^-1 with A = max{a, |xi|, d}.
double step_bound_a(const ParamVector& phi0, double domain_bound, double xi,
                    int input_dim);

}  // namespace relusgd
