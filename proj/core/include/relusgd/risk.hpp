#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>

#include "relusgd/input_model.hpp"
#include "relusgd/network.hpp"

// Risk and gradient quantities: the empirical risk and its exact smoothed
// gradient, the generalized (limit) empirical gradient, and the true risk
// with its generalized gradient.  The generalized gradients are implemented
// directly from their closed forms -- indicator-restricted sums/integrals
// with the exact ReLU -- not as runtime limits; the limit construction
// survives as the gradient_limit_gap verification path.

namespace relusgd {

class TargetSpec {
 public:
  static TargetSpec constant(double value);
  static TargetSpec continuous(std::function<double(std::span<const double>)> f);

  bool is_constant() const { return constant_; }
  double constant_value() const;  // throws unless constant
  double operator()(std::span<const double> x) const;

 private:
  TargetSpec() = default;
  bool constant_ = true;
  double value_ = 0.0;
  std::function<double(std::span<const double>)> fn_;
};

// ---- empirical (mini-batch) quantities, constant target xi ----

double empirical_risk(const ParamVector& phi, const EmpiricalBatch& batch,
                      double xi);

double empirical_risk_smoothed(const ParamVector& phi,
                               const EmpiricalBatch& batch, double xi,
                               std::int64_t r);

// Closed-form generalized gradient of the batch risk (exact ReLU, strict
// activation indicators).
GradientVector empirical_gradient(const ParamVector& phi,
                                  const EmpiricalBatch& batch, double xi);

// Exact analytic gradient of the smoothed batch risk.
GradientVector smoothed_empirical_gradient(const ParamVector& phi,
                                           const EmpiricalBatch& batch,
                                           double xi, std::int64_t r);

// || grad L_r - G ||_2; decays to zero as r grows.
double gradient_limit_gap(const ParamVector& phi, const EmpiricalBatch& batch,
                          double xi, std::int64_t r);

// Central finite differences of the smoothed batch risk.  Independent oracle
// for smoothed_empirical_gradient; only contracted for finite r (differencing
// the exact risk across a kink need not match the generalized gradient).
GradientVector finite_difference_gradient(const ParamVector& phi,
                                          const EmpiricalBatch& batch,
                                          double xi, std::int64_t r, double h);

// ---- true-risk quantities ----

// Input locations -b_i/w_i where a hidden unit's pre-activation crosses zero
// inside (lower, upper); sorted, deduplicated.  Units with |w_i| below the
// guard are affine-constant on the interval and contribute no kink.
std::vector<double> kink_breakpoints(const ParamVector& phi, double lower,
                                     double upper);

struct IntegrationMeta {
  bool exact = true;
  std::int64_t resolution = 0;  // grid nodes per axis when not exact
};

// True risk L(phi) = int (N(x) - f(x))^2 dmu and its generalized gradient.
//
// Backend selection: discrete distributions are exact weighted sums; the
// 1-d uniform box with a constant target integrates exactly piecewise
// between kink breakpoints; everything else falls back to the midpoint grid
// at the configured resolution, which the attached metadata discloses.
class RiskModel {
 public:
  RiskModel(InputDistribution dist, TargetSpec target,
            std::int64_t grid_resolution = 4096);

  double risk(const ParamVector& phi) const;
  GradientVector gradient(const ParamVector& phi) const;

  struct Evaluation {
    double risk;
    GradientVector gradient;
  };
  // Shares one pass over the integration nodes.
  Evaluation evaluate(const ParamVector& phi) const;

  const IntegrationMeta& meta() const { return meta_; }
  const InputDistribution& distribution() const { return dist_; }
  const TargetSpec& target() const { return target_; }

 private:
  void collect_nodes(const ParamVector& phi, std::vector<double>& xs,
                     std::vector<double>& ws) const;

  InputDistribution dist_;
  TargetSpec target_;
  std::int64_t grid_resolution_;
  IntegrationMeta meta_;
};

}  // namespace relusgd
