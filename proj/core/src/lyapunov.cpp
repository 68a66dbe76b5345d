#include "relusgd/lyapunov.hpp"

#include <cmath>
#include <stdexcept>

namespace relusgd {

double lyapunov_value(const ParamVector& phi, double xi) {
  const double shift = phi.output_shift() - 2.0 * xi;
  return phi.squared_norm() + shift * shift;
}

GradientVector lyapunov_gradient(const ParamVector& phi, double xi) {
  GradientVector grad(phi.shape());
  for (int i = 0; i < phi.size(); ++i) grad[i] = 2.0 * phi[i];
  grad.output_shift() += 2.0 * (phi.output_shift() - 2.0 * xi);
  return grad;
}

namespace {

LyapunovReport pairing_from(const ParamVector& phi, double xi,
                            const GradientVector& g, double risk) {
  LyapunovReport report;
  report.lyapunov = lyapunov_value(phi, xi);
  report.pairing = dot(lyapunov_gradient(phi, xi), g);
  report.eight_risk = 8.0 * risk;
  return report;
}

}  // namespace

LyapunovReport pairing_identity(const ParamVector& phi,
                                const EmpiricalBatch& batch, double xi) {
  return pairing_from(phi, xi, empirical_gradient(phi, batch, xi),
                      empirical_risk(phi, batch, xi));
}

LyapunovReport pairing_identity_true(const ParamVector& phi,
                                     const RiskModel& model) {
  const double xi = model.target().constant_value();
  const RiskModel::Evaluation eval = model.evaluate(phi);
  return pairing_from(phi, xi, eval.gradient, eval.risk);
}

LyapunovReport descent_identity(const ParamVector& theta, double step,
                                const EmpiricalBatch& batch, double xi) {
  if (step < 0.0) throw std::invalid_argument("descent identity: step >= 0");
  const GradientVector g = empirical_gradient(theta, batch, xi);
  const double risk = empirical_risk(theta, batch, xi);

  LyapunovReport report = pairing_from(theta, xi, g, risk);
  const ParamVector next = axpy(theta, step, g);
  report.descent_lhs = lyapunov_value(next, xi) - report.lyapunov;
  const double last = g.output_shift();
  report.descent_rhs =
      step * step * g.squared_norm() + step * step * last * last -
      8.0 * step * risk;
  return report;
}

double step_bound_v(const ParamVector& phi0, double domain_bound,
                    int input_dim, double xi) {
  const double v0 = lyapunov_value(phi0, xi);
  return 1.0 /
         (domain_bound * domain_bound * (input_dim + 1.0) * v0 + 1.0);
}

double step_bound_a(const ParamVector& phi0, double domain_bound, double xi,
                    int input_dim) {
  const double big_a =
      std::max({domain_bound, std::fabs(xi), static_cast<double>(input_dim)});
  const double norm_plus_one = phi0.norm() + 1.0;
  return 1.0 /
         (18.0 * std::pow(big_a, 5) * norm_plus_one * norm_plus_one);
}

}  // namespace relusgd
