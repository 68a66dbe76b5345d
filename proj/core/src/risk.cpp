#include "relusgd/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relusgd/smooth_relu.hpp"

namespace relusgd {

TargetSpec TargetSpec::constant(double value) {
  TargetSpec t;
  t.constant_ = true;
  t.value_ = value;
  return t;
}

TargetSpec TargetSpec::continuous(
    std::function<double(std::span<const double>)> f) {
  if (!f) throw std::invalid_argument("target: empty function");
  TargetSpec t;
  t.constant_ = false;
  t.fn_ = std::move(f);
  return t;
}

double TargetSpec::constant_value() const {
  if (!constant_) {
    throw std::invalid_argument("target: not a constant target");
  }
  return value_;
}

double TargetSpec::operator()(std::span<const double> x) const {
  return constant_ ? value_ : fn_(x);
}

namespace {

void check_batch(const ParamVector& phi, const EmpiricalBatch& batch) {
  if (batch.size < 1) throw std::invalid_argument("batch: empty");
  if (batch.dim != phi.shape().input_dim) {
    throw std::invalid_argument("batch: dimension mismatch");
  }
}

// One pass over weighted points accumulating risk and/or the generalized
// gradient in closed form (exact ReLU, strict activation indicators).
// Totals are multiplied by post_scale at the end.
void accumulate_exact(const ParamVector& phi, std::span<const double> xs,
                      std::span<const double> ws, int dim,
                      const TargetSpec& target, double post_scale,
                      double* risk_out, GradientVector* grad_out) {
  const int h = phi.shape().hidden_width;
  const ParamViews views = unpack(phi);
  double risk = 0.0;
  std::vector<double> pre(static_cast<size_t>(h));

  for (size_t k = 0; k < ws.size(); ++k) {
    const double* x = xs.data() + k * static_cast<size_t>(dim);
    const std::span<const double> xsp{x, static_cast<size_t>(dim)};
    double out = views.output_shift;
    for (int i = 0; i < h; ++i) {
      double p = views.biases[static_cast<size_t>(i)];
      const double* w = views.weights.data() + static_cast<size_t>(i) * dim;
      for (int j = 0; j < dim; ++j) p += w[j] * x[j];
      pre[static_cast<size_t>(i)] = p;
      if (p > 0.0) out += views.outer[static_cast<size_t>(i)] * p;
    }
    const double res = out - target(xsp);
    const double wt = ws[k];
    risk += wt * res * res;
    if (grad_out != nullptr) {
      GradientVector& g = *grad_out;
      const double common = 2.0 * wt * res;
      for (int i = 0; i < h; ++i) {
        const double p = pre[static_cast<size_t>(i)];
        if (p > 0.0) {
          const double unit = common * views.outer[static_cast<size_t>(i)];
          for (int j = 0; j < dim; ++j) g.weight(i, j) += unit * x[j];
          g.bias(i) += unit;
          g.outer(i) += common * p;
        }
      }
      g.output_shift() += common;
    }
  }

  if (risk_out != nullptr) *risk_out = risk * post_scale;
  if (grad_out != nullptr && post_scale != 1.0) {
    for (double& v : grad_out->values()) v *= post_scale;
  }
}

// Same pass with the smooth activation of index r (chain rule through its
// derivative); this is the exact gradient of the smoothed risk.
void accumulate_smoothed(const ParamVector& phi, std::span<const double> xs,
                         std::span<const double> ws, int dim,
                         const TargetSpec& target, std::int64_t r,
                         double post_scale, double* risk_out,
                         GradientVector* grad_out) {
  const int h = phi.shape().hidden_width;
  const ParamViews views = unpack(phi);
  double risk = 0.0;
  std::vector<double> act(static_cast<size_t>(h));
  std::vector<double> slope(static_cast<size_t>(h));

  for (size_t k = 0; k < ws.size(); ++k) {
    const double* x = xs.data() + k * static_cast<size_t>(dim);
    const std::span<const double> xsp{x, static_cast<size_t>(dim)};
    double out = views.output_shift;
    for (int i = 0; i < h; ++i) {
      double p = views.biases[static_cast<size_t>(i)];
      const double* w = views.weights.data() + static_cast<size_t>(i) * dim;
      for (int j = 0; j < dim; ++j) p += w[j] * x[j];
      act[static_cast<size_t>(i)] = smooth_relu::value(r, p);
      if (grad_out != nullptr) {
        slope[static_cast<size_t>(i)] = smooth_relu::derivative(r, p);
      }
      out += views.outer[static_cast<size_t>(i)] * act[static_cast<size_t>(i)];
    }
    const double res = out - target(xsp);
    const double wt = ws[k];
    risk += wt * res * res;
    if (grad_out != nullptr) {
      GradientVector& g = *grad_out;
      const double common = 2.0 * wt * res;
      for (int i = 0; i < h; ++i) {
        const double unit = common * views.outer[static_cast<size_t>(i)] *
                            slope[static_cast<size_t>(i)];
        for (int j = 0; j < dim; ++j) g.weight(i, j) += unit * x[j];
        g.bias(i) += unit;
        g.outer(i) += common * act[static_cast<size_t>(i)];
      }
      g.output_shift() += common;
    }
  }

  if (risk_out != nullptr) *risk_out = risk * post_scale;
  if (grad_out != nullptr && post_scale != 1.0) {
    for (double& v : grad_out->values()) v *= post_scale;
  }
}

std::vector<double> unit_weights(int n) {
  return std::vector<double>(static_cast<size_t>(n), 1.0);
}

}  // namespace

double empirical_risk(const ParamVector& phi, const EmpiricalBatch& batch,
                      double xi) {
  check_batch(phi, batch);
  double risk = 0.0;
  const auto ws = unit_weights(batch.size);
  accumulate_exact(phi, batch.data, ws, batch.dim, TargetSpec::constant(xi),
                   1.0 / batch.size, &risk, nullptr);
  return risk;
}

double empirical_risk_smoothed(const ParamVector& phi,
                               const EmpiricalBatch& batch, double xi,
                               std::int64_t r) {
  check_batch(phi, batch);
  double risk = 0.0;
  const auto ws = unit_weights(batch.size);
  accumulate_smoothed(phi, batch.data, ws, batch.dim, TargetSpec::constant(xi),
                      r, 1.0 / batch.size, &risk, nullptr);
  return risk;
}

GradientVector empirical_gradient(const ParamVector& phi,
                                  const EmpiricalBatch& batch, double xi) {
  check_batch(phi, batch);
  GradientVector grad(phi.shape());
  const auto ws = unit_weights(batch.size);
  accumulate_exact(phi, batch.data, ws, batch.dim, TargetSpec::constant(xi),
                   1.0 / batch.size, nullptr, &grad);
  return grad;
}

GradientVector smoothed_empirical_gradient(const ParamVector& phi,
                                           const EmpiricalBatch& batch,
                                           double xi, std::int64_t r) {
  check_batch(phi, batch);
  GradientVector grad(phi.shape());
  const auto ws = unit_weights(batch.size);
  accumulate_smoothed(phi, batch.data, ws, batch.dim, TargetSpec::constant(xi),
                      r, 1.0 / batch.size, nullptr, &grad);
  return grad;
}

double gradient_limit_gap(const ParamVector& phi, const EmpiricalBatch& batch,
                          double xi, std::int64_t r) {
  const GradientVector smoothed =
      smoothed_empirical_gradient(phi, batch, xi, r);
  const GradientVector limit = empirical_gradient(phi, batch, xi);
  double s = 0.0;
  for (int i = 0; i < smoothed.size(); ++i) {
    const double diff = smoothed[i] - limit[i];
    s += diff * diff;
  }
  return std::sqrt(s);
}

GradientVector finite_difference_gradient(const ParamVector& phi,
                                          const EmpiricalBatch& batch,
                                          double xi, std::int64_t r,
                                          double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite differences: h > 0");
  check_batch(phi, batch);
  GradientVector grad(phi.shape());
  ParamVector probe(phi.shape(),
                    std::vector<double>(phi.values().begin(),
                                        phi.values().end()));
  for (int i = 0; i < phi.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + h;
    const double up = empirical_risk_smoothed(probe, batch, xi, r);
    probe[i] = original - h;
    const double down = empirical_risk_smoothed(probe, batch, xi, r);
    probe[i] = original;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> kink_breakpoints(const ParamVector& phi, double lower,
                                     double upper) {
  // |w| below the guard means the unit is affine-constant on the box.
  constexpr double kSlopeGuard = 1e-300;
  if (phi.shape().input_dim != 1) {
    throw std::invalid_argument("kink breakpoints: one-dimensional only");
  }
  std::vector<double> kinks;
  for (int i = 0; i < phi.shape().hidden_width; ++i) {
    const double w = phi.weight(i, 0);
    if (std::fabs(w) <= kSlopeGuard) continue;
    const double t = -phi.bias(i) / w;
    if (t > lower && t < upper) kinks.push_back(t);
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  return kinks;
}

RiskModel::RiskModel(InputDistribution dist, TargetSpec target,
                     std::int64_t grid_resolution)
    : dist_(std::move(dist)),
      target_(std::move(target)),
      grid_resolution_(grid_resolution) {
  if (grid_resolution_ < 2) {
    throw std::invalid_argument("risk model: grid resolution must be >= 2");
  }
  const bool exact =
      dist_.kind() == InputDistribution::Kind::discrete_finite ||
      (dist_.dim() == 1 && target_.is_constant());
  meta_ = IntegrationMeta{exact, exact ? 0 : grid_resolution_};
}

void RiskModel::collect_nodes(const ParamVector& phi, std::vector<double>& xs,
                              std::vector<double>& ws) const {
  xs.clear();
  ws.clear();
  switch (dist_.kind()) {
    case InputDistribution::Kind::discrete_finite: {
      for (size_t i = 0; i < dist_.points().size(); ++i) {
        const auto& p = dist_.points()[i];
        xs.insert(xs.end(), p.begin(), p.end());
        ws.push_back(dist_.weights()[i]);
      }
      return;
    }
    case InputDistribution::Kind::uniform_box: {
      if (meta_.exact) {
        // Piecewise Gauss-Legendre between the kink breakpoints: every
        // integrand entering the risk or a gradient component is a quadratic
        // polynomial on each piece, so the rule is exact.
        constexpr double kGlNode = 0.7745966692414834;
        constexpr double kGlWeightOuter = 5.0 / 9.0;
        constexpr double kGlWeightCenter = 8.0 / 9.0;
        const double a = dist_.lower();
        const double b = dist_.upper();
        const std::vector<double> kinks = kink_breakpoints(phi, a, b);
        double lo = a;
        auto add_interval = [&](double left, double right) {
          const double half = 0.5 * (right - left);
          if (half <= 0.0) return;
          const double mid = 0.5 * (left + right);
          const double scale = half / (b - a);
          xs.push_back(mid - half * kGlNode);
          ws.push_back(scale * kGlWeightOuter);
          xs.push_back(mid);
          ws.push_back(scale * kGlWeightCenter);
          xs.push_back(mid + half * kGlNode);
          ws.push_back(scale * kGlWeightOuter);
        };
        for (double t : kinks) {
          add_interval(lo, t);
          lo = t;
        }
        add_interval(lo, b);
        return;
      }
      const auto nodes = quadrature_grid(dist_, grid_resolution_);
      for (const auto& node : nodes) {
        xs.insert(xs.end(), node.point.begin(), node.point.end());
        ws.push_back(node.weight);
      }
      return;
    }
  }
}

namespace {

void check_model_shape(const InputDistribution& dist, const ParamVector& phi) {
  if (phi.shape().input_dim != dist.dim()) {
    throw std::invalid_argument("risk model: parameter dimension mismatch");
  }
}

}  // namespace

double RiskModel::risk(const ParamVector& phi) const {
  check_model_shape(dist_, phi);
  std::vector<double> xs, ws;
  collect_nodes(phi, xs, ws);
  double value = 0.0;
  accumulate_exact(phi, xs, ws, dist_.dim(), target_, 1.0, &value, nullptr);
  return value;
}

GradientVector RiskModel::gradient(const ParamVector& phi) const {
  check_model_shape(dist_, phi);
  std::vector<double> xs, ws;
  collect_nodes(phi, xs, ws);
  GradientVector grad(phi.shape());
  accumulate_exact(phi, xs, ws, dist_.dim(), target_, 1.0, nullptr, &grad);
  return grad;
}

RiskModel::Evaluation RiskModel::evaluate(const ParamVector& phi) const {
  check_model_shape(dist_, phi);
  std::vector<double> xs, ws;
  collect_nodes(phi, xs, ws);
  Evaluation eval{0.0, GradientVector(phi.shape())};
  accumulate_exact(phi, xs, ws, dist_.dim(), target_, 1.0, &eval.risk,
                   &eval.gradient);
  return eval;
}

}  // namespace relusgd
