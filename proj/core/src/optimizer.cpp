#include "relusgd/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "relusgd/errors.hpp"
#include "relusgd/lyapunov.hpp"
#include "relusgd/rng.hpp"

namespace relusgd {

double Schedule::rate(std::int64_t n) const {
  if (kind == Kind::constant) return gamma0;
  return gamma0 / std::pow(static_cast<double>(n) + 1.0, exponent);
}

bool Schedule::non_summable() const {
  return kind == Kind::constant || exponent <= 1.0;
}

int RunConfig::batch_size(std::int64_t n) const {
  if (batch_sizes.empty()) {
    throw std::invalid_argument("run config: empty batch size sequence");
  }
  const auto idx = static_cast<size_t>(
      std::min<std::int64_t>(n, static_cast<std::int64_t>(batch_sizes.size()) - 1));
  return batch_sizes[idx];
}

ParamVector initial_parameters(const RunConfig& cfg) {
  if (cfg.init.kind == InitSpec::Kind::explicit_values) {
    return ParamVector(cfg.shape, cfg.init.values);
  }
  if (!(cfg.init.box_high > cfg.init.box_low)) {
    throw std::invalid_argument("init box: need high > low");
  }
  // The initializer stream is separate from the data stream: the starting
  // point must be independent of every batch draw.
  ParamVector phi(cfg.shape);
  rng::SequenceGenerator gen(cfg.init.seed, rng::Stream::init, 0, 0);
  for (int i = 0; i < phi.size(); ++i) {
    phi[i] = gen.next_uniform(cfg.init.box_low, cfg.init.box_high);
  }
  return phi;
}

Schedule resolve_schedule(const RunConfig& cfg, const ParamVector& phi0) {
  Schedule resolved = cfg.schedule;
  if (resolved.bound_fraction > 0.0) {
    const double bound =
        cfg.bound_form == BoundForm::lyapunov
            ? step_bound_v(phi0, cfg.distribution.domain_bound(),
                           cfg.shape.input_dim, cfg.xi)
            : step_bound_a(phi0, cfg.distribution.domain_bound(), cfg.xi,
                           cfg.shape.input_dim);
    resolved.gamma0 = resolved.bound_fraction * bound;
    resolved.bound_fraction = 0.0;
  }
  if (!(resolved.gamma0 > 0.0)) {
    throw std::invalid_argument("schedule: base rate must be positive");
  }
  return resolved;
}

ScheduleDecision validate_schedule(const Schedule& schedule,
                                   const ParamVector& phi0,
                                   const RunConfig& cfg) {
  // Slack of a few ulps so that a rate set to an exact fraction of the bound
  // is not rejected by the round trip through the product below.
  constexpr double kRelativeGuard = 1.0 + 1e-12;

  ScheduleDecision decision;
  decision.form = cfg.bound_form;
  decision.sup_rate = schedule.sup_rate();

  const double a = cfg.distribution.domain_bound();
  const double bound_v = step_bound_v(phi0, a, cfg.shape.input_dim, cfg.xi);
  const double bound_a = step_bound_a(phi0, a, cfg.xi, cfg.shape.input_dim);
  decision.bound = cfg.bound_form == BoundForm::lyapunov ? bound_v : bound_a;
  decision.delta_effective = decision.sup_rate / bound_v;

  if (!schedule.non_summable()) {
    decision.accepted = false;
    decision.reason =
        "divergence hypothesis violated: polynomial exponent > 1 makes the "
        "rate sequence summable";
    return decision;
  }
  if (cfg.bound_form == BoundForm::lyapunov) {
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
      decision.accepted = false;
      decision.reason = "delta must lie in (0, 1)";
      return decision;
    }
    if (decision.delta_effective <= cfg.delta * kRelativeGuard) {
      decision.accepted = true;
      decision.reason = "accepted under the V-form bound";
    } else {
      decision.accepted = false;
      decision.reason = "sup rate exceeds delta * [a^2(d+1)V(theta0)+1]^-1";
    }
    return decision;
  }
  if (decision.sup_rate <= bound_a * kRelativeGuard) {
    decision.accepted = true;
    decision.reason = "accepted under the A-form bound";
  } else {
    decision.accepted = false;
    decision.reason = "sup rate exceeds [18 A^5 (||theta0||+1)^2]^-1";
  }
  return decision;
}

namespace {

StepRecord make_record(std::int64_t n, double rate, double risk, bool is_emp,
                       const GradientVector& grad) {
  StepRecord row;
  row.step = n;
  row.rate = rate;
  if (is_emp) {
    row.emp_risk = risk;
    row.has_emp = true;
  } else {
    row.true_risk = risk;
    row.has_true = true;
  }
  row.grad_norm = grad.norm();
  return row;
}

// |lhs - rhs| of the one-step identity; both sides need V at theta and at
// the updated point.
double descent_residual(double v_before, double v_after, double rate,
                        const GradientVector& grad, double risk) {
  const double last = grad.output_shift();
  const double rhs = rate * rate * grad.squared_norm() +
                     rate * rate * last * last - 8.0 * rate * risk;
  return std::fabs((v_after - v_before) - rhs);
}

void check_gradient(const GradientVector& grad, std::int64_t n) {
  if (!all_finite(grad)) {
    throw std::runtime_error("non-finite gradient at step " +
                             std::to_string(n));
  }
}

}  // namespace

std::pair<ParamVector, StepRecord> sgd_step(const ParamVector& theta,
                                            std::int64_t n,
                                            const RunConfig& cfg,
                                            const Schedule& schedule) {
  const EmpiricalBatch batch =
      sample_batch(cfg.distribution, n, cfg.batch_size(n), cfg.seed);
  const GradientVector grad = empirical_gradient(theta, batch, cfg.xi);
  check_gradient(grad, n);
  const double risk = empirical_risk(theta, batch, cfg.xi);
  const double rate = schedule.rate(n);

  StepRecord row = make_record(n, rate, risk, /*is_emp=*/true, grad);
  row.lyapunov = lyapunov_value(theta, cfg.xi);
  ParamVector next = axpy(theta, rate, grad);
  row.descent_residual = descent_residual(
      row.lyapunov, lyapunov_value(next, cfg.xi), rate, grad, risk);
  return {std::move(next), row};
}

std::pair<ParamVector, StepRecord> gd_step(const ParamVector& theta,
                                           std::int64_t n,
                                           const RunConfig& cfg,
                                           const Schedule& schedule,
                                           const RiskModel& model) {
  const RiskModel::Evaluation eval = model.evaluate(theta);
  check_gradient(eval.gradient, n);
  const double rate = schedule.rate(n);

  StepRecord row =
      make_record(n, rate, eval.risk, /*is_emp=*/false, eval.gradient);
  row.lyapunov = lyapunov_value(theta, cfg.xi);
  ParamVector next = axpy(theta, rate, eval.gradient);
  row.descent_residual =
      descent_residual(row.lyapunov, lyapunov_value(next, cfg.xi), rate,
                       eval.gradient, eval.risk);
  return {std::move(next), row};
}

Trajectory run(const RunConfig& cfg) {
  constexpr double kMonotoneTolerance = 1e-9;
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&started] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         started)
        .count();
  };

  ParamVector theta = initial_parameters(cfg);
  const Schedule schedule = resolve_schedule(cfg, theta);
  const ScheduleDecision decision = validate_schedule(schedule, theta, cfg);
  if (!decision.accepted && !cfg.override_validation) {
    throw ConfigError("schedule rejected: " + decision.reason);
  }

  const RiskModel model(cfg.distribution, TargetSpec::constant(cfg.xi),
                        cfg.grid_resolution);

  Trajectory traj;
  traj.decision = decision;
  traj.initial_lyapunov = lyapunov_value(theta, cfg.xi);
  traj.max_param_norm = theta.norm();
  const double norm_cap = std::sqrt(traj.initial_lyapunov);

  double v_prev = traj.initial_lyapunov;
  traj.rows.reserve(static_cast<size_t>(cfg.horizon));
  for (std::int64_t n = 0; n < cfg.horizon; ++n) {
    auto [next, row] = cfg.mode == RunMode::gd
                           ? gd_step(theta, n, cfg, schedule, model)
                           : sgd_step(theta, n, cfg, schedule);
    row.wall_clock = elapsed();

    if (cfg.mode == RunMode::sgd && cfg.true_risk_every > 0 &&
        n % cfg.true_risk_every == 0) {
      row.true_risk = model.risk(theta);
      row.has_true = true;
    }

    const double v_next = lyapunov_value(next, cfg.xi);
    if (v_next > v_prev + kMonotoneTolerance) {
      traj.lyapunov_monotone = false;
      if (decision.accepted) {
        throw std::runtime_error(
            "Lyapunov value increased at step " + std::to_string(n) +
            " under a validated schedule (V " + std::to_string(v_prev) +
            " -> " + std::to_string(v_next) + ")");
      }
    }
    v_prev = v_next;

    const double norm = next.norm();
    if (norm > traj.max_param_norm) traj.max_param_norm = norm;
    if (cfg.mode == RunMode::gd && decision.accepted &&
        norm > norm_cap + kMonotoneTolerance) {
      throw std::runtime_error(
          "parameter norm exceeded sqrt(V(theta0)) at step " +
          std::to_string(n) + " under a validated schedule");
    }

    if (row.descent_residual > traj.max_descent_residual) {
      traj.max_descent_residual = row.descent_residual;
    }
    traj.rows.push_back(row);
    theta = std::move(next);
    traj.steps_executed = n + 1;

    const double driving = cfg.mode == RunMode::gd ? row.true_risk : row.emp_risk;
    if (cfg.stop_threshold > 0.0 && driving < cfg.stop_threshold) {
      traj.stopped_early = true;
      break;
    }
  }

  traj.final_parameters = theta;
  traj.final_lyapunov = v_prev;
  traj.final_true_risk = model.risk(theta);
  traj.has_final_true = true;
  if (cfg.mode == RunMode::sgd && !traj.rows.empty()) {
    traj.final_emp_risk = traj.rows.back().emp_risk;
    traj.has_final_emp = true;
  }
  traj.elapsed_seconds = elapsed();
  return traj;
}

}  // namespace relusgd
