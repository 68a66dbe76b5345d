#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relusgd/input_model.hpp"
#include "relusgd/network.hpp"
#include "relusgd/risk.hpp"

// GD and SGD iteration drivers: learning-rate schedules, step-size
// validation against the Lyapunov bounds, and per-step monitoring of the
// descent identity, the Lyapunov value, and the parameter norm.

namespace relusgd {

struct Schedule {
  enum class Kind { constant, polynomial };

  Kind kind = Kind::constant;
  // Base rate; either given directly or resolved from `bound_fraction` times
  // the selected step bound of the realized initial parameter.
  double gamma0 = 0.0;
  double bound_fraction = 0.0;  // 0 = gamma0 given explicitly
  double exponent = 0.0;        // polynomial: gamma_n = gamma0 / (n+1)^p

  double rate(std::int64_t n) const;
  double sup_rate() const { return gamma0; }
  // sum gamma_n = inf requires p <= 1 (constant schedules always qualify).
  bool non_summable() const;
};

enum class BoundForm { lyapunov, norm };  // V-form | A-form
enum class RunMode { gd, sgd };

struct InitSpec {
  enum class Kind { explicit_values, random_box };
  Kind kind = Kind::random_box;
  std::vector<double> values;  // explicit
  double box_low = -0.5;
  double box_high = 0.5;
  std::uint64_t seed = 0;  // separate stream from the data seed
};

struct RunConfig {
  NetworkShape shape;
  InitSpec init;
  InputDistribution distribution = InputDistribution::uniform_box(0.0, 1.0, 1);
  double xi = 0.0;  // constant target
  Schedule schedule;
  std::vector<int> batch_sizes = {1};  // M_n; last entry repeats
  std::uint64_t seed = 0;              // data stream
  RunMode mode = RunMode::sgd;
  std::int64_t horizon = 1000;
  std::int64_t true_risk_every = 0;  // 0: only at the end (SGD); GD logs all
  double stop_threshold = 0.0;       // <= 0 disables early stopping
  BoundForm bound_form = BoundForm::lyapunov;
  double delta = 0.9;  // margin for the V-form hypothesis, must be < 1
  bool override_validation = false;
  std::int64_t grid_resolution = 4096;

  int batch_size(std::int64_t n) const;
};

ParamVector initial_parameters(const RunConfig& cfg);

// Resolves a bound_fraction schedule against the realized phi0.
Schedule resolve_schedule(const RunConfig& cfg, const ParamVector& phi0);

struct ScheduleDecision {
  bool accepted = false;
  std::string reason;
  BoundForm form = BoundForm::lyapunov;
  double bound = 0.0;            // selected step bound at phi0
  double sup_rate = 0.0;         // sup_n gamma_n
  double delta_effective = 0.0;  // sup_rate * [a^2(d+1)V(phi0)+1]
};

// Accepts iff the schedule is non-summable and sup gamma_n respects the
// selected bound (V-form: delta-margined; A-form: as stated).
ScheduleDecision validate_schedule(const Schedule& schedule,
                                   const ParamVector& phi0,
                                   const RunConfig& cfg);

struct StepRecord {
  std::int64_t step = 0;
  double rate = 0.0;
  double emp_risk = 0.0;   // SGD only
  bool has_emp = false;
  double true_risk = 0.0;  // when evaluated this step
  bool has_true = false;
  double lyapunov = 0.0;  // V at the step's start
  double grad_norm = 0.0;
  double descent_residual = 0.0;  // |lhs - rhs| of the descent identity
  double wall_clock = 0.0;        // seconds since run start
};

struct Trajectory {
  std::vector<StepRecord> rows;
  ParamVector final_parameters;
  std::int64_t steps_executed = 0;
  bool stopped_early = false;
  double final_emp_risk = 0.0;
  bool has_final_emp = false;
  double final_true_risk = 0.0;
  bool has_final_true = false;
  double initial_lyapunov = 0.0;
  double final_lyapunov = 0.0;
  double max_param_norm = 0.0;
  bool lyapunov_monotone = true;  // within 1e-9, including the final step
  double max_descent_residual = 0.0;
  ScheduleDecision decision;
  double elapsed_seconds = 0.0;
};

// One SGD update theta - gamma_n G^n(theta) on the batch sampled for step n.
std::pair<ParamVector, StepRecord> sgd_step(const ParamVector& theta,
                                            std::int64_t n,
                                            const RunConfig& cfg,
                                            const Schedule& schedule);

// One deterministic update theta - gamma_n G(theta).
std::pair<ParamVector, StepRecord> gd_step(const ParamVector& theta,
                                           std::int64_t n,
                                           const RunConfig& cfg,
                                           const Schedule& schedule,
                                           const RiskModel& model);

// Full trajectory.  Throws ConfigError if the schedule is rejected and the
// override flag is off; throws std::runtime_error if a validated run ever
// increases the Lyapunov value beyond tolerance (that would falsify the
// descent analysis, so it fails loudly rather than logging on).
Trajectory run(const RunConfig& cfg);

}  // namespace relusgd
