#include "relusgd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "relusgd/input_model.hpp"
#include "relusgd/lyapunov.hpp"
#include "relusgd/network.hpp"
#include "relusgd/risk.hpp"
#include "relusgd/rng.hpp"
#include "relusgd/smooth_relu.hpp"

namespace relusgd::verify {

namespace {

using nlohmann::json;

struct Instance {
  ParamVector phi;
  EmpiricalBatch batch;
  InputDistribution dist = InputDistribution::uniform_box(0.0, 1.0, 1);
  double xi = 0.0;
};

json dump_instance(const Instance& inst) {
  json j;
  j["d"] = inst.phi.shape().input_dim;
  j["H"] = inst.phi.shape().hidden_width;
  j["phi"] = std::vector<double>(inst.phi.values().begin(),
                                 inst.phi.values().end());
  j["xi"] = inst.xi;
  j["batch"] = inst.batch.data;
  j["box"] = {inst.dist.lower(), inst.dist.upper()};
  return j;
}

Instance draw_instance(rng::SequenceGenerator& gen, int max_d, int max_h,
                       double coord_scale, int max_batch) {
  const int d = static_cast<int>(gen.next_int(1, max_d));
  const int h = static_cast<int>(gen.next_int(1, max_h));
  const NetworkShape shape = make_shape(d, h);

  Instance inst{ParamVector(shape), {}, InputDistribution::uniform_box(0, 1, d),
                0.0};
  const double lower = gen.next_uniform(-1.0, 0.5);
  const double upper = lower + gen.next_uniform(0.5, 1.5);
  inst.dist = InputDistribution::uniform_box(lower, upper, d);
  for (int i = 0; i < inst.phi.size(); ++i) {
    inst.phi[i] = gen.next_uniform(-coord_scale, coord_scale);
  }
  inst.xi = gen.next_uniform(-coord_scale, coord_scale);
  const int m = static_cast<int>(gen.next_int(1, max_batch));
  inst.batch = sample_batch(inst.dist, 0, m, gen.next_bits());
  return inst;
}

double mixed_tol(double scale, double eps) { return eps * (1.0 + std::fabs(scale)); }

// ---- identities ----

std::optional<json> prop_pairing_empirical(Instance inst) {
  const LyapunovReport rep = pairing_identity(inst.phi, inst.batch, inst.xi);
  if (std::fabs(rep.pairing - rep.eight_risk) <=
      mixed_tol(rep.eight_risk, 1e-9)) {
    return std::nullopt;
  }
  json j = dump_instance(inst);
  j["pairing"] = rep.pairing;
  j["eight_risk"] = rep.eight_risk;
  return j;
}

std::optional<json> prop_pairing_true(rng::SequenceGenerator& gen) {
  const int h = static_cast<int>(gen.next_int(1, 8));
  const NetworkShape shape = make_shape(1, h);
  Instance inst{ParamVector(shape), {}, InputDistribution::uniform_box(0, 1, 1),
                gen.next_uniform(-2.0, 2.0)};
  for (int i = 0; i < inst.phi.size(); ++i) {
    inst.phi[i] = gen.next_uniform(-2.0, 2.0);
  }
  const RiskModel model(inst.dist, TargetSpec::constant(inst.xi));
  const LyapunovReport rep = pairing_identity_true(inst.phi, model);
  if (std::fabs(rep.pairing - rep.eight_risk) <=
      mixed_tol(rep.eight_risk, 1e-9)) {
    return std::nullopt;
  }
  json j = dump_instance(inst);
  j["pairing"] = rep.pairing;
  j["eight_risk"] = rep.eight_risk;
  return j;
}

std::optional<json> prop_descent(Instance inst, double step) {
  const LyapunovReport rep =
      descent_identity(inst.phi, step, inst.batch, inst.xi);
  if (std::fabs(rep.descent_lhs - rep.descent_rhs) <=
      mixed_tol(rep.descent_rhs, 1e-9)) {
    return std::nullopt;
  }
  json j = dump_instance(inst);
  j["step"] = step;
  j["lhs"] = rep.descent_lhs;
  j["rhs"] = rep.descent_rhs;
  return j;
}

std::optional<json> prop_lyapunov_gradient_fd(Instance inst) {
  const GradientVector grad = lyapunov_gradient(inst.phi, inst.xi);
  constexpr double h = 1e-6;
  ParamVector probe(inst.phi.shape(),
                    std::vector<double>(inst.phi.values().begin(),
                                        inst.phi.values().end()));
  for (int i = 0; i < inst.phi.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = lyapunov_value(probe, inst.xi);
    probe[i] = orig - h;
    const double down = lyapunov_value(probe, inst.xi);
    probe[i] = orig;
    const double fd = (up - down) / (2.0 * h);
    if (std::fabs(fd - grad[i]) > mixed_tol(grad[i], 1e-6)) {
      json j = dump_instance(inst);
      j["coordinate"] = i;
      j["fd"] = fd;
      j["analytic"] = grad[i];
      return j;
    }
  }
  return std::nullopt;
}

// ---- bounds ----

std::optional<json> prop_gradient_norm_empirical(Instance inst) {
  const double a = inst.dist.domain_bound();
  const double risk = empirical_risk(inst.phi, inst.batch, inst.xi);
  const GradientVector grad = empirical_gradient(inst.phi, inst.batch, inst.xi);
  const double bound = 4.0 *
                       (a * a * (inst.phi.shape().input_dim + 1.0) *
                            inst.phi.squared_norm() +
                        1.0) *
                       risk;
  if (grad.squared_norm() <= bound * (1.0 + 1e-12)) return std::nullopt;
  json j = dump_instance(inst);
  j["grad_sq"] = grad.squared_norm();
  j["bound"] = bound;
  return j;
}

std::optional<json> prop_gradient_norm_true(rng::SequenceGenerator& gen) {
  const int h = static_cast<int>(gen.next_int(1, 8));
  const NetworkShape shape = make_shape(1, h);
  ParamVector phi(shape);
  for (int i = 0; i < phi.size(); ++i) phi[i] = gen.next_uniform(-2.0, 2.0);
  const double xi = gen.next_uniform(-2.0, 2.0);
  const double lower = gen.next_uniform(-1.0, 0.0);
  const double upper = lower + gen.next_uniform(0.5, 2.0);
  const auto dist = InputDistribution::uniform_box(lower, upper, 1);
  const RiskModel model(dist, TargetSpec::constant(xi));
  const RiskModel::Evaluation eval = model.evaluate(phi);
  const double a = dist.domain_bound();
  const double bound =
      4.0 * (a * a * 2.0 * phi.squared_norm() + 1.0) * eval.risk;
  if (eval.gradient.squared_norm() <= bound * (1.0 + 1e-12)) {
    return std::nullopt;
  }
  json j;
  j["phi"] = std::vector<double>(phi.values().begin(), phi.values().end());
  j["xi"] = xi;
  j["box"] = {lower, upper};
  j["grad_sq"] = eval.gradient.squared_norm();
  j["bound"] = bound;
  return j;
}

std::optional<json> prop_lyapunov_sandwich(Instance inst) {
  const double v = lyapunov_value(inst.phi, inst.xi);
  const double sq = inst.phi.squared_norm();
  const double upper = 3.0 * sq + 8.0 * inst.xi * inst.xi;
  if (v + 1e-12 * (1.0 + v) >= sq && v <= upper * (1.0 + 1e-12)) {
    return std::nullopt;
  }
  json j = dump_instance(inst);
  j["V"] = v;
  j["norm_sq"] = sq;
  j["upper"] = upper;
  return j;
}

std::optional<json> prop_smooth_derivative(rng::SequenceGenerator& gen) {
  const std::int64_t r = gen.next_int(1, 100);
  // Strict interior bounds checked where the logistic cannot round to 0/1.
  const double x = gen.next_uniform(-0.3, 0.3);
  const double d = smooth_relu::derivative(r, x);
  if (!(d > 0.0 && d < 1.0)) {
    return json{{"r", r}, {"x", x}, {"derivative", d}};
  }
  const double wide_x = gen.next_uniform(-10.0, 10.0);
  const double wide_d = smooth_relu::derivative(r, wide_x);
  if (!(wide_d >= 0.0 && wide_d <= 1.0)) {
    return json{{"r", r}, {"x", wide_x}, {"derivative", wide_d}};
  }
  constexpr double h = 1e-6;
  const double fd =
      (smooth_relu::value(r, wide_x + h) - smooth_relu::value(r, wide_x - h)) /
      (2.0 * h);
  if (std::fabs(fd - wide_d) > 1e-5) {
    return json{{"r", r}, {"x", wide_x}, {"fd", fd}, {"derivative", wide_d}};
  }
  return std::nullopt;
}

std::optional<json> prop_realization_lipschitz(rng::SequenceGenerator& gen) {
  const int d = static_cast<int>(gen.next_int(1, 3));
  const int h = static_cast<int>(gen.next_int(1, 6));
  const NetworkShape shape = make_shape(d, h);
  const double lower = gen.next_uniform(-1.0, 0.0);
  const double upper = lower + gen.next_uniform(0.5, 2.0);
  const auto dist = InputDistribution::uniform_box(lower, upper, d);
  const double a = dist.domain_bound();

  ParamVector phi(shape);
  ParamVector psi(shape);
  for (int i = 0; i < phi.size(); ++i) {
    phi[i] = gen.next_uniform(-2.0, 2.0);
    psi[i] = phi[i] + gen.next_uniform(-0.5, 0.5);
  }
  ParamVector diff(shape);
  for (int i = 0; i < phi.size(); ++i) diff[i] = phi[i] - psi[i];
  const double lip = 2.0 * a * (d + 1.0) * (h + 1.0) *
                     std::max({1.0, phi.norm(), psi.norm()}) * diff.norm();

  std::vector<double> x(static_cast<size_t>(d));
  for (int probe = 0; probe < 64; ++probe) {
    for (int j = 0; j < d; ++j) x[static_cast<size_t>(j)] = gen.next_uniform(lower, upper);
    const double gap = std::fabs(realize_exact(phi, x) - realize_exact(psi, x));
    if (gap > lip * (1.0 + 1e-12)) {
      json j;
      j["phi"] = std::vector<double>(phi.values().begin(), phi.values().end());
      j["psi"] = std::vector<double>(psi.values().begin(), psi.values().end());
      j["x"] = x;
      j["gap"] = gap;
      j["bound"] = lip;
      return j;
    }
  }
  return std::nullopt;
}

// ---- limits ----

bool min_abs_preactivation(const Instance& inst, double floor) {
  for (int m = 0; m < inst.batch.size; ++m) {
    for (int i = 0; i < inst.phi.shape().hidden_width; ++i) {
      if (std::fabs(pre_activation(inst.phi, i, inst.batch.point(m))) < floor) {
        return false;
      }
    }
  }
  return true;
}

std::optional<json> prop_realization_limit(Instance inst) {
  if (inst.batch.size < 1) return std::nullopt;
  const auto x = inst.batch.point(0);
  bool clear = true;
  for (int i = 0; i < inst.phi.shape().hidden_width; ++i) {
    clear = clear && std::fabs(pre_activation(inst.phi, i, x)) >= 1e-3;
  }
  if (!clear) return std::nullopt;  // conditioned on staying off the kinks

  const double exact = realize_exact(inst.phi, x);
  double prev = 0.0;
  for (int k = 32; k <= 44; ++k) {
    const double gap =
        std::fabs(realize_smoothed(inst.phi, x, std::int64_t{1} << k) - exact);
    if (k > 32 && gap > prev + 1e-15 * (1.0 + prev)) {
      json j = dump_instance(inst);
      j["k"] = k;
      j["gap"] = gap;
      j["prev"] = prev;
      j["message"] = "tail not nonincreasing";
      return j;
    }
    prev = gap;
  }
  if (prev > 1e-6) {
    json j = dump_instance(inst);
    j["final_gap"] = prev;
    return j;
  }
  return std::nullopt;
}

std::optional<json> prop_gradient_limit_tail(Instance inst) {
  if (!min_abs_preactivation(inst, 1e-3)) return std::nullopt;
  double prev = 0.0;
  for (int k = 32; k <= 44; ++k) {
    const double gap = gradient_limit_gap(inst.phi, inst.batch, inst.xi,
                                          std::int64_t{1} << k);
    if (k > 32 && gap > prev + 1e-15 * (1.0 + prev)) {
      json j = dump_instance(inst);
      j["k"] = k;
      j["gap"] = gap;
      j["prev"] = prev;
      j["message"] = "tail not nonincreasing";
      return j;
    }
    prev = gap;
  }
  if (prev > 1e-7) {
    json j = dump_instance(inst);
    j["final_gap"] = prev;
    return j;
  }
  return std::nullopt;
}

std::optional<json> prop_smooth_gaps_negative(rng::SequenceGenerator& gen) {
  // Left of the kink both gaps decay monotonically from r = 1 on.
  const double x = -gen.next_uniform(1e-3, 5.0);
  std::vector<std::int64_t> rs;
  for (int k = 0; k <= 24; ++k) rs.push_back(std::int64_t{1} << k);
  const auto profile = smooth_relu::limit_profile(x, rs);
  for (size_t i = 1; i < profile.size(); ++i) {
    const bool ok =
        profile[i].value_gap <=
            profile[i - 1].value_gap + 1e-15 * (1.0 + profile[i - 1].value_gap) &&
        profile[i].derivative_gap <=
            profile[i - 1].derivative_gap +
                1e-15 * (1.0 + profile[i - 1].derivative_gap);
    if (!ok) {
      return json{{"x", x},
                  {"k", i},
                  {"value_gap", profile[i].value_gap},
                  {"derivative_gap", profile[i].derivative_gap}};
    }
  }
  if (profile.back().value_gap > 1e-6 || profile.back().derivative_gap > 1e-6) {
    return json{{"x", x},
                {"final_value_gap", profile.back().value_gap},
                {"final_derivative_gap", profile.back().derivative_gap}};
  }
  return std::nullopt;
}

std::optional<json> prop_smoothed_risk_limit(Instance inst) {
  const double exact = empirical_risk(inst.phi, inst.batch, inst.xi);
  const double smoothed = empirical_risk_smoothed(inst.phi, inst.batch,
                                                  inst.xi, std::int64_t{1} << 44);
  if (std::fabs(smoothed - exact) <= mixed_tol(exact, 1e-8)) {
    return std::nullopt;
  }
  json j = dump_instance(inst);
  j["exact"] = exact;
  j["smoothed"] = smoothed;
  return j;
}

// ---- registry ----

struct Property {
  std::string name;
  Suite suite;
  std::optional<json> (*trial)(std::uint64_t seed, std::uint64_t index,
                               std::uint64_t property_id);
};

rng::SequenceGenerator trial_gen(std::uint64_t seed, std::uint64_t index,
                                 std::uint64_t property_id) {
  return rng::SequenceGenerator(seed, rng::Stream::verify,
                                property_id, index);
}

const Property kProperties[] = {
    {"pairing_identity_empirical", Suite::identities,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_pairing_empirical(draw_instance(gen, 3, 8, 3.0, 16));
     }},
    {"pairing_identity_true_1d", Suite::identities,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_pairing_true(gen);
     }},
    {"descent_identity", Suite::identities,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       auto inst = draw_instance(gen, 3, 8, 3.0, 16);
       return prop_descent(std::move(inst), gen.next_uniform(0.0, 0.1));
     }},
    {"lyapunov_gradient_fd", Suite::identities,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_lyapunov_gradient_fd(draw_instance(gen, 3, 8, 3.0, 4));
     }},
    {"gradient_norm_bound_empirical", Suite::bounds,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_gradient_norm_empirical(draw_instance(gen, 3, 8, 3.0, 16));
     }},
    {"gradient_norm_bound_true_1d", Suite::bounds,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_gradient_norm_true(gen);
     }},
    {"lyapunov_sandwich", Suite::bounds,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_lyapunov_sandwich(draw_instance(gen, 3, 8, 5.0, 1));
     }},
    {"smooth_derivative_bounds", Suite::bounds,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_smooth_derivative(gen);
     }},
    {"realization_local_lipschitz", Suite::bounds,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_realization_lipschitz(gen);
     }},
    {"realization_pointwise_limit", Suite::limits,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_realization_limit(draw_instance(gen, 3, 6, 1.0, 4));
     }},
    {"gradient_limit_gap_tail", Suite::limits,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_gradient_limit_tail(draw_instance(gen, 2, 4, 1.0, 8));
     }},
    {"smooth_gaps_left_of_kink", Suite::limits,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_smooth_gaps_negative(gen);
     }},
    {"smoothed_risk_limit", Suite::limits,
     [](std::uint64_t s, std::uint64_t i, std::uint64_t p) {
       auto gen = trial_gen(s, i, p);
       return prop_smoothed_risk_limit(draw_instance(gen, 3, 6, 1.0, 8));
     }},
};

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

std::optional<Suite> suite_from_name(const std::string& name) {
  if (name == "identities") return Suite::identities;
  if (name == "bounds") return Suite::bounds;
  if (name == "limits") return Suite::limits;
  if (name == "all") return Suite::all;
  return std::nullopt;
}

std::string suite_name(Suite suite) {
  switch (suite) {
    case Suite::identities: return "identities";
    case Suite::bounds: return "bounds";
    case Suite::limits: return "limits";
    case Suite::all: return "all";
  }
  return "?";
}

bool Report::all_passed() const {
  return std::all_of(results.begin(), results.end(),
                     [](const PropertyResult& r) { return r.failures == 0; });
}

Report run_suite(Suite suite, std::uint64_t seed, int trials, int threads) {
  Report report;
  const int workers = resolve_threads(threads);

  std::uint64_t property_id = 0;
  for (const Property& prop : kProperties) {
    const std::uint64_t pid = property_id++;
    if (suite != Suite::all && prop.suite != suite) continue;

    PropertyResult result;
    result.property = prop.name;
    result.trials = trials;

    std::mutex mu;
    std::vector<std::pair<std::uint64_t, json>> failures;
    auto worker = [&](int tid) {
      for (int t = tid; t < trials; t += workers) {
        auto failure = prop.trial(seed, static_cast<std::uint64_t>(t), pid);
        if (failure) {
          json record;
          record["suite"] = suite_name(prop.suite);
          record["property"] = prop.name;
          record["seed"] = seed;
          record["trial"] = t;
          record["detail"] = *failure;
          std::lock_guard<std::mutex> lock(mu);
          failures.emplace_back(static_cast<std::uint64_t>(t),
                                std::move(record));
        }
      }
    };
    if (workers == 1 || trials < 4) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker, w);
      for (auto& th : pool) th.join();
    }

    result.failures = static_cast<int>(failures.size());
    if (!failures.empty()) {
      auto it = std::min_element(
          failures.begin(), failures.end(),
          [](const auto& a, const auto& b) { return a.first < b.first; });
      result.first_failure = it->second;
    }
    report.results.push_back(std::move(result));
  }
  return report;
}

bool replay(const nlohmann::json& record, std::string* detail) {
  const std::string property = record.at("property").get<std::string>();
  const auto seed = record.at("seed").get<std::uint64_t>();
  const auto trial = record.at("trial").get<std::uint64_t>();

  std::uint64_t property_id = 0;
  for (const Property& prop : kProperties) {
    const std::uint64_t pid = property_id++;
    if (prop.name != property) continue;
    const auto failure = prop.trial(seed, trial, pid);
    if (detail != nullptr) {
      *detail = failure ? "failure reproduced: " + failure->dump()
                        : "trial passed on replay";
    }
    return failure.has_value();
  }
  if (detail != nullptr) *detail = "unknown property: " + property;
  return false;
}

}  // namespace relusgd::verify
