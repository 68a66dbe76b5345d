#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "relusgd/input_model.hpp"
#include "relusgd/optimizer.hpp"
#include "relusgd/risk.hpp"
#include "relusgd/rng.hpp"
#include "relusgd/smooth_relu.hpp"

namespace {

using namespace relusgd;

ParamVector bench_phi(int d, int h) {
  rng::SequenceGenerator gen(7, rng::Stream::verify, 999, 0);
  ParamVector phi(make_shape(d, h));
  for (int i = 0; i < phi.size(); ++i) phi[i] = gen.next_uniform(-1.0, 1.0);
  return phi;
}

void BM_smooth_relu_value(benchmark::State& state) {
  double x = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(smooth_relu::value(64, x));
    x += 1e-6;
  }
}
BENCHMARK(BM_smooth_relu_value);

void BM_realize_exact(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int h = static_cast<int>(state.range(1));
  const ParamVector phi = bench_phi(d, h);
  const std::vector<double> x(static_cast<size_t>(d), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(realize_exact(phi, x));
  }
}
BENCHMARK(BM_realize_exact)->Args({1, 8})->Args({4, 64})->Args({16, 256});

void BM_empirical_gradient(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const ParamVector phi = bench_phi(1, h);
  const auto dist = InputDistribution::uniform_box(0, 1, 1);
  const EmpiricalBatch batch = sample_batch(dist, 0, m, 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_gradient(phi, batch, 1.0));
  }
}
BENCHMARK(BM_empirical_gradient)->Args({8, 16})->Args({64, 64});

void BM_true_gradient_exact_1d(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  const ParamVector phi = bench_phi(1, h);
  const RiskModel model(InputDistribution::uniform_box(0, 1, 1),
                        TargetSpec::constant(1.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.gradient(phi));
  }
}
BENCHMARK(BM_true_gradient_exact_1d)->Arg(8)->Arg(64);

void BM_sgd_step(benchmark::State& state) {
  RunConfig cfg;
  cfg.shape = make_shape(1, 8);
  cfg.distribution = InputDistribution::uniform_box(0, 1, 1);
  cfg.xi = 1.0;
  cfg.batch_sizes = {16};
  const Schedule schedule{Schedule::Kind::constant, 0.01, 0.0, 0.0};
  ParamVector theta = bench_phi(1, 8);
  std::int64_t n = 0;
  for (auto _ : state) {
    auto [next, row] = sgd_step(theta, n++, cfg, schedule);
    benchmark::DoNotOptimize(row);
    theta = std::move(next);
  }
}
BENCHMARK(BM_sgd_step);

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::RunSpecifiedBenchmarks();
  return 0;
}
