#include "relusgd/input_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relusgd {

namespace {

constexpr double kWeightSumTolerance = 1e-12;

// 3-point Gauss-Legendre on [-1, 1]; exact through degree 5.
constexpr double kGlNode = 0.7745966692414834;  // sqrt(3/5)
constexpr double kGlWeightOuter = 5.0 / 9.0;
constexpr double kGlWeightCenter = 8.0 / 9.0;

}  // namespace

InputDistribution InputDistribution::uniform_box(double lower, double upper,
                                                 int dim) {
  if (!(upper > lower)) {
    throw std::invalid_argument("distribution: need upper > lower");
  }
  if (dim < 1) throw std::invalid_argument("distribution: dim must be >= 1");
  InputDistribution d;
  d.kind_ = Kind::uniform_box;
  d.lower_ = lower;
  d.upper_ = upper;
  d.dim_ = dim;
  return d;
}

InputDistribution InputDistribution::discrete(
    double lower, double upper, int dim,
    std::vector<std::vector<double>> points, std::vector<double> weights) {
  if (!(upper > lower)) {
    throw std::invalid_argument("distribution: need upper > lower");
  }
  if (dim < 1) throw std::invalid_argument("distribution: dim must be >= 1");
  if (points.empty() || points.size() != weights.size()) {
    throw std::invalid_argument(
        "distribution: need matching, nonempty points and weights");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("distribution: negative weight");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > kWeightSumTolerance) {
    throw std::invalid_argument("distribution: weights must sum to 1");
  }
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != dim) {
      throw std::invalid_argument("distribution: point dimension mismatch");
    }
    for (double c : p) {
      if (c < lower || c > upper) {
        throw std::invalid_argument("distribution: point outside the box");
      }
    }
  }
  InputDistribution d;
  d.kind_ = Kind::discrete_finite;
  d.lower_ = lower;
  d.upper_ = upper;
  d.dim_ = dim;
  d.points_ = std::move(points);
  d.weights_ = std::move(weights);
  return d;
}

double InputDistribution::domain_bound() const {
  return std::max({std::fabs(lower_), std::fabs(upper_), 1.0});
}

EmpiricalBatch EmpiricalBatch::single(std::int64_t step,
                                      std::vector<double> x) {
  EmpiricalBatch b;
  b.step = step;
  b.dim = static_cast<int>(x.size());
  b.size = 1;
  b.data = std::move(x);
  return b;
}

EmpiricalBatch sample_batch(const InputDistribution& dist, std::int64_t step,
                            int batch_size, std::uint64_t seed) {
  if (batch_size < 1) {
    throw std::invalid_argument("sample_batch: batch size must be >= 1");
  }
  EmpiricalBatch batch;
  batch.step = step;
  batch.dim = dist.dim();
  batch.size = batch_size;
  batch.data.resize(static_cast<size_t>(batch_size) * dist.dim());

  const auto n = static_cast<std::uint64_t>(step);
  if (dist.kind() == InputDistribution::Kind::uniform_box) {
    for (int m = 0; m < batch_size; ++m) {
      for (int j = 0; j < dist.dim(); ++j) {
        // coordinate draws indexed by (n, m*dim + j)
        const std::uint64_t k =
            static_cast<std::uint64_t>(m) * dist.dim() + j;
        batch.data[static_cast<size_t>(m) * dist.dim() + j] = rng::uniform(
            seed, rng::Stream::data, n, k, 0, dist.lower(), dist.upper());
      }
    }
  } else {
    const auto& weights = dist.weights();
    for (int m = 0; m < batch_size; ++m) {
      const double u = rng::to_unit(rng::counter_hash(
          seed, rng::Stream::data, n, static_cast<std::uint64_t>(m), 1));
      double cdf = 0.0;
      size_t idx = weights.size() - 1;
      for (size_t i = 0; i < weights.size(); ++i) {
        cdf += weights[i];
        if (u < cdf) {
          idx = i;
          break;
        }
      }
      const auto& p = dist.points()[idx];
      std::copy(p.begin(), p.end(),
                batch.data.begin() + static_cast<size_t>(m) * dist.dim());
    }
  }
  return batch;
}

double expectation_piecewise_1d(
    const InputDistribution& dist, std::span<const double> breakpoints,
    const std::function<double(double)>& integrand) {
  if (dist.kind() != InputDistribution::Kind::uniform_box || dist.dim() != 1) {
    throw std::invalid_argument(
        "expectation_piecewise_1d: needs the 1-d uniform box");
  }
  const double a = dist.lower();
  const double b = dist.upper();
  double prev = a;
  for (double t : breakpoints) {
    if (t < prev || t > b) {
      throw std::invalid_argument(
          "expectation_piecewise_1d: breakpoints must be sorted within [a,b]");
    }
    prev = t;
  }

  double total = 0.0;
  double lo = a;
  auto accumulate_interval = [&](double left, double right) {
    const double half = 0.5 * (right - left);
    if (half <= 0.0) return;
    const double mid = 0.5 * (left + right);
    total += half * (kGlWeightOuter * integrand(mid - half * kGlNode) +
                     kGlWeightCenter * integrand(mid) +
                     kGlWeightOuter * integrand(mid + half * kGlNode));
  };
  for (double t : breakpoints) {
    accumulate_interval(lo, t);
    lo = t;
  }
  accumulate_interval(lo, b);
  return total / (b - a);
}

std::vector<WeightedNode> quadrature_grid(const InputDistribution& dist,
                                          std::int64_t per_axis) {
  if (dist.kind() != InputDistribution::Kind::uniform_box) {
    throw std::invalid_argument("quadrature_grid: needs a uniform box");
  }
  if (per_axis < 2) {
    throw std::invalid_argument("quadrature_grid: need >= 2 nodes per axis");
  }
  const int d = dist.dim();
  const double a = dist.lower();
  const double width = (dist.upper() - dist.lower()) / static_cast<double>(per_axis);

  std::int64_t count = 1;
  for (int j = 0; j < d; ++j) count *= per_axis;
  const double w = 1.0 / static_cast<double>(count);

  std::vector<WeightedNode> nodes;
  nodes.reserve(static_cast<size_t>(count));
  std::vector<std::int64_t> index(static_cast<size_t>(d), 0);
  for (std::int64_t k = 0; k < count; ++k) {
    WeightedNode node;
    node.weight = w;
    node.point.resize(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
      node.point[static_cast<size_t>(j)] =
          a + (static_cast<double>(index[static_cast<size_t>(j)]) + 0.5) * width;
    }
    nodes.push_back(std::move(node));
    for (int j = 0; j < d; ++j) {
      if (++index[static_cast<size_t>(j)] < per_axis) break;
      index[static_cast<size_t>(j)] = 0;
    }
  }
  return nodes;
}

}  // namespace relusgd
