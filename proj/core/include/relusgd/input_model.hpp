#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "relusgd/rng.hpp"

// The input distribution mu on [a,b]^d: reproducible i.i.d. batch sampling
// plus the integration backends used for true-risk quantities (exact
// piecewise Gauss-Legendre in one dimension, midpoint tensor grids above).

namespace relusgd {

class InputDistribution {
 public:
  enum class Kind { uniform_box, discrete_finite };

  static InputDistribution uniform_box(double lower, double upper, int dim);
  // Finite support {points} with the given probability weights; every point
  // must lie in [lower, upper]^dim and the weights must sum to 1 (1e-12).
  static InputDistribution discrete(double lower, double upper, int dim,
                                    std::vector<std::vector<double>> points,
                                    std::vector<double> weights);

  Kind kind() const { return kind_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  int dim() const { return dim_; }
  const std::vector<std::vector<double>>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  // max{|a|, |b|, 1}; the box constant entering every gradient/step bound.
  double domain_bound() const;

 private:
  InputDistribution() = default;

  Kind kind_ = Kind::uniform_box;
  double lower_ = 0.0;
  double upper_ = 1.0;
  int dim_ = 1;
  std::vector<std::vector<double>> points_;
  std::vector<double> weights_;
};

// One mini-batch {X^{n,1}, ..., X^{n,M}} of input points, stored row-major.
struct EmpiricalBatch {
  std::int64_t step = 0;  // n
  int dim = 1;
  int size = 0;  // M
  std::vector<double> data;

  std::span<const double> point(int m) const {
    return {data.data() + static_cast<size_t>(m) * dim,
            static_cast<size_t>(dim)};
  }

  static EmpiricalBatch single(std::int64_t step, std::vector<double> x);
};

// M i.i.d. draws for step n.  The value of sample (n, m) is a pure function
// of (seed, n, m), so batches are reproducible in isolation and distinct
// (n, m) pairs come from independent substreams.
EmpiricalBatch sample_batch(const InputDistribution& dist, std::int64_t step,
                            int batch_size, std::uint64_t seed);

// Expectation of `integrand` under the 1-d uniform distribution, computed
// per interval between consecutive breakpoints with 3-point Gauss-Legendre
// (exact for polynomial pieces up to degree five).  Breakpoints must be
// sorted and lie inside [a, b].
double expectation_piecewise_1d(const InputDistribution& dist,
                                std::span<const double> breakpoints,
                                const std::function<double(double)>& integrand);

struct WeightedNode {
  std::vector<double> point;
  double weight;
};

// Tensor-product midpoint rule with `per_axis` nodes per axis; weights sum
// to one.  The approximate backend for dimensions where exact piecewise
// integration is unavailable.
std::vector<WeightedNode> quadrature_grid(const InputDistribution& dist,
                                          std::int64_t per_axis);

}  // namespace relusgd
