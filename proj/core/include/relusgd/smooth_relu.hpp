#pragma once

#include <cstdint>
#include <span>
#include <vector>

// The smooth ReLU family
//
//   R_r(x) = r^-1 * ln(1 + r^-1 * e^(r x)),   r = 1, 2, 3, ...
//
// which converges pointwise to max{x, 0} while its derivative converges to
// the indicator of (0, inf); in particular R_r'(0) = 1/(r+1) -> 0, matching
// the left-derivative convention at the kink.  Evaluation goes through the
// rearrangements
//
//   R_r(x)  = softplus(r x - ln r) / r
//   R_r'(x) = logistic(r x - ln r)
//
// so nothing overflows for |x| <= 1e8.

namespace relusgd::smooth_relu {

// ln(1 + e^u) without overflow.
double softplus(double u);

// 1 / (1 + e^-u), strictly inside (0, 1) until e^u under/overflows.
double logistic(double u);

double value(std::int64_t r, double x);

double derivative(std::int64_t r, double x);

struct LimitGap {
  double value_gap;       // |R_r(x) - max(x, 0)|
  double derivative_gap;  // |R_r'(x) - 1_(0,inf)(x)|
};

// Pointwise approximation gaps along a strictly increasing index list.
std::vector<LimitGap> limit_profile(double x, std::span<const std::int64_t> rs);

}  // namespace relusgd::smooth_relu
