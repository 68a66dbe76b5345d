#include "relusgd/smooth_relu.hpp"

#include <cmath>
#include <stdexcept>

namespace relusgd::smooth_relu {

double softplus(double u) {
  // max(u, 0) + log1p(e^-|u|); never overflows.
  return std::fmax(u, 0.0) + std::log1p(std::exp(-std::fabs(u)));
}

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

namespace {

double shifted_argument(std::int64_t r, double x) {
  if (r < 1) throw std::invalid_argument("smooth relu: index must be >= 1");
  const double rd = static_cast<double>(r);
  return rd * x - std::log(rd);
}

}  // namespace

double value(std::int64_t r, double x) {
  return softplus(shifted_argument(r, x)) / static_cast<double>(r);
}

double derivative(std::int64_t r, double x) {
  return logistic(shifted_argument(r, x));
}

std::vector<LimitGap> limit_profile(double x,
                                    std::span<const std::int64_t> rs) {
  for (size_t k = 1; k < rs.size(); ++k) {
    if (rs[k] <= rs[k - 1]) {
      throw std::invalid_argument("limit profile: indices must increase");
    }
  }
  const double relu = std::fmax(x, 0.0);
  const double indicator = x > 0.0 ? 1.0 : 0.0;
  std::vector<LimitGap> out;
  out.reserve(rs.size());
  for (std::int64_t r : rs) {
    out.push_back({std::fabs(value(r, x) - relu),
                   std::fabs(derivative(r, x) - indicator)});
  }
  return out;
}

}  // namespace relusgd::smooth_relu
