#include "relusgd/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "relusgd/smooth_relu.hpp"

namespace relusgd {

NetworkShape make_shape(int input_dim, int hidden_width) {
  if (input_dim < 1 || hidden_width < 1) {
    throw std::invalid_argument("network shape: dimensions must be positive");
  }
  return NetworkShape{input_dim, hidden_width};
}

LayoutVector::LayoutVector(NetworkShape shape)
    : shape_(shape), values_(static_cast<size_t>(shape.param_count()), 0.0) {
  if (shape.input_dim < 1 || shape.hidden_width < 1) {
    throw std::invalid_argument("layout vector: bad shape");
  }
}

LayoutVector::LayoutVector(NetworkShape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  if (shape.input_dim < 1 || shape.hidden_width < 1) {
    throw std::invalid_argument("layout vector: bad shape");
  }
  if (static_cast<int>(values_.size()) != shape.param_count()) {
    throw std::invalid_argument(
        "layout vector: expected " + std::to_string(shape.param_count()) +
        " values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("layout vector: non-finite entry");
    }
  }
}

double LayoutVector::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

double LayoutVector::norm() const { return std::sqrt(squared_norm()); }

ParamViews unpack(const LayoutVector& phi) {
  const int d = phi.shape().input_dim;
  const int h = phi.shape().hidden_width;
  const std::span<const double> all = phi.values();
  return ParamViews{
      all.subspan(0, static_cast<size_t>(h) * d),
      all.subspan(static_cast<size_t>(h) * d, static_cast<size_t>(h)),
      all.subspan(static_cast<size_t>(h) * (d + 1), static_cast<size_t>(h)),
      all.back(),
  };
}

bool all_finite(const LayoutVector& vec) {
  for (double v : vec.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double dot(const LayoutVector& x, const LayoutVector& y) {
  if (x.shape() != y.shape()) {
    throw std::invalid_argument("dot: shape mismatch");
  }
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

LayoutVector axpy(const LayoutVector& x, double step, const LayoutVector& g) {
  if (x.shape() != g.shape()) {
    throw std::invalid_argument("axpy: shape mismatch");
  }
  LayoutVector out(x.shape());
  for (int i = 0; i < x.size(); ++i) out[i] = x[i] - step * g[i];
  return out;
}

namespace {

void check_point(const ParamVector& phi, std::span<const double> x) {
  if (static_cast<int>(x.size()) != phi.shape().input_dim) {
    throw std::invalid_argument("input point: dimension mismatch");
  }
}

}  // namespace

double pre_activation(const ParamVector& phi, int unit,
                      std::span<const double> x) {
  check_point(phi, x);
  const int d = phi.shape().input_dim;
  double acc = phi.bias(unit);
  for (int j = 0; j < d; ++j) acc += phi.weight(unit, j) * x[j];
  return acc;
}

double realize_exact(const ParamVector& phi, std::span<const double> x) {
  check_point(phi, x);
  const int h = phi.shape().hidden_width;
  double out = phi.output_shift();
  for (int i = 0; i < h; ++i) {
    const double p = pre_activation(phi, i, x);
    if (p > 0.0) out += phi.outer(i) * p;
  }
  return out;
}

double realize_smoothed(const ParamVector& phi, std::span<const double> x,
                        std::int64_t r) {
  check_point(phi, x);
  const int h = phi.shape().hidden_width;
  double out = phi.output_shift();
  for (int i = 0; i < h; ++i) {
    out += phi.outer(i) * smooth_relu::value(r, pre_activation(phi, i, x));
  }
  return out;
}

bool active_indicator(const ParamVector& phi, int unit,
                      std::span<const double> x) {
  return pre_activation(phi, unit, x) > 0.0;
}

}  // namespace relusgd
