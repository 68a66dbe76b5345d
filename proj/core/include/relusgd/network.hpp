#pragma once

#include <cstdint>
#include <span>
#include <vector>

// Parameter layout and forward evaluation of the shallow ReLU network
//
//   N(x) = c + sum_i v_i * relu(b_i + <w_i, x>)
//
// over a flat parameter vector phi of length dd = d*H + 2H + 1, stored as
//   phi = (w_{1,1..d}, ..., w_{H,1..d}, b_1..b_H, v_1..v_H, c).
// Unit/coordinate indices in this API are 0-based; the stored order is the
// one above, so w_{i,j} lives at i*d + j, b_i at H*d + i, v_i at H*(d+1) + i
// and c at dd - 1.

namespace relusgd {

struct NetworkShape {
  int input_dim = 1;     // d
  int hidden_width = 1;  // H

  int param_count() const {
    return input_dim * hidden_width + 2 * hidden_width + 1;
  }

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

// Validating constructor; throws std::invalid_argument on bad dimensions.
NetworkShape make_shape(int input_dim, int hidden_width);

// Flat vector addressed through the w/b/v/c layout.  Used both for parameter
// points and for gradients (they share the layout by construction).
class LayoutVector {
 public:
  LayoutVector() = default;
  explicit LayoutVector(NetworkShape shape);  // zero-initialized
  LayoutVector(NetworkShape shape, std::vector<double> values);

  const NetworkShape& shape() const { return shape_; }
  int size() const { return static_cast<int>(values_.size()); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double operator[](int i) const { return values_[static_cast<size_t>(i)]; }
  double& operator[](int i) { return values_[static_cast<size_t>(i)]; }

  double weight(int unit, int coord) const {
    return values_[static_cast<size_t>(unit * shape_.input_dim + coord)];
  }
  double& weight(int unit, int coord) {
    return values_[static_cast<size_t>(unit * shape_.input_dim + coord)];
  }
  double bias(int unit) const { return values_[bias_offset() + unit]; }
  double& bias(int unit) { return values_[bias_offset() + unit]; }
  double outer(int unit) const { return values_[outer_offset() + unit]; }
  double& outer(int unit) { return values_[outer_offset() + unit]; }
  double output_shift() const { return values_.back(); }
  double& output_shift() { return values_.back(); }

  double squared_norm() const;
  double norm() const;

 private:
  size_t bias_offset() const {
    return static_cast<size_t>(shape_.hidden_width * shape_.input_dim);
  }
  size_t outer_offset() const {
    return static_cast<size_t>(shape_.hidden_width * (shape_.input_dim + 1));
  }

  NetworkShape shape_{};
  std::vector<double> values_;
};

using ParamVector = LayoutVector;
using GradientVector = LayoutVector;

// Read-only group views into the flat storage.
struct ParamViews {
  std::span<const double> weights;  // H*d, row-major by unit
  std::span<const double> biases;   // H
  std::span<const double> outer;    // H
  double output_shift;
};

ParamViews unpack(const LayoutVector& phi);

bool all_finite(const LayoutVector& vec);

double dot(const LayoutVector& x, const LayoutVector& y);

// x - step * g
LayoutVector axpy(const LayoutVector& x, double step, const LayoutVector& g);

// b_i + <w_i, x>
double pre_activation(const ParamVector& phi, int unit,
                      std::span<const double> x);

// N(x) with the exact ReLU.
double realize_exact(const ParamVector& phi, std::span<const double> x);

// N(x) with the smooth approximation of index r in place of the ReLU.
double realize_smoothed(const ParamVector& phi, std::span<const double> x,
                        std::int64_t r);

// Strict positivity of the pre-activation; a pre-activation of exactly zero
// counts as inactive (left-derivative convention).
bool active_indicator(const ParamVector& phi, int unit,
                      std::span<const double> x);

}  // namespace relusgd
