#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "relusgd/network.hpp"
#include "relusgd/rng.hpp"

using namespace relusgd;

namespace {

// The worked d=1, H=3 parameter point used across the suites.
ParamVector listing_phi() {
  return ParamVector(make_shape(1, 3), {-1, 1, 2, 2, -2, 0, 1, -1, 2, 3});
}

ParamVector random_phi(rng::SequenceGenerator& gen, int d, int h,
                       double scale) {
  ParamVector phi(make_shape(d, h));
  for (int i = 0; i < phi.size(); ++i) {
    phi[i] = gen.next_uniform(-scale, scale);
  }
  return phi;
}

}  // namespace

TEST_CASE("shape arithmetic and validation") {
  CHECK(make_shape(1, 3).param_count() == 10);
  CHECK(make_shape(2, 1).param_count() == 5);
  CHECK(make_shape(3, 16).param_count() == 3 * 16 + 2 * 16 + 1);
  CHECK_THROWS_AS(make_shape(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_shape(1, 0), std::invalid_argument);
}

TEST_CASE("layout vector validation") {
  CHECK_THROWS_AS(ParamVector(make_shape(1, 3), {1, 2, 3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      ParamVector(make_shape(1, 1),
                  {1.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      ParamVector(make_shape(1, 1),
                  {1.0, std::numeric_limits<double>::infinity(), 0.0, 0.0}),
      std::invalid_argument);
}

TEST_CASE("unpack exposes the w/b/v/c groups") {
  SUBCASE("worked example, d=1 H=3") {
    const ParamVector phi = listing_phi();
    CHECK(phi.weight(0, 0) == -1);
    CHECK(phi.weight(1, 0) == 1);
    CHECK(phi.weight(2, 0) == 2);
    CHECK(phi.bias(0) == 2);
    CHECK(phi.bias(1) == -2);
    CHECK(phi.bias(2) == 0);
    CHECK(phi.outer(0) == 1);
    CHECK(phi.outer(1) == -1);
    CHECK(phi.outer(2) == 2);
    CHECK(phi.output_shift() == 3);

    const ParamViews views = unpack(phi);
    CHECK(views.weights.size() == 3);
    CHECK(views.biases[1] == -2);
    CHECK(views.outer[2] == 2);
    CHECK(views.output_shift == 3);
  }
  SUBCASE("zero vector, d=2 H=1") {
    const ParamVector phi(make_shape(2, 1), {0, 0, 0, 0, 0});
    CHECK(phi.weight(0, 0) == 0);
    CHECK(phi.weight(0, 1) == 0);
    CHECK(phi.bias(0) == 0);
    CHECK(phi.outer(0) == 0);
    CHECK(phi.output_shift() == 0);
  }
  SUBCASE("index arithmetic, d=1 H=1") {
    const ParamVector phi(make_shape(1, 1), {7, 8, 9, 10});
    CHECK(phi.weight(0, 0) == 7);
    CHECK(phi.bias(0) == 8);
    CHECK(phi.outer(0) == 9);
    CHECK(phi.output_shift() == 10);
  }
}

TEST_CASE("layout round-trip reproduces the flat vector exactly") {
  rng::SequenceGenerator gen(11, rng::Stream::verify, 900, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = static_cast<int>(gen.next_int(1, 4));
    const int h = static_cast<int>(gen.next_int(1, 9));
    const ParamVector phi = random_phi(gen, d, h, 5.0);

    ParamVector rebuilt(phi.shape());
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < d; ++j) rebuilt.weight(i, j) = phi.weight(i, j);
      rebuilt.bias(i) = phi.bias(i);
      rebuilt.outer(i) = phi.outer(i);
    }
    rebuilt.output_shift() = phi.output_shift();
    for (int i = 0; i < phi.size(); ++i) CHECK(rebuilt[i] == phi[i]);
  }
}

TEST_CASE("exact realization") {
  SUBCASE("worked example evaluates to 11 at x=2") {
    const std::vector<double> x{2.0};
    CHECK(realize_exact(listing_phi(), x) == 11.0);
  }
  SUBCASE("all-zero parameters realize the zero function") {
    const ParamVector zero(make_shape(2, 3));
    CHECK(realize_exact(zero, std::vector<double>{0.3, -4.0}) == 0.0);
  }
  SUBCASE("single hinge max(x-0.5, 0)") {
    const ParamVector phi(make_shape(1, 1), {1, -0.5, 1, 0});
    CHECK(realize_exact(phi, std::vector<double>{0.25}) == 0.0);
    CHECK(realize_exact(phi, std::vector<double>{0.75}) ==
          doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(realize_exact(listing_phi(), std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("smoothed realization") {
  SUBCASE("zero parameters stay zero for every index") {
    const ParamVector zero(make_shape(1, 2));
    CHECK(realize_smoothed(zero, std::vector<double>{0.7}, 1) == 0.0);
  }
  SUBCASE("deep in the active region the ramp is recovered") {
    // At finite r the active side undershoots by exactly ln(r)/r (up to an
    // exponentially small correction), so the ramp is recovered at the
    // ln(r)/r rate rather than exponentially.
    const ParamVector phi(make_shape(1, 1), {1, 0, 1, 0});
    CHECK(realize_smoothed(phi, std::vector<double>{5.0}, 50) ==
          doctest::Approx(5.0 - std::log(50.0) / 50.0).epsilon(1e-12));
    CHECK(realize_smoothed(phi, std::vector<double>{5.0}, 10000) ==
          doctest::Approx(5.0).epsilon(1e-3));
  }
  SUBCASE("worked example converges to the exact value") {
    // The gap is not monotone at small r (the active unit undershoots by
    // ln(r)/r while the two kink units cancel), but the tail decays.
    const ParamVector phi = listing_phi();
    const std::vector<double> x{2.0};
    double prev_gap = 1e300;
    for (std::int64_t r : {1000LL, 10000LL, 100000LL, 1000000LL}) {
      const double gap = std::fabs(realize_smoothed(phi, x, r) - 11.0);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    CHECK(prev_gap < 1e-4);
  }
}

TEST_CASE("activation indicator uses strict positivity") {
  const ParamVector phi = listing_phi();
  const std::vector<double> x{2.0};
  // units 0 and 1 sit exactly on their kinks at x=2
  CHECK(pre_activation(phi, 0, x) == 0.0);
  CHECK(pre_activation(phi, 1, x) == 0.0);
  CHECK_FALSE(active_indicator(phi, 0, x));
  CHECK_FALSE(active_indicator(phi, 1, x));
  CHECK(pre_activation(phi, 2, x) == 4.0);
  CHECK(active_indicator(phi, 2, x));

  const ParamVector zero(make_shape(1, 3));
  CHECK_FALSE(active_indicator(zero, 0, x));
}

TEST_CASE("positive homogeneity of a hidden unit") {
  rng::SequenceGenerator gen(12, rng::Stream::verify, 901, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const ParamVector phi = random_phi(gen, 1, 1, 2.0);
    const double lambda = gen.next_uniform(0.1, 4.0);
    ParamVector scaled = phi;
    scaled.weight(0, 0) *= lambda;
    scaled.bias(0) *= lambda;
    const std::vector<double> x{gen.next_uniform(-1.0, 1.0)};
    const double hidden = realize_exact(phi, x) - phi.output_shift();
    const double hidden_scaled =
        realize_exact(scaled, x) - scaled.output_shift();
    CHECK(hidden_scaled == doctest::Approx(lambda * hidden).epsilon(1e-12));
  }
}

TEST_CASE("pointwise limit of the smoothed realization") {
  // Off the kinks the smoothed network converges to the exact one; the
  // tail along doubling indices is nonincreasing and ends below 1e-6.
  rng::SequenceGenerator gen(13, rng::Stream::verify, 902, 0);
  int accepted = 0;
  while (accepted < 25) {
    const int d = static_cast<int>(gen.next_int(1, 3));
    const int h = static_cast<int>(gen.next_int(1, 5));
    const ParamVector phi = random_phi(gen, d, h, 1.0);
    std::vector<double> x(static_cast<size_t>(d));
    for (auto& c : x) c = gen.next_uniform(0.0, 1.0);
    bool off_kink = true;
    for (int i = 0; i < h; ++i) {
      off_kink = off_kink && std::fabs(pre_activation(phi, i, x)) >= 1e-3;
    }
    if (!off_kink) continue;
    ++accepted;

    const double exact = realize_exact(phi, x);
    double prev = 1e300;
    for (int k = 32; k <= 44; ++k) {
      const double gap =
          std::fabs(realize_smoothed(phi, x, std::int64_t{1} << k) - exact);
      CHECK(gap <= prev + 1e-15 * (1.0 + prev));
      prev = gap;
    }
    CHECK(prev < 1e-6);
  }
}

TEST_CASE("local Lipschitz bound for the realization") {
  rng::SequenceGenerator gen(14, rng::Stream::verify, 903, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = static_cast<int>(gen.next_int(1, 3));
    const int h = static_cast<int>(gen.next_int(1, 6));
    const double a = 1.0;  // box [0,1]^d
    ParamVector phi = random_phi(gen, d, h, 2.0);
    ParamVector psi = phi;
    for (int i = 0; i < psi.size(); ++i) {
      psi[i] += gen.next_uniform(-0.5, 0.5);
    }
    ParamVector diff(phi.shape());
    for (int i = 0; i < phi.size(); ++i) diff[i] = phi[i] - psi[i];
    const double bound = 2.0 * a * (d + 1.0) * (h + 1.0) *
                         std::max({1.0, phi.norm(), psi.norm()}) * diff.norm();

    std::vector<double> x(static_cast<size_t>(d));
    for (int probe = 0; probe < 40; ++probe) {
      for (auto& c : x) c = gen.next_uniform(0.0, 1.0);
      const double gap =
          std::fabs(realize_exact(phi, x) - realize_exact(psi, x));
      CHECK(gap <= bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("vector helpers") {
  const ParamVector x(make_shape(1, 1), {1, 2, 3, 4});
  const ParamVector y(make_shape(1, 1), {2, 0, -1, 1});
  CHECK(dot(x, y) == 3.0);
  CHECK(x.squared_norm() == 30.0);
  const ParamVector z = axpy(x, 2.0, y);
  CHECK(z[0] == -3.0);
  CHECK(z[3] == 2.0);
  const ParamVector other(make_shape(1, 2));
  CHECK_THROWS_AS(dot(x, other), std::invalid_argument);
  CHECK_THROWS_AS(axpy(x, 1.0, other), std::invalid_argument);
}
