#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "relusgd/input_model.hpp"

using namespace relusgd;

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(InputDistribution::uniform_box(1.0, 1.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(InputDistribution::uniform_box(0.0, 1.0, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(InputDistribution::discrete(0, 1, 1, {{0.5}}, {0.5}),
                  std::invalid_argument);  // weights must sum to 1
  CHECK_THROWS_AS(InputDistribution::discrete(0, 1, 1, {{0.5}, {0.7}},
                                              {1.5, -0.5}),
                  std::invalid_argument);  // negative weight
  CHECK_THROWS_AS(InputDistribution::discrete(0, 1, 1, {{2.0}}, {1.0}),
                  std::invalid_argument);  // point outside the box
  CHECK_THROWS_AS(InputDistribution::discrete(0, 1, 2, {{0.5}}, {1.0}),
                  std::invalid_argument);  // dim mismatch
}

TEST_CASE("domain bound constant") {
  CHECK(InputDistribution::uniform_box(0, 1, 1).domain_bound() == 1.0);
  CHECK(InputDistribution::uniform_box(-3, 1, 2).domain_bound() == 3.0);
  CHECK(InputDistribution::uniform_box(0.25, 0.5, 1).domain_bound() == 1.0);
}

TEST_CASE("batch sampling") {
  SUBCASE("uniform draws stay in the box") {
    const auto dist = InputDistribution::uniform_box(0, 1, 2);
    const EmpiricalBatch batch = sample_batch(dist, 0, 3, 42);
    CHECK(batch.size == 3);
    CHECK(batch.dim == 2);
    for (double v : batch.data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  SUBCASE("a point mass yields copies of its atom") {
    const auto dist = InputDistribution::discrete(0, 3, 1, {{2.0}}, {1.0});
    const EmpiricalBatch batch = sample_batch(dist, 7, 5, 99);
    CHECK(batch.size == 5);
    for (double v : batch.data) CHECK(v == 2.0);
  }
  SUBCASE("identical arguments reproduce the batch") {
    const auto dist = InputDistribution::uniform_box(-1, 2, 3);
    const EmpiricalBatch a = sample_batch(dist, 5, 8, 1234);
    const EmpiricalBatch b = sample_batch(dist, 5, 8, 1234);
    CHECK(a.data == b.data);
  }
  SUBCASE("distinct steps give disjoint substreams") {
    const auto dist = InputDistribution::uniform_box(0, 1, 1);
    const EmpiricalBatch a = sample_batch(dist, 0, 64, 7);
    const EmpiricalBatch b = sample_batch(dist, 1, 64, 7);
    std::set<double> seen(a.data.begin(), a.data.end());
    for (double v : b.data) CHECK(seen.count(v) == 0);
  }
  SUBCASE("empty batches are rejected") {
    const auto dist = InputDistribution::uniform_box(0, 1, 1);
    CHECK_THROWS_AS(sample_batch(dist, 0, 0, 1), std::invalid_argument);
  }
  SUBCASE("two-atom distribution hits both atoms at roughly their weights") {
    const auto dist =
        InputDistribution::discrete(0, 1, 1, {{0.25}, {0.75}}, {0.25, 0.75});
    const EmpiricalBatch batch = sample_batch(dist, 0, 4000, 5);
    const auto heavy = static_cast<double>(
        std::count(batch.data.begin(), batch.data.end(), 0.75));
    CHECK(heavy / 4000.0 == doctest::Approx(0.75).epsilon(0.05));
  }
}

TEST_CASE("uniform sampling marginals") {
  const auto dist = InputDistribution::uniform_box(0, 1, 1);
  const EmpiricalBatch batch = sample_batch(dist, 0, 100000, 2024);
  double mean = 0.0;
  for (double v : batch.data) mean += v;
  mean /= batch.size;
  double var = 0.0;
  for (double v : batch.data) var += (v - mean) * (v - mean);
  var /= batch.size;
  CHECK(std::fabs(mean - 0.5) < 0.01);
  CHECK(std::fabs(var - 1.0 / 12.0) < 0.01);
}

TEST_CASE("piecewise expectation in one dimension") {
  const auto dist = InputDistribution::uniform_box(0, 1, 1);
  SUBCASE("normalization") {
    CHECK(expectation_piecewise_1d(dist, {}, [](double) { return 1.0; }) ==
          doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("hinge square integrates to 1/24") {
    const std::vector<double> brk{0.5};
    const double val = expectation_piecewise_1d(dist, brk, [](double x) {
      return x > 0.5 ? (x - 0.5) * (x - 0.5) : 0.0;
    });
    CHECK(val == doctest::Approx(1.0 / 24.0).epsilon(1e-14));
  }
  SUBCASE("x times hinge integrates to 5/48") {
    const std::vector<double> brk{0.5};
    const double val = expectation_piecewise_1d(
        dist, brk, [](double x) { return x > 0.5 ? x * (x - 0.5) : 0.0; });
    CHECK(val == doctest::Approx(5.0 / 48.0).epsilon(1e-14));
  }
  SUBCASE("breakpoints must be sorted and inside the box") {
    const auto one = [](double) { return 1.0; };
    CHECK_THROWS_AS(
        expectation_piecewise_1d(dist, std::vector<double>{0.7, 0.3}, one),
        std::invalid_argument);
    CHECK_THROWS_AS(
        expectation_piecewise_1d(dist, std::vector<double>{1.5}, one),
        std::invalid_argument);
  }
  SUBCASE("only the 1-d uniform box is supported") {
    const auto square = InputDistribution::uniform_box(0, 1, 2);
    CHECK_THROWS_AS(expectation_piecewise_1d(square, {}, [](double) {
                      return 1.0;
                    }),
                    std::invalid_argument);
  }
}

TEST_CASE("midpoint quadrature grids") {
  SUBCASE("1-d nodes and weights") {
    const auto dist = InputDistribution::uniform_box(0, 1, 1);
    const auto nodes = quadrature_grid(dist, 4);
    REQUIRE(nodes.size() == 4);
    CHECK(nodes[0].point[0] == doctest::Approx(0.125));
    CHECK(nodes[1].point[0] == doctest::Approx(0.375));
    CHECK(nodes[2].point[0] == doctest::Approx(0.625));
    CHECK(nodes[3].point[0] == doctest::Approx(0.875));
    for (const auto& n : nodes) CHECK(n.weight == doctest::Approx(0.25));
  }
  SUBCASE("tensor product in two dimensions") {
    const auto dist = InputDistribution::uniform_box(0, 1, 2);
    const auto nodes = quadrature_grid(dist, 3);
    REQUIRE(nodes.size() == 9);
    for (const auto& n : nodes) CHECK(n.weight == doctest::Approx(1.0 / 9.0));
  }
  SUBCASE("weights sum to one") {
    const auto dist = InputDistribution::uniform_box(-2, 5, 3);
    const auto nodes = quadrature_grid(dist, 7);
    double sum = 0.0;
    for (const auto& n : nodes) sum += n.weight;
    CHECK(std::fabs(sum - 1.0) < 1e-12);
  }
  SUBCASE("resolution below two is rejected") {
    const auto dist = InputDistribution::uniform_box(0, 1, 1);
    CHECK_THROWS_AS(quadrature_grid(dist, 1), std::invalid_argument);
  }
}

TEST_CASE("piecewise rule agrees with a fine midpoint grid") {
  const auto dist = InputDistribution::uniform_box(0, 1, 1);
  // random piecewise-quadratic integrands with a breakpoint at t
  const double coeffs[4][3] = {
      {0.3, -1.2, 2.0}, {1.0, 0.0, -0.5}, {-0.7, 0.4, 0.1}, {2.0, 1.0, 0.0}};
  const double knots[4] = {0.21, 0.5, 0.68, 0.9};
  for (int c = 0; c < 4; ++c) {
    const double t = knots[c];
    const auto f = [&](double x) {
      const double* q = coeffs[c];
      const double base = q[0] * x * x + q[1] * x + q[2];
      return x > t ? base : -0.5 * base;
    };
    const std::vector<double> brk{t};
    const double exact = expectation_piecewise_1d(dist, brk, f);
    double grid = 0.0;
    for (const auto& node : quadrature_grid(dist, 100000)) {
      grid += node.weight * f(node.point[0]);
    }
    CHECK(std::fabs(exact - grid) < 1e-4);
  }
}
