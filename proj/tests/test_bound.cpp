#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "qew/bound.hpp"
#include "qew/rng.hpp"

using namespace qew;
using bound::BoundParams;
using bound::BoundResult;
using bound::Branch;

namespace {

// Independent oracle: brute-force grid over delta = mu - lambda in (0, 1].
// Whenever the bound is positive the optimum lies at delta <= 1/e (the
// constant branch only decays past the crossover), so the grid covers it.
double grid_oracle(const BoundParams& p, long long G, double step = 1e-4) {
  double best = 0.0;
  for (double delta = step; delta <= 1.0 + 1e-12; delta += step)
    best = std::max(best, bound::objective(p, p.lambda + delta, G));
  return best;
}

}  // namespace

TEST_CASE("objective: pinned closed-form values") {
  const BoundParams unit{1.0, 1.0, 1, 0.0};
  // constant branch at mu = 2: (0 - 0 - log(2e)) / 2
  CHECK(bound::objective(unit, 2.0, 0) ==
        doctest::Approx(-(1.0 + std::log(2.0)) / 2.0).epsilon(1e-15));
  // constant branch at the crossover with G = 8
  const double mu_cross = 1.0 + std::exp(-1.0);
  CHECK(bound::objective(unit, mu_cross, 8) ==
        doctest::Approx((8.0 - 1.0 - std::log(2.0)) / mu_cross).epsilon(1e-14));
  // log branch: at mu = 1.5, delta = 0.5 > ... log(2/0.5) = log 4 < log(2e)? no:
  // log 4 = 1.386 < 1.693, so the constant branch still rules at delta = 0.5.
  CHECK(bound::objective(unit, 1.5, 4) ==
        doctest::Approx((4.0 - std::log(2.0 * std::exp(1.0))) / 1.5).epsilon(1e-14));
  // deep log branch: delta = 0.05, log(2/0.05) = log 40
  CHECK(bound::objective(unit, 1.05, 4) ==
        doctest::Approx((4.0 - std::log(40.0)) / 1.05).epsilon(1e-14));
  CHECK_THROWS_AS(bound::objective(unit, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(bound::objective(unit, 0.5, 3), std::invalid_argument);
}

TEST_CASE("objective: the two branches join continuously at mu = lambda + 1/e") {
  for (double lambda : {0.5, 1.0, 2.0}) {
    for (long long G : {0, 5, 40}) {
      const BoundParams p{lambda, 1.5, 1, 0.0};
      const double mu_cross = lambda + std::exp(-1.0);
      // probe close enough that the smooth slope contributes well under the
      // 1e-10 budget; a genuine jump between branches would be order 1
      const double eps = 1e-13;
      const double below = bound::objective(p, mu_cross - eps, G);
      const double above = bound::objective(p, mu_cross + eps, G);
      CHECK(std::abs(below - above) <= 1e-10);
    }
  }
}

TEST_CASE("velocity bound: frozen values for the unit-beta force ladder") {
  SUBCASE("F = 10 sits on the log branch") {
    const BoundResult r = bound::velocity_lower_bound({1.0, 1.0, 1, 10.0});
    CHECK(r.value == doctest::Approx(4.748932882870323).epsilon(1e-9));
    CHECK(r.mu_star == doctest::Approx(1.2105736124621853).epsilon(1e-6));
    CHECK(r.branch == Branch::log_term);
    CHECK(r.value == doctest::Approx(grid_oracle({1.0, 1.0, 1, 10.0}, 8)).epsilon(1e-3));
  }
  SUBCASE("F = 5 pins the optimum to the branch crossover") {
    const BoundResult r = bound::velocity_lower_bound({1.0, 1.0, 1, 5.0});
    CHECK(r.value == doctest::Approx(0.9553859646584609).epsilon(1e-7));
    CHECK(r.mu_star == doctest::Approx(1.0 + std::exp(-1.0)).epsilon(1e-6));
    // exact form at the crossover: (3 - log(2e)) / (1 + 1/e)
    CHECK(r.value ==
          doctest::Approx((3.0 - 1.0 - std::log(2.0)) / (1.0 + std::exp(-1.0))).epsilon(1e-7));
  }
  SUBCASE("crossover stays active for F = 4..7") {
    for (double F : {4.0, 5.0, 6.0, 7.0}) {
      const BoundResult r = bound::velocity_lower_bound({1.0, 1.0, 1, F});
      CHECK(r.value > 0.0);
      CHECK(r.mu_star == doctest::Approx(1.0 + std::exp(-1.0)).epsilon(1e-5));
    }
  }
  SUBCASE("F <= 3 clamps to zero in d = 1") {
    for (double F : {0.0, 1.0, 2.0, 3.0, 3.9}) {
      const BoundResult r = bound::velocity_lower_bound({1.0, 1.0, 1, F});
      CHECK(r.value == 0.0);
      CHECK(std::isinf(r.mu_star));
      CHECK(r.branch == Branch::clamped);
      CHECK(std::strcmp(bound::branch_name(r.branch), "clamped") == 0);
    }
  }
}

TEST_CASE("velocity bound: realistic disorder moment") {
  const double beta = std::exp(1.0) + 1.0;  // exponential(rate 2) at lambda 1
  const BoundResult r = bound::velocity_lower_bound({1.0, beta, 1, 20.0});
  CHECK(r.value == doctest::Approx(grid_oracle({1.0, beta, 1, 20.0}, 18)).epsilon(1e-4));
  CHECK(r.value > 12.0);
  CHECK(r.value < 13.0);
  CHECK(r.branch == Branch::log_term);
}

TEST_CASE("velocity bound: optimizer matches the grid oracle on random parameters") {
  for (int n = 0; n < 50; ++n) {
    const double lambda = 0.5 + 1.5 * rng::to_unit(rng::mix64(3 * n + 1));
    const double beta = 1.0 + 9.0 * rng::to_unit(rng::mix64(3 * n + 2));
    const double F = 50.0 * rng::to_unit(rng::mix64(3 * n + 3));
    const int d = 1 + n % 2;
    const BoundParams p{lambda, beta, d, F};
    const long long G = static_cast<long long>(std::floor(F)) - 2LL * d;
    const double v = bound::velocity_lower_bound(p).value;
    if (G < 0) {
      CHECK(v == 0.0);
      continue;
    }
    const double g = grid_oracle(p, G);
    CHECK(v >= g - 1e-9);          // the optimizer never loses to the coarse grid
    CHECK(std::abs(v - g) <= 1e-3);
  }
}

TEST_CASE("velocity bound: monotonicity properties") {
  const double e1 = std::exp(1.0) + 1.0;
  SUBCASE("non-decreasing in F") {
    double prev = -1.0;
    for (int F = 0; F <= 100; ++F) {
      const double v = bound::velocity_lower_bound({1.0, e1, 1, static_cast<double>(F)}).value;
      CHECK(v >= prev - 1e-12);
      CHECK(v >= 0.0);
      prev = v;
    }
  }
  SUBCASE("non-increasing in beta") {
    double prev = std::numeric_limits<double>::infinity();
    for (double beta : {1.0, 2.0, 4.0, 10.0, 100.0}) {
      const double v = bound::velocity_lower_bound({1.0, beta, 1, 10.0}).value;
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
  SUBCASE("non-increasing in dimension") {
    double prev = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= 4; ++d) {
      const double v = bound::velocity_lower_bound({1.0, e1, d, 12.0}).value;
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("velocity bound: ballistic fraction approaches 1 at large force") {
  const double e1 = std::exp(1.0) + 1.0;
  const double v = bound::velocity_lower_bound({1.0, e1, 1, 1000.0}).value;
  CHECK(v / 1000.0 >= 0.98);
  CHECK(v < 1000.0);
}

TEST_CASE("velocity bound: integer-force variant agrees after the floor shift") {
  for (double F : {5.0, 9.7, 23.5, 4.0}) {
    for (int d : {1, 2}) {
      const BoundParams p{1.0, 2.0, d, F};
      const long long G = static_cast<long long>(std::floor(F)) - 2LL * d;
      if (G < 0) continue;
      const BoundResult a = bound::velocity_lower_bound(p);
      const BoundResult b = bound::integer_force_lower_bound(p, G);
      CHECK(a.value == b.value);
      CHECK(a.mu_star == b.mu_star);
      CHECK(a.branch == b.branch);
    }
  }
  CHECK_THROWS_AS(bound::integer_force_lower_bound({1.0, 1.0, 1, 0.0}, -1),
                  std::invalid_argument);
}

TEST_CASE("velocity bound: parameter validation") {
  CHECK_THROWS_AS(bound::velocity_lower_bound({0.0, 1.0, 1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(bound::velocity_lower_bound({-1.0, 1.0, 1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(bound::velocity_lower_bound({1.0, 0.5, 1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(bound::velocity_lower_bound({1.0, 1.0, 0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(bound::velocity_lower_bound({1.0, 1.0, 1, -2.0}), std::invalid_argument);
}
