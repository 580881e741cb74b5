#include "qew/bound.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qew::bound {

namespace {

constexpr double kMuWindow = 50.0;   // search bracket: mu in (lambda, lambda + 50]
constexpr double kMuTol = 1e-8;      // golden-section bracket tolerance
constexpr double kDeltaFloor = 1e-9; // smallest mu - lambda probed

void check_params(const BoundParams& p) {
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
    throw std::invalid_argument("bound: lambda must be > 0");
  if (!(p.beta >= 1.0) || !std::isfinite(p.beta))
    throw std::invalid_argument("bound: beta must be >= 1");
  if (p.d < 1) throw std::invalid_argument("bound: dimension must be >= 1");
  if (!(p.F >= 0.0) || !std::isfinite(p.F))
    throw std::invalid_argument("bound: force must be finite and >= 0");
}

// Golden-section search for the maximum of f on [lo, hi].
std::pair<double, double> golden_max(const std::function<double(double)>& f, double lo,
                                     double hi) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > kMuTol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// Coarse scan of f over the given abscissas, then golden-section refinement
// around the best grid point.
std::pair<double, double> scan_and_refine(const std::function<double(double)>& f,
                                          const std::vector<double>& grid) {
  std::size_t best = 0;
  double fbest = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > fbest) {
      fbest = v;
      best = i;
    }
  }
  const double lo = grid[best > 0 ? best - 1 : 0];
  const double hi = grid[best + 1 < grid.size() ? best + 1 : grid.size() - 1];
  auto [x, v] = golden_max(f, lo, hi);
  if (fbest > v) return {grid[best], fbest};
  return {x, v};
}

BoundResult optimize(const BoundParams& p, long long G) {
  const double log_beta = std::log(p.beta);
  const double crossover = 1.0 / std::exp(1.0);  // branch switch at mu = lambda + 1/e

  // In delta = mu - lambda coordinates.
  auto log_branch = [&](double delta) {
    return (p.lambda * static_cast<double>(G) - log_beta - std::log(2.0 / delta)) /
           (p.lambda + delta);
  };
  auto const_branch = [&](double delta) {
    return (p.lambda * static_cast<double>(G) - log_beta - std::log(2.0 * std::exp(1.0))) /
           (p.lambda + delta);
  };

  // Branch with the interior stationary point: log-spaced grid on (0, 1/e].
  std::vector<double> grid_a;
  for (double delta = kDeltaFloor; delta < crossover; delta *= 1.35) grid_a.push_back(delta);
  grid_a.push_back(crossover);
  auto [xa, va] = scan_and_refine(log_branch, grid_a);

  // Constant branch is monotone in mu; a linear grid still localizes the best
  // endpoint cheaply.
  std::vector<double> grid_b;
  for (int i = 0; i <= 512; ++i)
    grid_b.push_back(crossover + (kMuWindow - crossover) * static_cast<double>(i) / 512.0);
  auto [xb, vb] = scan_and_refine(const_branch, grid_b);

  BoundResult r;
  if (va >= vb) {
    r.value = va;
    r.mu_star = p.lambda + xa;
    r.branch = Branch::log_term;
  } else {
    r.value = vb;
    r.mu_star = p.lambda + xb;
    r.branch = Branch::const_term;
  }
  if (r.value <= 0.0) {
    // The supremum over all mu > lambda is 0, approached as mu -> infinity.
    r.value = 0.0;
    r.mu_star = std::numeric_limits<double>::infinity();
    r.branch = Branch::clamped;
  }
  return r;
}

}  // namespace

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::log_term: return "log";
    case Branch::const_term: return "const";
    case Branch::clamped: return "clamped";
  }
  return "?";
}

double objective(const BoundParams& p, double mu, long long effective_force) {
  check_params(p);
  if (!(mu > p.lambda)) throw std::invalid_argument("objective: mu must exceed lambda");
  const double penalty =
      std::max(std::log(2.0 / (mu - p.lambda)), std::log(2.0 * std::exp(1.0)));
  return (p.lambda * static_cast<double>(effective_force) - std::log(p.beta) - penalty) / mu;
}

BoundResult velocity_lower_bound(const BoundParams& p) {
  check_params(p);
  const long long G =
      static_cast<long long>(std::floor(p.F)) - 2LL * static_cast<long long>(p.d);
  if (G < 0) {
    // Effective force already negative: every branch numerator is negative.
    BoundResult r;
    r.value = 0.0;
    r.mu_star = std::numeric_limits<double>::infinity();
    r.branch = Branch::clamped;
    return r;
  }
  return optimize(p, G);
}

BoundResult integer_force_lower_bound(const BoundParams& p, long long F) {
  check_params(p);
  if (F < 0) throw std::invalid_argument("integer_force_lower_bound: force must be >= 0");
  return optimize(p, F);
}

}  // namespace qew::bound
