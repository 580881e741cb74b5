#ifndef QEW_DISORDER_HPP
#define QEW_DISORDER_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

namespace qew::disorder {

enum class DistKind { zero, constant, uniform, exponential, bernoulli_scaled };

// Law of a single obstacle strength. Strengths are non-negative and the menu
// is restricted to laws whose exponential moment E exp{lambda*ceil(S)} has a
// closed form.
struct ObstacleDistribution {
  DistKind kind = DistKind::zero;
  double s = 0.0;              // constant / bernoulli_scaled strength
  double a = 0.0, b = 0.0;     // uniform bounds, 0 <= a <= b
  double rate = 0.0;           // exponential rate, > 0
  double p = 0.0;              // bernoulli probability, in [0,1]

  static ObstacleDistribution zero();
  static ObstacleDistribution constant(double s);
  static ObstacleDistribution uniform(double a, double b);
  static ObstacleDistribution exponential(double rate);
  static ObstacleDistribution bernoulli_scaled(double p, double s);

  // Is E exp{lambda * ceil(S)} finite?  (false only for exponential with
  // lambda >= rate; lambda must be > 0.)
  bool has_exponential_moment(double lambda) const;

  // Inverse-CDF style transform of a uniform u in [0,1).
  double draw(double u) const;

  std::string describe() const;
};

// Smooth bump with unit height and support [-1/2, 1/2]: (1 - 4r^2)^2.
// |d/dr| <= 8 everywhere, which the dynamics module uses as a Lipschitz bound.
double bump_profile(double r);

// Quenched obstacle strengths on Z^d x Z.  Every strength is a pure function
// of (master seed, site, height): no storage, no generator state, identical
// values regardless of evaluation order or worker count.  Height 0 always
// carries strength 0, so the initial condition u = 0 feels no force.
class QuenchedField {
 public:
  QuenchedField(std::uint64_t seed, int dim, ObstacleDistribution dist);

  double strength(std::span<const int> site, long long height) const;

  // f_i(y) = s_{i,n} * bump(y - n) with n the nearest integer to y.
  double force(std::span<const int> site, double y) const;

  // ceil of the supremum of f_i over [j - 1/2, j + 1/2]; the bump peaks at
  // its center and neighboring bumps vanish at half-integers, so the window
  // supremum is exactly the strength at height j.
  long long fbar(std::span<const int> site, long long height) const;

  std::uint64_t seed() const { return seed_; }
  int dim() const { return dim_; }
  const ObstacleDistribution& distribution() const { return dist_; }

 private:
  std::uint64_t seed_;
  int dim_;
  ObstacleDistribution dist_;
};

// Closed form for beta(lambda) = sup_j E exp{lambda * fbar_j}; the sup over
// heights is attained at any height != 0 because height 0 contributes 1.
// Throws if lambda <= 0 or the moment diverges.
double beta(const ObstacleDistribution& dist, double lambda);

struct MonteCarloEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// Sample mean of exp{lambda * fbar} over distinct (site, height != 0) pairs,
// with its standard error. Cross-checks the closed form.
MonteCarloEstimate beta_mc(const QuenchedField& field, double lambda, std::size_t samples);

}  // namespace qew::disorder

#endif
