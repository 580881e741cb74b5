#include "qew/disorder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qew/rng.hpp"

namespace qew::disorder {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

ObstacleDistribution ObstacleDistribution::zero() {
  return ObstacleDistribution{};
}

ObstacleDistribution ObstacleDistribution::constant(double s) {
  require(s >= 0.0 && std::isfinite(s), "constant distribution: strength must be finite and >= 0");
  ObstacleDistribution d;
  d.kind = DistKind::constant;
  d.s = s;
  return d;
}

ObstacleDistribution ObstacleDistribution::uniform(double a, double b) {
  require(a >= 0.0 && b >= a && std::isfinite(b),
          "uniform distribution: bounds must satisfy 0 <= a <= b < inf");
  ObstacleDistribution d;
  d.kind = DistKind::uniform;
  d.a = a;
  d.b = b;
  return d;
}

ObstacleDistribution ObstacleDistribution::exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), "exponential distribution: rate must be > 0");
  ObstacleDistribution d;
  d.kind = DistKind::exponential;
  d.rate = rate;
  return d;
}

ObstacleDistribution ObstacleDistribution::bernoulli_scaled(double p, double s) {
  require(p >= 0.0 && p <= 1.0, "bernoulli_scaled distribution: p must lie in [0,1]");
  require(s >= 0.0 && std::isfinite(s),
          "bernoulli_scaled distribution: strength must be finite and >= 0");
  ObstacleDistribution d;
  d.kind = DistKind::bernoulli_scaled;
  d.p = p;
  d.s = s;
  return d;
}

bool ObstacleDistribution::has_exponential_moment(double lambda) const {
  if (lambda <= 0.0) return false;
  if (kind == DistKind::exponential) return lambda < rate;
  return true;  // bounded support
}

double ObstacleDistribution::draw(double u) const {
  switch (kind) {
    case DistKind::zero:
      return 0.0;
    case DistKind::constant:
      return s;
    case DistKind::uniform:
      return a + (b - a) * u;
    case DistKind::exponential:
      // u in [0,1) keeps the argument of log1p inside (-1, 0].
      return -std::log1p(-u) / rate;
    case DistKind::bernoulli_scaled:
      return u < p ? s : 0.0;
  }
  return 0.0;
}

std::string ObstacleDistribution::describe() const {
  std::ostringstream os;
  switch (kind) {
    case DistKind::zero: os << "zero"; break;
    case DistKind::constant: os << "constant(s=" << s << ")"; break;
    case DistKind::uniform: os << "uniform(a=" << a << ",b=" << b << ")"; break;
    case DistKind::exponential: os << "exponential(rate=" << rate << ")"; break;
    case DistKind::bernoulli_scaled: os << "bernoulli_scaled(p=" << p << ",s=" << s << ")"; break;
  }
  return os.str();
}

double bump_profile(double r) {
  if (r < -0.5 || r > 0.5) return 0.0;
  const double q = 1.0 - 4.0 * r * r;
  return q * q;
}

QuenchedField::QuenchedField(std::uint64_t seed, int dim, ObstacleDistribution dist)
    : seed_(seed), dim_(dim), dist_(dist) {
  require(dim >= 1 && dim <= 8, "QuenchedField: dimension must lie in [1,8]");
}

double QuenchedField::strength(std::span<const int> site, long long height) const {
  require(static_cast<int>(site.size()) == dim_, "strength: site arity != field dimension");
  if (height == 0) return 0.0;
  rng::KeyedHash h(seed_);
  for (int c : site) h.feed(static_cast<std::uint64_t>(static_cast<std::int64_t>(c)));
  h.feed(static_cast<std::uint64_t>(height));
  return dist_.draw(rng::to_unit(h.value()));
}

double QuenchedField::force(std::span<const int> site, double y) const {
  const long long n = std::llround(y);  // halves land on a bump zero either way
  const double s = strength(site, n);
  if (s == 0.0) return 0.0;
  return s * bump_profile(y - static_cast<double>(n));
}

long long QuenchedField::fbar(std::span<const int> site, long long height) const {
  return std::llround(std::ceil(strength(site, height)));
}

double beta(const ObstacleDistribution& dist, double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), "beta: lambda must be > 0");
  require(dist.has_exponential_moment(lambda),
          "beta: exponential moment diverges for this lambda");
  switch (dist.kind) {
    case DistKind::zero:
      return 1.0;
    case DistKind::constant:
      return std::exp(lambda * std::ceil(dist.s));
    case DistKind::uniform: {
      if (dist.a == dist.b) return std::exp(lambda * std::ceil(dist.a));
      // P(ceil(S) = n) is the length of (n-1, n] inside [a, b], normalized.
      const double width = dist.b - dist.a;
      double acc = 0.0;
      const long long lo = std::llround(std::floor(dist.a));
      const long long hi = std::llround(std::ceil(dist.b));
      for (long long n = lo; n <= hi; ++n) {
        const double seg = std::min(dist.b, static_cast<double>(n)) -
                           std::max(dist.a, static_cast<double>(n - 1));
        if (seg > 0.0) acc += seg / width * std::exp(lambda * static_cast<double>(n));
      }
      return acc;
    }
    case DistKind::exponential:
      // sum_{n>=1} e^{lambda n} (e^{-rate(n-1)} - e^{-rate n})
      return (1.0 - std::exp(-dist.rate)) * std::exp(lambda) /
             (1.0 - std::exp(lambda - dist.rate));
    case DistKind::bernoulli_scaled:
      return (1.0 - dist.p) + dist.p * std::exp(lambda * std::ceil(dist.s));
  }
  return 1.0;
}

MonteCarloEstimate beta_mc(const QuenchedField& field, double lambda, std::size_t samples) {
  require(lambda > 0.0, "beta_mc: lambda must be > 0");
  require(samples >= 100, "beta_mc: need at least 100 samples");
  // Distinct (site, height) pairs: walk sites along the first axis, cycle
  // heights 1..16. Each pair is an independent draw of the strength law.
  std::vector<int> site(static_cast<std::size_t>(field.dim()), 0);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t m = 0; m < samples; ++m) {
    site[0] = static_cast<int>(m / 16);
    const long long height = 1 + static_cast<long long>(m % 16);
    const double x = std::exp(lambda * static_cast<double>(field.fbar(site, height)));
    sum += x;
    sumsq += x * x;
  }
  MonteCarloEstimate est;
  est.n = samples;
  est.mean = sum / static_cast<double>(samples);
  const double var =
      std::max(0.0, (sumsq - sum * est.mean) / static_cast<double>(samples - 1));
  est.se = std::sqrt(var / static_cast<double>(samples));
  return est;
}

}  // namespace qew::disorder
