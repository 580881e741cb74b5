#ifndef QEW_DISCRETE_HPP
#define QEW_DISCRETE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "qew/disorder.hpp"
#include "qew/lattice.hpp"

// Desk-scale exhaustive verification of the discrete structures behind the
// velocity bound: admissible integer profiles on centered cubes, their
// exponential partition sums, and the shell-to-shell growth factor that
// dominates the conditional expectation of the next partition sum.

namespace qew::discrete {

// Enumeration refuses candidate spaces larger than this.
inline constexpr double kEnumerationBudget = 1e8;

struct BudgetExceeded : std::runtime_error {
  explicit BudgetExceeded(double candidates_)
      : std::runtime_error("enumeration budget exceeded"), candidates(candidates_) {}
  double candidates;
};

// Integer height profile w : Q_{k+1} -> {0..cap}; admissibility is judged on
// the inner cube Q_k.  Values are indexed by CubeGeom(k+1, d).
struct Profile {
  int k = 1;
  int d = 1;
  long long cap = 0;
  std::vector<std::uint8_t> values;
};

// Materialized table of ceil-strengths fbar_i(j) for i in Q_cover and heights
// 0 <= j <= cap.  Freezing the table decouples the exhaustive scans from the
// hash-based field and lets tests build disorder by hand.
class FrozenDisorder {
 public:
  FrozenDisorder(int cover_radius, int dim, long long cap);

  // Evaluate the field's ceil-strengths on Q_cover.  A non-empty offset maps
  // cube coordinates c to field site (offset + c); with wrap > 0 the sum is
  // reduced modulo wrap per axis, matching a torus simulation window.
  static FrozenDisorder materialize(const disorder::QuenchedField& field, int cover_radius,
                                    long long cap, std::span<const int> offset = {},
                                    int wrap = 0);

  // Copy with every site outside Q_inner redrawn from a fresh stream keyed by
  // (law seed, index); sites of Q_inner keep their frozen values.
  FrozenDisorder with_ring_resampled(const disorder::QuenchedField& law, int inner_radius,
                                     std::uint64_t index) const;

  long long fbar(const lattice::Coord& site, long long height) const;
  long long fbar_at(std::size_t site_idx, long long height) const {
    return table_[site_idx * static_cast<std::size_t>(cap_ + 1) +
                  static_cast<std::size_t>(height)];
  }
  // Mutable access for hand-built tables in tests; height 0 must stay 0.
  long long& entry(std::size_t site_idx, long long height);

  long long max_entry() const;
  int cover_radius() const { return geom_.radius(); }
  int dim() const { return geom_.dim(); }
  long long cap() const { return cap_; }
  const lattice::CubeGeom& geom() const { return geom_; }

 private:
  lattice::CubeGeom geom_;
  long long cap_;
  std::vector<long long> table_;
};

// Does w satisfy laplacian(w)_i - fbar_i(w_i) + F >= 0 at every i in Q_k?
bool is_admissible(const Profile& w, const FrozenDisorder& fd, long long F);

// Exhaustive scan of {0..cap}^{Q_{k+1}} in lexicographic order (site-major,
// value-minor), pruning a branch as soon as a fully determined inner site
// violates admissibility.  Throws BudgetExceeded if the candidate space tops
// kEnumerationBudget.
void enumerate_admissible(int k, int d, long long cap, const FrozenDisorder& fd, long long F,
                          const std::function<void(const Profile&)>& visit);

unsigned long long count_admissible(int k, int d, long long cap, const FrozenDisorder& fd,
                                    long long F);

struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Minimum over admissible profiles of the average site velocity
// (1/|Q_k|) sum_{i in Q_k} (laplacian_i - fbar_i(w_i) + F), exact.
Rational min_average_velocity(int k, int d, long long cap, const FrozenDisorder& fd,
                              long long F);

struct PartitionSum {
  double boundary_form = 0.0;   // exponent uses the boundary flux
  double laplacian_form = 0.0;  // exponent uses the interior laplacian sum
  double relative_gap = 0.0;
};

// Sum over admissible profiles of exp{lambda*flux - mu*sum(velocities)}.
// Computed through two algebraically equal routes (boundary flux vs interior
// divergence); they must agree to relative 1e-12 or a logic_error is thrown.
PartitionSum partition_sum(int k, int d, long long cap, const FrozenDisorder& fd, long long F,
                           double lambda, double mu);

// Histogram over j of the admissible extensions of w to Q_{k+2}-supported
// profiles whose shell velocity sum equals j.  Verifies the counting bound
// count(j) <= weak_compositions(ring_size(k,d), j) * (cap+1)^{ring_size_growth(k,d)}
// for every attainable j (logic_error on violation; never expected).
std::map<long long, unsigned long long> extension_velocity_counts(const Profile& w,
                                                                  const FrozenDisorder& fd,
                                                                  long long F);

struct GrowthFactorEstimate {
  double value = 0.0;        // max over admissible profiles of the mean extension sum
  double se = 0.0;           // standard error of the estimate at the arg max
  std::size_t argmax_profile = 0;
  std::size_t n_profiles = 0;
  std::size_t resamples = 0;
};

// Monte Carlo estimate of the shell growth factor: for each admissible w on
// Q_{k+1}, average over fresh shell disorder of
//   sum_{admissible extensions} exp{lambda*sum_shell(lap) - mu*sum_shell(velocity)},
// then take the max over w.  Inner disorder (Q_k) stays frozen; only the
// shell Q_{k+1} \ Q_k is resampled, respecting the conditioning of the
// martingale argument.
GrowthFactorEstimate shell_growth_factor_mc(int k, int d, long long cap,
                                            const disorder::QuenchedField& field, long long F,
                                            double lambda, double mu, std::size_t resamples);

struct SupermartingaleResult {
  double y_k = 0.0;           // partition sum at level k (frozen inner disorder)
  double gamma_hat = 0.0;     // growth factor estimate (independent stream)
  double gamma_se = 0.0;
  double lhs_hat = 0.0;       // mean over resamples of the level-(k+1) partition sum
  double lhs_se = 0.0;
  double bound = 0.0;         // gamma_hat * y_k
  double se_combined = 0.0;   // sqrt((gamma_se*y_k)^2 + lhs_se^2)
  double slack = 0.0;         // bound + 3*se_combined - lhs_hat
  double decomposition_gap = 0.0;  // shell decomposition vs direct enumeration
  bool pass = false;          // slack >= 0
  std::size_t n_profiles = 0;
  std::size_t resamples = 0;
};

// Checks E(Y_{k+1} | inner disorder) <= gamma_k * Y_k by Monte Carlo with two
// independent resampling streams, one per side.  The level-(k+1) sum is
// evaluated through the shell decomposition and cross-checked against direct
// enumeration on the first resamples.
SupermartingaleResult supermartingale_check(int k, int d, long long cap,
                                            const disorder::QuenchedField& field, long long F,
                                            double lambda, double mu, std::size_t resamples);

struct RoundedSnapshot {
  Profile w;
  bool slack_admissible = false;  // laplacian - 2d - fbar + floor(F) >= 0 on Q_k
};

// Round a real height field on Q_{k+1} to the nearest integers (ties up) and
// test the slack admissibility inequality; the 2d slack absorbs the rounding
// error of the laplacian, at most 1 per neighbor difference.
RoundedSnapshot round_snapshot(const std::vector<double>& u, int k, int d, long long cap,
                               const FrozenDisorder& fd, double F);

}  // namespace qew::discrete

#endif
