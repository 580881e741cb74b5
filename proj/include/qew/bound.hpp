#ifndef QEW_BOUND_HPP
#define QEW_BOUND_HPP

namespace qew::bound {

struct BoundParams {
  double lambda = 1.0;  // exponent of the disorder moment, > 0
  double beta = 1.0;    // sup_j E exp{lambda * fbar_j}, >= 1
  int d = 1;            // lattice dimension, >= 1
  double F = 0.0;       // driving force, >= 0
};

enum class Branch { log_term, const_term, clamped };

const char* branch_name(Branch b);

// (1/mu) * (lambda*G - log(beta) - max{log(2/(mu-lambda)), log(2e)}),
// defined for mu > lambda.  The two branches of the max cross exactly at
// mu = lambda + 1/e.
double objective(const BoundParams& p, double mu, long long effective_force);

struct BoundResult {
  double value = 0.0;
  double mu_star = 0.0;  // +inf when the positive part clamps to zero
  Branch branch = Branch::clamped;
};

// Ballistic velocity lower bound V(F): supremum of the objective over
// mu in (lambda, lambda+50] with effective force G = floor(F) - 2d, then
// clamped at zero (mu -> infinity always pushes the objective to 0).
// Coarse grid scan plus golden-section refinement per branch, |mu| tolerance 1e-8.
BoundResult velocity_lower_bound(const BoundParams& p);

// Same optimizer with the effective force given directly as a non-negative
// integer; velocity_lower_bound(F) == positive part of this at floor(F) - 2d.
BoundResult integer_force_lower_bound(const BoundParams& p, long long F);

}  // namespace qew::bound

#endif
