#include "qew/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qew/rng.hpp"

namespace qew::discrete {

namespace {

constexpr std::uint64_t kShellStreamTag = 0x5348454C4Cull;  // tags fresh shell draws

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

int chebyshev(const lattice::Coord& c, int d) {
  int m = 0;
  for (int a = 0; a < d; ++a) m = std::max(m, std::abs(c[a]));
  return m;
}

void check_budget(long long cap, std::size_t sites) {
  const double candidates = std::pow(static_cast<double>(cap + 1), static_cast<double>(sites));
  if (candidates > kEnumerationBudget) throw BudgetExceeded(candidates);
}

// ---------------------------------------------------------------------------
// Exhaustive scan over {0..cap}^{Q_{k+1}} with admissibility pruning on Q_k.

struct InteriorCheck {
  std::size_t self = 0;    // index in Q_{k+1}
  std::size_t fd_idx = 0;  // index in the disorder table's cube
  int nnb = 0;
  std::array<std::size_t, 2 * lattice::kMaxDim> nb{};
};

struct BoundaryPair {
  std::size_t in = 0, out = 0;  // indices in Q_{k+1}
};

struct ScanPlan {
  lattice::CubeGeom outer;
  int k, d;
  long long cap, F;
  long long twod;
  std::size_t nsites;
  std::size_t n_interior;
  std::vector<std::vector<InteriorCheck>> ready;       // by completing depth
  std::vector<std::vector<BoundaryPair>> pairs_ready;  // by completing depth
};

ScanPlan make_plan(int k, int d, long long cap, const FrozenDisorder& fd, long long F) {
  require(k >= 1 && d >= 1, "scan: need k >= 1 and d >= 1");
  require(cap >= 0 && cap <= 200, "scan: cap must lie in [0, 200]");
  require(F >= 0, "scan: force must be >= 0");
  require(fd.dim() == d, "scan: disorder dimension mismatch");
  require(fd.cover_radius() >= k, "scan: disorder table must cover Q_k");
  require(fd.cap() >= cap, "scan: disorder table height range too small");

  ScanPlan plan{lattice::CubeGeom(k + 1, d), k,    d, cap, F, 2LL * d, 0, 0, {}, {}};
  plan.nsites = plan.outer.size();
  check_budget(cap, plan.nsites);

  plan.ready.resize(plan.nsites);
  plan.pairs_ready.resize(plan.nsites);

  const lattice::CubeGeom inner(k, d);
  plan.n_interior = inner.size();
  for (std::size_t ii = 0; ii < inner.size(); ++ii) {
    const lattice::Coord c = inner.coords(ii);
    InteriorCheck chk;
    chk.self = plan.outer.index(c);
    chk.fd_idx = fd.geom().index(c);
    std::size_t depth = chk.self;
    lattice::Coord nb = c;
    for (int a = 0; a < d; ++a) {
      for (int dir : {-1, 1}) {
        nb[a] = c[a] + dir;
        const std::size_t nidx = plan.outer.index(nb);
        chk.nb[static_cast<std::size_t>(chk.nnb++)] = nidx;
        depth = std::max(depth, nidx);
        if (!inner.contains(nb))
          plan.pairs_ready[std::max(chk.self, nidx)].push_back(BoundaryPair{chk.self, nidx});
        nb[a] = c[a];
      }
    }
    plan.ready[depth].push_back(chk);
  }
  return plan;
}

// Depth-first scan; leaf(w, sum_velocity, sum_laplacian, boundary_flux) runs
// for every admissible profile, in lexicographic order.
template <typename Leaf>
void run_scan(const ScanPlan& plan, const FrozenDisorder& fd, Leaf&& leaf) {
  std::vector<std::uint8_t> w(plan.nsites, 0);
  const auto rec = [&](const auto& self, std::size_t p, long long sum_v, long long sum_lap,
                       long long flux) -> void {
    if (p == plan.nsites) {
      leaf(w, sum_v, sum_lap, flux);
      return;
    }
    for (long long v = 0; v <= plan.cap; ++v) {
      w[p] = static_cast<std::uint8_t>(v);
      long long sv = sum_v, sl = sum_lap, fl = flux;
      bool ok = true;
      for (const InteriorCheck& chk : plan.ready[p]) {
        long long lap = -plan.twod * static_cast<long long>(w[chk.self]);
        for (int i = 0; i < chk.nnb; ++i) lap += w[chk.nb[static_cast<std::size_t>(i)]];
        const long long vel = lap - fd.fbar_at(chk.fd_idx, w[chk.self]) + plan.F;
        if (vel < 0) {
          ok = false;
          break;
        }
        sv += vel;
        sl += lap;
      }
      if (!ok) continue;
      for (const BoundaryPair& pr : plan.pairs_ready[p])
        fl += static_cast<long long>(w[pr.out]) - static_cast<long long>(w[pr.in]);
      self(self, p + 1, sv, sl, fl);
    }
  };
  rec(rec, 0, 0, 0, 0);
}

// ---------------------------------------------------------------------------
// Extensions of an admissible profile to the next shell.

struct ShellCheck {
  lattice::Coord site{};        // shell site, in Q_{k+1} \ Q_k
  long long fixed_lap = 0;      // contributions of neighbors inside Q_{k+1}
  std::uint8_t w_self = 0;      // profile value at the shell site
  long long fbar_cached = 0;    // fbar(site, w_self) under the current disorder
  int n_ext = 0;
  std::array<std::size_t, 2 * lattice::kMaxDim> ext_nb{};  // positions among ext sites
};

class ExtensionMachine {
 public:
  ExtensionMachine(const Profile& w, long long F) : k_(w.k), d_(w.d), cap_(w.cap), F_(F) {
    require(F >= 0, "extensions: force must be >= 0");
    const lattice::CubeGeom outer(k_ + 1, d_);
    const lattice::CubeGeom outer2(k_ + 2, d_);
    const lattice::CubeGeom inner(k_, d_);
    require(w.values.size() == outer.size(), "extensions: profile size mismatch");

    // Extension sites Q_{k+2} \ Q_{k+1}, in lexicographic order.
    std::vector<std::size_t> ext_pos(outer2.size(), SIZE_MAX);
    for (std::size_t i = 0; i < outer2.size(); ++i) {
      const lattice::Coord c = outer2.coords(i);
      if (!outer.contains(c)) {
        ext_pos[i] = n_ext_sites_;
        ++n_ext_sites_;
      }
    }
    check_budget(cap_, n_ext_sites_);

    // Shell sites and their split laplacians.
    for (std::size_t i = 0; i < outer.size(); ++i) {
      const lattice::Coord c = outer.coords(i);
      if (inner.contains(c)) continue;
      ShellCheck chk;
      chk.site = c;
      chk.w_self = w.values[i];
      chk.fixed_lap = -2LL * d_ * static_cast<long long>(chk.w_self);
      std::size_t depth = 0;
      lattice::Coord nb = c;
      for (int a = 0; a < d_; ++a) {
        for (int dir : {-1, 1}) {
          nb[a] = c[a] + dir;
          if (outer.contains(nb)) {
            chk.fixed_lap += w.values[outer.index(nb)];
          } else {
            const std::size_t pos = ext_pos[outer2.index(nb)];
            chk.ext_nb[static_cast<std::size_t>(chk.n_ext++)] = pos;
            depth = std::max(depth, pos);
          }
          nb[a] = c[a];
        }
      }
      ready_depth_.push_back(depth);
      checks_.push_back(chk);
    }
    ready_.resize(n_ext_sites_);
    for (std::size_t i = 0; i < checks_.size(); ++i) ready_[ready_depth_[i]].push_back(i);

    jmax_ = 0;
    for (const ShellCheck& chk : checks_) {
      const long long top = chk.fixed_lap + cap_ * chk.n_ext + F_;
      jmax_ += std::max(0LL, top);
    }
  }

  void set_disorder(const FrozenDisorder& fd) {
    require(fd.cover_radius() >= k_ + 1, "extensions: disorder table must cover Q_{k+1}");
    require(fd.cap() >= cap_, "extensions: disorder table height range too small");
    ring_fbar_sum_ = 0;
    for (ShellCheck& chk : checks_) {
      chk.fbar_cached = fd.fbar(chk.site, chk.w_self);
      ring_fbar_sum_ += chk.fbar_cached;
    }
  }

  long long shell_sites() const { return static_cast<long long>(checks_.size()); }
  long long jmax() const { return jmax_; }
  long long ring_fbar_sum() const { return ring_fbar_sum_; }

  // hist[j] += number of admissible extensions with shell velocity sum j;
  // hist must have size >= jmax()+1.
  void velocity_counts(std::span<unsigned long long> hist) const {
    std::vector<std::uint8_t> e(n_ext_sites_, 0);
    const auto rec = [&](const auto& self, std::size_t p, long long j) -> void {
      if (p == n_ext_sites_) {
        ++hist[static_cast<std::size_t>(j)];
        return;
      }
      for (long long v = 0; v <= cap_; ++v) {
        e[p] = static_cast<std::uint8_t>(v);
        long long jj = j;
        bool ok = true;
        for (std::size_t ci : ready_[p]) {
          const ShellCheck& chk = checks_[ci];
          long long lap = chk.fixed_lap;
          for (int i = 0; i < chk.n_ext; ++i) lap += e[chk.ext_nb[static_cast<std::size_t>(i)]];
          const long long vel = lap - chk.fbar_cached + F_;
          if (vel < 0) {
            ok = false;
            break;
          }
          jj += vel;
        }
        if (ok) self(self, p + 1, jj);
      }
    };
    rec(rec, 0, 0);
  }

 private:
  int k_, d_;
  long long cap_, F_;
  std::size_t n_ext_sites_ = 0;
  std::vector<ShellCheck> checks_;
  std::vector<std::size_t> ready_depth_;
  std::vector<std::vector<std::size_t>> ready_;
  long long jmax_ = 0;
  long long ring_fbar_sum_ = 0;
};

struct WelfordAcc {
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double se() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sumsq - sum * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

// Shared by the growth-factor estimate and the supermartingale check.
struct ShellEnsemble {
  std::vector<Profile> profiles;
  std::vector<double> weights;  // exp{lambda*flux - mu*sum_velocity} per profile
  std::vector<ExtensionMachine> machines;
  std::vector<double> exp_table;  // exp(-(mu-lambda)*j)
  long long jmax = 0;

  ShellEnsemble(int k, int d, long long cap, const FrozenDisorder& fd, long long F,
                double lambda, double mu) {
    const ScanPlan plan = make_plan(k, d, cap, fd, F);
    run_scan(plan, fd, [&](const std::vector<std::uint8_t>& w, long long sum_v, long long,
                           long long flux) {
      Profile prof{k, d, cap, w};
      weights.push_back(std::exp(lambda * static_cast<double>(flux) -
                                 mu * static_cast<double>(sum_v)));
      profiles.push_back(std::move(prof));
    });
    machines.reserve(profiles.size());
    for (const Profile& prof : profiles) {
      machines.emplace_back(prof, F);
      jmax = std::max(jmax, machines.back().jmax());
    }
    exp_table.resize(static_cast<std::size_t>(jmax) + 1);
    for (long long j = 0; j <= jmax; ++j)
      exp_table[static_cast<std::size_t>(j)] = std::exp(-(mu - lambda) * static_cast<double>(j));
  }

  // Extension sum for profile i under the disorder already loaded into its
  // machine: exp{lambda*(sum fbar - c*F)} * sum_j count(j) e^{-(mu-lambda) j}.
  double extension_sum(std::size_t i, std::vector<unsigned long long>& hist, double lambda,
                       long long F) const {
    const ExtensionMachine& m = machines[i];
    std::fill(hist.begin(), hist.begin() + static_cast<std::ptrdiff_t>(m.jmax() + 1), 0ull);
    m.velocity_counts(std::span<unsigned long long>(hist.data(),
                                                    static_cast<std::size_t>(m.jmax() + 1)));
    double s = 0.0;
    for (long long j = 0; j <= m.jmax(); ++j)
      s += static_cast<double>(hist[static_cast<std::size_t>(j)]) *
           exp_table[static_cast<std::size_t>(j)];
    return std::exp(lambda * static_cast<double>(m.ring_fbar_sum() -
                                                 m.shell_sites() * F)) *
           s;
  }
};

void check_mc_params(double lambda, double mu, std::size_t resamples) {
  require(lambda > 0.0, "shell growth: lambda must be > 0");
  require(mu > lambda, "shell growth: mu must exceed lambda");
  require(resamples >= 10, "shell growth: need at least 10 resamples");
}

}  // namespace

// ---------------------------------------------------------------------------

FrozenDisorder::FrozenDisorder(int cover_radius, int dim, long long cap)
    : geom_(cover_radius, dim), cap_(cap) {
  require(cap >= 0 && cap <= 200, "FrozenDisorder: cap must lie in [0, 200]");
  table_.assign(geom_.size() * static_cast<std::size_t>(cap + 1), 0);
}

FrozenDisorder FrozenDisorder::materialize(const disorder::QuenchedField& field,
                                           int cover_radius, long long cap,
                                           std::span<const int> offset, int wrap) {
  FrozenDisorder fd(cover_radius, field.dim(), cap);
  require(offset.empty() || static_cast<int>(offset.size()) == field.dim(),
          "materialize: offset arity != field dimension");
  require(wrap == 0 || wrap >= 2, "materialize: wrap must be 0 or >= 2");
  std::vector<int> key(static_cast<std::size_t>(field.dim()), 0);
  for (std::size_t i = 0; i < fd.geom_.size(); ++i) {
    const lattice::Coord c = fd.geom_.coords(i);
    for (int a = 0; a < field.dim(); ++a) {
      int v = c[a] + (offset.empty() ? 0 : offset[static_cast<std::size_t>(a)]);
      if (wrap > 0) {
        v %= wrap;
        if (v < 0) v += wrap;
      }
      key[static_cast<std::size_t>(a)] = v;
    }
    for (long long h = 0; h <= cap; ++h)
      fd.table_[i * static_cast<std::size_t>(cap + 1) + static_cast<std::size_t>(h)] =
          field.fbar(key, h);
  }
  return fd;
}

FrozenDisorder FrozenDisorder::with_ring_resampled(const disorder::QuenchedField& law,
                                                   int inner_radius,
                                                   std::uint64_t index) const {
  require(law.dim() == dim(), "resample: law dimension mismatch");
  require(inner_radius >= 1 && inner_radius <= cover_radius(),
          "resample: inner radius outside table cover");
  FrozenDisorder out = *this;
  const disorder::QuenchedField fresh(rng::derive_seed(law.seed(), kShellStreamTag, index),
                                      law.dim(), law.distribution());
  std::vector<int> key(static_cast<std::size_t>(dim()), 0);
  for (std::size_t i = 0; i < geom_.size(); ++i) {
    const lattice::Coord c = geom_.coords(i);
    if (chebyshev(c, dim()) < inner_radius) continue;  // Q_inner stays frozen
    for (int a = 0; a < dim(); ++a) key[static_cast<std::size_t>(a)] = c[a];
    for (long long h = 0; h <= cap_; ++h)
      out.table_[i * static_cast<std::size_t>(cap_ + 1) + static_cast<std::size_t>(h)] =
          fresh.fbar(key, h);
  }
  return out;
}

long long FrozenDisorder::fbar(const lattice::Coord& site, long long height) const {
  require(height >= 0 && height <= cap_, "fbar: height outside table range");
  return fbar_at(geom_.index(site), height);
}

long long& FrozenDisorder::entry(std::size_t site_idx, long long height) {
  require(height >= 0 && height <= cap_, "entry: height outside table range");
  require(site_idx < geom_.size(), "entry: site outside table");
  return table_[site_idx * static_cast<std::size_t>(cap_ + 1) + static_cast<std::size_t>(height)];
}

long long FrozenDisorder::max_entry() const {
  long long m = 0;
  for (long long v : table_) m = std::max(m, v);
  return m;
}

// ---------------------------------------------------------------------------

bool is_admissible(const Profile& w, const FrozenDisorder& fd, long long F) {
  require(w.k >= 1 && w.d >= 1, "is_admissible: bad profile shape");
  require(F >= 0, "is_admissible: force must be >= 0");
  require(fd.dim() == w.d, "is_admissible: disorder dimension mismatch");
  require(fd.cover_radius() >= w.k, "is_admissible: disorder table must cover Q_k");
  require(fd.cap() >= w.cap, "is_admissible: disorder table height range too small");
  const lattice::CubeGeom outer(w.k + 1, w.d);
  require(w.values.size() == outer.size(), "is_admissible: profile size mismatch");
  const lattice::CubeGeom inner(w.k, w.d);
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const lattice::Coord c = inner.coords(i);
    const long long wc = w.values[outer.index(c)];
    long long lap = -2LL * w.d * wc;
    lattice::Coord nb = c;
    for (int a = 0; a < w.d; ++a) {
      for (int dir : {-1, 1}) {
        nb[a] = c[a] + dir;
        lap += w.values[outer.index(nb)];
        nb[a] = c[a];
      }
    }
    if (lap - fd.fbar(c, wc) + F < 0) return false;
  }
  return true;
}

void enumerate_admissible(int k, int d, long long cap, const FrozenDisorder& fd, long long F,
                          const std::function<void(const Profile&)>& visit) {
  const ScanPlan plan = make_plan(k, d, cap, fd, F);
  Profile prof{k, d, cap, {}};
  run_scan(plan, fd,
           [&](const std::vector<std::uint8_t>& w, long long, long long, long long) {
             prof.values = w;
             visit(prof);
           });
}

unsigned long long count_admissible(int k, int d, long long cap, const FrozenDisorder& fd,
                                    long long F) {
  const ScanPlan plan = make_plan(k, d, cap, fd, F);
  unsigned long long n = 0;
  run_scan(plan, fd, [&](const std::vector<std::uint8_t>&, long long, long long, long long) {
    ++n;
  });
  return n;
}

Rational min_average_velocity(int k, int d, long long cap, const FrozenDisorder& fd,
                              long long F) {
  const ScanPlan plan = make_plan(k, d, cap, fd, F);
  long long best = std::numeric_limits<long long>::max();
  run_scan(plan, fd,
           [&](const std::vector<std::uint8_t>&, long long sum_v, long long, long long) {
             best = std::min(best, sum_v);
           });
  if (best == std::numeric_limits<long long>::max())
    throw std::logic_error("min_average_velocity: no admissible profile (w = 0 should always pass)");
  return Rational{best, static_cast<long long>(plan.n_interior)};
}

PartitionSum partition_sum(int k, int d, long long cap, const FrozenDisorder& fd, long long F,
                           double lambda, double mu) {
  require(lambda > 0.0, "partition_sum: lambda must be > 0");
  require(mu > lambda, "partition_sum: mu must exceed lambda");
  const ScanPlan plan = make_plan(k, d, cap, fd, F);
  PartitionSum out;
  run_scan(plan, fd,
           [&](const std::vector<std::uint8_t>&, long long sum_v, long long sum_lap,
               long long flux) {
             // boundary route: lambda*flux - mu*sum(velocities)
             out.boundary_form += std::exp(lambda * static_cast<double>(flux) -
                                           mu * static_cast<double>(sum_v));
             // divergence route: (lambda-mu)*sum(lap) - mu*(sum_v - sum_lap)
             out.laplacian_form += std::exp((lambda - mu) * static_cast<double>(sum_lap) -
                                            mu * static_cast<double>(sum_v - sum_lap));
           });
  const double scale = std::max({std::abs(out.boundary_form), std::abs(out.laplacian_form),
                                 std::numeric_limits<double>::min()});
  out.relative_gap = std::abs(out.boundary_form - out.laplacian_form) / scale;
  if (out.relative_gap > 1e-12)
    throw std::logic_error("partition_sum: boundary and divergence routes disagree");
  return out;
}

std::map<long long, unsigned long long> extension_velocity_counts(const Profile& w,
                                                                  const FrozenDisorder& fd,
                                                                  long long F) {
  ExtensionMachine machine(w, F);
  machine.set_disorder(fd);
  std::vector<unsigned long long> hist(static_cast<std::size_t>(machine.jmax()) + 1, 0);
  machine.velocity_counts(hist);

  const long long shell = lattice::ring_size(w.k, w.d);
  const long long freedom = lattice::ring_size_growth(w.k, w.d);
  std::map<long long, unsigned long long> counts;
  for (long long j = 0; j <= machine.jmax(); ++j) {
    const unsigned long long c = hist[static_cast<std::size_t>(j)];
    if (c == 0) continue;
    counts[j] = c;
    unsigned long long bound = lattice::weak_compositions(shell, j);
    for (long long i = 0; i < freedom; ++i) {
      if (__builtin_mul_overflow(bound, static_cast<unsigned long long>(w.cap + 1), &bound)) {
        bound = ~0ull;  // saturate; the check below can only pass
        break;
      }
    }
    if (c > bound)
      throw std::logic_error("extension_velocity_counts: counting bound violated");
  }
  return counts;
}

GrowthFactorEstimate shell_growth_factor_mc(int k, int d, long long cap,
                                            const disorder::QuenchedField& field, long long F,
                                            double lambda, double mu, std::size_t resamples) {
  check_mc_params(lambda, mu, resamples);
  const FrozenDisorder fd = FrozenDisorder::materialize(field, k + 1, cap);
  ShellEnsemble ens(k, d, cap, fd, F, lambda, mu);
  std::vector<WelfordAcc> acc(ens.profiles.size());
  std::vector<unsigned long long> hist(static_cast<std::size_t>(ens.jmax) + 1, 0);
  for (std::size_t r = 0; r < resamples; ++r) {
    const FrozenDisorder fdr = fd.with_ring_resampled(field, k, r);
    for (std::size_t i = 0; i < ens.machines.size(); ++i) {
      ens.machines[i].set_disorder(fdr);
      acc[i].add(ens.extension_sum(i, hist, lambda, F));
    }
  }
  GrowthFactorEstimate est;
  est.n_profiles = ens.profiles.size();
  est.resamples = resamples;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i].mean() > est.value) {
      est.value = acc[i].mean();
      est.se = acc[i].se();
      est.argmax_profile = i;
    }
  }
  return est;
}

SupermartingaleResult supermartingale_check(int k, int d, long long cap,
                                            const disorder::QuenchedField& field, long long F,
                                            double lambda, double mu, std::size_t resamples) {
  check_mc_params(lambda, mu, resamples);
  const FrozenDisorder fd = FrozenDisorder::materialize(field, k + 1, cap);

  SupermartingaleResult res;
  res.resamples = resamples;
  res.y_k = partition_sum(k, d, cap, fd, F, lambda, mu).boundary_form;

  ShellEnsemble ens(k, d, cap, fd, F, lambda, mu);
  res.n_profiles = ens.profiles.size();
  std::vector<unsigned long long> hist(static_cast<std::size_t>(ens.jmax) + 1, 0);

  // Stream A: growth factor, resample indices 0..R-1.
  std::vector<WelfordAcc> acc(ens.profiles.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    const FrozenDisorder fdr = fd.with_ring_resampled(field, k, r);
    for (std::size_t i = 0; i < ens.machines.size(); ++i) {
      ens.machines[i].set_disorder(fdr);
      acc[i].add(ens.extension_sum(i, hist, lambda, F));
    }
  }
  for (const WelfordAcc& a : acc) {
    if (a.mean() > res.gamma_hat) {
      res.gamma_hat = a.mean();
      res.gamma_se = a.se();
    }
  }

  // Stream B: conditional expectation of the level-(k+1) partition sum,
  // resample indices R..2R-1, evaluated through the shell decomposition
  //   Y_{k+1} = sum_w weight(w) * extension_sum(w).
  WelfordAcc lhs;
  for (std::size_t r = 0; r < resamples; ++r) {
    const FrozenDisorder fdr = fd.with_ring_resampled(field, k, resamples + r);
    double y_next = 0.0;
    for (std::size_t i = 0; i < ens.machines.size(); ++i) {
      ens.machines[i].set_disorder(fdr);
      y_next += ens.weights[i] * ens.extension_sum(i, hist, lambda, F);
    }
    if (r < 2) {
      const double direct = partition_sum(k + 1, d, cap, fdr, F, lambda, mu).boundary_form;
      const double scale = std::max(std::abs(direct), std::numeric_limits<double>::min());
      res.decomposition_gap =
          std::max(res.decomposition_gap, std::abs(direct - y_next) / scale);
      if (res.decomposition_gap > 1e-9)
        throw std::logic_error("supermartingale_check: shell decomposition disagrees with "
                               "direct enumeration");
    }
    lhs.add(y_next);
  }
  res.lhs_hat = lhs.mean();
  res.lhs_se = lhs.se();

  res.bound = res.gamma_hat * res.y_k;
  res.se_combined = std::sqrt(res.gamma_se * res.y_k * res.gamma_se * res.y_k +
                              res.lhs_se * res.lhs_se);
  res.slack = res.bound + 3.0 * res.se_combined - res.lhs_hat;
  res.pass = res.slack >= 0.0;
  return res;
}

RoundedSnapshot round_snapshot(const std::vector<double>& u, int k, int d, long long cap,
                               const FrozenDisorder& fd, double F) {
  require(k >= 1 && d >= 1, "round_snapshot: need k >= 1 and d >= 1");
  require(cap >= 0 && cap <= 200, "round_snapshot: cap must lie in [0, 200]");
  require(F >= 0.0, "round_snapshot: force must be >= 0");
  require(fd.dim() == d, "round_snapshot: disorder dimension mismatch");
  require(fd.cover_radius() >= k, "round_snapshot: disorder table must cover Q_k");
  require(fd.cap() >= cap, "round_snapshot: disorder table height range too small");
  const lattice::CubeGeom outer(k + 1, d);
  require(u.size() == outer.size(), "round_snapshot: field size mismatch");

  RoundedSnapshot out;
  out.w = Profile{k, d, cap, std::vector<std::uint8_t>(outer.size(), 0)};
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] >= 0.0) || !(u[i] < static_cast<double>(cap) + 0.5))
      throw std::out_of_range("round_snapshot: height outside [0, cap + 1/2)");
    out.w.values[i] = static_cast<std::uint8_t>(std::floor(u[i] + 0.5));  // ties up
  }

  const long long floorF = static_cast<long long>(std::floor(F));
  const lattice::CubeGeom inner(k, d);
  out.slack_admissible = true;
  for (std::size_t i = 0; i < inner.size() && out.slack_admissible; ++i) {
    const lattice::Coord c = inner.coords(i);
    const long long wc = out.w.values[outer.index(c)];
    long long lap = -2LL * d * wc;
    lattice::Coord nb = c;
    for (int a = 0; a < d; ++a) {
      for (int dir : {-1, 1}) {
        nb[a] = c[a] + dir;
        lap += out.w.values[outer.index(nb)];
        nb[a] = c[a];
      }
    }
    if (lap - 2LL * d - fd.fbar(c, wc) + floorF < 0) out.slack_admissible = false;
  }
  return out;
}

}  // namespace qew::discrete
