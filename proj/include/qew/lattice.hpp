#ifndef QEW_LATTICE_HPP
#define QEW_LATTICE_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qew::lattice {

inline constexpr int kMaxDim = 8;

// Coordinates; only the first d entries are meaningful.
using Coord = std::array<int, kMaxDim>;

// Centered cube Q_k = {-k+1, ..., k-1}^d, side 2k-1 per axis.  Linear indices
// run lexicographically in the coordinates (axis 0 most significant), which
// fixes the deterministic site order used everywhere else.
class CubeGeom {
 public:
  CubeGeom(int radius, int dim);

  int radius() const { return k_; }
  int dim() const { return d_; }
  long long side() const { return 2LL * k_ - 1; }
  std::size_t size() const { return size_; }

  bool contains(const Coord& c) const {
    for (int a = 0; a < d_; ++a)
      if (c[a] < -k_ + 1 || c[a] > k_ - 1) return false;
    return true;
  }

  std::size_t index(const Coord& c) const;
  Coord coords(std::size_t idx) const;

 private:
  int k_, d_;
  std::size_t size_;
};

// Values attached to the sites of a cube.
template <typename T>
class CubeField {
 public:
  explicit CubeField(CubeGeom geom, T fill = T{})
      : geom_(geom), values_(geom.size(), fill) {}

  const CubeGeom& geom() const { return geom_; }
  T& operator[](std::size_t idx) { return values_[idx]; }
  const T& operator[](std::size_t idx) const { return values_[idx]; }
  T& at(const Coord& c) { return values_[geom_.index(c)]; }
  const T& at(const Coord& c) const { return values_[geom_.index(c)]; }
  std::size_t size() const { return values_.size(); }

 private:
  CubeGeom geom_;
  std::vector<T> values_;
};

// Discrete Laplacian: sum over the 2d nearest neighbors of (w_nb - w_site).
// The site's whole neighborhood must lie inside the stored cube.
template <typename T>
T laplacian(const CubeField<T>& w, const Coord& site) {
  const CubeGeom& g = w.geom();
  if (!g.contains(site)) throw std::out_of_range("laplacian: site outside stored cube");
  T acc{};
  Coord nb = site;
  for (int a = 0; a < g.dim(); ++a) {
    for (int dir : {-1, 1}) {
      nb[a] = site[a] + dir;
      if (!g.contains(nb)) throw std::out_of_range("laplacian: neighbor outside stored cube");
      acc += w.at(nb) - w.at(site);
    }
    nb[a] = site[a];
  }
  return acc;
}

// Sum of outward differences (w_r - w_i) over all nearest-neighbor pairs with
// i inside Q_k and r outside; the field must live on Q_{k+1}.  Equals the sum
// of laplacian over Q_k exactly (discrete divergence theorem).
template <typename T>
T boundary_flux(const CubeField<T>& w, int k) {
  const CubeGeom& g = w.geom();
  if (g.radius() < k + 1) throw std::invalid_argument("boundary_flux: field must cover Q_{k+1}");
  const CubeGeom inner(k, g.dim());
  T acc{};
  for (std::size_t i = 0; i < inner.size(); ++i) {
    Coord c = inner.coords(i);
    Coord nb = c;
    for (int a = 0; a < g.dim(); ++a) {
      for (int dir : {-1, 1}) {
        nb[a] = c[a] + dir;
        if (!inner.contains(nb)) acc += w.at(nb) - w.at(c);
        nb[a] = c[a];
      }
    }
  }
  return acc;
}

// Number of sites in the shell Q_{k+1} \ Q_k: (2k+1)^d - (2k-1)^d.
long long ring_size(int k, int d);

// Growth of the shell size from one level to the next: ring_size(k+1,d) -
// ring_size(k,d).  Zero in d = 1; grows like k^{d-2} for d >= 2.
long long ring_size_growth(int k, int d);

// Number of ways to write j as an ordered sum of m non-negative integers:
// C(j+m-1, m-1).  Exact; throws std::overflow_error past the 64-bit range.
unsigned long long weak_compositions(long long m, long long j);

// Periodic box of side N in Z^d, flat row-major indexing (axis 0 slowest).
class TorusGeom {
 public:
  TorusGeom(int side, int dim);

  int side() const { return n_; }
  int dim() const { return d_; }
  std::size_t size() const { return size_; }

  std::size_t index(const Coord& c) const;
  Coord coords(std::size_t idx) const;
  // Neighbor along one of the 2d directions; wraps. On an N=2 torus both
  // directions of an axis reach the same site, and both still count in the
  // Laplacian stencil.
  std::size_t neighbor(std::size_t idx, int axis, int dir) const;

 private:
  int n_, d_;
  std::size_t size_;
  std::array<std::size_t, kMaxDim> stride_;
};

}  // namespace qew::lattice

#endif
