#include "qew/lattice.hpp"

#include <algorithm>

namespace qew::lattice {

namespace {

// (2k+1)^d as a checked 64-bit integer.
long long odd_power(long long base, int d) {
  long long r = 1;
  for (int i = 0; i < d; ++i) {
    if (__builtin_mul_overflow(r, base, &r))
      throw std::overflow_error("lattice: cube volume exceeds 64-bit range");
  }
  return r;
}

}  // namespace

CubeGeom::CubeGeom(int radius, int dim) : k_(radius), d_(dim) {
  if (radius < 1) throw std::invalid_argument("CubeGeom: radius must be >= 1");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("CubeGeom: dimension out of range");
  const long long vol = odd_power(2LL * radius - 1, dim);
  if (vol > (1LL << 40)) throw std::overflow_error("CubeGeom: cube too large");
  size_ = static_cast<std::size_t>(vol);
}

std::size_t CubeGeom::index(const Coord& c) const {
  if (!contains(c)) throw std::out_of_range("CubeGeom::index: site outside cube");
  std::size_t idx = 0;
  const std::size_t side = static_cast<std::size_t>(2 * k_ - 1);
  for (int a = 0; a < d_; ++a) idx = idx * side + static_cast<std::size_t>(c[a] + k_ - 1);
  return idx;
}

Coord CubeGeom::coords(std::size_t idx) const {
  if (idx >= size_) throw std::out_of_range("CubeGeom::coords: index out of range");
  Coord c{};
  const std::size_t side = static_cast<std::size_t>(2 * k_ - 1);
  for (int a = d_ - 1; a >= 0; --a) {
    c[a] = static_cast<int>(idx % side) - (k_ - 1);
    idx /= side;
  }
  return c;
}

long long ring_size(int k, int d) {
  if (k < 1 || d < 1) throw std::invalid_argument("ring_size: need k >= 1 and d >= 1");
  long long outer = odd_power(2LL * k + 1, d);
  long long inner = odd_power(2LL * k - 1, d);
  return outer - inner;
}

long long ring_size_growth(int k, int d) { return ring_size(k + 1, d) - ring_size(k, d); }

unsigned long long weak_compositions(long long m, long long j) {
  if (m < 1 || j < 0) throw std::invalid_argument("weak_compositions: need m >= 1 and j >= 0");
  // C(j+m-1, m-1), built as a running product of integers C(j+i, i).
  const long long r = std::min(m - 1, j);
  unsigned long long result = 1;
  const long long n = j + m - 1;
  for (long long i = 1; i <= r; ++i) {
    const unsigned __int128 t =
        static_cast<unsigned __int128>(result) * static_cast<unsigned long long>(n - r + i);
    const unsigned __int128 q = t / static_cast<unsigned long long>(i);
    if (q > static_cast<unsigned __int128>(~0ull))
      throw std::overflow_error("weak_compositions: result exceeds 64-bit range");
    result = static_cast<unsigned long long>(q);
  }
  return result;
}

TorusGeom::TorusGeom(int side, int dim) : n_(side), d_(dim) {
  if (side < 2) throw std::invalid_argument("TorusGeom: side must be >= 2");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("TorusGeom: dimension out of range");
  long long vol = 1;
  for (int a = 0; a < dim; ++a) {
    if (__builtin_mul_overflow(vol, static_cast<long long>(side), &vol) || vol > (1LL << 28))
      throw std::overflow_error("TorusGeom: torus too large");
  }
  size_ = static_cast<std::size_t>(vol);
  std::size_t s = 1;
  for (int a = d_ - 1; a >= 0; --a) {
    stride_[static_cast<std::size_t>(a)] = s;
    s *= static_cast<std::size_t>(n_);
  }
}

std::size_t TorusGeom::index(const Coord& c) const {
  std::size_t idx = 0;
  for (int a = 0; a < d_; ++a) {
    int v = c[a] % n_;
    if (v < 0) v += n_;
    idx = idx * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v);
  }
  return idx;
}

Coord TorusGeom::coords(std::size_t idx) const {
  Coord c{};
  for (int a = d_ - 1; a >= 0; --a) {
    c[a] = static_cast<int>(idx % static_cast<std::size_t>(n_));
    idx /= static_cast<std::size_t>(n_);
  }
  return c;
}

std::size_t TorusGeom::neighbor(std::size_t idx, int axis, int dir) const {
  const std::size_t stride = stride_[static_cast<std::size_t>(axis)];
  const std::size_t block = stride * static_cast<std::size_t>(n_);
  const std::size_t base = idx - idx % block;
  const std::size_t offset = idx - base;
  const std::size_t pos = offset / stride;
  std::size_t npos = dir > 0 ? (pos + 1) % static_cast<std::size_t>(n_)
                             : (pos + static_cast<std::size_t>(n_) - 1) % static_cast<std::size_t>(n_);
  return base + npos * stride + offset % stride;
}

}  // namespace qew::lattice
