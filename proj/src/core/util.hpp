#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mw {

// Deterministic xorshift-based generator.  We avoid std distributions on
// purpose: their output is implementation-defined and the reports must be
// byte-identical across runs of the same binary.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  uint64_t next_u64() {
    // splitmix64
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [a,b)
  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + int(next_u64() % uint64_t(hi - lo + 1));
  }

 private:
  uint64_t state_;
};

// Halton sequence, dimension up to 6; used for reproducible low-discrepancy
// sampling of balls and boxes.
inline double halton(uint64_t index, uint32_t base) {
  double f = 1.0, r = 0.0;
  uint64_t i = index;
  while (i > 0) {
    f /= double(base);
    r += f * double(i % base);
    i /= base;
  }
  return r;
}

inline void halton_point(uint64_t index, int dim, double* out) {
  static const uint32_t primes[6] = {2, 3, 5, 7, 11, 13};
  if (dim > 6) throw std::invalid_argument("halton_point: dim > 6");
  for (int d = 0; d < dim; ++d) out[d] = halton(index + 1, primes[d]);
}

// Low-discrepancy point in the unit ball of dimension k (rejection from the
// cube, deterministic scan of the Halton stream).
inline void halton_ball_point(uint64_t& cursor, int k, double* out) {
  for (;;) {
    double p[6];
    halton_point(cursor++, k, p);
    double n2 = 0.0;
    for (int d = 0; d < k; ++d) {
      p[d] = 2.0 * p[d] - 1.0;
      n2 += p[d] * p[d];
    }
    if (n2 <= 1.0) {
      for (int d = 0; d < k; ++d) out[d] = p[d];
      return;
    }
  }
}

// Element-wise parallel map.  Reductions in the code base stay serial so that
// results do not depend on the thread count.
class Parallel {
 public:
  static int& threads() {
    static int n = 1;
    return n;
  }

  static void for_range(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    int nt = threads();
    if (nt <= 1 || n < 4096) {
      body(0, n);
      return;
    }
    std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) {
      std::size_t lo = std::min(n, std::size_t(t) * chunk);
      std::size_t hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
  }
};

inline double sq(double x) { return x * x; }

inline double norm2(const double* v, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += v[i] * v[i];
  return s;
}

inline double dist2(const double* a, const double* b, int k) {
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += sq(a[i] - b[i]);
  return s;
}

struct MwError : std::runtime_error {
  std::string kind;
  MwError(std::string kind_, const std::string& msg)
      : std::runtime_error(msg), kind(std::move(kind_)) {}
};

}  // namespace mw
