#include "eulerprod/numkernel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include "eulerprod/parallel.hpp"

namespace eulerprod {

namespace {
std::atomic<int> g_threads{0};
}

int default_threads() {
  int n = g_threads.load();
  if (n > 0) return n;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void set_default_threads(int n) { g_threads.store(n); }

namespace numkernel {

PrimeTable primes_up_to(int64_t bound) {
  if (bound < 2) throw std::invalid_argument("primes_up_to: bound must be >= 2");
  PrimeTable t;
  t.bound = bound;
  t.spf.assign(static_cast<size_t>(bound) + 1, 0);
  for (int64_t i = 2; i <= bound; ++i) {
    if (t.spf[i] == 0) {
      t.spf[i] = static_cast<int32_t>(i);
      t.primes.push_back(i);
      if (i <= bound / i) {
        for (int64_t j = i * i; j <= bound; j += i) {
          if (t.spf[j] == 0) t.spf[j] = static_cast<int32_t>(i);
        }
      }
    }
  }
  return t;
}

double chebyshev_u(int nu, double t) {
  if (nu < 0) throw std::invalid_argument("chebyshev_u: nu must be >= 0");
  double um = 1.0;  // U_0
  if (nu == 0) return um;
  double u = t;  // U_1
  for (int k = 1; k < nu; ++k) {
    double next = t * u - um;
    um = u;
    u = next;
  }
  return u;
}

double cutoff_eval(double x) {
  if (x < 0) throw std::invalid_argument("cutoff_eval: x must be >= 0");
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  auto g = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
  double a = g(2.0 - x);
  double b = g(x - 1.0);
  return a / (a + b);
}

int64_t gcd64(int64_t a, int64_t b) { return std::gcd(a, b); }

int64_t inv_mod(int64_t a, int64_t m) {
  if (m < 1) throw std::invalid_argument("inv_mod: modulus must be >= 1");
  if (m == 1) return 0;
  int64_t r0 = m, r1 = ((a % m) + m) % m;
  int64_t s0 = 0, s1 = 1;
  while (r1 != 0) {
    int64_t q = r0 / r1;
    r0 -= q * r1;
    std::swap(r0, r1);
    s0 -= q * s1;
    std::swap(s0, s1);
  }
  if (r0 != 1) throw std::invalid_argument("inv_mod: arguments not coprime");
  return ((s0 % m) + m) % m;
}

namespace {

// Fixed-modulus reduction via 128-bit multiply; c fits in 63 bits here.
struct Reducer {
  uint64_t c;
  explicit Reducer(uint64_t modulus) : c(modulus) {}
  uint64_t mul(uint64_t a, uint64_t b) const {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % c);
  }
  uint64_t add(uint64_t a, uint64_t b) const {
    uint64_t s = a + b;
    return s >= c ? s - c : s;
  }
};

// Cosine table cos(2*pi*j/c), j in [0, c). Built by rotation with periodic
// resync so the drift stays below ~1e-13.
void build_cos_table(int64_t c, std::vector<double>& table) {
  table.resize(static_cast<size_t>(c));
  const double step = 2.0 * std::numbers::pi / static_cast<double>(c);
  constexpr int64_t kResync = 512;
  double cs = 1.0, sn = 0.0;
  const double cstep = std::cos(step), sstep = std::sin(step);
  for (int64_t j = 0; j < c; ++j) {
    if (j % kResync == 0) {
      cs = std::cos(step * static_cast<double>(j));
      sn = std::sin(step * static_cast<double>(j));
    }
    table[static_cast<size_t>(j)] = cs;
    double nc = cs * cstep - sn * sstep;
    sn = cs * sstep + sn * cstep;
    cs = nc;
  }
}

}  // namespace

std::vector<double> kloosterman_many(
    std::span<const std::pair<int64_t, int64_t>> mn, int64_t c) {
  if (c < 1) throw std::invalid_argument("kloosterman: c must be >= 1");
  std::vector<double> out(mn.size(), 0.0);
  if (c == 1) {
    std::fill(out.begin(), out.end(), 1.0);  // single term e(0)
    return out;
  }

  // Mark non-units by sieving with the prime factors of c.
  std::vector<uint8_t> unit(static_cast<size_t>(c), 1);
  unit[0] = 0;
  {
    int64_t rem = c;
    for (int64_t p = 2; p * p <= rem; ++p) {
      if (rem % p == 0) {
        for (int64_t j = 0; j < c; j += p) unit[static_cast<size_t>(j)] = 0;
        while (rem % p == 0) rem /= p;
      }
    }
    if (rem > 1) {
      for (int64_t j = 0; j < c; j += rem) unit[static_cast<size_t>(j)] = 0;
    }
  }

  std::vector<int64_t> xs;
  xs.reserve(static_cast<size_t>(c) / 2 + 1);
  for (int64_t x = 1; x <= c / 2; ++x) {
    if (unit[static_cast<size_t>(x)]) xs.push_back(x);
  }

  // Batch inversion: one extended gcd for the whole list.
  Reducer red(static_cast<uint64_t>(c));
  std::vector<uint64_t> prefix(xs.size());
  uint64_t acc = 1;
  for (size_t i = 0; i < xs.size(); ++i) {
    prefix[i] = acc;
    acc = red.mul(acc, static_cast<uint64_t>(xs[i]));
  }
  uint64_t inv_acc = static_cast<uint64_t>(inv_mod(static_cast<int64_t>(acc), c));

  static thread_local std::vector<double> cos_table;
  build_cos_table(c, cos_table);

  std::vector<int64_t> mr(mn.size()), nr(mn.size());
  for (size_t k = 0; k < mn.size(); ++k) {
    mr[k] = ((mn[k].first % c) + c) % c;
    nr[k] = ((mn[k].second % c) + c) % c;
  }

  // Walk the list backwards recovering individual inverses; x and c-x give
  // conjugate phases, so each unit x <= c/2 contributes twice its cosine.
  for (size_t i = xs.size(); i-- > 0;) {
    uint64_t x = static_cast<uint64_t>(xs[i]);
    uint64_t xinv = red.mul(inv_acc, prefix[i]);
    inv_acc = red.mul(inv_acc, x);
    for (size_t k = 0; k < mn.size(); ++k) {
      uint64_t phase = red.add(red.mul(static_cast<uint64_t>(mr[k]), x),
                               red.mul(static_cast<uint64_t>(nr[k]), xinv));
      out[k] += 2.0 * cos_table[static_cast<size_t>(phase)];
    }
  }
  // c even: x = c/2 is its own mirror and was double counted iff it is a unit.
  if (c % 2 == 0 && unit[static_cast<size_t>(c / 2)]) {
    int64_t x = c / 2;
    uint64_t xinv = static_cast<uint64_t>(inv_mod(x, c));
    for (size_t k = 0; k < mn.size(); ++k) {
      uint64_t phase = red.add(red.mul(static_cast<uint64_t>(mr[k]),
                                       static_cast<uint64_t>(x)),
                               red.mul(static_cast<uint64_t>(nr[k]), xinv));
      out[k] -= cos_table[static_cast<size_t>(phase)];
    }
  }
  return out;
}

double kloosterman(int64_t m, int64_t n, int64_t c) {
  std::pair<int64_t, int64_t> mn[1] = {{m, n}};
  return kloosterman_many(std::span<const std::pair<int64_t, int64_t>>(mn, 1),
                          c)[0];
}

double bessel_j1(double x) {
  if (x < 0) throw std::invalid_argument("bessel_j1: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x <= 12.0) {
    // J_1(x) = (x/2) sum_k (-1)^k (x^2/4)^k / (k! (k+1)!)
    double z = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 80; ++k) {
      term *= -z / (static_cast<double>(k) * (k + 1));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-30) break;
    }
    return 0.5 * x * sum;
  }
  // Hankel expansion: J_1 = sqrt(2/(pi x)) (P cos(chi) - Q sin(chi)),
  // chi = x - 3 pi / 4; terms a_k = prod (4 - (2j-1)^2) / (k! 8^k).
  double p = 1.0, q = 0.0;
  double term = 1.0;
  double prev = std::abs(term);
  for (int k = 1; k < 40; ++k) {
    double odd = 2.0 * k - 1.0;
    term *= (4.0 - odd * odd) / (8.0 * k * x);
    if (std::abs(term) > prev) break;  // asymptotic series: stop at min term
    prev = std::abs(term);
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
    }
  }
  double chi = x - 0.75 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) *
         (p * std::cos(chi) - q * std::sin(chi));
}

std::vector<std::pair<int64_t, int>> factor(int64_t n, const PrimeTable& table) {
  if (n < 1) throw std::invalid_argument("factor: n must be >= 1");
  if (n > table.bound)
    throw std::invalid_argument("factor: n exceeds the table bound");
  std::vector<std::pair<int64_t, int>> out;
  while (n > 1) {
    int64_t p = table.spf[static_cast<size_t>(n)];
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  return out;
}

}  // namespace numkernel
}  // namespace eulerprod
