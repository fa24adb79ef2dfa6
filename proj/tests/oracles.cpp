#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace oracles {

std::vector<int64_t> sieve_primes(int64_t bound) {
  std::vector<bool> composite(static_cast<size_t>(bound) + 1, false);
  std::vector<int64_t> out;
  for (int64_t i = 2; i <= bound; ++i) {
    if (!composite[static_cast<size_t>(i)]) {
      out.push_back(i);
      for (int64_t j = i; j <= bound; j += i) composite[static_cast<size_t>(j)] = true;
    }
  }
  return out;
}

namespace {

int legendre(int64_t a, int64_t p) {
  a %= p;
  if (a < 0) a += p;
  if (a == 0) return 0;
  // Euler criterion by fast exponentiation.
  int64_t e = (p - 1) / 2, base = a, r = 1;
  while (e) {
    if (e & 1) r = (r * base) % p;
    base = (base * base) % p;
    e >>= 1;
  }
  return r == 1 ? 1 : (r == p - 1 ? -1 : 0);
}

}  // namespace

int64_t genus_x0_prime(int64_t q) {
  // g = 1 + mu/12 - nu2/4 - nu3/3 - nu_inf/2 with mu = q+1, nu_inf = 2.
  int64_t mu = q + 1;
  int64_t nu2 = (q == 2) ? 1 : (1 + legendre(-1, q));
  int64_t nu3 = (q == 3) ? 1 : (1 + legendre(-3, q));
  // Work over twelfths to stay exact.
  int64_t twelve_g = 12 + mu - 3 * nu2 - 4 * nu3 - 12;
  if (twelve_g % 12 != 0) throw std::runtime_error("genus formula not integral");
  return twelve_g / 12;
}

int64_t curve11_ap(int64_t p) {
  if (p == 11) throw std::invalid_argument("curve11_ap: bad reduction at 11");
  if (p == 2) {
    // Brute force over F_2.
    int64_t count = 0;
    for (int64_t x = 0; x < 2; ++x)
      for (int64_t y = 0; y < 2; ++y) {
        int64_t lhs = (y * y + y) % 2;
        int64_t rhs = ((x * x * x - x * x - 10 * x - 20) % 2 + 2) % 2;
        if (lhs == rhs) ++count;
      }
    return p + 1 - (count + 1);
  }
  // y^2 + y = f(x)  <=>  (2y+1)^2 = 4 f(x) + 1; solutions per x:
  // 1 + chi(4 f(x) + 1).
  int64_t affine = 0;
  for (int64_t x = 0; x < p; ++x) {
    int64_t fx = ((x * x % p) * x % p - x * x % p - 10 * x - 20) % p;
    fx = ((fx % p) + p) % p;
    int64_t disc = (4 * fx + 1) % p;
    affine += 1 + legendre(disc, p);
  }
  return p + 1 - (affine + 1);
}

double hurwitz_class_number(int64_t n) {
  if (n == 0) return -1.0 / 12.0;
  if (n < 0 || n % 4 == 1 || n % 4 == 2) return 0.0;
  // H(n) = sum over f^2 | n with -n/f^2 = 0,1 mod 4 of h_w(-n/f^2),
  // h_w(-3) = 1/3, h_w(-4) = 1/2, otherwise the class number counted by
  // reduced primitive forms (a, b, c), b^2 - 4ac = -m.
  auto hw = [](int64_t m) {  // m > 0, discriminant -m
    if (m == 3) return 1.0 / 3.0;
    if (m == 4) return 0.5;
    int64_t count = 0;
    for (int64_t a = 1; 3 * a * a <= m; ++a) {
      for (int64_t b = -a + 1; b <= a; ++b) {
        int64_t num = b * b + m;
        if (num % (4 * a) != 0) continue;
        int64_t c = num / (4 * a);
        if (c < a) continue;
        if (b < 0 && a == c) continue;  // (a,-b,a) ~ (a,b,a)
        int64_t g = std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c));
        if (g != 1) continue;
        ++count;
      }
    }
    return static_cast<double>(count);
  };
  double total = 0;
  for (int64_t f = 1; f * f <= n; ++f) {
    if (n % (f * f) != 0) continue;
    int64_t m = n / (f * f);
    if (m % 4 == 0 || m % 4 == 3) total += hw(m);
  }
  return total;
}

double trace_tm_weight2(int64_t m, int64_t n_level) {
  // Eichler-Selberg for k = 2, level N prime, gcd(m, N) = 1:
  //   Tr T_m = A1 - A2 - A3 + A4
  //   A1 = psi(N)/12 * [m is a square]
  //   A2 = 1/2 sum_{t^2 < 4m} H(4m - t^2) mu(t), mu(t) = #{x mod N :
  //        x^2 - t x + m = 0}
  //   A3 = sum_{d | m, d <= sqrt m} ' d * c(d, m/d), c = 2 for prime N
  //        (the d = sqrt m term counts half)
  //   A4 = sum_{d | m} d
  if (m % n_level == 0)
    throw std::invalid_argument("trace_tm_weight2: need gcd(m, N) = 1");
  int64_t sq = static_cast<int64_t>(std::llround(std::sqrt(static_cast<double>(m))));
  double a1 = (sq * sq == m) ? static_cast<double>(n_level + 1) / 12.0 : 0.0;
  double a2 = 0;
  for (int64_t t = -sq - 1; t <= sq + 1; ++t) {
    int64_t disc = 4 * m - t * t;
    if (disc <= 0) continue;
    int mu;
    int64_t d = ((t * t - 4 * m) % n_level + n_level) % n_level;
    if (d == 0)
      mu = 1;
    else
      mu = 1 + legendre(d, n_level);
    a2 += hurwitz_class_number(disc) * mu;
  }
  a2 *= 0.5;
  double a3 = 0;
  for (int64_t d = 1; d * d <= m; ++d) {
    if (m % d != 0) continue;
    double weight = (d * d == m) ? 0.5 : 1.0;
    a3 += weight * static_cast<double>(d) * 2.0;
  }
  double a4 = 0;
  for (int64_t d = 1; d <= m; ++d)
    if (m % d == 0) a4 += static_cast<double>(d);
  return a1 - a2 - a3 + a4;
}

double bessel_j1_reference(double x) {
  if (x <= 30.0) {
    long double z = 0.25L * static_cast<long double>(x) * x;
    long double term = 1.0L, sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
      term *= -z / (static_cast<long double>(k) * (k + 1));
      sum += term;
      if (std::abs(static_cast<double>(term)) < 1e-24) break;
    }
    return static_cast<double>(0.5L * x * sum);
  }
  // Simpson quadrature of the integral representation; the integrand
  // oscillates ~x times, so the panel count scales with x.
  int64_t n = 2 * static_cast<int64_t>(200 + 40.0 * x);
  long double h = std::numbers::pi_v<long double> / n;
  long double acc = 0;
  for (int64_t i = 0; i <= n; ++i) {
    long double th = h * i;
    long double val = std::cos(th - x * std::sin(th));
    long double w = (i == 0 || i == n) ? 1.0L : (i % 2 ? 4.0L : 2.0L);
    acc += w * val;
  }
  return static_cast<double>(acc * h / 3.0L / std::numbers::pi_v<long double>);
}

double sato_tate_moment(int k) {
  // (1/2pi) int_{-2}^{2} t^k sqrt(4 - t^2) dt by Simpson on t = 2 sin u.
  // Substitution keeps the integrand smooth: t = 2 sin u, dt = 2 cos u du,
  // sqrt(4 - t^2) = 2 cos u, u in [-pi/2, pi/2].
  const int n = 1 << 16;
  long double h = std::numbers::pi_v<long double> / n;
  long double acc = 0;
  for (int i = 0; i <= n; ++i) {
    long double u = -std::numbers::pi_v<long double> / 2 + h * i;
    long double t = 2.0L * std::sin(u);
    long double c = 2.0L * std::cos(u);
    long double val = std::pow(t, static_cast<long double>(k)) * c * c;
    long double w = (i == 0 || i == n) ? 1.0L : (i % 2 ? 4.0L : 2.0L);
    acc += w * val;
  }
  return static_cast<double>(acc * h / 3.0L / (2.0L * std::numbers::pi_v<long double>));
}

double zeta_direct(double s) {
  // Direct sum with Euler-Maclaurin style tail: sum_{n<=M} n^-s +
  // M^(1-s)/(s-1) + M^-s/2.
  const int64_t m = 2'000'000;
  long double acc = 0;
  for (int64_t n = m; n >= 1; --n)
    acc += std::pow(static_cast<long double>(n), -static_cast<long double>(s));
  acc += std::pow(static_cast<long double>(m), 1.0L - s) / (s - 1.0L);
  acc += 0.5L * std::pow(static_cast<long double>(m), -static_cast<long double>(s));
  return static_cast<double>(acc);
}

double chebyshev_u_trig(int nu, double t) {
  double x = std::acos(t / 2.0);
  double s = std::sin(x);
  if (std::abs(s) < 1e-8) {
    // limit t -> +-2
    double sign = t > 0 ? 1.0 : ((nu % 2 == 0) ? 1.0 : -1.0);
    return sign * (nu + 1);
  }
  return std::sin((nu + 1) * x) / s;
}

std::vector<int32_t> divisor_counts(int64_t bound) {
  std::vector<int32_t> d(static_cast<size_t>(bound) + 1, 0);
  for (int64_t a = 1; a <= bound; ++a)
    for (int64_t n = a; n <= bound; n += a) d[static_cast<size_t>(n)]++;
  return d;
}

double divisor_tail_bound(int64_t m) {
  // sum_{n>m} d(n)/n^2 <= (log m + 2 gamma + 1)/m + 20 m^{-3/2}, m >= 16.
  const double gamma = 0.57721566490153286;
  double dm = static_cast<double>(m);
  return (std::log(dm) + 2.0 * gamma + 1.0) / dm + 20.0 / (dm * std::sqrt(dm));
}

}  // namespace oracles
