#pragma once

// Independent oracles used by the test suites. Everything here is written
// from scratch against textbook definitions and must stay independent of the
// library implementation paths it checks.

#include <cstdint>
#include <vector>

namespace oracles {

/// Plain Eratosthenes, no smallest-prime-factor bookkeeping.
std::vector<int64_t> sieve_primes(int64_t bound);

/// Genus of X_0(q) for prime q from the index/elliptic-point formula.
int64_t genus_x0_prime(int64_t q);

/// a_p of the elliptic curve y^2 + y = x^3 - x^2 - 10x - 20 (level 11) by
/// quadratic-character point counting over F_p, p != 11.
int64_t curve11_ap(int64_t p);

/// Hurwitz class number H(n) (0 for n < 0 or n = 1, 2 mod 4; H(0) = -1/12).
double hurwitz_class_number(int64_t n);

/// Trace of T_m on S_2(Gamma_0(N)), N prime, gcd(m, N) = 1, via the
/// Eichler-Selberg formula with Hurwitz class numbers.
double trace_tm_weight2(int64_t m, int64_t n_level);

/// Bessel J_1 reference: long-double power series (x <= 30) or Simpson
/// quadrature of (1/pi) int_0^pi cos(theta - x sin theta) dtheta.
double bessel_j1_reference(double x);

/// Moments of the Sato-Tate density by Simpson quadrature.
double sato_tate_moment(int k);

/// zeta(s) for real s > 1 by direct summation with an integral tail.
double zeta_direct(double s);

/// Chebyshev U_nu via the trigonometric identity, t = 2 cos x.
double chebyshev_u_trig(int nu, double t);

/// d(n) for all n <= bound by divisor sieve.
std::vector<int32_t> divisor_counts(int64_t bound);

/// Upper bound for sum_{n > m} d(n) / n^2.
double divisor_tail_bound(int64_t m);

}  // namespace oracles
