#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eulerprod {

/// Error for failures of the computation itself (as opposed to bad input):
/// singular Euler factors, unresolved eigenspaces, log-branch failures, ...
/// `code` is a short machine-readable tag.
class ComputationError : public std::runtime_error {
 public:
  ComputationError(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

namespace numkernel {

/// Primes and smallest-prime-factor table up to a fixed bound.
struct PrimeTable {
  int64_t bound = 0;
  std::vector<int64_t> primes;
  std::vector<int32_t> spf;  // spf[n] = least prime factor of n, n >= 2

  bool is_prime(int64_t n) const {
    return n >= 2 && n <= bound && spf[static_cast<size_t>(n)] == n;
  }
};

PrimeTable primes_up_to(int64_t bound);

/// Chebyshev polynomial of the second kind, normalized so that
/// U_nu(2 cos x) = sin((nu+1)x) / sin(x).
double chebyshev_u(int nu, double t);

/// Smooth cutoff: 1 on [0,1], 0 on [2,inf), exp-bridge in between,
/// symmetric about 3/2.
double cutoff_eval(double x);

/// Kloosterman sum S(m,n;c) = sum over x mod c, gcd(x,c)=1, of
/// e((m x + n xbar)/c). Computed by direct enumeration with modular
/// inverses; the result is real by x -> -x symmetry.
double kloosterman(int64_t m, int64_t n, int64_t c);

/// Several S(m_i,n_i;c) for the same modulus in one enumeration pass.
std::vector<double> kloosterman_many(
    std::span<const std::pair<int64_t, int64_t>> mn, int64_t c);

/// Bessel J_1, absolute accuracy ~1e-10 on [0, 1e4]. Power series for
/// x <= 12, Hankel asymptotics beyond.
double bessel_j1(double x);

/// Prime factorization of n (ascending primes, exponents >= 1).
std::vector<std::pair<int64_t, int>> factor(int64_t n, const PrimeTable& table);

int64_t gcd64(int64_t a, int64_t b);
/// Inverse of a mod m (m >= 1, gcd(a,m) = 1).
int64_t inv_mod(int64_t a, int64_t m);

}  // namespace numkernel
}  // namespace eulerprod
