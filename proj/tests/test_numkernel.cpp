#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "eulerprod/numkernel.hpp"
#include "oracles.hpp"

using namespace eulerprod::numkernel;

TEST_CASE("primes_up_to basic tables") {
  auto t = primes_up_to(10);
  CHECK(t.primes == std::vector<int64_t>{2, 3, 5, 7});
  auto t2 = primes_up_to(2);
  CHECK(t2.primes == std::vector<int64_t>{2});
  CHECK_THROWS_AS(primes_up_to(1), std::invalid_argument);
}

TEST_CASE("primes_up_to against an independent sieve") {
  auto t = primes_up_to(1'000'000);
  CHECK(t.primes.size() == 78498);
  auto ref = oracles::sieve_primes(10'000);
  auto own = primes_up_to(10'000);
  REQUIRE(own.primes.size() == ref.size());
  for (size_t i = 0; i < ref.size(); ++i) CHECK(own.primes[i] == ref[i]);
  // spf invariants on a range
  for (int64_t n = 2; n <= 10'000; ++n) {
    int64_t p = own.spf[static_cast<size_t>(n)];
    CHECK(n % p == 0);
    for (int64_t d = 2; d < p; ++d) CHECK(n % d != 0);
  }
}

TEST_CASE("chebyshev_u recurrence matches the trigonometric identity") {
  // nu <= 50, 1000 points t = 2 cos x
  double worst = 0;
  for (int nu = 0; nu <= 50; ++nu) {
    for (int i = 0; i < 1000; ++i) {
      double x = (i + 0.5) * std::numbers::pi / 1000.0;
      double t = 2.0 * std::cos(x);
      double a = chebyshev_u(nu, t);
      double b = std::sin((nu + 1) * x) / std::sin(x);
      worst = std::max(worst, std::abs(a - b));
      CHECK(std::abs(a) <= nu + 1 + 1e-9);
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("chebyshev_u special values") {
  CHECK(chebyshev_u(0, 1.7) == 1.0);
  CHECK(chebyshev_u(2, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
  for (int nu = 0; nu <= 10; ++nu)
    CHECK(chebyshev_u(nu, 2.0) == doctest::Approx(nu + 1).epsilon(1e-12));
}

TEST_CASE("cutoff shape") {
  CHECK(cutoff_eval(0.0) == 1.0);
  CHECK(cutoff_eval(0.3) == 1.0);
  CHECK(cutoff_eval(1.0) == 1.0);
  CHECK(cutoff_eval(2.0) == 0.0);
  CHECK(cutoff_eval(3.0) == 0.0);
  CHECK(cutoff_eval(1.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(cutoff_eval(-0.1), std::invalid_argument);
  // monotone non-increasing on [1,2], values in [0,1]
  double prev = 1.0;
  for (int i = 0; i <= 200; ++i) {
    double v = cutoff_eval(1.0 + i / 200.0);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
  // symmetry of the bridge
  for (double d : {0.1, 0.25, 0.4})
    CHECK(cutoff_eval(1.5 - d) + cutoff_eval(1.5 + d) == doctest::Approx(1.0));
}

TEST_CASE("kloosterman small cases") {
  CHECK(kloosterman(1, 1, 1) == doctest::Approx(1.0));
  CHECK(kloosterman(1, 1, 2) == doctest::Approx(1.0));
  CHECK(kloosterman(1, 1, 3) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("kloosterman against naive enumeration") {
  auto naive = [](int64_t m, int64_t n, int64_t c) {
    double re = 0, im = 0;
    for (int64_t x = 1; x <= c; ++x) {
      if (std::gcd(x, c) != 1) continue;
      int64_t xb = eulerprod::numkernel::inv_mod(x, c);
      double phase = 2.0 * std::numbers::pi *
                     static_cast<double>((m * x + n * xb) % c) / static_cast<double>(c);
      re += std::cos(phase);
      im += std::sin(phase);
    }
    CHECK(std::abs(im) < 1e-9);  // conjugate symmetry
    return re;
  };
  for (int64_t c : {2, 3, 4, 5, 6, 7, 12, 35, 101, 1000, 1001}) {
    for (auto [m, n] : {std::pair<int64_t, int64_t>{1, 1}, {2, 3}, {5, 7}, {3, 3}}) {
      CHECK(kloosterman(m, n, c) == doctest::Approx(naive(m, n, c)).epsilon(1e-9));
      // symmetry S(m,n;c) = S(n,m;c)
      CHECK(kloosterman(m, n, c) == doctest::Approx(kloosterman(n, m, c)).epsilon(1e-9));
    }
  }
}

TEST_CASE("kloosterman_many matches single calls") {
  std::vector<std::pair<int64_t, int64_t>> mn = {{1, 1}, {2, 2}, {2, 3}, {3, 5}};
  auto batch = kloosterman_many(mn, 707);
  for (size_t i = 0; i < mn.size(); ++i)
    CHECK(batch[i] == doctest::Approx(kloosterman(mn[i].first, mn[i].second, 707))
                          .epsilon(1e-12));
}

TEST_CASE("bessel_j1 values and accuracy") {
  CHECK(bessel_j1(0.0) == 0.0);
  CHECK(bessel_j1(1e-6) == doctest::Approx(5e-7).epsilon(1e-6));
  CHECK(bessel_j1(1.0) == doctest::Approx(0.4400505857449335).epsilon(1e-12));
  // reference comparison across the series/asymptotic switch and far out
  for (double x : {0.1, 0.5, 2.0, 5.0, 8.0, 11.0, 11.9, 12.0, 12.1, 13.0,
                   20.0, 50.0, 100.0, 1000.0, 9999.5}) {
    CHECK(std::abs(bessel_j1(x) - oracles::bessel_j1_reference(x)) < 1e-10);
  }
  CHECK_THROWS_AS(bessel_j1(-1.0), std::invalid_argument);
}

TEST_CASE("factor") {
  auto t = primes_up_to(1000);
  CHECK(factor(1, t).empty());
  CHECK(factor(12, t) ==
        std::vector<std::pair<int64_t, int>>{{2, 2}, {3, 1}});
  CHECK(factor(97, t) == std::vector<std::pair<int64_t, int>>{{97, 1}});
  CHECK_THROWS_AS(factor(1001, t), std::invalid_argument);
  CHECK_THROWS_AS(factor(0, t), std::invalid_argument);
  // recomposition property
  for (int64_t n = 2; n <= 1000; ++n) {
    int64_t prod = 1;
    int64_t last = 0;
    for (auto [p, e] : factor(n, t)) {
      CHECK(p > last);
      last = p;
      for (int i = 0; i < e; ++i) prod *= p;
    }
    CHECK(prod == n);
  }
}
