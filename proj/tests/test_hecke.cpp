#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "eulerprod/hecke.hpp"
#include "modsym_internal.hpp"
#include "oracles.hpp"

using namespace eulerprod;
using namespace eulerprod::hecke;

TEST_CASE("genus oracle sanity") {
  CHECK(oracles::genus_x0_prime(11) == 1);
  CHECK(oracles::genus_x0_prime(13) == 0);
  CHECK(oracles::genus_x0_prime(17) == 1);
  CHECK(oracles::genus_x0_prime(23) == 2);
  CHECK(oracles::genus_x0_prime(37) == 2);
  CHECK(oracles::genus_x0_prime(101) == 8);
  CHECK(oracles::genus_x0_prime(997) == 82);
}

TEST_CASE("build_space dimensions match the genus oracle") {
  for (int64_t q : {11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 101}) {
    auto sp = build_space(q);
    int64_t g = oracles::genus_x0_prime(q);
    CHECK(sp.genus == g);
    CHECK(sp.cuspidal.cols() == 2 * g);
    CHECK(sp.dim == 2 * g + 1);
  }
  CHECK_THROWS_AS(build_space(12), std::invalid_argument);
  CHECK_THROWS_AS(build_space(7), ComputationError);
}

TEST_CASE("involutions and commutativity at q = 23") {
  auto sp = build_space(23);
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(sp.dim, sp.dim);
  CHECK((sp.star * sp.star - id).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((sp.fricke * sp.fricke - id).cwiseAbs().maxCoeff() < 1e-10);

  auto t2 = hecke_operator(sp, 2);
  auto t3 = hecke_operator(sp, 3);
  CHECK((t2 * t3 - t3 * t2).cwiseAbs().maxCoeff() < 1e-8);
  // star and Fricke restricted to the cuspidal subspace commute with T_p
  Eigen::MatrixXd sc = sp.cuspidal.transpose() * sp.star * sp.cuspidal;
  Eigen::MatrixXd fc = sp.cuspidal.transpose() * sp.fricke * sp.cuspidal;
  CHECK((t2 * sc - sc * t2).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((t2 * fc - fc * t2).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(hecke_operator(sp, 23), ComputationError);
  CHECK_THROWS_AS(hecke_operator(sp, 4), std::invalid_argument);
}

TEST_CASE("continued-fraction paths reproduce Manin symbols") {
  auto sp = build_space(37);
  // {g0 -> g oo} for the lift of every Manin symbol must equal the symbol.
  for (int i = 0; i < sp.p1_size(); ++i) {
    auto m = sp.p1_lift(i);
    Eigen::VectorXd path = detail::path_from_inf(sp, m[0], m[2]) -
                           detail::path_from_inf(sp, m[1], m[3]);
    CHECK((path - sp.expr.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("hecke traces match the Eichler-Selberg oracle") {
  CHECK(oracles::trace_tm_weight2(2, 23) == doctest::Approx(-1.0));
  CHECK(oracles::trace_tm_weight2(2, 11) == doctest::Approx(-2.0));
  for (int64_t q : {11, 17, 19, 23, 29, 31, 37, 41}) {
    auto sp = build_space(q);
    for (int64_t p : {2, 3, 5, 7}) {
      if (p == q) continue;
      auto tp = hecke_operator(sp, p);
      // trace on the cuspidal subspace is twice the trace on S_2
      CHECK(tp.trace() ==
            doctest::Approx(2.0 * oracles::trace_tm_weight2(p, q)).epsilon(1e-8));
    }
  }
}

TEST_CASE("q = 11 eigenvalues match point counting") {
  auto sp = build_space(11);
  auto t2 = hecke_operator(sp, 2);
  Eigen::VectorXcd ev = t2.eigenvalues();
  CHECK(ev[0].real() == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(ev[1].real() == doctest::Approx(-2.0).epsilon(1e-10));

  auto forms = decompose(sp, 200);
  REQUIRE(forms.size() == 1);
  const auto& f = forms[0];
  CHECK(f.a(1) == 1.0);
  CHECK(f.a(2) == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(f.a(3) == doctest::Approx(-1.0).epsilon(1e-10));
  for (int64_t p : oracles::sieve_primes(100)) {
    if (p == 11) continue;
    CHECK(f.a(p) == doctest::Approx(static_cast<double>(oracles::curve11_ap(p)))
                        .epsilon(1e-8));
  }
  // a_11 = 1 for the level-11 curve, Fricke eigenvalue -1
  CHECK(f.a(11) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(f.fricke == doctest::Approx(-1.0));
  // recursion / multiplicativity spot checks
  CHECK(f.a(4) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(f.a(6) == doctest::Approx(f.a(2) * f.a(3)).epsilon(1e-12));
}

TEST_CASE("q = 23 eigenvalue pair matches x^2 + x - 1") {
  auto sp = build_space(23);
  auto forms = decompose(sp, 50);
  REQUIRE(forms.size() == 2);
  double r1 = (-1.0 - std::sqrt(5.0)) / 2.0;
  double r2 = (-1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(forms[0].a(2) == doctest::Approx(r1).epsilon(1e-8));
  CHECK(forms[1].a(2) == doctest::Approx(r2).epsilon(1e-8));
}

TEST_CASE("q = 37 decomposition and Fricke signs") {
  auto sp = build_space(37);
  auto forms = decompose(sp, 100);
  REQUIRE(forms.size() == 2);
  CHECK(forms[0].a(2) == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(forms[1].a(2) == doctest::Approx(0.0).epsilon(1e-8));
  // the two forms carry opposite functional-equation signs
  CHECK(forms[0].fricke * forms[1].fricke == doctest::Approx(-1.0));
  for (const auto& f : forms) {
    double w = atkin_lehner_sign(sp, f);
    CHECK(w == doctest::Approx(f.fricke));
  }
}

TEST_CASE("Deligne bound and Hecke recursion hold for computed forms") {
  for (int64_t q : {11, 23, 37, 101}) {
    auto sp = build_space(q);
    auto forms = decompose(sp, 500);
    CHECK(static_cast<int>(forms.size()) == sp.genus);
    for (const auto& f : forms) {
      for (int64_t p : oracles::sieve_primes(500)) {
        if (p == q) continue;
        CHECK(std::abs(f.a(p)) <= 2.0 * std::sqrt(static_cast<double>(p)) + 1e-6);
        if (p * p <= 500)
          CHECK(f.a(p * p) ==
                doctest::Approx(f.a(p) * f.a(p) - p).epsilon(1e-9));
        if (p * p * p <= 500)
          CHECK(f.a(p * p * p) ==
                doctest::Approx(f.a(p) * f.a(p * p) - p * f.a(p)).epsilon(1e-9));
      }
      CHECK(f.a(q) * f.a(q) == doctest::Approx(1.0).epsilon(1e-6));
      if (q * q <= 500)
        CHECK(f.a(q * q) == doctest::Approx(f.a(q) * f.a(q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("decomposition is stable across reruns") {
  auto sp = build_space(101);
  auto f1 = decompose(sp, 60);
  auto f2 = decompose(sp, 120);
  REQUIRE(f1.size() == f2.size());
  for (size_t i = 0; i < f1.size(); ++i) {
    CHECK(f1[i].a(2) == doctest::Approx(f2[i].a(2)).epsilon(1e-6));
    CHECK(f1[i].a(3) == doctest::Approx(f2[i].a(3)).epsilon(1e-6));
    CHECK(f1[i].a(5) == doctest::Approx(f2[i].a(5)).epsilon(1e-6));
  }
}

TEST_CASE("harmonic weights normalize and are positive") {
  auto snap = compute_family(11, 300);
  REQUIRE(snap.forms.size() == 1);
  CHECK(snap.forms[0].weight == doctest::Approx(1.0).epsilon(1e-12));

  auto snap2 = compute_family(37, 300);
  double sum = 0;
  for (const auto& f : snap2.forms) {
    CHECK(f.weight > 0);
    sum += f.weight;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("extend_coefficients") {
  auto sp = build_space(11);
  auto forms = decompose(sp, 100);
  auto f = forms[0];
  // wipe composites, re-extend
  auto g = f;
  for (int64_t n = 2; n <= 100; ++n) {
    bool isprime = true;
    for (int64_t d = 2; d * d <= n; ++d)
      if (n % d == 0) isprime = false;
    if (!isprime) g.an[static_cast<size_t>(n)] = 0;
  }
  auto h = extend_coefficients(g, 100);
  for (int64_t n = 1; n <= 100; ++n)
    CHECK(h.a(n) == doctest::Approx(f.a(n)).epsilon(1e-12));
  CHECK(h.a(1) == 1.0);
  CHECK(h.a(4) == doctest::Approx(h.a(2) * h.a(2) - 2.0).epsilon(1e-12));
  CHECK(h.a(6) == doctest::Approx(h.a(2) * h.a(3)).epsilon(1e-12));
  CHECK_THROWS_AS(extend_coefficients(h, 1000), ComputationError);
}

TEST_CASE("family export / import round trip") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "eulerprod_test_family";
  fs::remove_all(dir);
  auto snap = compute_family(11, 120);
  export_family(snap, dir.string());
  auto back = import_family(dir.string());
  CHECK(back.q == snap.q);
  REQUIRE(back.forms.size() == snap.forms.size());
  for (size_t i = 0; i < snap.forms.size(); ++i) {
    CHECK(back.forms[i].weight == snap.forms[i].weight);
    CHECK(back.forms[i].fricke == snap.forms[i].fricke);
    for (int64_t n = 1; n <= snap.nmax; ++n)
      CHECK(back.forms[i].a(n) == snap.forms[i].a(n));  // bit-for-bit
  }

  // Deligne violation rejected with a diagnostic
  {
    std::ifstream in(dir / "coeffs.csv");
    std::string all((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    in.close();
    size_t pos = all.find("0,2,");
    size_t eol = all.find('\n', pos);
    all.replace(pos, eol - pos, "0,2,5");
    std::ofstream out(dir / "coeffs.csv");
    out << all;
  }
  CHECK_THROWS_WITH_AS(import_family(dir.string()),
                       doctest::Contains("Deligne"), std::invalid_argument);
  fs::remove_all(dir);
}
