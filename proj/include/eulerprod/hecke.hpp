#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eulerprod/numkernel.hpp"

namespace eulerprod::hecke {

/// Weight-2 modular symbols for Gamma_0(q), q prime, over the projective
/// line mod q. `expr` expresses every Manin symbol in the quotient by the
/// 2- and 3-term relations; the cuspidal subspace is the kernel of the
/// boundary map to the two cusps {0, oo}.
struct ModSymSpace {
  int64_t q = 0;
  int genus = 0;  // g = dim S_2(Gamma_0(q))
  int dim = 0;    // dim of the full quotient (2g + 1 for prime q)

  Eigen::MatrixXd expr;           // (q+1) x dim, Manin symbol -> coordinates
  std::vector<int> basis_symbol;  // P1 index backing each coordinate
  Eigen::MatrixXd star;           // dim x dim involution (c:d) -> (c:-d)
  Eigen::MatrixXd boundary;       // 2 x dim, rows = cusps {0, oo}
  Eigen::MatrixXd cuspidal;       // dim x 2g orthonormal basis of ker(boundary)
  Eigen::MatrixXd fricke;         // dim x dim, action of W_q

  std::vector<int64_t> inv_mod_q;  // inverses mod q, index 1..q-1

  int p1_size() const { return static_cast<int>(q) + 1; }
  /// Index of (c:d) in the P1 list: (1:i) -> i, (0:1) -> q.
  int p1_index(int64_t c, int64_t d) const;
  /// An SL_2(Z) lift [a,b;c,d] of the P1 representative.
  std::array<int64_t, 4> p1_lift(int index) const;
};

ModSymSpace build_space(int64_t q);

/// Matrix of T_p (p != q prime) on the cuspidal subspace, in the basis
/// `space.cuspidal`.
Eigen::MatrixXd hecke_operator(const ModSymSpace& space, int64_t p);

/// Matrix of T_p on the full quotient (used by the eigensystem search).
Eigen::MatrixXd hecke_operator_full(const ModSymSpace& space, int64_t p);

/// One primitive eigenform, coefficients in the arithmetic normalization
/// (a_1 = 1, |a_p| <= 2 sqrt p). lambda(n) = a_n / sqrt(n) is the analytic
/// normalization used by the L-function code.
struct Eigenform {
  int64_t q = 0;
  int id = 0;
  int64_t nmax = 0;
  double fricke = 0.0;  // Fricke eigenvalue w_q (+1 or -1)
  double weight = 0.0;  // harmonic weight; set by harmonic_weights
  std::vector<double> an;  // 1-indexed, an[0] unused

  double a(int64_t n) const { return an[static_cast<size_t>(n)]; }
  double lambda(int64_t n) const {
    return an[static_cast<size_t>(n)] / std::sqrt(static_cast<double>(n));
  }
};

/// Eigensystems of the space, one per newform (each real embedding counts
/// once), coefficients extended to nmax. Forms are ordered by (a_2, a_3, ...).
std::vector<Eigenform> decompose(const ModSymSpace& space, int64_t nmax);

/// Fills composite a_n from prime data via the Hecke recursion; the prime
/// coefficients up to nmax must already be present.
Eigenform extend_coefficients(Eigenform form, int64_t nmax);

/// Fricke eigenvalue of the form's eigenvector, recomputed from the space.
double atkin_lehner_sign(const ModSymSpace& space, const Eigenform& form);

struct FamilySnapshot {
  int64_t q = 0;
  int64_t nmax = 0;
  std::string provenance = "computed";
  std::vector<Eigenform> forms;  // weights sum to 1
};

/// Default smoothing horizon for the harmonic weights.
double default_weight_horizon(int64_t q);

/// Harmonic (Petersson) weights via the smoothed symmetric-square proxy
/// Lambda_f = zeta(2) sum_{n <= 10X} lambda_f(n^2) e^{-n/X} / n,
/// normalized so the weights sum to 1. Needs prime coefficients to 10X.
FamilySnapshot harmonic_weights(std::vector<Eigenform> forms, double X);

/// build_space + decompose + harmonic_weights in one call.
FamilySnapshot compute_family(int64_t q, int64_t nmax, double X = 0.0);

/// Petersson-formula consistency: residual of the weighted average
/// sum_f w_f' lambda_f(m) lambda_f(n) against delta(m,n) plus the
/// Kloosterman/Bessel side truncated at c <= cmax, after the global
/// normalization is fitted once at (m,n) = (1,1).
std::vector<double> petersson_residuals(
    const FamilySnapshot& snapshot,
    const std::vector<std::pair<int64_t, int64_t>>& pairs, int64_t cmax);
double petersson_residual(const FamilySnapshot& snapshot, int64_t m, int64_t n,
                          int64_t cmax);

/// Directory cache format: meta.json + coeffs.csv (see README).
void export_family(const FamilySnapshot& snapshot, const std::string& dir);
FamilySnapshot import_family(const std::string& dir);

bool is_prime(int64_t n);

}  // namespace eulerprod::hecke
