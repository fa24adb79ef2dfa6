#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "eulerprod/hecke.hpp"
#include "eulerprod/randmodel.hpp"

namespace eulerprod::lfun {

using Complex = std::complex<double>;

/// Global sign s in epsilon = s * w_q relating the Fricke eigenvalue to the
/// functional-equation sign; fixed once by the reflection consistency check
/// at q = 11 and frozen.
inline constexpr double kEpsilonFromFricke = -1.0;

inline double epsilon_sign(const hecke::Eigenform& f) {
  return kEpsilonFromFricke * f.fricke;
}

/// Gamma via the Lanczos approximation (g = 7, 9 terms), relative error
/// below 1e-12 on the domain used here.
Complex gamma_lanczos(Complex z);

/// Default smoothing length in the strip: N = max(2^14, 50 q).
int64_t default_N(int64_t q);

/// Smoothed partial sum of L(f,s) in the analytic normalization:
/// sum_{n <= 2N} (a_n / sqrt n) cutoff(n/N) n^{-s}.
Complex eval_L_smoothed(const hecke::Eigenform& form, Complex s, int64_t N);

/// Smoothed partial sum in the arithmetic normalization (integer-weight
/// coefficients, reflection point s = 1).
Complex eval_L_arithmetic(const hecke::Eigenform& form, Complex s, int64_t N);

/// Residual |L(s) - X(s) L(2-s)| of the arithmetic-normalization reflection
/// identity with X(s) = eps q^{1-s} (2 pi)^{2s-2} Gamma(2-s)/Gamma(s).
/// The sign override (+1/-1) replaces the frozen epsilon convention, which
/// is what the convention-fixing oracle exercises.
double reflection_check(const hecke::Eigenform& form, Complex s, int64_t N,
                        double epsilon_override = 0.0);

struct LEvaluation {
  int form_id = 0;
  randmodel::EvalGrid grid;
  std::vector<Complex> values;          // boundary first, then interior
  std::vector<double> error_estimate;   // heuristic: |L^(N) - L^(N/2)|
  std::string method;
  int64_t n_smooth = 0;
};

std::vector<LEvaluation> family_on_grid(const hecke::FamilySnapshot& snapshot,
                                        const randmodel::EvalGrid& grid,
                                        int64_t N);

/// Family evaluations in the common serialized ensemble layout
/// (method "family", harmonic weights attached).
randmodel::Ensemble family_ensemble(const hecke::FamilySnapshot& snapshot,
                                    const randmodel::EvalGrid& grid, int64_t N);

}  // namespace eulerprod::lfun
