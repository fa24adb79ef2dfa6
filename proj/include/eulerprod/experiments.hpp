#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eulerprod/hecke.hpp"
#include "eulerprod/lfun.hpp"
#include "eulerprod/randmodel.hpp"

namespace eulerprod::experiments {

using Complex = std::complex<double>;
using randmodel::Ensemble;
using randmodel::EvalGrid;

/// Sato-Tate (semicircle) CDF on [-2,2].
double sato_tate_cdf(double t);
double catalan_number(int m);

struct WeightedValue {
  double x;
  double w;
};

/// KS distance of a weighted empirical CDF against a continuous CDF.
double ks_vs_cdf(std::vector<WeightedValue> sample,
                 const std::function<double(double)>& cdf);
/// KS distance between two weighted empirical CDFs.
double ks_two_sample(std::vector<WeightedValue> a, std::vector<WeightedValue> b);
/// Asymptotic two-sample KS quantile: sqrt(-log(alpha/2)/2) * sqrt((n+m)/nm).
double ks_two_sample_quantile(double alpha, int64_t n, int64_t m);

/// KS distance between the harmonically weighted empirical law of
/// lambda_f(p) and the Sato-Tate CDF.
double sato_tate_test(const hecke::FamilySnapshot& snapshot, int64_t p);

struct JointMomentResult {
  double family_moment = 0;
  double model_moment = 0;
  double gap = 0;
};

/// E_q(prod lambda_f(p_i)^{k_i}) against prod E(Y_{p_i}^{k_i})
/// (even model moments are Catalan numbers, odd ones vanish).
JointMomentResult joint_moment_test(const hecke::FamilySnapshot& snapshot,
                                    const std::vector<int64_t>& primes,
                                    const std::vector<int>& exponents);

/// Universality target: a constant, a polynomial in (s - center) with real
/// coefficients, or values tabulated on the domain grid.
struct TargetFunction {
  enum class Kind { kConstant, kPolynomial, kTabulated };
  Kind kind = Kind::kConstant;
  EvalGrid domain;
  double constant = 1.0;
  std::vector<double> poly;         // coefficients in (s - center)
  std::vector<Complex> tabulated;   // aligned with domain.all_points()
  std::string desc = "const:1";

  std::vector<Complex> values_on(const EvalGrid& grid) const;
  /// Admissible iff positive on the sampled real diameter and conjugate
  /// symmetric (membership in the real subspace).
  bool admissible(std::string* why = nullptr) const;
};

TargetFunction make_constant_target(double value, const EvalGrid& domain);
TargetFunction make_poly_target(const std::vector<double>& coeffs,
                                const EvalGrid& domain);
TargetFunction make_tabulated_target(const EvalGrid& domain,
                                     std::vector<Complex> values,
                                     std::string desc = "tabulated");

struct PointDistances {
  double ks_re = 0;
  double ks_im = 0;
  double ks_logabs = 0;
};

struct ComparisonReport {
  std::vector<Complex> points;
  std::vector<PointDistances> harmonic;  // family side harmonically weighted
  std::vector<PointDistances> natural;   // family side uniformly weighted
  double aggregate_harmonic = 0;         // mean over points and marginals
  double aggregate_natural = 0;
  int64_t level = 0;
  uint64_t model_seed = 0;
  int64_t family_n = 0, model_n = 0;
  size_t family_size = 0, model_size = 0;
  uint64_t grid_hash_value = 0;
};

/// Marginal KS distances between two ensembles on the same grid. The first
/// ensemble's weights are used when present (family side); the second is
/// weighted uniformly.
ComparisonReport bagchi_compare(const Ensemble& family, const Ensemble& model);

struct UniversalityResult {
  double harmonic_fraction = 0;
  double natural_fraction = 0;
  int64_t count = 0;
  int64_t family_size = 0;
  double eps = 0;
};

/// Fraction of forms with sup-norm distance to the target below eps, under
/// harmonic and under uniform weighting. The family ensemble must be
/// evaluated on the target's domain grid.
UniversalityResult universality_count(const Ensemble& family,
                                      const TargetFunction& target, double eps);

struct SupportProbability {
  double estimate = 0;
  double stderr_ = 0;
  int64_t hits = 0;
  int64_t samples = 0;
};

/// Monte Carlo estimate of P(||L^(N) - target||_grid < eps).
SupportProbability model_support_probability(const TargetFunction& target,
                                             double eps, int M, uint64_t seed,
                                             int64_t N);

struct SupportApproxTrace {
  std::vector<int64_t> primes;  // all primes <= pmax
  std::vector<double> theta;    // chosen angles; 0 for the forced p <= n0
  std::vector<double> residual; // boundary sup-norm after each prime
  double initial_residual = 0;  // sup |psi_1| before the greedy phase
  double tail_bound = 0;        // estimate for the primes beyond pmax
  std::string target_desc;
};

/// Greedy analogue of the support construction: approximates log(target)
/// by sums 2 cos(theta_p) p^{-s} prime by prime on the boundary grid.
SupportApproxTrace greedy_support_approx(const TargetFunction& target,
                                         int64_t pmax, int64_t n0);

struct DecayTable {
  std::vector<int64_t> n_list;
  int64_t n_ref = 0;
  std::vector<double> mean_gap;  // E ||L^(N_ref) - L^(N)||_boundary
  double slope = 0;              // fitted log-log slope
};

DecayTable smoothing_decay_model(uint64_t seed, int M, const EvalGrid& grid,
                                 const std::vector<int64_t>& n_list,
                                 int64_t n_ref);
DecayTable smoothing_decay_family(const hecke::FamilySnapshot& snapshot,
                                  const EvalGrid& grid,
                                  const std::vector<int64_t>& n_list,
                                  int64_t n_ref);

struct GrowthTable {
  std::vector<double> t_list;
  std::vector<double> family_mean;  // E_q |L(f, sigma + i t)|
  std::vector<double> model_mean;   // model analogue, Monte Carlo
  double family_exponent = 0;       // fit of log mean against log(1 + t)
  double model_exponent = 0;
};

GrowthTable moment_growth_test(const hecke::FamilySnapshot& snapshot,
                               double sigma, const std::vector<double>& t_list,
                               int M, uint64_t seed, int64_t N);

}  // namespace eulerprod::experiments
