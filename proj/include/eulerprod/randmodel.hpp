#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "eulerprod/numkernel.hpp"

namespace eulerprod::randmodel {

using Complex = std::complex<double>;

/// Counter-based RNG stream keyed by (seed, key): the stream for a key is
/// independent of the order in which keys are visited.
class SubRng {
 public:
  SubRng(uint64_t seed, uint64_t key);
  uint64_t next_u64();
  double uniform();  // [0, 1)

 private:
  uint64_t state_;
};

/// Stable derivation of per-sample seeds from an ensemble seed.
uint64_t derive_seed(uint64_t seed, uint64_t index);

/// One draw of the SU(2) trace sequence: t_p in [-2,2] for each prime
/// p <= bound, each a deterministic function of (seed, p).
struct SU2Sample {
  uint64_t seed = 0;
  int64_t bound = 0;
  std::vector<int64_t> primes;
  std::vector<double> traces;  // aligned with primes

  double trace_for(int64_t p) const;
};

SU2Sample sample_traces(uint64_t seed, int64_t bound);
SU2Sample sample_traces(uint64_t seed, int64_t bound,
                        const numkernel::PrimeTable& table);

/// Multiplicative sequence Y_n derived from a trace sample via
/// Y_{p^nu} = U_nu(t_p).
struct MultCoefficients {
  int64_t nmax = 0;
  uint64_t seed = 0;
  std::vector<double> values;  // values[n], 1-indexed; values[0] unused

  double operator[](int64_t n) const { return values[static_cast<size_t>(n)]; }
};

MultCoefficients build_coefficients(const SU2Sample& sample, int64_t nmax,
                                    const numkernel::PrimeTable& table);

/// Closed disc in the strip 1/2 < Re s < 1 with sampled boundary (and
/// optionally interior) points.
struct EvalGrid {
  Complex center{0.75, 0.0};
  double radius = 0.2;
  std::vector<Complex> boundary;
  std::vector<Complex> interior;

  std::vector<Complex> all_points() const;
  size_t point_count() const { return boundary.size() + interior.size(); }
};

EvalGrid make_disc_grid(Complex center, double radius, int boundary_count,
                        bool with_center = true);
uint64_t grid_hash(const EvalGrid& grid);

/// Values of one holomorphic draw on a grid.
struct HoloSample {
  EvalGrid grid;
  std::vector<Complex> values;  // boundary points first, then interior
  uint64_t seed = 0;
  int64_t n_smooth = 0;
  std::string method;
};

struct EulerProductValue {
  Complex value;
  double tail_bound = 0.0;  // valid only when tail_is_bound
  bool tail_is_bound = false;
};

/// Truncated Euler product over p <= pmax. The tail estimate
/// 2 pmax^(1-sigma) / ((sigma-1) log pmax) is attached only for Re s > 1;
/// inside the strip the truncation is formal and the smoothed series is
/// the authoritative evaluator.
EulerProductValue eval_euler_product(const SU2Sample& sample, Complex s,
                                     int64_t pmax);

/// Smoothed partial sum  sum_{n <= 2N} Y_n cutoff(n/N) n^{-s}.
Complex eval_smoothed_series(const MultCoefficients& coeffs, Complex s,
                             int64_t N);

/// One draw of the smoothed random Dirichlet series on a grid.
HoloSample sample_on_grid(uint64_t seed, const EvalGrid& grid, int64_t N);

struct SecondMomentStat {
  std::vector<int64_t> u;
  std::vector<double> estimate;
  std::vector<double> stderr_;
};

/// Monte Carlo estimate of E |sum_{n<=u} Y_n n^{-sigma}|^2 for each u.
SecondMomentStat second_moment_stat(double sigma,
                                    const std::vector<int64_t>& u_list, int M,
                                    uint64_t seed);

/// A set of draws on a common grid; also used for serialized family
/// evaluations (method "family", weights attached).
struct Ensemble {
  EvalGrid grid;
  uint64_t seed = 0;
  int64_t n_smooth = 0;
  std::string method = "model";
  int64_t level = 0;              // family only
  std::vector<double> weights;    // family only
  std::vector<std::vector<Complex>> samples;
};

/// M independent draws, sample i seeded by derive_seed(seed, i).
Ensemble model_ensemble(uint64_t seed, int M, const EvalGrid& grid, int64_t N);

/// Shared evaluation kernel: values of sum_n z_n n^{-s} at fixed grid
/// points for many coefficient vectors z (columns).
class GridEvaluator {
 public:
  GridEvaluator(const EvalGrid& grid, int64_t nmax);
  int64_t nmax() const { return nmax_; }
  /// values(point, column) for coefficients z(n-1, column), n = 1..nmax.
  std::vector<std::vector<Complex>> apply(const std::vector<std::vector<double>>& z) const;
  std::vector<Complex> apply_one(const std::vector<double>& z) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  int64_t nmax_;
};

}  // namespace eulerprod::randmodel
