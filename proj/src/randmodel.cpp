#include "eulerprod/randmodel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "eulerprod/parallel.hpp"

namespace eulerprod::randmodel {

using numkernel::PrimeTable;

namespace {

uint64_t splitmix_fin(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t mix2(uint64_t a, uint64_t b) {
  return splitmix_fin(splitmix_fin(a + 0x9e3779b97f4a7c15ULL) ^
                      splitmix_fin(b + 0x63652362d1c832a9ULL));
}

}  // namespace

SubRng::SubRng(uint64_t seed, uint64_t key) : state_(mix2(seed, key)) {}

uint64_t SubRng::next_u64() {
  uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  return splitmix_fin(z);
}

double SubRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t derive_seed(uint64_t seed, uint64_t index) {
  return mix2(seed ^ 0x5eedu, index);
}

double SU2Sample::trace_for(int64_t p) const {
  auto it = std::lower_bound(primes.begin(), primes.end(), p);
  if (it == primes.end() || *it != p)
    throw std::invalid_argument("SU2Sample: no trace for p=" + std::to_string(p));
  return traces[static_cast<size_t>(it - primes.begin())];
}

namespace {

// Sato-Tate draw: theta uniform on [0,pi] accepted with probability
// sin^2(theta), t = 2 cos(theta).
double draw_trace(SubRng& rng) {
  for (;;) {
    double theta = std::numbers::pi * rng.uniform();
    double s = std::sin(theta);
    if (rng.uniform() < s * s) return 2.0 * std::cos(theta);
  }
}

}  // namespace

SU2Sample sample_traces(uint64_t seed, int64_t bound,
                        const PrimeTable& table) {
  if (bound < 2) throw std::invalid_argument("sample_traces: bound must be >= 2");
  if (bound > table.bound)
    throw std::invalid_argument("sample_traces: bound exceeds the prime table");
  SU2Sample s;
  s.seed = seed;
  s.bound = bound;
  auto end = std::upper_bound(table.primes.begin(), table.primes.end(), bound);
  s.primes.assign(table.primes.begin(), end);
  s.traces.resize(s.primes.size());
  parallel_for(static_cast<int64_t>(s.primes.size()), [&](int64_t i) {
    SubRng rng(seed, static_cast<uint64_t>(s.primes[static_cast<size_t>(i)]));
    s.traces[static_cast<size_t>(i)] = draw_trace(rng);
  });
  return s;
}

SU2Sample sample_traces(uint64_t seed, int64_t bound) {
  return sample_traces(seed, bound, numkernel::primes_up_to(bound));
}

MultCoefficients build_coefficients(const SU2Sample& sample, int64_t nmax,
                                    const PrimeTable& table) {
  if (nmax < 1) throw std::invalid_argument("build_coefficients: nmax must be >= 1");
  if (nmax > sample.bound || nmax > table.bound)
    throw std::invalid_argument(
        "build_coefficients: nmax exceeds the sample or table bound");
  MultCoefficients c;
  c.nmax = nmax;
  c.seed = sample.seed;
  c.values.assign(static_cast<size_t>(nmax) + 1, 0.0);
  c.values[1] = 1.0;

  // Trace lookup dense in p.
  std::vector<int32_t> prime_pos(static_cast<size_t>(nmax) + 1, -1);
  for (size_t i = 0; i < sample.primes.size(); ++i) {
    int64_t p = sample.primes[i];
    if (p > nmax) break;
    prime_pos[static_cast<size_t>(p)] = static_cast<int32_t>(i);
  }

  for (int64_t n = 2; n <= nmax; ++n) {
    int64_t p = table.spf[static_cast<size_t>(n)];
    int64_t m = n;
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    double t = sample.traces[static_cast<size_t>(prime_pos[static_cast<size_t>(p)])];
    c.values[static_cast<size_t>(n)] =
        c.values[static_cast<size_t>(m)] * numkernel::chebyshev_u(e, t);
  }
  return c;
}

std::vector<Complex> EvalGrid::all_points() const {
  std::vector<Complex> pts = boundary;
  pts.insert(pts.end(), interior.begin(), interior.end());
  return pts;
}

EvalGrid make_disc_grid(Complex center, double radius, int boundary_count,
                        bool with_center) {
  if (radius <= 0) throw std::invalid_argument("make_disc_grid: radius must be > 0");
  if (boundary_count < 4)
    throw std::invalid_argument("make_disc_grid: need at least 4 boundary points");
  if (!(center.real() - radius > 0.5 && center.real() + radius < 1.0))
    throw std::invalid_argument(
        "make_disc_grid: closed disc must lie inside 1/2 < Re s < 1");
  EvalGrid g;
  g.center = center;
  g.radius = radius;
  g.boundary.resize(static_cast<size_t>(boundary_count));
  for (int j = 0; j < boundary_count; ++j) {
    double th = 2.0 * std::numbers::pi * j / boundary_count;
    g.boundary[static_cast<size_t>(j)] =
        center + radius * Complex(std::cos(th), std::sin(th));
  }
  if (with_center) g.interior.push_back(center);
  return g;
}

uint64_t grid_hash(const EvalGrid& grid) {
  uint64_t h = 1469598103934665603ULL;
  auto eat = [&h](double v) {
    uint64_t bits = std::bit_cast<uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  eat(grid.center.real());
  eat(grid.center.imag());
  eat(grid.radius);
  for (const auto& z : grid.all_points()) {
    eat(z.real());
    eat(z.imag());
  }
  return h;
}

EulerProductValue eval_euler_product(const SU2Sample& sample, Complex s,
                                     int64_t pmax) {
  if (pmax > sample.bound)
    throw std::invalid_argument("eval_euler_product: pmax exceeds sample bound");
  if (s.real() <= 0.5)
    throw std::invalid_argument("eval_euler_product: need Re s > 1/2");
  EulerProductValue out;
  Complex value = 1.0;
  for (size_t i = 0; i < sample.primes.size(); ++i) {
    int64_t p = sample.primes[i];
    if (p > pmax) break;
    Complex z = std::exp(-s * std::log(static_cast<double>(p)));
    Complex factor = 1.0 - sample.traces[i] * z + z * z;
    if (std::abs(factor) < 1e-300)
      throw ComputationError("singular-factor",
                             "local Euler factor vanished at p=" + std::to_string(p));
    value /= factor;
  }
  out.value = value;
  double sigma = s.real();
  if (sigma > 1.0 && pmax >= 3) {
    double lp = std::log(static_cast<double>(pmax));
    out.tail_bound =
        2.0 * std::pow(static_cast<double>(pmax), 1.0 - sigma) / ((sigma - 1.0) * lp);
    out.tail_is_bound = true;
  }
  return out;
}

Complex eval_smoothed_series(const MultCoefficients& coeffs, Complex s,
                             int64_t N) {
  if (N < 1) throw std::invalid_argument("eval_smoothed_series: N must be >= 1");
  if (2 * N > coeffs.nmax)
    throw std::invalid_argument("eval_smoothed_series: need nmax >= 2N");
  Complex sum = 0.0;
  double dN = static_cast<double>(N);
  for (int64_t n = 1; n < 2 * N; ++n) {
    double y = coeffs.values[static_cast<size_t>(n)];
    if (y == 0.0) continue;
    double w = numkernel::cutoff_eval(static_cast<double>(n) / dN);
    if (w == 0.0) continue;
    sum += (y * w) * std::exp(-s * std::log(static_cast<double>(n)));
  }
  return sum;
}

// ------------------------- grid evaluator -------------------------

struct GridEvaluator::Impl {
  Eigen::MatrixXd bre;  // point x n, Re n^{-s}
  Eigen::MatrixXd bim;
};

GridEvaluator::GridEvaluator(const EvalGrid& grid, int64_t nmax)
    : nmax_(nmax) {
  auto pts = grid.all_points();
  auto impl = std::make_shared<Impl>();
  impl->bre.resize(static_cast<Eigen::Index>(pts.size()), nmax);
  impl->bim.resize(static_cast<Eigen::Index>(pts.size()), nmax);
  parallel_for(static_cast<int64_t>(pts.size()), [&](int64_t i) {
    Complex s = pts[static_cast<size_t>(i)];
    for (int64_t n = 1; n <= nmax; ++n) {
      Complex v = std::exp(-s * std::log(static_cast<double>(n)));
      impl->bre(i, n - 1) = v.real();
      impl->bim(i, n - 1) = v.imag();
    }
  });
  impl_ = impl;
}

std::vector<std::vector<Complex>> GridEvaluator::apply(
    const std::vector<std::vector<double>>& z) const {
  const auto& bre = impl_->bre;
  const auto& bim = impl_->bim;
  Eigen::Index npts = bre.rows();
  Eigen::MatrixXd zm(nmax_, static_cast<Eigen::Index>(z.size()));
  for (size_t j = 0; j < z.size(); ++j) {
    if (static_cast<int64_t>(z[j].size()) != nmax_)
      throw std::invalid_argument("GridEvaluator: coefficient length mismatch");
    zm.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::VectorXd>(z[j].data(), nmax_);
  }
  Eigen::MatrixXd re = bre * zm;
  Eigen::MatrixXd im = bim * zm;
  std::vector<std::vector<Complex>> out(z.size());
  for (size_t j = 0; j < z.size(); ++j) {
    out[j].resize(static_cast<size_t>(npts));
    for (Eigen::Index i = 0; i < npts; ++i)
      out[j][static_cast<size_t>(i)] =
          Complex(re(i, static_cast<Eigen::Index>(j)), im(i, static_cast<Eigen::Index>(j)));
  }
  return out;
}

std::vector<Complex> GridEvaluator::apply_one(const std::vector<double>& z) const {
  return apply({z})[0];
}

HoloSample sample_on_grid(uint64_t seed, const EvalGrid& grid, int64_t N) {
  if (N < 1) throw std::invalid_argument("sample_on_grid: N must be >= 1");
  int64_t nmax = 2 * N;
  auto table = numkernel::primes_up_to(nmax);
  auto sample = sample_traces(seed, nmax, table);
  auto coeffs = build_coefficients(sample, nmax, table);
  HoloSample h;
  h.grid = grid;
  h.seed = seed;
  h.n_smooth = N;
  h.method = "model-smoothed";
  auto pts = grid.all_points();
  h.values.resize(pts.size());
  double dN = static_cast<double>(N);
  std::vector<double> weighted(static_cast<size_t>(nmax), 0.0);
  for (int64_t n = 1; n <= nmax; ++n)
    weighted[static_cast<size_t>(n - 1)] =
        coeffs.values[static_cast<size_t>(n)] *
        numkernel::cutoff_eval(static_cast<double>(n) / dN);
  parallel_for(static_cast<int64_t>(pts.size()), [&](int64_t i) {
    Complex s = pts[static_cast<size_t>(i)];
    Complex sum = 0.0;
    for (int64_t n = 1; n <= nmax; ++n) {
      double c = weighted[static_cast<size_t>(n - 1)];
      if (c != 0.0) sum += c * std::exp(-s * std::log(static_cast<double>(n)));
    }
    h.values[static_cast<size_t>(i)] = sum;
  });
  return h;
}

Ensemble model_ensemble(uint64_t seed, int M, const EvalGrid& grid, int64_t N) {
  if (M < 1) throw std::invalid_argument("model_ensemble: M must be >= 1");
  Ensemble e;
  e.grid = grid;
  e.seed = seed;
  e.n_smooth = N;
  e.method = "model";
  e.samples.resize(static_cast<size_t>(M));

  int64_t nmax = 2 * N;
  auto table = numkernel::primes_up_to(nmax);
  GridEvaluator eval(grid, nmax);
  double dN = static_cast<double>(N);
  std::vector<double> cut(static_cast<size_t>(nmax));
  for (int64_t n = 1; n <= nmax; ++n)
    cut[static_cast<size_t>(n - 1)] =
        numkernel::cutoff_eval(static_cast<double>(n) / dN);

  constexpr int kChunk = 32;
  int nchunks = (M + kChunk - 1) / kChunk;
  parallel_for(nchunks, [&](int64_t chunk) {
    int lo = static_cast<int>(chunk) * kChunk;
    int hi = std::min(M, lo + kChunk);
    std::vector<std::vector<double>> z;
    z.reserve(static_cast<size_t>(hi - lo));
    for (int i = lo; i < hi; ++i) {
      auto sample = sample_traces(derive_seed(seed, static_cast<uint64_t>(i)),
                                  nmax, table);
      auto coeffs = build_coefficients(sample, nmax, table);
      std::vector<double> zi(static_cast<size_t>(nmax));
      for (int64_t n = 1; n <= nmax; ++n)
        zi[static_cast<size_t>(n - 1)] =
            coeffs.values[static_cast<size_t>(n)] * cut[static_cast<size_t>(n - 1)];
      z.push_back(std::move(zi));
    }
    auto vals = eval.apply(z);
    for (int i = lo; i < hi; ++i)
      e.samples[static_cast<size_t>(i)] = std::move(vals[static_cast<size_t>(i - lo)]);
  });
  return e;
}

SecondMomentStat second_moment_stat(double sigma,
                                    const std::vector<int64_t>& u_list, int M,
                                    uint64_t seed) {
  if (!(sigma > 0.5 && sigma < 1.0))
    throw std::invalid_argument("second_moment_stat: need 1/2 < sigma < 1");
  if (u_list.empty() || M < 2)
    throw std::invalid_argument("second_moment_stat: need u values and M >= 2");
  SecondMomentStat st;
  st.u = u_list;
  std::sort(st.u.begin(), st.u.end());
  int64_t umax = st.u.back();
  auto table = numkernel::primes_up_to(std::max<int64_t>(umax, 2));
  std::vector<double> npow(static_cast<size_t>(umax) + 1, 0.0);
  for (int64_t n = 1; n <= umax; ++n)
    npow[static_cast<size_t>(n)] = std::pow(static_cast<double>(n), -sigma);

  std::vector<std::vector<double>> sq(st.u.size(),
                                      std::vector<double>(static_cast<size_t>(M)));
  parallel_for(M, [&](int64_t i) {
    auto sample =
        sample_traces(derive_seed(seed, static_cast<uint64_t>(i)), std::max<int64_t>(umax, 2), table);
    auto coeffs = build_coefficients(sample, umax, table);
    double sum = 0.0;
    size_t next = 0;
    for (int64_t n = 1; n <= umax; ++n) {
      sum += coeffs.values[static_cast<size_t>(n)] * npow[static_cast<size_t>(n)];
      while (next < st.u.size() && st.u[next] == n) {
        sq[next][static_cast<size_t>(i)] = sum * sum;
        ++next;
      }
    }
  });
  for (size_t k = 0; k < st.u.size(); ++k) {
    double mean = 0.0;
    for (double v : sq[k]) mean += v;
    mean /= M;
    double var = 0.0;
    for (double v : sq[k]) var += (v - mean) * (v - mean);
    var /= (M - 1);
    st.estimate.push_back(mean);
    st.stderr_.push_back(std::sqrt(var / M));
  }
  return st;
}

}  // namespace eulerprod::randmodel
