#include "eulerprod/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eulerprod/parallel.hpp"

namespace eulerprod::experiments {

using hecke::FamilySnapshot;

double sato_tate_cdf(double t) {
  if (t <= -2.0) return 0.0;
  if (t >= 2.0) return 1.0;
  return 0.5 + t * std::sqrt(4.0 - t * t) / (4.0 * std::numbers::pi) +
         std::asin(t / 2.0) / std::numbers::pi;
}

double catalan_number(int m) {
  double c = 1.0;
  for (int k = 0; k < m; ++k)
    c = c * 2.0 * (2.0 * k + 1.0) / (k + 2.0);
  return c;
}

namespace {

void normalize_weights(std::vector<WeightedValue>& v) {
  double total = 0;
  for (const auto& a : v) total += a.w;
  if (total <= 0) throw std::invalid_argument("KS: weights must have positive mass");
  for (auto& a : v) a.w /= total;
}

}  // namespace

double ks_vs_cdf(std::vector<WeightedValue> sample,
                 const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("KS: empty sample");
  normalize_weights(sample);
  std::sort(sample.begin(), sample.end(),
            [](const WeightedValue& a, const WeightedValue& b) { return a.x < b.x; });
  double cum = 0, d = 0;
  size_t i = 0;
  while (i < sample.size()) {
    double x = sample[i].x;
    double before = cum;
    while (i < sample.size() && sample[i].x == x) cum += sample[i++].w;
    double f = cdf(x);
    d = std::max({d, std::abs(before - f), std::abs(cum - f)});
  }
  return d;
}

double ks_two_sample(std::vector<WeightedValue> a, std::vector<WeightedValue> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("KS: empty sample");
  normalize_weights(a);
  normalize_weights(b);
  auto lt = [](const WeightedValue& x, const WeightedValue& y) { return x.x < y.x; };
  std::sort(a.begin(), a.end(), lt);
  std::sort(b.begin(), b.end(), lt);
  double ca = 0, cb = 0, d = 0;
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    double x = (i < a.size() && (j >= b.size() || a[i].x <= b[j].x)) ? a[i].x : b[j].x;
    while (i < a.size() && a[i].x == x) ca += a[i++].w;
    while (j < b.size() && b[j].x == x) cb += b[j++].w;
    d = std::max(d, std::abs(ca - cb));
  }
  return d;
}

double ks_two_sample_quantile(double alpha, int64_t n, int64_t m) {
  double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  return c * std::sqrt(static_cast<double>(n + m) /
                       (static_cast<double>(n) * static_cast<double>(m)));
}

double sato_tate_test(const FamilySnapshot& snapshot, int64_t p) {
  if (p == snapshot.q)
    throw std::invalid_argument("sato_tate_test: p must differ from the level");
  if (p > snapshot.nmax)
    throw std::invalid_argument("sato_tate_test: p beyond the coefficient horizon");
  std::vector<WeightedValue> sample;
  for (const auto& f : snapshot.forms)
    sample.push_back({f.lambda(p), f.weight});
  return ks_vs_cdf(std::move(sample), sato_tate_cdf);
}

JointMomentResult joint_moment_test(const FamilySnapshot& snapshot,
                                    const std::vector<int64_t>& primes,
                                    const std::vector<int>& exponents) {
  if (primes.size() != exponents.size() || primes.empty())
    throw std::invalid_argument("joint_moment_test: primes/exponents mismatch");
  for (size_t i = 0; i < primes.size(); ++i) {
    if (primes[i] == snapshot.q || primes[i] > snapshot.nmax)
      throw std::invalid_argument("joint_moment_test: bad prime");
    for (size_t j = i + 1; j < primes.size(); ++j)
      if (primes[i] == primes[j])
        throw std::invalid_argument("joint_moment_test: primes must be distinct");
  }
  JointMomentResult r;
  double fam = 0;
  for (const auto& f : snapshot.forms) {
    double prod = 1;
    for (size_t i = 0; i < primes.size(); ++i)
      prod *= std::pow(f.lambda(primes[i]), exponents[i]);
    fam += f.weight * prod;
  }
  double model = 1;
  for (int k : exponents) {
    if (k < 0) throw std::invalid_argument("joint_moment_test: negative exponent");
    model *= (k % 2 == 1) ? 0.0 : catalan_number(k / 2);
  }
  r.family_moment = fam;
  r.model_moment = model;
  r.gap = std::abs(fam - model);
  return r;
}

// ------------------------- targets -------------------------

std::vector<Complex> TargetFunction::values_on(const EvalGrid& grid) const {
  auto pts = grid.all_points();
  std::vector<Complex> out(pts.size());
  switch (kind) {
    case Kind::kConstant:
      std::fill(out.begin(), out.end(), Complex(constant, 0.0));
      break;
    case Kind::kPolynomial:
      for (size_t i = 0; i < pts.size(); ++i) {
        Complex z = pts[i] - domain.center, acc = 0.0;
        for (size_t k = poly.size(); k-- > 0;) acc = acc * z + poly[k];
        out[i] = acc;
      }
      break;
    case Kind::kTabulated:
      if (randmodel::grid_hash(grid) != randmodel::grid_hash(domain))
        throw std::invalid_argument(
            "TargetFunction: tabulated target only evaluates on its own grid");
      out = tabulated;
      break;
  }
  return out;
}

bool TargetFunction::admissible(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (std::abs(domain.center.imag()) > 1e-12)
    return fail("domain is not centered on the real axis");
  double x0 = domain.center.real();

  if (kind == Kind::kTabulated) {
    // Real structure: conjugate boundary points carry conjugate values.
    size_t k = domain.boundary.size();
    for (size_t j = 0; j < k; ++j) {
      size_t jc = (k - j) % k;
      Complex a = tabulated[j], b = tabulated[jc];
      if (std::abs(a - std::conj(b)) > 1e-8 * (1.0 + std::abs(a)))
        return fail("values at conjugate points are not conjugate");
    }
    // Positivity on the grid points that lie on the real diameter.
    bool found = false;
    auto pts = domain.all_points();
    for (size_t j = 0; j < pts.size(); ++j) {
      if (std::abs(pts[j].imag()) > 1e-12) continue;
      found = true;
      if (!(tabulated[j].real() > 0) || std::abs(tabulated[j].imag()) > 1e-10)
        return fail("non-positivity on D cap R at Re s = " +
                    std::to_string(pts[j].real()));
    }
    if (!found) return fail("no real-diameter sample points in the grid");
    return true;
  }

  // Constants and real-coefficient polynomials are conjugation equivariant;
  // sample the diameter densely for positivity.
  constexpr int kSamples = 129;
  for (int i = 0; i < kSamples; ++i) {
    double x = x0 - domain.radius +
               2.0 * domain.radius * static_cast<double>(i) / (kSamples - 1);
    double v;
    if (kind == Kind::kConstant) {
      v = constant;
    } else {
      double z = x - x0, acc = 0.0;
      for (size_t k = poly.size(); k-- > 0;) acc = acc * z + poly[k];
      v = acc;
    }
    if (!(v > 0))
      return fail("non-positivity on D cap R at Re s = " + std::to_string(x));
  }
  return true;
}

TargetFunction make_constant_target(double value, const EvalGrid& domain) {
  TargetFunction t;
  t.kind = TargetFunction::Kind::kConstant;
  t.domain = domain;
  t.constant = value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "const:%.17g", value);
  t.desc = buf;
  return t;
}

TargetFunction make_poly_target(const std::vector<double>& coeffs,
                                const EvalGrid& domain) {
  if (coeffs.empty()) throw std::invalid_argument("poly target: no coefficients");
  TargetFunction t;
  t.kind = TargetFunction::Kind::kPolynomial;
  t.domain = domain;
  t.poly = coeffs;
  t.desc = "poly:";
  for (size_t i = 0; i < coeffs.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", coeffs[i]);
    t.desc += buf;
  }
  return t;
}

TargetFunction make_tabulated_target(const EvalGrid& domain,
                                     std::vector<Complex> values,
                                     std::string desc) {
  if (values.size() != domain.point_count())
    throw std::invalid_argument("tabulated target: value count mismatch");
  TargetFunction t;
  t.kind = TargetFunction::Kind::kTabulated;
  t.domain = domain;
  t.tabulated = std::move(values);
  t.desc = std::move(desc);
  return t;
}

// ------------------------- distribution comparison -------------------------

namespace {

double safe_log_abs(Complex z) {
  double a = std::abs(z);
  return a > 0 ? std::log(a) : -745.0;
}

PointDistances point_distances(const std::vector<Complex>& fam,
                               const std::vector<double>& fw,
                               const std::vector<Complex>& mod) {
  auto marginal = [&](auto proj) {
    std::vector<WeightedValue> a, b;
    a.reserve(fam.size());
    b.reserve(mod.size());
    for (size_t i = 0; i < fam.size(); ++i) a.push_back({proj(fam[i]), fw[i]});
    for (const auto& z : mod) b.push_back({proj(z), 1.0});
    return ks_two_sample(std::move(a), std::move(b));
  };
  PointDistances d;
  d.ks_re = marginal([](Complex z) { return z.real(); });
  d.ks_im = marginal([](Complex z) { return z.imag(); });
  d.ks_logabs = marginal([](Complex z) { return safe_log_abs(z); });
  return d;
}

}  // namespace

ComparisonReport bagchi_compare(const Ensemble& family, const Ensemble& model) {
  if (randmodel::grid_hash(family.grid) != randmodel::grid_hash(model.grid))
    throw std::invalid_argument("bagchi_compare: ensembles use different grids");
  if (family.samples.empty() || model.samples.empty())
    throw std::invalid_argument("bagchi_compare: empty ensemble");

  ComparisonReport rep;
  rep.points = family.grid.all_points();
  rep.level = family.level;
  rep.model_seed = model.seed;
  rep.family_n = family.n_smooth;
  rep.model_n = model.n_smooth;
  rep.family_size = family.samples.size();
  rep.model_size = model.samples.size();
  rep.grid_hash_value = randmodel::grid_hash(family.grid);

  size_t npts = rep.points.size();
  std::vector<double> wh = family.weights;
  if (wh.empty()) wh.assign(family.samples.size(), 1.0);
  if (wh.size() != family.samples.size())
    throw std::invalid_argument("bagchi_compare: weight count mismatch");
  std::vector<double> wn(family.samples.size(), 1.0);

  rep.harmonic.resize(npts);
  rep.natural.resize(npts);
  parallel_for(static_cast<int64_t>(npts), [&](int64_t i) {
    std::vector<Complex> fam(family.samples.size()), mod(model.samples.size());
    for (size_t f = 0; f < family.samples.size(); ++f)
      fam[f] = family.samples[f][static_cast<size_t>(i)];
    for (size_t m = 0; m < model.samples.size(); ++m)
      mod[m] = model.samples[m][static_cast<size_t>(i)];
    rep.harmonic[static_cast<size_t>(i)] = point_distances(fam, wh, mod);
    rep.natural[static_cast<size_t>(i)] = point_distances(fam, wn, mod);
  });

  double ah = 0, an = 0;
  for (size_t i = 0; i < npts; ++i) {
    ah += rep.harmonic[i].ks_re + rep.harmonic[i].ks_im + rep.harmonic[i].ks_logabs;
    an += rep.natural[i].ks_re + rep.natural[i].ks_im + rep.natural[i].ks_logabs;
  }
  rep.aggregate_harmonic = ah / (3.0 * static_cast<double>(npts));
  rep.aggregate_natural = an / (3.0 * static_cast<double>(npts));
  return rep;
}

UniversalityResult universality_count(const Ensemble& family,
                                      const TargetFunction& target, double eps) {
  std::string why;
  if (!target.admissible(&why))
    throw std::invalid_argument("universality_count: inadmissible target: " + why);
  if (eps < 0) throw std::invalid_argument("universality_count: eps must be >= 0");
  auto tv = target.values_on(family.grid);
  UniversalityResult r;
  r.eps = eps;
  r.family_size = static_cast<int64_t>(family.samples.size());
  std::vector<double> wh = family.weights;
  if (wh.empty()) wh.assign(family.samples.size(), 1.0);
  double wtotal = 0;
  for (double w : wh) wtotal += w;
  for (size_t f = 0; f < family.samples.size(); ++f) {
    double sup = 0;
    for (size_t i = 0; i < tv.size(); ++i)
      sup = std::max(sup, std::abs(family.samples[f][i] - tv[i]));
    if (sup < eps) {
      r.count++;
      r.harmonic_fraction += wh[f] / wtotal;
    }
  }
  r.natural_fraction =
      static_cast<double>(r.count) / static_cast<double>(r.family_size);
  return r;
}

SupportProbability model_support_probability(const TargetFunction& target,
                                             double eps, int M, uint64_t seed,
                                             int64_t N) {
  if (M < 1) throw std::invalid_argument("model_support_probability: M >= 1");
  auto ens = randmodel::model_ensemble(seed, M, target.domain, N);
  auto tv = target.values_on(target.domain);
  SupportProbability out;
  out.samples = M;
  for (const auto& sample : ens.samples) {
    double sup = 0;
    for (size_t i = 0; i < tv.size(); ++i)
      sup = std::max(sup, std::abs(sample[i] - tv[i]));
    if (sup < eps) out.hits++;
  }
  double p = static_cast<double>(out.hits) / M;
  out.estimate = p;
  out.stderr_ = std::sqrt(p * (1.0 - p) / M);
  return out;
}

SupportApproxTrace greedy_support_approx(const TargetFunction& target,
                                         int64_t pmax, int64_t n0) {
  std::string why;
  if (!target.admissible(&why))
    throw std::invalid_argument("greedy_support_approx: inadmissible target: " + why);
  if (pmax < n0 || pmax < 2)
    throw std::invalid_argument("greedy_support_approx: need pmax >= n0 and >= 2");

  const EvalGrid& grid = target.domain;
  auto tv = target.values_on(grid);
  size_t kb = grid.boundary.size();

  // log(target) on the boundary: principal branch at the rightmost real
  // point, extended by continuity around the circle.
  std::vector<Complex> psi(kb);
  {
    std::vector<double> phase(kb);
    double prev = std::arg(tv[0]);
    phase[0] = prev;
    for (size_t j = 1; j < kb; ++j) {
      double raw = std::arg(tv[j]);
      double d = raw - prev;
      while (d > std::numbers::pi) d -= 2.0 * std::numbers::pi;
      while (d < -std::numbers::pi) d += 2.0 * std::numbers::pi;
      phase[j] = prev + d;
      prev = phase[j];
    }
    double wrap = std::arg(tv[0]) - prev;
    while (wrap > std::numbers::pi) wrap -= 2.0 * std::numbers::pi;
    while (wrap < -std::numbers::pi) wrap += 2.0 * std::numbers::pi;
    if (std::abs(prev + wrap - phase[0]) > 1e-6)
      throw ComputationError("branch",
                             "target winds around zero on the boundary grid");
    for (size_t j = 0; j < kb; ++j) {
      double a = std::abs(tv[j]);
      if (a <= 0)
        throw ComputationError("branch", "target vanishes on the boundary grid");
      psi[j] = Complex(std::log(a), phase[j]);
    }
  }

  auto table = numkernel::primes_up_to(std::max<int64_t>(pmax, 2));
  SupportApproxTrace tr;
  tr.target_desc = target.desc;

  // psi_1 = psi - 2 sum_{p <= n0} p^{-s}: the forced identity matrices at
  // small primes are absorbed into the target before the greedy phase.
  std::vector<Complex> resid = psi;
  std::vector<std::vector<Complex>> basis;  // p^{-s} on the boundary, per prime
  for (int64_t p : table.primes) {
    if (p > pmax) break;
    std::vector<Complex> e(kb);
    for (size_t j = 0; j < kb; ++j)
      e[j] = std::exp(-grid.boundary[j] * std::log(static_cast<double>(p)));
    if (p <= n0) {
      for (size_t j = 0; j < kb; ++j) resid[j] -= 2.0 * e[j];
      tr.primes.push_back(p);
      tr.theta.push_back(0.0);
      tr.residual.push_back(0.0);  // filled below with the initial residual
    } else {
      basis.push_back(std::move(e));
      tr.primes.push_back(p);
      tr.theta.push_back(0.0);
      tr.residual.push_back(0.0);
    }
  }
  auto sup_of = [&](const std::vector<Complex>& v) {
    double s = 0;
    for (const auto& z : v) s = std::max(s, std::abs(z));
    return s;
  };
  tr.initial_residual = sup_of(resid);
  size_t forced = tr.primes.size() - basis.size();
  for (size_t i = 0; i < forced; ++i) tr.residual[i] = tr.initial_residual;

  double current = tr.initial_residual;
  std::vector<Complex> trial(kb);
  for (size_t bi = 0; bi < basis.size(); ++bi) {
    const auto& e = basis[bi];
    auto eval_theta = [&](double theta) {
      double c = 2.0 * std::cos(theta);
      double s = 0;
      for (size_t j = 0; j < kb; ++j)
        s = std::max(s, std::abs(resid[j] - c * e[j]));
      return s;
    };
    // 64-interval grid on [0, pi]; pi/2 sits on the grid, so the best trial
    // never exceeds the current residual. Two local refinements.
    double best_theta = std::numbers::pi / 2.0, best = current;
    double lo = 0.0, hi = std::numbers::pi;
    int npts = 65;
    for (int round = 0; round < 3; ++round) {
      double step = (hi - lo) / (npts - 1);
      for (int k = 0; k < npts; ++k) {
        double th = lo + step * k;
        double v = eval_theta(th);
        if (v < best) {
          best = v;
          best_theta = th;
        }
      }
      lo = std::max(0.0, best_theta - step);
      hi = std::min(std::numbers::pi, best_theta + step);
      npts = 17;
    }
    if (best <= current) {
      double c = 2.0 * std::cos(best_theta);
      for (size_t j = 0; j < kb; ++j) resid[j] -= c * e[j];
      current = best;
      tr.theta[forced + bi] = best_theta;
    } else {
      tr.theta[forced + bi] = std::numbers::pi / 2.0;  // contributes nothing
    }
    tr.residual[forced + bi] = current;
  }

  // Tail estimate for the forced part of -log det beyond pmax:
  // |g_p| <= ~3.3 p^{-2 sigma} for p >= 1000, summed by integral comparison.
  double sigma_min = 1.0;
  for (const auto& s : grid.boundary) sigma_min = std::min(sigma_min, s.real());
  double lp = std::log(static_cast<double>(pmax));
  tr.tail_bound = 3.3 *
                  std::pow(static_cast<double>(pmax), 1.0 - 2.0 * sigma_min) /
                  ((2.0 * sigma_min - 1.0) * lp);
  return tr;
}

// ------------------------- smoothing decay -------------------------

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0, den = 0;
  for (size_t i = 0; i < n; ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

void check_decay_args(const std::vector<int64_t>& n_list, int64_t n_ref) {
  if (n_list.empty()) throw std::invalid_argument("smoothing decay: empty N list");
  for (size_t i = 0; i + 1 < n_list.size(); ++i)
    if (n_list[i] >= n_list[i + 1])
      throw std::invalid_argument("smoothing decay: N list must be ascending");
  if (n_ref < 4 * n_list.back())
    throw std::invalid_argument("smoothing decay: N_ref must be >= 4 max(N)");
}

std::vector<double> cutoff_gap(int64_t n, int64_t n_ref, int64_t nmax) {
  std::vector<double> w(static_cast<size_t>(nmax));
  for (int64_t k = 1; k <= nmax; ++k)
    w[static_cast<size_t>(k - 1)] =
        numkernel::cutoff_eval(static_cast<double>(k) / static_cast<double>(n_ref)) -
        numkernel::cutoff_eval(static_cast<double>(k) / static_cast<double>(n));
  return w;
}

DecayTable finish_decay(const std::vector<int64_t>& n_list, int64_t n_ref,
                        std::vector<double> mean_gap) {
  DecayTable t;
  t.n_list = n_list;
  t.n_ref = n_ref;
  t.mean_gap = std::move(mean_gap);
  std::vector<double> lx, ly;
  for (size_t i = 0; i < n_list.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(n_list[i])));
    ly.push_back(std::log(std::max(t.mean_gap[i], 1e-300)));
  }
  t.slope = fit_slope(lx, ly);
  return t;
}

}  // namespace

DecayTable smoothing_decay_model(uint64_t seed, int M, const EvalGrid& grid,
                                 const std::vector<int64_t>& n_list,
                                 int64_t n_ref) {
  check_decay_args(n_list, n_ref);
  if (M < 1) throw std::invalid_argument("smoothing decay: M >= 1");
  int64_t nmax = 2 * n_ref;
  auto table = numkernel::primes_up_to(nmax);
  randmodel::GridEvaluator eval(grid, nmax);
  std::vector<std::vector<double>> gaps;
  for (int64_t n : n_list) gaps.push_back(cutoff_gap(n, n_ref, nmax));

  size_t kb = grid.boundary.size();
  std::vector<double> mean(n_list.size(), 0.0);
  std::vector<std::vector<double>> sup(n_list.size(),
                                       std::vector<double>(static_cast<size_t>(M)));
  constexpr int kChunk = 16;
  int nchunks = (M + kChunk - 1) / kChunk;
  parallel_for(nchunks, [&](int64_t chunk) {
    int lo = static_cast<int>(chunk) * kChunk;
    int hi = std::min(M, lo + kChunk);
    std::vector<std::vector<double>> z;
    for (int i = lo; i < hi; ++i) {
      auto sample = randmodel::sample_traces(
          randmodel::derive_seed(seed, static_cast<uint64_t>(i)), nmax, table);
      auto coeffs = randmodel::build_coefficients(sample, nmax, table);
      for (size_t gi = 0; gi < gaps.size(); ++gi) {
        std::vector<double> zi(static_cast<size_t>(nmax));
        for (int64_t k = 1; k <= nmax; ++k)
          zi[static_cast<size_t>(k - 1)] =
              coeffs.values[static_cast<size_t>(k)] * gaps[gi][static_cast<size_t>(k - 1)];
        z.push_back(std::move(zi));
      }
    }
    auto vals = eval.apply(z);
    for (int i = lo; i < hi; ++i) {
      for (size_t gi = 0; gi < gaps.size(); ++gi) {
        const auto& v = vals[static_cast<size_t>(i - lo) * gaps.size() + gi];
        double s = 0;
        for (size_t j = 0; j < kb; ++j) s = std::max(s, std::abs(v[j]));
        sup[gi][static_cast<size_t>(i)] = s;
      }
    }
  });
  for (size_t gi = 0; gi < n_list.size(); ++gi) {
    for (int i = 0; i < M; ++i) mean[gi] += sup[gi][static_cast<size_t>(i)];
    mean[gi] /= M;
  }
  return finish_decay(n_list, n_ref, std::move(mean));
}

DecayTable smoothing_decay_family(const FamilySnapshot& snapshot,
                                  const EvalGrid& grid,
                                  const std::vector<int64_t>& n_list,
                                  int64_t n_ref) {
  check_decay_args(n_list, n_ref);
  int64_t nmax = 2 * n_ref;
  if (snapshot.nmax < nmax)
    throw ComputationError("incomplete-data",
                           "family decay needs coefficients to 2 N_ref");
  randmodel::GridEvaluator eval(grid, nmax);
  size_t kb = grid.boundary.size();
  std::vector<double> mean(n_list.size(), 0.0);
  for (size_t gi = 0; gi < n_list.size(); ++gi) {
    auto gap = cutoff_gap(n_list[gi], n_ref, nmax);
    std::vector<std::vector<double>> z;
    for (const auto& f : snapshot.forms) {
      std::vector<double> zi(static_cast<size_t>(nmax));
      for (int64_t k = 1; k <= nmax; ++k)
        zi[static_cast<size_t>(k - 1)] =
            f.lambda(k) * gap[static_cast<size_t>(k - 1)];
      z.push_back(std::move(zi));
    }
    auto vals = eval.apply(z);
    double acc = 0;
    for (size_t fi = 0; fi < snapshot.forms.size(); ++fi) {
      double s = 0;
      for (size_t j = 0; j < kb; ++j) s = std::max(s, std::abs(vals[fi][j]));
      acc += snapshot.forms[fi].weight * s;
    }
    mean[gi] = acc;
  }
  return finish_decay(n_list, n_ref, std::move(mean));
}

GrowthTable moment_growth_test(const FamilySnapshot& snapshot, double sigma,
                               const std::vector<double>& t_list, int M,
                               uint64_t seed, int64_t N) {
  if (sigma < 0.55)
    throw std::invalid_argument("moment_growth_test: need sigma >= 0.55");
  if (t_list.empty()) throw std::invalid_argument("moment_growth_test: empty t list");
  GrowthTable out;
  out.t_list = t_list;

  // Evaluation points assembled directly; this is not a disc grid.
  EvalGrid line;
  line.center = Complex(sigma, 0.0);
  line.radius = 0.0;
  for (double t : t_list) line.boundary.push_back(Complex(sigma, t));

  int64_t nfam = std::min<int64_t>(N, snapshot.nmax / 2);
  if (nfam < 1)
    throw ComputationError("incomplete-data", "family horizon too small");
  {
    randmodel::GridEvaluator eval(line, 2 * nfam);
    std::vector<std::vector<double>> z;
    for (const auto& f : snapshot.forms) {
      std::vector<double> zi(static_cast<size_t>(2 * nfam));
      for (int64_t k = 1; k <= 2 * nfam; ++k)
        zi[static_cast<size_t>(k - 1)] =
            f.lambda(k) * numkernel::cutoff_eval(static_cast<double>(k) /
                                                 static_cast<double>(nfam));
      z.push_back(std::move(zi));
    }
    auto vals = eval.apply(z);
    out.family_mean.assign(t_list.size(), 0.0);
    for (size_t fi = 0; fi < snapshot.forms.size(); ++fi)
      for (size_t j = 0; j < t_list.size(); ++j)
        out.family_mean[j] += snapshot.forms[fi].weight * std::abs(vals[fi][j]);
  }

  {
    int64_t nmax = 2 * N;
    auto table = numkernel::primes_up_to(nmax);
    randmodel::GridEvaluator eval(line, nmax);
    std::vector<double> cut(static_cast<size_t>(nmax));
    for (int64_t k = 1; k <= nmax; ++k)
      cut[static_cast<size_t>(k - 1)] =
          numkernel::cutoff_eval(static_cast<double>(k) / static_cast<double>(N));
    out.model_mean.assign(t_list.size(), 0.0);
    constexpr int kChunk = 16;
    int nchunks = (M + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> abs_vals(static_cast<size_t>(M));
    parallel_for(nchunks, [&](int64_t chunk) {
      int lo = static_cast<int>(chunk) * kChunk;
      int hi = std::min(M, lo + kChunk);
      std::vector<std::vector<double>> z;
      for (int i = lo; i < hi; ++i) {
        auto sample = randmodel::sample_traces(
            randmodel::derive_seed(seed, static_cast<uint64_t>(i)), nmax, table);
        auto coeffs = randmodel::build_coefficients(sample, nmax, table);
        std::vector<double> zi(static_cast<size_t>(nmax));
        for (int64_t k = 1; k <= nmax; ++k)
          zi[static_cast<size_t>(k - 1)] =
              coeffs.values[static_cast<size_t>(k)] * cut[static_cast<size_t>(k - 1)];
        z.push_back(std::move(zi));
      }
      auto vals = eval.apply(z);
      for (int i = lo; i < hi; ++i) {
        auto& row = abs_vals[static_cast<size_t>(i)];
        row.resize(t_list.size());
        for (size_t j = 0; j < t_list.size(); ++j)
          row[j] = std::abs(vals[static_cast<size_t>(i - lo)][j]);
      }
    });
    for (int i = 0; i < M; ++i)
      for (size_t j = 0; j < t_list.size(); ++j)
        out.model_mean[j] += abs_vals[static_cast<size_t>(i)][j];
    for (size_t j = 0; j < t_list.size(); ++j) out.model_mean[j] /= M;
  }

  std::vector<double> lx, lyf, lym;
  for (size_t j = 0; j < t_list.size(); ++j) {
    lx.push_back(std::log1p(std::abs(t_list[j])));
    lyf.push_back(std::log(std::max(out.family_mean[j], 1e-300)));
    lym.push_back(std::log(std::max(out.model_mean[j], 1e-300)));
  }
  out.family_exponent = fit_slope(lx, lyf);
  out.model_exponent = fit_slope(lx, lym);
  return out;
}

}  // namespace eulerprod::experiments
