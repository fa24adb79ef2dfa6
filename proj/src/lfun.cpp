#include "eulerprod/lfun.hpp"

#include <cmath>
#include <numbers>

#include "eulerprod/parallel.hpp"

namespace eulerprod::lfun {

using hecke::Eigenform;
using hecke::FamilySnapshot;
using randmodel::EvalGrid;

Complex gamma_lanczos(Complex z) {
  // Godfrey/Press coefficients, g = 7.
  static constexpr double kCoef[9] = {
      0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
      771.32342877765313,   -176.61502916214059, 12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (z.real() < 0.5) {
    // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z).
    return std::numbers::pi /
           (std::sin(std::numbers::pi * z) * gamma_lanczos(1.0 - z));
  }
  z -= 1.0;
  Complex x = kCoef[0];
  for (int i = 1; i < 9; ++i) x += kCoef[i] / (z + static_cast<double>(i));
  Complex t = z + 7.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

int64_t default_N(int64_t q) { return std::max<int64_t>(int64_t{1} << 14, 50 * q); }

namespace {

// sum_{n <= 2N} c_n cutoff(n/N) n^{-s} with c_n = a_n (arithmetic) or
// a_n / sqrt(n) (analytic).
Complex smoothed_sum(const Eigenform& form, Complex s, int64_t N, bool analytic) {
  if (N < 1) throw std::invalid_argument("eval_L_smoothed: N must be >= 1");
  if (form.nmax < 2 * N)
    throw ComputationError("incomplete-data",
                           "smoothed evaluation needs coefficients to 2N");
  Complex sum = 0.0;
  double dN = static_cast<double>(N);
  for (int64_t n = 1; n < 2 * N; ++n) {
    double c = form.an[static_cast<size_t>(n)];
    if (c == 0.0) continue;
    double w = numkernel::cutoff_eval(static_cast<double>(n) / dN);
    if (w == 0.0) continue;
    double dn = static_cast<double>(n);
    if (analytic) c /= std::sqrt(dn);
    sum += (c * w) * std::exp(-s * std::log(dn));
  }
  return sum;
}

}  // namespace

Complex eval_L_smoothed(const Eigenform& form, Complex s, int64_t N) {
  return smoothed_sum(form, s, N, true);
}

Complex eval_L_arithmetic(const Eigenform& form, Complex s, int64_t N) {
  return smoothed_sum(form, s, N, false);
}

double reflection_check(const Eigenform& form, Complex s, int64_t N,
                        double epsilon_override) {
  if (!(s.real() >= 1.1 && s.real() <= 1.4))
    throw std::invalid_argument(
        "reflection_check: use arithmetic points with 1.1 <= Re s <= 1.4");
  double eps = epsilon_override != 0.0 ? epsilon_override : epsilon_sign(form);
  Complex lhs = eval_L_arithmetic(form, s, N);
  Complex rhs = eval_L_arithmetic(form, 2.0 - s, N);
  Complex twopi = 2.0 * std::numbers::pi;
  Complex xs = eps * std::pow(Complex(static_cast<double>(form.q)), 1.0 - s) *
               std::pow(twopi, 2.0 * s - 2.0) * gamma_lanczos(2.0 - s) /
               gamma_lanczos(s);
  return std::abs(lhs - xs * rhs);
}

std::vector<LEvaluation> family_on_grid(const FamilySnapshot& snapshot,
                                        const EvalGrid& grid, int64_t N) {
  if (snapshot.nmax < 2 * N)
    throw ComputationError("incomplete-data",
                           "family evaluation needs coefficients to 2N");
  auto pts = grid.all_points();
  std::vector<LEvaluation> out(snapshot.forms.size());

  randmodel::GridEvaluator eval(grid, 2 * N);
  double dN = static_cast<double>(N);
  double dN2 = dN / 2.0;
  std::vector<double> cut(static_cast<size_t>(2 * N)), cut2(static_cast<size_t>(2 * N));
  for (int64_t n = 1; n <= 2 * N; ++n) {
    cut[static_cast<size_t>(n - 1)] =
        numkernel::cutoff_eval(static_cast<double>(n) / dN);
    cut2[static_cast<size_t>(n - 1)] =
        n <= N ? numkernel::cutoff_eval(static_cast<double>(n) / dN2) : 0.0;
  }

  std::vector<std::vector<double>> z;
  z.reserve(2 * snapshot.forms.size());
  for (const auto& f : snapshot.forms) {
    std::vector<double> zf(static_cast<size_t>(2 * N)), zf2(static_cast<size_t>(2 * N));
    for (int64_t n = 1; n <= 2 * N; ++n) {
      double lam = f.an[static_cast<size_t>(n)] / std::sqrt(static_cast<double>(n));
      zf[static_cast<size_t>(n - 1)] = lam * cut[static_cast<size_t>(n - 1)];
      zf2[static_cast<size_t>(n - 1)] = lam * cut2[static_cast<size_t>(n - 1)];
    }
    z.push_back(std::move(zf));
    z.push_back(std::move(zf2));
  }
  auto vals = eval.apply(z);

  for (size_t i = 0; i < snapshot.forms.size(); ++i) {
    LEvaluation& ev = out[i];
    ev.form_id = snapshot.forms[i].id;
    ev.grid = grid;
    ev.n_smooth = N;
    ev.method = "smoothed(" + std::to_string(N) + ")";
    ev.values = vals[2 * i];
    ev.error_estimate.resize(pts.size());
    for (size_t j = 0; j < pts.size(); ++j)
      ev.error_estimate[j] = std::abs(vals[2 * i][j] - vals[2 * i + 1][j]);
  }
  return out;
}

randmodel::Ensemble family_ensemble(const FamilySnapshot& snapshot,
                                    const EvalGrid& grid, int64_t N) {
  auto evs = family_on_grid(snapshot, grid, N);
  randmodel::Ensemble e;
  e.grid = grid;
  e.n_smooth = N;
  e.method = "family";
  e.level = snapshot.q;
  for (const auto& f : snapshot.forms) e.weights.push_back(f.weight);
  for (auto& ev : evs) e.samples.push_back(std::move(ev.values));
  return e;
}

}  // namespace eulerprod::lfun
