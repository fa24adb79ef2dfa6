#include "eulerprod/hecke.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "eulerprod/parallel.hpp"
#include "eulerprod/randmodel.hpp"
#include "json.hpp"
#include "modsym_internal.hpp"

namespace eulerprod::hecke {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using numkernel::PrimeTable;

double default_weight_horizon(int64_t q) {
  return 30.0 * std::sqrt(static_cast<double>(q)) * std::log(static_cast<double>(q));
}

namespace {

// Joint spectral data of the commuting Hecke action on the star-plus part
// of the cuspidal subspace.
struct Spectra {
  std::vector<int64_t> mix_primes;
  Eigen::MatrixXd plus;     // dim x g
  Eigen::MatrixXd vr, wl;   // right eigenvectors / left functionals (g x g)
  Eigen::MatrixXd wtilde;   // g x dim: kills the minus and Eisenstein parts
  std::vector<double> wq;   // Fricke eigenvalue per eigensystem
  Eigen::MatrixXd small_ap;  // mix_primes.size() x g
};

Eigen::MatrixXd kernel_of(const Eigen::MatrixXd& m, double threshold) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(threshold);
  Eigen::MatrixXd k = lu.kernel();
  if (k.cols() == 1 && k.cwiseAbs().maxCoeff() == 0.0)
    return Eigen::MatrixXd::Zero(m.cols(), 0);
  return k;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return m;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

Spectra compute_spectra(const ModSymSpace& sp) {
  const int g = sp.genus;
  if (g == 0) throw ComputationError("empty-family", "genus zero level");
  const int dim = sp.dim;
  if (dim != 2 * g + 1)
    throw ComputationError("inconsistency", "quotient dimension is not 2g+1");

  Spectra out;
  // Star eigenspaces inside the cuspidal part.
  Eigen::MatrixXd sc = sp.cuspidal.transpose() * sp.star * sp.cuspidal;
  Eigen::MatrixXd id2g = Eigen::MatrixXd::Identity(2 * g, 2 * g);
  Eigen::MatrixXd kplus = kernel_of(sc - id2g, 1e-8);
  Eigen::MatrixXd kminus = kernel_of(sc + id2g, 1e-8);
  if (kplus.cols() != g || kminus.cols() != g)
    throw ComputationError("inconsistency", "star eigenspaces have wrong size");
  out.plus = orthonormalize(sp.cuspidal * kplus);
  Eigen::MatrixXd minus = orthonormalize(sp.cuspidal * kminus);

  for (int64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23}) {
    if (p == sp.q) continue;
    out.mix_primes.push_back(p);
    if (out.mix_primes.size() == 6) break;
  }
  std::vector<Eigen::MatrixXd> tfull, tplus;
  for (int64_t p : out.mix_primes) {
    tfull.push_back(hecke_operator_full(sp, p));
    tplus.push_back(out.plus.transpose() * tfull.back() * out.plus);
  }

  // Random positive mix; retried if the mixed spectrum is too clustered.
  Eigen::MatrixXd aplus, afull;
  double lam_eis = 0;
  bool ok = false;
  for (int attempt = 0; attempt < 5 && !ok; ++attempt) {
    randmodel::SubRng rng(0x5eedbeef, static_cast<uint64_t>(attempt));
    std::vector<double> c(out.mix_primes.size());
    for (auto& ci : c) ci = 0.5 + rng.uniform();
    aplus = Eigen::MatrixXd::Zero(g, g);
    afull = Eigen::MatrixXd::Zero(dim, dim);
    lam_eis = 0;
    for (size_t i = 0; i < c.size(); ++i) {
      aplus += c[i] * tplus[i];
      afull += c[i] * tfull[i];
      lam_eis += c[i] * static_cast<double>(out.mix_primes[i] + 1);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(aplus);
    std::vector<double> ev(static_cast<size_t>(g));
    bool real_ok = true;
    for (int j = 0; j < g; ++j) {
      if (std::abs(es.eigenvalues()[j].imag()) > 1e-8) real_ok = false;
      ev[static_cast<size_t>(j)] = es.eigenvalues()[j].real();
    }
    std::sort(ev.begin(), ev.end());
    double gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j + 1 < g; ++j) gap = std::min(gap, ev[j + 1] - ev[j]);
    if (!real_ok || (g > 1 && gap < 1e-6)) continue;

    out.vr.resize(g, g);
    std::vector<int> order(static_cast<size_t>(g));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return es.eigenvalues()[a].real() < es.eigenvalues()[b].real();
    });
    for (int j = 0; j < g; ++j)
      out.vr.col(j) = es.eigenvectors().col(order[static_cast<size_t>(j)]).real();
    ok = true;
  }
  if (!ok)
    throw ComputationError("degenerate-eigenspace",
                           "eigenvalue clustering unresolved after 5 mixes");
  out.wl = out.vr.inverse();

  // Eisenstein direction: the eigenvector of the mixed operator on the full
  // quotient with eigenvalue sum_i c_i (p_i + 1).
  Eigen::EigenSolver<Eigen::MatrixXd> esf(afull);
  int best = 0;
  double bestdist = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dim; ++j) {
    double dist = std::abs(esf.eigenvalues()[j] - std::complex<double>(lam_eis, 0));
    if (dist < bestdist) {
      bestdist = dist;
      best = j;
    }
  }
  Eigen::VectorXd eis = esf.eigenvectors().col(best).real();
  if (eis.norm() == 0)
    throw ComputationError("inconsistency", "no Eisenstein direction found");
  eis.normalize();

  Eigen::MatrixXd m(dim, dim);
  m.leftCols(g) = out.plus;
  m.middleCols(g, g) = minus;
  m.col(2 * g) = eis;
  Eigen::MatrixXd pi = m.inverse().topRows(g);
  out.wtilde = out.wl * pi;

  // Eigenvalues of the mixing primes and of the Fricke involution.
  out.small_ap.resize(static_cast<Eigen::Index>(out.mix_primes.size()), g);
  for (size_t i = 0; i < out.mix_primes.size(); ++i) {
    Eigen::MatrixXd d = out.wl * tplus[i] * out.vr;
    for (int j = 0; j < g; ++j) out.small_ap(static_cast<Eigen::Index>(i), j) = d(j, j);
  }
  Eigen::MatrixXd fplus = out.plus.transpose() * sp.fricke * out.plus;
  Eigen::MatrixXd fd = out.wl * fplus * out.vr;
  out.wq.resize(static_cast<size_t>(g));
  for (int j = 0; j < g; ++j) {
    double w = fd(j, j);
    if (std::abs(std::abs(w) - 1.0) > 1e-4)
      throw ComputationError("inconsistency",
                             "Fricke eigenvalue is not +-1: " + std::to_string(w));
    out.wq[static_cast<size_t>(j)] = w > 0 ? 1.0 : -1.0;
  }
  return out;
}

// Composite coefficients from prime ones: Hecke recursion on prime powers,
// multiplicativity across coprime parts.
void fill_composites(std::vector<double>& an, int64_t q, int64_t nmax,
                     const PrimeTable& table) {
  an[1] = 1.0;
  for (int64_t p : table.primes) {
    if (p > nmax) break;
    double ap = an[static_cast<size_t>(p)];
    double am1 = 1.0, a0 = ap;
    int64_t pe = p;
    while (pe <= nmax / p) {
      pe *= p;
      double next = (p == q) ? a0 * ap : ap * a0 - static_cast<double>(p) * am1;
      an[static_cast<size_t>(pe)] = next;
      am1 = a0;
      a0 = next;
    }
  }
  for (int64_t n = 2; n <= nmax; ++n) {
    int64_t p = table.spf[static_cast<size_t>(n)];
    int64_t pe = 1, m = n;
    while (m % p == 0) {
      m /= p;
      pe *= p;
    }
    if (m > 1)
      an[static_cast<size_t>(n)] =
          an[static_cast<size_t>(pe)] * an[static_cast<size_t>(m)];
  }
}

}  // namespace

std::vector<Eigenform> decompose(const ModSymSpace& sp, int64_t nmax) {
  if (nmax < 1) throw std::invalid_argument("decompose: nmax must be >= 1");
  std::vector<Eigenform> forms;
  if (sp.genus == 0) return forms;
  Spectra spec = compute_spectra(sp);
  const int g = sp.genus;

  // Probe symbol: a Manin symbol whose projection separates every
  // eigensystem; weak eigensystems fall back to their own best probe.
  Eigen::MatrixXd scores = spec.wtilde * sp.expr.transpose();  // g x (q+1)
  Eigen::VectorXd wnorm(g), colnorm(sp.p1_size());
  for (int j = 0; j < g; ++j) wnorm[j] = spec.wtilde.row(j).norm();
  for (int y = 0; y < sp.p1_size(); ++y) colnorm[y] = sp.expr.row(y).norm();
  auto norm_score = [&](int j, int y) {
    double denom = wnorm[j] * std::max(colnorm[y], 1e-300);
    return std::abs(scores(j, y)) / denom;
  };
  int global_probe = 0;
  double best = -1;
  for (int y = 0; y < sp.p1_size(); ++y) {
    if (colnorm[y] == 0) continue;
    double mn = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g; ++j) mn = std::min(mn, norm_score(j, y));
    if (mn > best) {
      best = mn;
      global_probe = y;
    }
  }
  std::vector<int> probe_of(static_cast<size_t>(g), global_probe);
  for (int j = 0; j < g; ++j) {
    if (norm_score(j, global_probe) >= 1e-6) continue;
    int bp = global_probe;
    double bs = -1;
    for (int y = 0; y < sp.p1_size(); ++y) {
      double s = norm_score(j, y);
      if (s > bs) {
        bs = s;
        bp = y;
      }
    }
    probe_of[static_cast<size_t>(j)] = bp;
  }
  std::vector<int> probes = probe_of;
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

  auto table = numkernel::primes_up_to(std::max<int64_t>(nmax, 2));
  std::vector<int64_t> ps;
  for (int64_t p : table.primes)
    if (p != sp.q && p <= nmax) ps.push_back(p);

  Eigen::MatrixXd ap_store(g, static_cast<Eigen::Index>(ps.size()));
  parallel_for(static_cast<int64_t>(ps.size()), [&](int64_t i) {
    int64_t p = ps[static_cast<size_t>(i)];
    std::vector<int32_t> cnt;
    for (int probe : probes) {
      cnt.assign(static_cast<size_t>(sp.p1_size()), 0);
      detail::heilbronn_counts(sp, p, probe, cnt);
      Eigen::VectorXd v = Eigen::VectorXd::Zero(sp.dim);
      for (int y = 0; y < sp.p1_size(); ++y)
        if (cnt[static_cast<size_t>(y)] != 0)
          v += static_cast<double>(cnt[static_cast<size_t>(y)]) *
               sp.expr.row(y).transpose();
      for (int j = 0; j < g; ++j) {
        if (probe_of[static_cast<size_t>(j)] != probe) continue;
        double num = spec.wtilde.row(j) * v;
        double den = scores(j, probe);
        ap_store(j, static_cast<Eigen::Index>(i)) = num / den;
      }
    }
  });

  std::vector<int> order(static_cast<size_t>(g));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index i = 0; i < spec.small_ap.rows(); ++i) {
      if (spec.small_ap(i, a) < spec.small_ap(i, b) - 1e-9) return true;
      if (spec.small_ap(i, a) > spec.small_ap(i, b) + 1e-9) return false;
    }
    return false;
  });

  for (int rank = 0; rank < g; ++rank) {
    int j = order[static_cast<size_t>(rank)];
    Eigenform f;
    f.q = sp.q;
    f.id = rank;
    f.nmax = nmax;
    f.fricke = spec.wq[static_cast<size_t>(j)];
    f.an.assign(static_cast<size_t>(nmax) + 1, 0.0);
    if (nmax >= 1) f.an[1] = 1.0;
    for (size_t i = 0; i < ps.size(); ++i)
      f.an[static_cast<size_t>(ps[i])] = ap_store(j, static_cast<Eigen::Index>(i));
    if (sp.q <= nmax) f.an[static_cast<size_t>(sp.q)] = -f.fricke;
    fill_composites(f.an, sp.q, nmax, table);
    forms.push_back(std::move(f));
  }
  return forms;
}

Eigenform extend_coefficients(Eigenform form, int64_t nmax) {
  if (nmax < 1)
    throw std::invalid_argument("extend_coefficients: nmax must be >= 1");
  if (form.nmax < nmax || static_cast<int64_t>(form.an.size()) < nmax + 1)
    throw ComputationError(
        "incomplete-data",
        "prime coefficients are not available up to the requested horizon");
  auto table = numkernel::primes_up_to(std::max<int64_t>(nmax, 2));
  fill_composites(form.an, form.q, nmax, table);
  return form;
}

double atkin_lehner_sign(const ModSymSpace& sp, const Eigenform& form) {
  Spectra spec = compute_spectra(sp);
  for (int j = 0; j < sp.genus; ++j) {
    bool match = true;
    for (size_t i = 0; i < spec.mix_primes.size(); ++i) {
      int64_t p = spec.mix_primes[i];
      if (p > form.nmax) continue;
      if (std::abs(spec.small_ap(static_cast<Eigen::Index>(i), j) - form.a(p)) > 1e-6) {
        match = false;
        break;
      }
    }
    if (match) return spec.wq[static_cast<size_t>(j)];
  }
  throw ComputationError("inconsistency",
                         "form does not match any eigensystem of this space");
}

FamilySnapshot harmonic_weights(std::vector<Eigenform> forms, double X) {
  if (forms.empty())
    throw std::invalid_argument("harmonic_weights: empty family");
  if (!(X > 1))
    throw std::invalid_argument("harmonic_weights: need X > 1");
  const int64_t q = forms[0].q;
  const int64_t horizon = static_cast<int64_t>(std::floor(10.0 * X));
  for (const auto& f : forms) {
    if (f.q != q)
      throw std::invalid_argument("harmonic_weights: mixed levels");
    if (f.nmax < horizon)
      throw ComputationError("incomplete-data",
                             "harmonic weights need prime coefficients to 10X");
  }
  auto table = numkernel::primes_up_to(horizon);
  const double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;

  std::vector<double> expw(static_cast<size_t>(horizon) + 1);
  for (int64_t n = 1; n <= horizon; ++n)
    expw[static_cast<size_t>(n)] =
        std::exp(-static_cast<double>(n) / X) / static_cast<double>(n);

  std::vector<double> u(forms.size());
  parallel_for(static_cast<int64_t>(forms.size()), [&](int64_t fi) {
    const Eigenform& f = forms[static_cast<size_t>(fi)];
    // lam2[n] = lambda_f(n^2), built multiplicatively from prime data.
    std::vector<double> lam2(static_cast<size_t>(horizon) + 1, 0.0);
    lam2[1] = 1.0;
    double sum = expw[1];
    for (int64_t n = 2; n <= horizon; ++n) {
      int64_t p = table.spf[static_cast<size_t>(n)];
      int64_t m = n;
      int e = 0;
      while (m % p == 0) {
        m /= p;
        ++e;
      }
      double lp = f.lambda(p);
      // lambda(p^(2e)) by the recursion lambda(p^(j+1)) = lambda(p)
      // lambda(p^j) - lambda(p^(j-1)); at p = q, lambda(q^j) = lambda(q)^j.
      double l2e;
      if (p == q) {
        l2e = std::pow(lp * lp, e);
      } else {
        double lm1 = 1.0, l0 = lp;
        for (int j = 1; j < 2 * e; ++j) {
          double nx = lp * l0 - lm1;
          lm1 = l0;
          l0 = nx;
        }
        l2e = l0;
      }
      lam2[static_cast<size_t>(n)] = lam2[static_cast<size_t>(m)] * l2e;
      sum += lam2[static_cast<size_t>(n)] * expw[static_cast<size_t>(n)];
    }
    double lambda_val = zeta2 * sum;
    if (!(lambda_val > 0))
      throw ComputationError("weight-failure",
                             "smoothed symmetric-square proxy is nonpositive");
    u[static_cast<size_t>(fi)] = 1.0 / lambda_val;
  });

  double total = 0;
  for (double v : u) total += v;
  FamilySnapshot snap;
  snap.q = q;
  snap.provenance = "computed";
  snap.nmax = forms[0].nmax;
  for (size_t i = 0; i < forms.size(); ++i) {
    forms[i].weight = u[i] / total;
    snap.nmax = std::min(snap.nmax, forms[i].nmax);
  }
  snap.forms = std::move(forms);
  return snap;
}

FamilySnapshot compute_family(int64_t q, int64_t nmax, double X) {
  if (X <= 0) X = default_weight_horizon(q);
  int64_t horizon = static_cast<int64_t>(std::floor(10.0 * X));
  int64_t work_nmax = std::max(nmax, horizon);
  ModSymSpace sp = build_space(q);
  auto forms = decompose(sp, work_nmax);
  if (forms.empty())
    throw ComputationError("empty-family",
                           "S_2(q)* is empty at level " + std::to_string(q));
  FamilySnapshot snap = harmonic_weights(std::move(forms), X);
  if (work_nmax > nmax) {
    for (auto& f : snap.forms) {
      f.an.resize(static_cast<size_t>(nmax) + 1);
      f.nmax = nmax;
    }
    snap.nmax = nmax;
  }
  return snap;
}

std::vector<double> petersson_residuals(
    const FamilySnapshot& snapshot,
    const std::vector<std::pair<int64_t, int64_t>>& pairs, int64_t cmax) {
  const int64_t q = snapshot.q;
  if (snapshot.forms.empty())
    throw std::invalid_argument("petersson_residuals: empty family");
  const int64_t kmax = cmax / q;
  if (kmax < 1)
    throw std::invalid_argument("petersson_residuals: cmax below the level");

  std::vector<std::pair<int64_t, int64_t>> all;
  all.emplace_back(1, 1);  // normalization fit
  for (auto& mn : pairs) all.push_back(mn);

  // Kloosterman/Bessel side, c running over multiples of q.
  Eigen::MatrixXd terms(static_cast<Eigen::Index>(kmax), static_cast<Eigen::Index>(all.size()));
  parallel_for(kmax, [&](int64_t ki) {
    int64_t c = (ki + 1) * q;
    auto s = numkernel::kloosterman_many(all, c);
    for (size_t i = 0; i < all.size(); ++i) {
      double x = 4.0 * std::numbers::pi *
                 std::sqrt(static_cast<double>(all[i].first) *
                           static_cast<double>(all[i].second)) /
                 static_cast<double>(c);
      terms(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(i)) =
          s[i] / static_cast<double>(c) * numkernel::bessel_j1(x);
    }
  });
  std::vector<double> kside(all.size(), 0.0);
  for (size_t i = 0; i < all.size(); ++i) {
    double acc = 0;
    for (int64_t k = 0; k < kmax; ++k)
      acc += terms(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i));
    kside[i] = -2.0 * std::numbers::pi * acc;  // weight-2 Petersson convention
  }

  // Single normalization fit at (1,1): computed weights are proportional to
  // the true harmonic ones, so alpha rescales them onto the formula.
  double alpha = 1.0 + kside[0];
  std::vector<double> out;
  for (size_t i = 1; i < all.size(); ++i) {
    auto [m, n] = all[i];
    double avg = 0;
    for (const auto& f : snapshot.forms) avg += f.weight * f.lambda(m) * f.lambda(n);
    double delta = (m == n) ? 1.0 : 0.0;
    out.push_back(std::abs(alpha * avg - delta - kside[i]));
  }
  return out;
}

double petersson_residual(const FamilySnapshot& snapshot, int64_t m, int64_t n,
                          int64_t cmax) {
  return petersson_residuals(snapshot, {{m, n}}, cmax)[0];
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void export_family(const FamilySnapshot& snapshot, const std::string& dir) {
  fs::create_directories(dir);
  json meta;
  meta["q"] = snapshot.q;
  meta["g"] = snapshot.forms.size();
  meta["nmax"] = snapshot.nmax;
  json fr = json::array(), w = json::array();
  for (const auto& f : snapshot.forms) {
    fr.push_back(static_cast<int>(f.fricke));
    w.push_back(f.weight);
  }
  meta["fricke_signs"] = fr;
  meta["weights"] = w;
  meta["provenance"] = snapshot.provenance;
  std::ofstream mf(dir + "/meta.json");
  if (!mf) throw std::invalid_argument("export_family: cannot write " + dir);
  mf << meta.dump(2) << "\n";

  std::ofstream cf(dir + "/coeffs.csv");
  cf << "form_id,n,a_n\n";
  for (const auto& f : snapshot.forms) {
    for (int64_t n = 1; n <= f.nmax; ++n)
      cf << f.id << "," << n << "," << fmt17(f.a(n)) << "\n";
  }
}

FamilySnapshot import_family(const std::string& dir) {
  std::ifstream mf(dir + "/meta.json");
  if (!mf)
    throw std::invalid_argument("import_family: " + dir + "/meta.json: cannot open");
  json meta;
  try {
    mf >> meta;
  } catch (const std::exception& e) {
    throw std::invalid_argument("import_family: " + dir +
                                "/meta.json: parse error: " + e.what());
  }
  auto need = [&](const char* key) {
    if (!meta.contains(key))
      throw std::invalid_argument("import_family: meta.json: missing field '" +
                                  std::string(key) + "'");
  };
  need("q");
  need("g");
  need("nmax");
  need("fricke_signs");
  need("weights");
  FamilySnapshot snap;
  snap.q = meta["q"].get<int64_t>();
  snap.nmax = meta["nmax"].get<int64_t>();
  snap.provenance = meta.value("provenance", std::string("imported"));
  int64_t g = meta["g"].get<int64_t>();
  if (!is_prime(snap.q))
    throw std::invalid_argument("import_family: meta.json: field 'q': level " +
                                std::to_string(snap.q) + " is not prime");
  if (g < 1 || static_cast<int64_t>(meta["weights"].size()) != g ||
      static_cast<int64_t>(meta["fricke_signs"].size()) != g)
    throw std::invalid_argument(
        "import_family: meta.json: fields 'g'/'weights'/'fricke_signs' disagree");
  double wsum = 0;
  for (int64_t i = 0; i < g; ++i) {
    Eigenform f;
    f.q = snap.q;
    f.id = static_cast<int>(i);
    f.nmax = snap.nmax;
    f.fricke = meta["fricke_signs"][static_cast<size_t>(i)].get<double>();
    if (std::abs(std::abs(f.fricke) - 1.0) > 1e-12)
      throw std::invalid_argument(
          "import_family: meta.json: field 'fricke_signs': entries must be +-1");
    f.weight = meta["weights"][static_cast<size_t>(i)].get<double>();
    if (!(f.weight > 0))
      throw std::invalid_argument(
          "import_family: meta.json: field 'weights': entries must be positive");
    wsum += f.weight;
    f.an.assign(static_cast<size_t>(snap.nmax) + 1, 0.0);
    snap.forms.push_back(std::move(f));
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument(
        "import_family: meta.json: field 'weights': must sum to 1");

  std::ifstream cf(dir + "/coeffs.csv");
  if (!cf)
    throw std::invalid_argument("import_family: " + dir + "/coeffs.csv: cannot open");
  std::string line;
  int lineno = 0;
  std::getline(cf, line);
  ++lineno;
  if (line != "form_id,n,a_n")
    throw std::invalid_argument("import_family: coeffs.csv:1: bad header");
  while (std::getline(cf, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string fid_s, n_s, a_s;
    if (!std::getline(ss, fid_s, ',') || !std::getline(ss, n_s, ',') ||
        !std::getline(ss, a_s))
      throw std::invalid_argument("import_family: coeffs.csv:" +
                                  std::to_string(lineno) + ": malformed row");
    int64_t fid, n;
    double a;
    try {
      fid = std::stoll(fid_s);
      n = std::stoll(n_s);
      a = std::stod(a_s);
    } catch (const std::exception&) {
      throw std::invalid_argument("import_family: coeffs.csv:" +
                                  std::to_string(lineno) + ": unparsable value");
    }
    if (fid < 0 || fid >= g)
      throw std::invalid_argument("import_family: coeffs.csv:" +
                                  std::to_string(lineno) + ": form_id out of range");
    if (n < 1 || n > snap.nmax)
      throw std::invalid_argument("import_family: coeffs.csv:" +
                                  std::to_string(lineno) + ": n out of range");
    snap.forms[static_cast<size_t>(fid)].an[static_cast<size_t>(n)] = a;
  }

  // Arithmetic sanity of the rows.
  for (const auto& f : snap.forms) {
    if (f.a(1) != 1.0)
      throw std::invalid_argument("import_family: coeffs.csv: form " +
                                  std::to_string(f.id) + ": a_1 must be 1");
    for (int64_t p = 2; p <= snap.nmax; ++p) {
      if (!is_prime(p) || p == snap.q) continue;
      double bound = 2.0 * std::sqrt(static_cast<double>(p)) + 1e-6;
      if (std::abs(f.a(p)) > bound)
        throw std::invalid_argument(
            "import_family: coeffs.csv: form " + std::to_string(f.id) + ": a_" +
            std::to_string(p) + " = " + fmt17(f.a(p)) + " violates the Deligne bound");
    }
    if (snap.q <= snap.nmax && std::abs(f.a(snap.q) * f.a(snap.q) - 1.0) > 1e-6)
      throw std::invalid_argument("import_family: coeffs.csv: form " +
                                  std::to_string(f.id) + ": a_q^2 must be 1");
  }
  return snap;
}

}  // namespace eulerprod::hecke
