#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "eulerprod/hecke.hpp"
#include "modsym_internal.hpp"

namespace eulerprod::hecke {

bool is_prime(int64_t n) {
  if (n < 2) return false;
  for (int64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

int ModSymSpace::p1_index(int64_t c, int64_t d) const {
  c %= q;
  if (c < 0) c += q;
  d %= q;
  if (d < 0) d += q;
  if (c == 0) {
    if (d == 0) throw std::invalid_argument("p1_index: (0,0) is not in P1");
    return static_cast<int>(q);
  }
  return static_cast<int>((d * inv_mod_q[static_cast<size_t>(c)]) % q);
}

std::array<int64_t, 4> ModSymSpace::p1_lift(int index) const {
  if (index == q) return {1, 0, 0, 1};           // (0:1)
  return {0, -1, 1, static_cast<int64_t>(index)};  // (1:i), det = 1
}

namespace {

// Lemire's fast modulo for divisors < 2^32.
struct FastMod {
  uint64_t d;
  uint64_t M;
  explicit FastMod(uint64_t d_) : d(d_), M(~0ULL / d_ + 1) {}
  uint64_t mod(uint64_t a) const {
    uint64_t low = a * M;
    return static_cast<uint64_t>((static_cast<unsigned __int128>(low) * d) >> 64);
  }
};

int64_t floordiv(int64_t n, int64_t d) {
  int64_t t = n / d;
  if ((n % d != 0) && ((n < 0) != (d < 0))) --t;
  return t;
}

// Row-reduced echelon form with partial pivoting. Returns pivot row per
// column (-1 for free columns).
std::vector<int> rref(Eigen::MatrixXd& m, double eps) {
  const Eigen::Index rows = m.rows(), cols = m.cols();
  std::vector<int> pivot_row(static_cast<size_t>(cols), -1);
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index best = r;
    double mx = 0;
    for (Eigen::Index i = r; i < rows; ++i) {
      double v = std::abs(m(i, c));
      if (v > mx) {
        mx = v;
        best = i;
      }
    }
    if (mx <= eps) continue;
    m.row(r).swap(m.row(best));
    m.row(r) /= m(r, c);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i != r && m(i, c) != 0.0) m.row(i) -= m(i, c) * m.row(r);
    }
    pivot_row[static_cast<size_t>(c)] = static_cast<int>(r);
    ++r;
  }
  return pivot_row;
}

}  // namespace

ModSymSpace build_space(int64_t q) {
  if (!is_prime(q)) throw std::invalid_argument("build_space: level must be prime");
  if (q < 11)
    throw ComputationError("empty-family",
                           "S_2(q)* is empty for q < 11 (genus zero)");

  ModSymSpace sp;
  sp.q = q;
  sp.inv_mod_q.assign(static_cast<size_t>(q), 0);
  for (int64_t a = 1; a < q; ++a)
    sp.inv_mod_q[static_cast<size_t>(a)] = numkernel::inv_mod(a, q);

  const int n = sp.p1_size();  // q + 1 Manin symbols
  auto sym_cd = [&](int i) -> std::pair<int64_t, int64_t> {
    if (i == q) return {0, 1};
    return {1, i};
  };
  // Right action of S = [0,-1;1,0] and T = [0,-1;1,-1] on (c:d).
  std::vector<int> s_of(n), t_of(n);
  for (int i = 0; i < n; ++i) {
    auto [c, d] = sym_cd(i);
    s_of[i] = sp.p1_index(d, -c);
    t_of[i] = sp.p1_index(d, -c - d);
  }

  // Two-term relations x + xS = 0: pair up symbols, S-fixed points vanish.
  std::vector<int> gen_of(n, -2), sign_of(n, 0);
  std::vector<int> gens;
  for (int i = 0; i < n; ++i) {
    if (gen_of[i] != -2) continue;
    int j = s_of[i];
    if (j == i) {
      gen_of[i] = -1;  // 2x = 0
      continue;
    }
    gen_of[i] = static_cast<int>(gens.size());
    sign_of[i] = 1;
    gen_of[j] = static_cast<int>(gens.size());
    sign_of[j] = -1;
    gens.push_back(i);
  }
  const int ngen = static_cast<int>(gens.size());

  // Three-term relations x + xT + xT^2 = 0, one row per T-orbit.
  std::set<std::array<int, 3>> seen;
  std::vector<Eigen::VectorXd> rows;
  for (int i = 0; i < n; ++i) {
    std::array<int, 3> orbit = {i, t_of[i], t_of[t_of[i]]};
    std::array<int, 3> key = orbit;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) continue;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(ngen);
    bool nonzero = false;
    for (int x : orbit) {
      if (gen_of[x] >= 0) {
        row[gen_of[x]] += sign_of[x];
        nonzero = true;
      }
    }
    if (nonzero && row.cwiseAbs().maxCoeff() > 0) rows.push_back(row);
  }

  Eigen::MatrixXd rel(static_cast<Eigen::Index>(rows.size()), ngen);
  for (size_t r = 0; r < rows.size(); ++r) rel.row(static_cast<Eigen::Index>(r)) = rows[r];
  auto pivot_row = rref(rel, 1e-9);

  std::vector<int> free_cols;
  for (int c = 0; c < ngen; ++c)
    if (pivot_row[static_cast<size_t>(c)] < 0) free_cols.push_back(c);
  sp.dim = static_cast<int>(free_cols.size());
  std::vector<int> coord_of(static_cast<size_t>(ngen), -1);
  for (size_t k = 0; k < free_cols.size(); ++k)
    coord_of[static_cast<size_t>(free_cols[k])] = static_cast<int>(k);

  // Expression of every generator, then of every Manin symbol, in the
  // free coordinates.
  Eigen::MatrixXd expr_gen = Eigen::MatrixXd::Zero(ngen, sp.dim);
  for (int c = 0; c < ngen; ++c) {
    int pr = pivot_row[static_cast<size_t>(c)];
    if (pr < 0) {
      expr_gen(c, coord_of[static_cast<size_t>(c)]) = 1.0;
    } else {
      for (size_t k = 0; k < free_cols.size(); ++k)
        expr_gen(c, static_cast<Eigen::Index>(k)) = -rel(pr, free_cols[k]);
    }
  }
  sp.expr = Eigen::MatrixXd::Zero(n, sp.dim);
  for (int i = 0; i < n; ++i)
    if (gen_of[i] >= 0) sp.expr.row(i) = sign_of[i] * expr_gen.row(gen_of[i]);

  sp.basis_symbol.resize(static_cast<size_t>(sp.dim));
  for (size_t k = 0; k < free_cols.size(); ++k)
    sp.basis_symbol[k] = gens[static_cast<size_t>(free_cols[k])];

  // Star involution (c:d) -> (c:-d).
  sp.star.resize(sp.dim, sp.dim);
  for (int k = 0; k < sp.dim; ++k) {
    auto [c, d] = sym_cd(sp.basis_symbol[static_cast<size_t>(k)]);
    sp.star.col(k) = sp.expr.row(sp.p1_index(c, -d)).transpose();
  }

  // Boundary map: symbol (c:d) with lift g contributes [g oo] - [g 0];
  // a cusp a/c is equivalent to oo iff q | c, else to 0.
  sp.boundary = Eigen::MatrixXd::Zero(2, sp.dim);
  for (int k = 0; k < sp.dim; ++k) {
    auto m = sp.p1_lift(sp.basis_symbol[static_cast<size_t>(k)]);
    int cls_inf = (m[2] % q == 0) ? 1 : 0;  // g oo = a/c
    int cls_zero = (m[3] % q == 0) ? 1 : 0;  // g 0 = b/d
    sp.boundary(cls_inf, k) += 1.0;
    sp.boundary(cls_zero, k) -= 1.0;
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(sp.boundary);
  lu.setThreshold(1e-9);
  Eigen::MatrixXd kernel = lu.kernel();
  if (lu.rank() == 0) kernel = Eigen::MatrixXd::Identity(sp.dim, sp.dim);
  // Orthonormalize the cuspidal basis.
  if (kernel.cols() > 0 && kernel.cwiseAbs().maxCoeff() > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(kernel);
    Eigen::MatrixXd thinq = qr.householderQ() * Eigen::MatrixXd::Identity(sp.dim, kernel.cols());
    sp.cuspidal = thinq;
  } else {
    sp.cuspidal = Eigen::MatrixXd::Zero(sp.dim, 0);
  }
  if (sp.cuspidal.cols() % 2 != 0)
    throw ComputationError("inconsistency", "cuspidal dimension is odd");
  sp.genus = static_cast<int>(sp.cuspidal.cols()) / 2;

  // Fricke involution W_q: {a -> b} maps to {-1/(q a) -> -1/(q b)}.
  sp.fricke.resize(sp.dim, sp.dim);
  for (int k = 0; k < sp.dim; ++k) {
    auto m = sp.p1_lift(sp.basis_symbol[static_cast<size_t>(k)]);
    auto reduce = [](int64_t& a, int64_t& b) {
      int64_t g = std::gcd(std::abs(a), std::abs(b));
      if (g > 1) {
        a /= g;
        b /= g;
      }
    };
    // alpha = g 0 = b/d, beta = g oo = a/c
    int64_t an = m[0], ad = m[2];
    int64_t bn = m[1], bd = m[3];
    int64_t wan = -ad, wad = q * an;
    int64_t wbn = -bd, wbd = q * bn;
    reduce(wan, wad);
    reduce(wbn, wbd);
    sp.fricke.col(k) = detail::path_from_inf(sp, wan, wad) -
                       detail::path_from_inf(sp, wbn, wbd);
  }

  return sp;
}

namespace detail {

Eigen::VectorXd path_from_inf(const ModSymSpace& sp, int64_t num, int64_t den) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sp.dim);
  if (den == 0) return out;  // {oo -> oo}
  if (den < 0) {
    den = -den;
    num = -num;
  }
  int64_t g = std::gcd(std::abs(num), den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  // Convergents p_k/q_k of num/den; each consecutive pair is a unimodular
  // path contributing the Manin symbol (q_k : (-1)^{k-1} q_{k-1}).
  int64_t pm2 = 0, qm2 = 1, pm1 = 1, qm1 = 0;
  int64_t n = num, d = den;
  int k = 0;
  for (;;) {
    int64_t a = floordiv(n, d);
    int64_t r = n - a * d;
    int64_t pk = a * pm1 + pm2;
    int64_t qk = a * qm1 + qm2;
    int64_t dcoef = (k % 2 == 1) ? qm1 : -qm1;
    out += sp.expr.row(sp.p1_index(qk, dcoef)).transpose();
    pm2 = pm1;
    qm2 = qm1;
    pm1 = pk;
    qm1 = qk;
    if (r == 0) break;
    n = d;
    d = r;
    ++k;
  }
  return out;
}

void heilbronn_counts(const ModSymSpace& sp, int64_t p, int probe_index,
                      std::vector<int32_t>& cnt) {
  const int64_t q = sp.q;
  const FastMod fm(static_cast<uint64_t>(q));
  const int64_t offset = q << 32;  // multiple of q, makes arguments nonnegative
  auto [u, v] = probe_index == q ? std::pair<int64_t, int64_t>{0, 1}
                                 : std::pair<int64_t, int64_t>{1, probe_index};

  auto tally = [&](int64_t s1, int64_t s2) {
    int64_t c = static_cast<int64_t>(fm.mod(static_cast<uint64_t>(s1 + offset)));
    int64_t d = static_cast<int64_t>(fm.mod(static_cast<uint64_t>(s2 + offset)));
    if (c == 0) {
      if (d == 0) return;
      cnt[static_cast<size_t>(q)]++;
      return;
    }
    uint64_t idx = fm.mod(static_cast<uint64_t>(d) *
                          static_cast<uint64_t>(sp.inv_mod_q[static_cast<size_t>(c)]));
    cnt[static_cast<size_t>(idx)]++;
  };

  if (p == 2) {
    // Heilbronn matrices for p = 2: [1,0,0,2],[2,0,0,1],[1,0,1,2],[2,1,0,1]
    tally(u, 2 * v);
    tally(2 * u, v);
    tally(u + v, 2 * v);
    tally(2 * u, u + v);
    return;
  }

  tally(u, v * p);  // [1,0,0,p]
  for (int64_t r = -(p - 1) / 2; r <= (p - 1) / 2; ++r) {
    // Matrix [x1,x2;y1,y2] starts at [p,-r;0,1]; track only the probe image
    // (s1, s2) = (u x1 + v y1, u x2 + v y2) through the recurrence.
    int64_t a = -p, b = r;
    int64_t s1 = u * p;
    int64_t s2 = -u * r + v;
    tally(s1, s2);
    while (b != 0) {
      int64_t qq = llrint(static_cast<double>(a) / static_cast<double>(b));
      int64_t c = a - b * qq;
      a = -b;
      b = c;
      int64_t s3 = qq * s1 - s2;
      s2 = s1;
      s1 = s3;
      tally(s1, s2);
    }
  }
}

}  // namespace detail

Eigen::MatrixXd hecke_operator_full(const ModSymSpace& sp, int64_t p) {
  if (!is_prime(p)) throw std::invalid_argument("hecke_operator: p must be prime");
  if (p == sp.q)
    throw ComputationError("wrong-operator",
                           "T_q is not defined here; use the Fricke involution");
  Eigen::MatrixXd t(sp.dim, sp.dim);
  std::vector<int32_t> cnt;
  for (int k = 0; k < sp.dim; ++k) {
    cnt.assign(static_cast<size_t>(sp.p1_size()), 0);
    detail::heilbronn_counts(sp, p, sp.basis_symbol[static_cast<size_t>(k)], cnt);
    Eigen::VectorXd col = Eigen::VectorXd::Zero(sp.dim);
    for (int y = 0; y < sp.p1_size(); ++y) {
      if (cnt[static_cast<size_t>(y)] != 0)
        col += static_cast<double>(cnt[static_cast<size_t>(y)]) *
               sp.expr.row(y).transpose();
    }
    t.col(k) = col;
  }
  return t;
}

Eigen::MatrixXd hecke_operator(const ModSymSpace& sp, int64_t p) {
  Eigen::MatrixXd full = hecke_operator_full(sp, p);
  // Restriction to the cuspidal subspace (orthonormal basis).
  return sp.cuspidal.transpose() * full * sp.cuspidal;
}

}  // namespace eulerprod::hecke
