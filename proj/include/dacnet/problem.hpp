#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dacnet/graph.hpp"
#include "dacnet/partition.hpp"
#include "dacnet/rng.hpp"
#include "dacnet/sparse.hpp"

namespace dacnet {

enum class ProblemKind { l2_distance, quadratic, entropy };

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::l2_distance: return "l2";
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::entropy: return "entropy";
  }
  return "?";
}

using SparseVec = std::vector<std::pair<int, double>>;

// Global objective F = sum_i f_i with neighboring radius m. grad is the full
// gradient of F; j_matrix(x, y) is the mean-value matrix with
// grad F(x) - grad F(y) = J(x, y) (x - y), geodesic width <= 2m.
struct Objective {
  int n = 0;
  int m = 1;
  double c1 = 0.0;  // nominal lower spectral bound of J
  double L1 = 0.0;  // nominal upper spectral bound of J
  bool constant_j = false;

  std::function<double(int, const VecX&)> eval_local;
  std::function<VecX(const VecX&)> grad;
  std::function<SparseMatrix(const VecX&, const VecX&)> j_matrix;
  // Domain test for the term f_i at x; null means unrestricted.
  std::function<bool(int, const VecX&)> term_domain_ok;

  double eval(const VecX& x) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += eval_local(i, x);
    return s;
  }

  bool in_domain(const VecX& x) const {
    if (!term_domain_ok) return true;
    for (int i = 0; i < n; ++i)
      if (!term_domain_ok(i, x)) return false;
    return true;
  }
};

// Linear equality constraints A x = b on rows W, plus optional inequality
// terms g_l(x) <= 0 for l in U. g_hess null means every g_l is affine.
struct Constraints {
  SparseMatrix A;  // rows = W labels, cols = 0..n-1
  VecX b;          // by row position
  std::vector<int> U;
  std::function<double(int, const VecX&)> g;
  std::function<SparseVec(int, const VecX&)> g_grad;
  std::function<SparseMatrix(int, const VecX&)> g_hess;  // null => affine
  double norm_A = 0.0;
  double c2 = std::numeric_limits<double>::quiet_NaN();  // filled from validation
};

struct ProblemInstance {
  Objective objective;
  Constraints constraints;
  ProblemKind kind = ProblemKind::l2_distance;
  int n() const { return objective.n; }
};

// --- instance factories (the three simulation setups) -----------------------

namespace detail {

inline std::vector<int> all_vertices(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace detail

// Rayleigh estimate of lambda_max(L) by power iteration; used for the
// nominal L1 of the quadratic instance.
inline double laplacian_lambda_max_bound(const Graph& g);

// min 1/2 ||x - z||^2  s.t.  (chi_W L) x = 0. Local split
// f_i = sum_{j in N_i} (1/(2 d_j)) (x_j - z_j)^2, m = 1, J = I.
inline ProblemInstance make_l2_problem(const Graph& g, const std::vector<int>& W, const VecX& z) {
  if (z.size() != g.n()) throw std::invalid_argument("make_l2_problem: z must have length n");
  const int n = g.n();
  ProblemInstance p;
  p.kind = ProblemKind::l2_distance;
  p.objective.n = n;
  p.objective.m = 1;
  p.objective.c1 = 1.0;
  p.objective.L1 = 1.0;
  p.objective.constant_j = true;

  std::vector<double> inv_two_deg(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) inv_two_deg[static_cast<std::size_t>(j)] = 0.5 / g.degree(j);
  // copies of the adjacency keep the instance self-contained
  std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nbrs[static_cast<std::size_t>(i)] = g.neighbors(i);

  p.objective.eval_local = [nbrs, inv_two_deg, z](int i, const VecX& x) {
    double s = 0.0;
    for (int j : nbrs[static_cast<std::size_t>(i)]) {
      const double dj = x[j] - z[j];
      s += inv_two_deg[static_cast<std::size_t>(j)] * dj * dj;
    }
    return s;
  };
  p.objective.grad = [z](const VecX& x) { return VecX(x - z); };
  const SparseMatrix eye = SparseMatrix::identity(detail::all_vertices(n));
  p.objective.j_matrix = [eye](const VecX&, const VecX&) { return eye; };

  p.constraints.A = laplacian(g).select_rows(W);
  p.constraints.b = VecX::Zero(static_cast<Eigen::Index>(W.size()));
  p.constraints.norm_A = p.constraints.A.operator_norm();
  return p;
}

// min 1/2 x^T Q x + c^T x with Q = 4 I + L  s.t.  chi_W (L^2 + 2 I) x = 0.
inline ProblemInstance make_quadratic_problem(const Graph& g, const std::vector<int>& W, const VecX& c) {
  if (c.size() != g.n()) throw std::invalid_argument("make_quadratic_problem: c must have length n");
  const int n = g.n();
  const SparseMatrix L = laplacian(g);
  const SparseMatrix eye = SparseMatrix::identity(detail::all_vertices(n));
  const SparseMatrix Q = L.combine(1.0, eye, 4.0);

  ProblemInstance p;
  p.kind = ProblemKind::quadratic;
  p.objective.n = n;
  p.objective.m = 1;
  p.objective.constant_j = true;
  p.objective.c1 = 4.0;  // lambda_min(Q) = 4 since L is PSD with null vector 1

  p.objective.eval_local = [Q, c](int i, const VecX& x) {
    double qx = 0.0;
    Q.for_each_in_row(i, [&](int j, double v) { qx += v * x[j]; });
    return 0.5 * x[i] * qx + c[i] * x[i];
  };
  p.objective.grad = [Q, c](const VecX& x) { return VecX(Q.multiply(x) + c); };
  p.objective.j_matrix = [Q](const VecX&, const VecX&) { return Q; };

  const SparseMatrix L2 = L.multiply_sparse(L);
  p.constraints.A = L2.combine(1.0, eye, 2.0).select_rows(W);
  p.constraints.b = VecX::Zero(static_cast<Eigen::Index>(W.size()));
  p.constraints.norm_A = p.constraints.A.operator_norm();
  p.objective.L1 = 4.0 + laplacian_lambda_max_bound(g);
  return p;
}

// min sum_i x_i log x_i  s.t.  chi_W (5 L + I) x = b,  x >= 0 (as g_l = -x_l).
// The objective domain is the open positive orthant.
inline ProblemInstance make_entropy_problem(const Graph& g, const std::vector<int>& W, const VecX& b) {
  if (b.size() != static_cast<Eigen::Index>(W.size()))
    throw std::invalid_argument("make_entropy_problem: b must have length |W|");
  const int n = g.n();
  ProblemInstance p;
  p.kind = ProblemKind::entropy;
  p.objective.n = n;
  p.objective.m = 1;
  // J is diag(1/xi) on the mean-value segment; these nominal bounds hold on
  // the validation sampling box [0.1, 10] and are refined by sampling.
  p.objective.c1 = 0.1;
  p.objective.L1 = 10.0;
  p.objective.constant_j = false;

  p.objective.eval_local = [](int i, const VecX& x) {
    if (x[i] <= 0.0) throw std::domain_error("entropy objective: x must be positive");
    return x[i] * std::log(x[i]);
  };
  p.objective.grad = [n](const VecX& x) {
    VecX gr(n);
    for (int i = 0; i < n; ++i) {
      if (x[i] <= 0.0) throw std::domain_error("entropy gradient: x must be positive");
      gr[i] = std::log(x[i]) + 1.0;
    }
    return gr;
  };
  const std::vector<int> labels = detail::all_vertices(n);
  p.objective.j_matrix = [labels, n](const VecX& x, const VecX& y) {
    std::vector<Triplet> e;
    e.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      if (x[i] <= 0.0 || y[i] <= 0.0) throw std::domain_error("entropy J: points must be positive");
      const double d = x[i] - y[i];
      const double jii = std::abs(d) < 1e-12 ? 1.0 / x[i] : (std::log(x[i]) - std::log(y[i])) / d;
      e.push_back({i, i, jii});
    }
    return SparseMatrix::from_triplets(labels, labels, std::move(e));
  };
  p.objective.term_domain_ok = [](int i, const VecX& x) { return x[i] > 0.0; };

  const SparseMatrix L = laplacian(g);
  const SparseMatrix eye = SparseMatrix::identity(labels);
  p.constraints.A = L.combine(5.0, eye, 1.0).select_rows(W);
  p.constraints.b = b;
  p.constraints.norm_A = p.constraints.A.operator_norm();
  p.constraints.U = labels;
  p.constraints.g = [](int l, const VecX& x) { return -x[l]; };
  p.constraints.g_grad = [](int l, const VecX&) { return SparseVec{{l, -1.0}}; };
  return p;
}

// --- spectral helpers --------------------------------------------------------

namespace detail {

inline bool is_diagonal(const SparseMatrix& s) {
  return std::ranges::all_of(s.entries(), [](const Triplet& t) { return t.row == t.col; });
}

// lambda_max of a symmetric matrix by power iteration (deterministic start,
// relative tolerance 1e-10, 10000 iterations cap).
inline double sym_lambda_max_power(const SparseMatrix& s) {
  Rng rng(0xD1B54A32D192ED03ULL);
  VecX v(s.n_cols());
  for (int i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    VecX w = s.multiply(v);
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    const double next = w.dot(s.multiply(w));
    const bool done = std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next));
    lambda = next;
    v = w;
    if (done) break;
  }
  return lambda;
}

// Extremal eigenvalues of a symmetric matrix: exact for diagonal matrices,
// dense solve for moderate sizes, shifted power iteration beyond.
inline std::pair<double, double> sym_extremal_eigenvalues(const SparseMatrix& s) {
  if (s.nnz() == 0) return {0.0, 0.0};
  if (is_diagonal(s)) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Triplet& t : s.entries()) {
      lo = std::min(lo, t.value);
      hi = std::max(hi, t.value);
    }
    if (s.nnz() < static_cast<std::size_t>(s.n_rows())) lo = std::min(lo, 0.0);
    return {lo, hi};
  }
  if (s.n_rows() <= 600) {
    Eigen::SelfAdjointEigenSolver<MatX> es(s.dense(), Eigen::EigenvaluesOnly);
    return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
  }
  const double hi = sym_lambda_max_power(s);
  // power iteration on hi*I - S gives hi - lambda_min
  const SparseMatrix shifted = SparseMatrix::identity(s.row_set()).combine(hi, s, -1.0);
  const double lo = hi - sym_lambda_max_power(shifted);
  return {lo, hi};
}

}  // namespace detail

inline double laplacian_lambda_max_bound(const Graph& g) {
  return detail::sym_lambda_max_power(laplacian(g));
}

// --- assumption validation ----------------------------------------------------

struct ValidationReport {
  bool ok = true;
  int width_J = 0;  // max over sampled pairs
  int width_A = 0;
  double c1 = 0.0;  // sampled lower bound estimate (exact when J constant)
  double L1 = 0.0;
  bool spectrum_exact = false;
  double c2 = std::numeric_limits<double>::infinity();  // min over centers
  std::vector<std::pair<int, double>> c2_per_center;    // (center, c2_lambda)
  double norm_A = 0.0;
  std::vector<std::string> failures;
};

struct InstanceConstants {
  double c1 = 0.0;
  double L1 = 0.0;
  double c2 = std::numeric_limits<double>::infinity();
  double norm_A = 0.0;
};

inline InstanceConstants constants_of(const ValidationReport& r) { return {r.c1, r.L1, r.c2, r.norm_A}; }

// Checks the locality widths exactly, estimates the J spectrum on sampled
// point pairs, the local stability constant per center, and the operator
// norm of A. Violations are recorded with witnesses, never thrown.
inline ValidationReport validate_assumptions(const Graph& g, const ProblemInstance& p,
                                             const Partition& part, int samples, std::uint64_t seed) {
  ValidationReport rep;
  const int n = p.n();
  const int m = p.objective.m;
  Rng rng(seed);

  const bool positive_domain = p.kind == ProblemKind::entropy;
  const double lo = positive_domain ? 0.1 : -2.0;
  const double hi = positive_domain ? 10.0 : 2.0;

  const int pairs = p.objective.constant_j ? 1 : std::max(1, samples);
  double c1_est = std::numeric_limits<double>::infinity();
  double L1_est = 0.0;
  for (int s = 0; s < pairs; ++s) {
    VecX x(n), y(n);
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(lo, hi);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform(lo, hi);
    const SparseMatrix J = p.objective.j_matrix(x, y);
    rep.width_J = std::max(rep.width_J, geodesic_width(g, J));
    const auto [lmin, lmax] = detail::sym_extremal_eigenvalues(J);
    c1_est = std::min(c1_est, lmin);
    L1_est = std::max(L1_est, lmax);
  }
  rep.c1 = c1_est;
  rep.L1 = L1_est;
  rep.spectrum_exact = p.objective.constant_j;
  if (rep.width_J > 2 * m) {
    rep.ok = false;
    rep.failures.push_back("width(J) = " + std::to_string(rep.width_J) + " exceeds 2m = " + std::to_string(2 * m));
  }
  if (!(rep.c1 > 0.0)) {
    rep.ok = false;
    rep.failures.push_back("J not positive definite on samples: lambda_min = " + std::to_string(rep.c1));
  }

  rep.width_A = geodesic_width(g, p.constraints.A);
  if (rep.width_A > 2 * m) {
    rep.ok = false;
    rep.failures.push_back("width(A) = " + std::to_string(rep.width_A) + " exceeds 2m = " + std::to_string(2 * m));
  }

  for (const auto& c : part.centers) {
    if (c.w_rows.empty()) continue;
    const MatX blk = p.constraints.A.dense_block(c.w_rows, c.extended);
    Eigen::SelfAdjointEigenSolver<MatX> es(MatX(blk * blk.transpose()), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin <= 0.0) {
      rep.ok = false;
      rep.failures.push_back("local stability violated at center " + std::to_string(c.center) +
                             ": lambda_min(A A^T) = " + std::to_string(lmin));
      rep.c2_per_center.emplace_back(c.center, 0.0);
      rep.c2 = 0.0;
      continue;
    }
    const double c2l = std::sqrt(lmin);
    rep.c2_per_center.emplace_back(c.center, c2l);
    rep.c2 = std::min(rep.c2, c2l);
  }

  // inequality terms must be supported within B(l, m)
  for (int l : p.constraints.U) {
    VecX x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(lo, hi);
    const auto ball = g.ball(l, m);
    for (const auto& [idx, val] : p.constraints.g_grad(l, x)) {
      if (val != 0.0 && !std::binary_search(ball.begin(), ball.end(), idx)) {
        rep.ok = false;
        rep.failures.push_back("g_" + std::to_string(l) + " depends on vertex " + std::to_string(idx) +
                               " outside B(l, m)");
      }
    }
  }

  rep.norm_A = p.constraints.norm_A;
  return rep;
}

// --- rate constants -----------------------------------------------------------

// kappa = ((c1 + ||A||)/c1)^2 (L1 + ||A||) max(1/c1, L1/c2^2).
// c2 = +infinity (no constraint rows) drops the second term of the max.
inline double compute_kappa(double c1, double L1, double c2, double norm_A) {
  if (!(c1 > 0.0) || !(L1 >= c1) || !(c2 > 0.0) || !(norm_A >= 0.0))
    throw std::invalid_argument("compute_kappa: need 0 < c1 <= L1, c2 > 0, ||A|| >= 0");
  const double front = (c1 + norm_A) / c1;
  const double tail = std::isinf(c2) ? 1.0 / c1 : std::max(1.0 / c1, L1 / (c2 * c2));
  return front * front * (L1 + norm_A) * tail;
}

// delta_R = D1 Gamma(d+1) |ln(r)/(4m)|^{-d} (R+2)^d r^{R/(4m)} with
// r = (kappa^2 - 1)/(kappa^2 + 1). The logarithm is negative; its absolute
// value is used so the decay constant is positive for real d.
inline double compute_delta_R(double kappa, int R, int m, double d, double D1) {
  if (!(kappa > 1.0)) throw std::invalid_argument("compute_delta_R: kappa must exceed 1");
  if (R < 1 || m < 1 || !(d > 0.0) || !(D1 > 0.0))
    throw std::invalid_argument("compute_delta_R: need R >= 1, m >= 1, d > 0, D1 > 0");
  const double k2 = kappa * kappa;
  const double ratio = (k2 - 1.0) / (k2 + 1.0);
  const double decay = std::abs(std::log(ratio) / (4.0 * m));
  return D1 * std::tgamma(d + 1.0) * std::pow(decay, -d) * std::pow(R + 2.0, d) *
         std::pow(ratio, R / (4.0 * m));
}

}  // namespace dacnet
