#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dacnet/graph.hpp"
#include "dacnet/partition.hpp"
#include "dacnet/problem.hpp"
#include "dacnet/sparse.hpp"

namespace dacnet {

// One center's reformulated constrained subproblem: free variables on the
// extended neighborhood D_{lambda,R}, boundary values frozen from the current
// global iterate (2m ring for the objective, 4m ring for the constraint
// right-hand side), constraint rows W_{lambda,R}.
struct LocalProblem {
  int center = -1;
  std::vector<int> free_idx;    // D_{lambda,R}
  std::vector<int> terms_idx;   // D_{lambda,R,m}: objective terms in the local sum
  std::vector<int> ring2m_idx;  // D_{lambda,R,2m} minus free
  VecX ring2m_vals;
  std::vector<int> frozen_idx;  // D_{lambda,R,4m} minus free
  VecX frozen_vals;
  std::vector<int> rows;  // W_{lambda,R}
  VecX rhs;               // b_k - sum_{j frozen} a(k,j) x_j
  VecX warm_start;        // x on free_idx
  const ProblemInstance* problem = nullptr;
  int n = 0;

  int free_size() const { return static_cast<int>(free_idx.size()); }
  int row_size() const { return static_cast<int>(rows.size()); }

  // Global embedding read by gradient/Hessian evaluations: u on the free set,
  // frozen iterate values on the 2m ring, 1.0 elsewhere. Components of
  // grad F and J restricted to the free set never read past the 2m ring, so
  // the padding value is immaterial there; 1.0 keeps domain-restricted
  // objectives (entropy, barrier) evaluable.
  VecX embed(const VecX& u) const {
    VecX x = VecX::Ones(n);
    for (int i = 0; i < free_size(); ++i) x[free_idx[static_cast<std::size_t>(i)]] = u[i];
    for (std::size_t i = 0; i < ring2m_idx.size(); ++i) x[ring2m_idx[i]] = ring2m_vals[static_cast<Eigen::Index>(i)];
    return x;
  }

  bool domain_ok(const VecX& u) const {
    if (!problem->objective.term_domain_ok) return true;
    const VecX x = embed(u);
    for (int j : terms_idx)
      if (!problem->objective.term_domain_ok(j, x)) return false;
    return true;
  }
};

struct LocalSolution {
  VecX w;  // on free_idx
  VecX v;  // multipliers on rows
  double theta_inf = 0.0;
  double eta_inf = 0.0;
  int newton_iters = 0;
  bool converged = true;
};

// Reads of the global iterate are restricted to D_{lambda,R,4m}; everything
// the subproblem needs is copied out here.
inline LocalProblem assemble_local(const ProblemInstance& p, const Partition& part, int center,
                                   const VecX& x) {
  if (x.size() != p.n()) throw std::invalid_argument("assemble_local: iterate has wrong length");
  const CenterData& c = part.by_center(center);
  LocalProblem lp;
  lp.center = center;
  lp.problem = &p;
  lp.n = p.n();
  lp.free_idx = c.extended;
  lp.terms_idx = c.nb_m;
  std::set_difference(c.nb_2m.begin(), c.nb_2m.end(), c.extended.begin(), c.extended.end(),
                      std::back_inserter(lp.ring2m_idx));
  std::set_difference(c.nb_4m.begin(), c.nb_4m.end(), c.extended.begin(), c.extended.end(),
                      std::back_inserter(lp.frozen_idx));
  lp.ring2m_vals.resize(static_cast<Eigen::Index>(lp.ring2m_idx.size()));
  for (std::size_t i = 0; i < lp.ring2m_idx.size(); ++i) lp.ring2m_vals[static_cast<Eigen::Index>(i)] = x[lp.ring2m_idx[i]];
  lp.frozen_vals.resize(static_cast<Eigen::Index>(lp.frozen_idx.size()));
  for (std::size_t i = 0; i < lp.frozen_idx.size(); ++i) lp.frozen_vals[static_cast<Eigen::Index>(i)] = x[lp.frozen_idx[i]];
  lp.rows = c.w_rows;
  lp.warm_start.resize(lp.free_size());
  for (int i = 0; i < lp.free_size(); ++i) lp.warm_start[i] = x[lp.free_idx[static_cast<std::size_t>(i)]];

  lp.rhs.resize(lp.row_size());
  const auto& A = p.constraints.A;
  for (int k = 0; k < lp.row_size(); ++k) {
    double corr = 0.0;
    A.for_each_in_row(lp.rows[static_cast<std::size_t>(k)], [&](int j, double a) {
      if (std::binary_search(lp.free_idx.begin(), lp.free_idx.end(), j)) return;
      const auto it = std::lower_bound(lp.frozen_idx.begin(), lp.frozen_idx.end(), j);
      if (it == lp.frozen_idx.end() || *it != j)
        throw std::logic_error("assemble_local: constraint support escapes the 4m neighborhood");
      corr += a * lp.frozen_vals[static_cast<Eigen::Index>(it - lp.frozen_idx.begin())];
    });
    lp.rhs[k] = p.constraints.b[A.row_pos(lp.rows[static_cast<std::size_t>(k)])] - corr;
  }
  return lp;
}

namespace detail {

// theta = grad F(embedded point) + A^T v restricted to the free set;
// eta = local constraint residual.
inline std::pair<VecX, VecX> residual_vectors(const LocalProblem& lp, const VecX& w, const VecX& v) {
  const VecX grad = lp.problem->objective.grad(lp.embed(w));
  VecX theta(lp.free_size());
  for (int i = 0; i < lp.free_size(); ++i) theta[i] = grad[lp.free_idx[static_cast<std::size_t>(i)]];
  const auto& A = lp.problem->constraints.A;
  VecX eta = -lp.rhs;
  for (int k = 0; k < lp.row_size(); ++k) {
    A.for_each_in_row(lp.rows[static_cast<std::size_t>(k)], [&](int j, double a) {
      const auto it = std::lower_bound(lp.free_idx.begin(), lp.free_idx.end(), j);
      if (it == lp.free_idx.end() || *it != j) return;
      const auto pos = static_cast<Eigen::Index>(it - lp.free_idx.begin());
      theta[pos] += a * v[k];
      eta[k] += a * w[pos];
    });
  }
  return {std::move(theta), std::move(eta)};
}

inline double inf_norm(const VecX& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace detail

// The two inexactness measures of a candidate local primal/multiplier pair.
inline std::pair<double, double> residuals(const LocalProblem& lp, const VecX& w, const VecX& v) {
  const auto [theta, eta] = detail::residual_vectors(lp, w, v);
  return {detail::inf_norm(theta), detail::inf_norm(eta)};
}

// Bordered saddle matrix [[J_ff, A_f^T], [A_f, 0]] with J evaluated at the
// embedding of u (any point does for constant-Hessian objectives).
inline MatX build_local_kkt(const LocalProblem& lp, const VecX& u) {
  const int nf = lp.free_size();
  const int nr = lp.row_size();
  const VecX xe = lp.embed(u);
  const SparseMatrix J = lp.problem->objective.j_matrix(xe, xe);
  MatX K = MatX::Zero(nf + nr, nf + nr);
  K.topLeftCorner(nf, nf) = J.dense_block(lp.free_idx, lp.free_idx);
  const MatX Af = lp.problem->constraints.A.dense_block(lp.rows, lp.free_idx);
  K.topRightCorner(nf, nr) = Af.transpose();
  K.bottomLeftCorner(nr, nf) = Af;
  return K;
}

// Row/col embedding of the local KKT system into graph vertices: free
// variables at their own vertex, constraint row k at vertex k.
inline std::vector<int> local_kkt_embedding(const LocalProblem& lp) {
  std::vector<int> e = lp.free_idx;
  e.insert(e.end(), lp.rows.begin(), lp.rows.end());
  return e;
}

// Direct factorization of the bordered system; valid when the objective has
// a constant Hessian on the free block (the l2 and quadratic kinds).
inline LocalSolution solve_local_quadratic(const LocalProblem& lp) {
  const int nf = lp.free_size();
  const int nr = lp.row_size();
  const MatX K = build_local_kkt(lp, VecX::Zero(nf));
  const VecX grad0 = lp.problem->objective.grad(lp.embed(VecX::Zero(nf)));
  VecX rhs(nf + nr);
  for (int i = 0; i < nf; ++i) rhs[i] = -grad0[lp.free_idx[static_cast<std::size_t>(i)]];
  rhs.tail(nr) = lp.rhs;
  const VecX sol = Eigen::PartialPivLU<MatX>(K).solve(rhs);
  LocalSolution out;
  out.w = sol.head(nf);
  out.v = sol.tail(nr);
  std::tie(out.theta_inf, out.eta_inf) = residuals(lp, out.w, out.v);
  if (!(std::max(out.theta_inf, out.eta_inf) <= 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff())))
    throw std::runtime_error("solve_local_quadratic: singular or ill-posed KKT system at center " +
                             std::to_string(lp.center));
  return out;
}

// Damped Newton on the nonlinear KKT conditions, warm-started from the
// current iterate with zero multipliers. Stops when max(theta, eta) <= tol.
inline LocalSolution solve_local_newton(const LocalProblem& lp, double tol, int max_iters) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_local_newton: tol must be positive");
  const int nf = lp.free_size();
  const int nr = lp.row_size();
  VecX w = lp.warm_start;
  VecX v = VecX::Zero(nr);
  if (!lp.domain_ok(w))
    throw std::runtime_error("solve_local_newton: start out of domain at center " + std::to_string(lp.center));

  LocalSolution out;
  for (int it = 0; it <= max_iters; ++it) {
    const auto [theta, eta] = detail::residual_vectors(lp, w, v);
    out.theta_inf = detail::inf_norm(theta);
    out.eta_inf = detail::inf_norm(eta);
    if (std::max(out.theta_inf, out.eta_inf) <= tol) {
      out.w = w;
      out.v = v;
      out.newton_iters = it;
      out.converged = true;
      return out;
    }
    if (it == max_iters) break;

    const MatX K = build_local_kkt(lp, w);
    VecX r(nf + nr);
    r.head(nf) = theta;
    r.tail(nr) = eta;
    const VecX step = Eigen::PartialPivLU<MatX>(K).solve(VecX(-r));
    const VecX dw = step.head(nf);
    const VecX dv = step.tail(nr);
    const double r0 = r.norm();

    double alpha = 1.0;
    bool accepted = false;
    bool domain_blocked = false;
    while (alpha >= 0x1.0p-30) {
      const VecX wt = w + alpha * dw;
      if (!lp.domain_ok(wt)) {
        domain_blocked = true;
        alpha *= 0.5;
        continue;
      }
      domain_blocked = false;
      const auto [tt, et] = detail::residual_vectors(lp, wt, VecX(v + alpha * dv));
      VecX rt(nf + nr);
      rt.head(nf) = tt;
      rt.tail(nr) = et;
      if (rt.norm() <= (1.0 - 1e-4 * alpha) * r0) {
        w = wt;
        v += alpha * dv;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (domain_blocked)
        throw std::runtime_error("solve_local_newton: cannot stay in domain at center " +
                                 std::to_string(lp.center));
      out.w = w;  // stagnated; best iterate so far
      out.v = v;
      out.newton_iters = it;
      out.converged = false;
      return out;
    }
    out.newton_iters = it + 1;
  }
  out.w = w;
  out.v = v;
  out.converged = false;
  return out;
}

// Distance-bucketed magnitudes of the inverse of a local saddle matrix:
// entry s holds max |(K^{-1})_{ij}| over index pairs whose embedded vertices
// are s apart. Verifies the exponential off-diagonal decay numerically.
inline std::vector<std::pair<int, double>> decay_profile(const Graph& g, const MatX& kkt,
                                                         const std::vector<int>& embedding) {
  if (kkt.rows() != kkt.cols() || kkt.rows() != static_cast<Eigen::Index>(embedding.size()))
    throw std::invalid_argument("decay_profile: matrix/embedding size mismatch");
  Eigen::FullPivLU<MatX> lu(kkt);
  if (!lu.isInvertible()) throw std::runtime_error("decay_profile: singular matrix");
  const MatX inv = lu.inverse();
  int maxd = 0;
  const auto sz = static_cast<int>(embedding.size());
  std::vector<double> best;
  for (int i = 0; i < sz; ++i)
    for (int j = 0; j < sz; ++j) {
      const int d = g.distance(embedding[static_cast<std::size_t>(i)], embedding[static_cast<std::size_t>(j)]);
      if (d >= static_cast<int>(best.size())) best.resize(static_cast<std::size_t>(d) + 1, 0.0);
      best[static_cast<std::size_t>(d)] = std::max(best[static_cast<std::size_t>(d)], std::abs(inv(i, j)));
      maxd = std::max(maxd, d);
    }
  std::vector<std::pair<int, double>> profile;
  for (int s = 0; s <= maxd; ++s) profile.emplace_back(s, best[static_cast<std::size_t>(s)]);
  return profile;
}

inline std::vector<std::pair<int, double>> decay_profile(const Graph& g, const LocalProblem& lp) {
  return decay_profile(g, build_local_kkt(lp, lp.warm_start), local_kkt_embedding(lp));
}

}  // namespace dacnet
