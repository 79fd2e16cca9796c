#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "dacnet/problem.hpp"
#include "dacnet/sparse.hpp"

namespace dacnet {

// Ground-truth solution with its verified KKT residual. Oracles are dense and
// deliberately share no solver code with the per-center machinery.
struct OracleSolution {
  VecX x_star;
  VecX v_star;  // multipliers by row position of A
  double kkt_residual_inf = 0.0;
  std::string method;
};

namespace detail {

inline double oracle_kkt_residual(const VecX& grad_at_x, const MatX& A_dense, const VecX& b,
                                  const VecX& x, const VecX& v) {
  double r = 0.0;
  if (A_dense.rows() > 0) {
    r = (grad_at_x + A_dense.transpose() * v).cwiseAbs().maxCoeff();
    r = std::max(r, (A_dense * x - b).cwiseAbs().maxCoeff());
  } else if (x.size() > 0) {
    r = grad_at_x.cwiseAbs().maxCoeff();
  }
  return r;
}

inline void oracle_accept(OracleSolution& sol, double tol = 1e-8) {
  if (!(sol.kkt_residual_inf <= tol))
    throw std::runtime_error("oracle (" + sol.method + "): KKT residual " +
                             std::to_string(sol.kkt_residual_inf) + " exceeds " + std::to_string(tol));
}

}  // namespace detail

// Orthogonal projection of z onto {x : A x = b},
// x* = [I - A^T (A A^T)^{-1} A] z + A^T (A A^T)^{-1} b,  v* = (A A^T)^{-1} (A z - b).
inline OracleSolution oracle_projection(const SparseMatrix& A, const VecX& b, const VecX& z) {
  OracleSolution sol;
  sol.method = "projection";
  const MatX Ad = A.dense();
  if (Ad.rows() == 0) {
    sol.x_star = z;
    sol.v_star = VecX::Zero(0);
    return sol;
  }
  const MatX gram = Ad * Ad.transpose();
  Eigen::FullPivLU<MatX> lu(gram);
  if (!lu.isInvertible()) throw std::runtime_error("oracle_projection: A A^T singular (rank-deficient A)");
  sol.v_star = lu.solve(Ad * z - b);
  sol.x_star = z - Ad.transpose() * sol.v_star;
  sol.kkt_residual_inf = detail::oracle_kkt_residual(sol.x_star - z, Ad, b, sol.x_star, sol.v_star);
  detail::oracle_accept(sol);
  return sol;
}

// Equality-constrained quadratic minimum of 1/2 x^T Q x + c^T x,
// x* = Q^{-1} (A^T (A Q^{-1} A^T)^{-1} (b + A Q^{-1} c) - c).
inline OracleSolution oracle_quadratic(const SparseMatrix& Q, const VecX& c, const SparseMatrix& A,
                                       const VecX& b) {
  OracleSolution sol;
  sol.method = "quadratic-closed-form";
  const MatX Qd = Q.dense();
  Eigen::LLT<MatX> llt(Qd);
  if (llt.info() != Eigen::Success) throw std::runtime_error("oracle_quadratic: Q not positive definite");
  const MatX Ad = A.dense();
  if (Ad.rows() == 0) {
    sol.x_star = llt.solve(-c);
    sol.v_star = VecX::Zero(0);
    sol.kkt_residual_inf = (Qd * sol.x_star + c).cwiseAbs().maxCoeff();
    detail::oracle_accept(sol);
    return sol;
  }
  const MatX QiAt = llt.solve(Ad.transpose());
  const MatX schur = Ad * QiAt;
  Eigen::FullPivLU<MatX> lu(schur);
  if (!lu.isInvertible()) throw std::runtime_error("oracle_quadratic: A Q^{-1} A^T singular");
  const VecX rhs = b + Ad * llt.solve(c);
  const VecX y = lu.solve(rhs);
  sol.x_star = llt.solve(Ad.transpose() * y - c);
  sol.v_star = -y;
  sol.kkt_residual_inf =
      detail::oracle_kkt_residual(Qd * sol.x_star + c, Ad, b, sol.x_star, sol.v_star);
  detail::oracle_accept(sol);
  return sol;
}

namespace detail {

// Damped Newton on grad phi(x) + A^T v = 0, A x = b for a smooth convex phi
// with open domain; used by the centralized entropy references below.
template <typename Grad, typename Hess, typename DomainOk>
OracleSolution newton_equality_solve(const MatX& Ad, const VecX& b, VecX x,
                                     Grad grad, Hess hess, DomainOk domain_ok,
                                     double tol, int max_iters, const char* method) {
  OracleSolution sol;
  sol.method = method;
  if (!domain_ok(x)) throw std::runtime_error(std::string(method) + ": infeasible start");
  const auto nrows = Ad.rows();
  VecX v = VecX::Zero(nrows);
  const auto residual = [&](const VecX& xx, const VecX& vv) {
    VecX r1 = grad(xx);
    if (nrows > 0) r1 += Ad.transpose() * vv;
    VecX r(xx.size() + nrows);
    r.head(xx.size()) = r1;
    if (nrows > 0) r.tail(nrows) = Ad * xx - b;
    return r;
  };
  for (int it = 0; it < max_iters; ++it) {
    const VecX r = residual(x, v);
    if (r.cwiseAbs().maxCoeff() <= tol) {
      sol.x_star = x;
      sol.v_star = v;
      sol.kkt_residual_inf = r.cwiseAbs().maxCoeff();
      return sol;
    }
    const auto nx = x.size();
    MatX K = MatX::Zero(nx + nrows, nx + nrows);
    K.topLeftCorner(nx, nx) = hess(x);
    if (nrows > 0) {
      K.topRightCorner(nx, nrows) = Ad.transpose();
      K.bottomLeftCorner(nrows, nx) = Ad;
    }
    const VecX step = Eigen::PartialPivLU<MatX>(K).solve(-r);
    const VecX dx = step.head(nx);
    const VecX dv = step.tail(nrows);
    double alpha = 1.0;
    const double r0 = r.norm();
    bool accepted = false;
    while (alpha >= 0x1.0p-30) {
      const VecX xt = x + alpha * dx;
      if (domain_ok(xt) && residual(xt, v + alpha * dv).norm() <= (1.0 - 1e-4 * alpha) * r0) {
        x = xt;
        v += alpha * dv;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) throw std::runtime_error(std::string(method) + ": line search failed");
  }
  throw std::runtime_error(std::string(method) + ": no convergence within iteration cap");
}

}  // namespace detail

// Centralized reference for the log-barrier problem min F(x) + G_t(x) s.t.
// A x = b. Requires a strictly feasible start (all g_l < 0); when omitted the
// projection of the all-ones vector is tried.
inline OracleSolution oracle_entropy(const ProblemInstance& p, double t, double tol,
                                     std::optional<VecX> x0 = std::nullopt) {
  if (p.constraints.U.empty()) throw std::invalid_argument("oracle_entropy: instance has no inequality set");
  const MatX Ad = p.constraints.A.dense();
  VecX start;
  if (x0.has_value()) {
    start = *x0;
  } else {
    const VecX ones = VecX::Ones(p.n());
    if (Ad.rows() == 0) {
      start = ones;
    } else {
      Eigen::FullPivLU<MatX> lu(MatX(Ad * Ad.transpose()));
      if (!lu.isInvertible()) throw std::runtime_error("oracle_entropy: A A^T singular");
      start = ones - Ad.transpose() * lu.solve(Ad * ones - p.constraints.b);
    }
  }
  const auto& con = p.constraints;
  const auto& obj = p.objective;
  const int n = p.n();
  const auto grad = [&](const VecX& x) {
    VecX gr = obj.grad(x);
    for (int l : con.U) {
      const double gl = con.g(l, x);
      for (const auto& [idx, val] : con.g_grad(l, x)) gr[idx] += -val / gl / t;
    }
    return gr;
  };
  const auto hess = [&](const VecX& x) {
    MatX h = obj.j_matrix(x, x).dense();
    for (int l : con.U) {
      const double gl = con.g(l, x);
      const auto gg = con.g_grad(l, x);
      for (const auto& [i, vi] : gg)
        for (const auto& [j, vj] : gg) h(i, j) += vi * vj / (gl * gl) / t;
    }
    return h;
  };
  const auto domain_ok = [&](const VecX& x) {
    if (!obj.in_domain(x)) return false;
    for (int l : con.U)
      if (con.g(l, x) >= 0.0) return false;
    return true;
  };
  auto sol = detail::newton_equality_solve(Ad, con.b, start, grad, hess, domain_ok, tol, 200,
                                           "entropy-interior-point");
  for (int i = 0; i < n; ++i)
    if (!(sol.x_star[i] > 0.0)) throw std::runtime_error("oracle_entropy: nonpositive component");
  return sol;
}

// Independent dense KKT oracle: one bordered solve for the constant-Hessian
// kinds, centralized Newton-KKT (no barrier) otherwise.
inline OracleSolution oracle_dense_kkt(const ProblemInstance& p, double tol,
                                       std::optional<VecX> x0 = std::nullopt) {
  if (p.n() > 500) throw std::invalid_argument("oracle_dense_kkt: capped at n <= 500");
  const MatX Ad = p.constraints.A.dense();
  const auto nrows = Ad.rows();
  if (p.objective.constant_j) {
    const VecX zero = VecX::Zero(p.n());
    const MatX J = p.objective.j_matrix(zero, zero).dense();
    const VecX g0 = p.objective.grad(zero);
    MatX K = MatX::Zero(p.n() + nrows, p.n() + nrows);
    K.topLeftCorner(p.n(), p.n()) = J;
    if (nrows > 0) {
      K.topRightCorner(p.n(), nrows) = Ad.transpose();
      K.bottomLeftCorner(nrows, p.n()) = Ad;
    }
    VecX rhs(p.n() + nrows);
    rhs.head(p.n()) = -g0;
    if (nrows > 0) rhs.tail(nrows) = p.constraints.b;
    Eigen::FullPivLU<MatX> lu(K);
    if (!lu.isInvertible()) throw std::runtime_error("oracle_dense_kkt: singular KKT matrix");
    const VecX sol_vec = lu.solve(rhs);
    OracleSolution sol;
    sol.method = "dense-kkt";
    sol.x_star = sol_vec.head(p.n());
    sol.v_star = sol_vec.tail(nrows);
    sol.kkt_residual_inf = detail::oracle_kkt_residual(p.objective.grad(sol.x_star), Ad,
                                                       p.constraints.b, sol.x_star, sol.v_star);
    detail::oracle_accept(sol, std::max(tol, 1e-8));
    return sol;
  }
  VecX start;
  if (x0.has_value()) {
    start = *x0;
  } else {
    const VecX ones = VecX::Ones(p.n());
    if (nrows == 0) {
      start = ones;
    } else {
      Eigen::FullPivLU<MatX> lu(MatX(Ad * Ad.transpose()));
      if (!lu.isInvertible()) throw std::runtime_error("oracle_dense_kkt: A A^T singular");
      start = ones - Ad.transpose() * lu.solve(Ad * ones - p.constraints.b);
    }
  }
  const auto& obj = p.objective;
  auto sol = detail::newton_equality_solve(
      Ad, p.constraints.b, start, [&](const VecX& x) { return obj.grad(x); },
      [&](const VecX& x) { return obj.j_matrix(x, x).dense(); },
      [&](const VecX& x) { return obj.in_domain(x); }, tol, 200, "dense-kkt-newton");
  return sol;
}

}  // namespace dacnet
