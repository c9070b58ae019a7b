#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "swp/core/error.hpp"

namespace swp::alignment {

struct SinkhornResult {
  Eigen::MatrixXd plan;
  Eigen::VectorXd f, g;    // dual potentials, reusable as a warm start
  double marginal_error;   // L1 error of the row marginal after the last column update
  int iterations;
};

namespace detail {

inline double logsumexp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// Newton's method on the entropic dual
//   D(f, g) = <f, a> + <g, b> - eps * sum_ij exp((f_i + g_j - C_ij) / eps),
// used to finish when plain scaling converges slowly (small eps, nearly
// degenerate assignments). The last column potential is pinned to remove
// the constant shift. Returns the final L1 marginal error.
inline double newton_polish(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            double eps, Eigen::VectorXd& f, Eigen::VectorXd& g, Eigen::MatrixXd& plan, double tol,
                            int max_steps = 100) {
  const auto m = cost.rows(), n = cost.cols();
  auto make_plan = [&](const Eigen::VectorXd& ff, const Eigen::VectorXd& gg) -> Eigen::MatrixXd {
    return Eigen::MatrixXd((((-cost).colwise() + ff).rowwise() + gg.transpose()) / eps).unaryExpr([](double z) {
      return std::exp(z);
    });
  };
  auto dual = [&](const Eigen::VectorXd& ff, const Eigen::VectorXd& gg, const Eigen::MatrixXd& p) {
    return ff.dot(a) + gg.dot(b) - eps * p.sum();
  };
  auto error_of = [&](const Eigen::MatrixXd& p) {
    return (p.rowwise().sum() - a).cwiseAbs().sum() + (p.colwise().sum().transpose() - b).cwiseAbs().sum();
  };
  double err = error_of(plan);
  double d0 = dual(f, g, plan);
  for (int step = 0; step < max_steps && err >= tol; ++step) {
    const Eigen::VectorXd r = plan.rowwise().sum(), c = plan.colwise().sum().transpose();
    Eigen::VectorXd grad(m + n - 1);
    grad << a - r, (b - c).head(n - 1);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + n - 1, m + n - 1);
    h.topLeftCorner(m, m) = r.asDiagonal();
    h.block(m, m, n - 1, n - 1) = c.head(n - 1).asDiagonal();
    h.block(0, m, m, n - 1) = plan.leftCols(n - 1);
    h.block(m, 0, n - 1, m) = plan.leftCols(n - 1).transpose();
    h /= eps;
    h.diagonal().array() += 1e-14 * h.diagonal().maxCoeff();
    const Eigen::VectorXd dir = h.ldlt().solve(grad);
    if (!dir.allFinite()) break;
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      Eigen::VectorXd f1 = f + t * dir.head(m), g1 = g;
      g1.head(n - 1) += t * dir.tail(n - 1);
      Eigen::MatrixXd p1 = make_plan(f1, g1);
      if (!p1.allFinite()) continue;
      const double d1 = dual(f1, g1, p1);
      if (d1 >= d0) {
        f = std::move(f1);
        g = std::move(g1);
        plan = std::move(p1);
        d0 = d1;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    err = error_of(plan);
  }
  return err;
}

}  // namespace detail

// Entropic OT: plan_ij = exp((f_i + g_j - C_ij) / eps) with marginals a
// (rows) and b (columns). Scaling iterations run on a kernel that is
// rebuilt from the log potentials whenever the scalings grow large, so small
// eps neither underflows nor pays for an exp per entry per iteration.
inline SinkhornResult sinkhorn_log(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                   double eps, int max_iter = 500, double tol = 1e-12,
                                   const Eigen::VectorXd* f0 = nullptr, const Eigen::VectorXd* g0 = nullptr) {
  if (!(eps > 0.0)) throw Error(Errc::invalid_parameter, "epsilon must be > 0");
  const auto m = cost.rows(), n = cost.cols();
  if (a.size() != m || b.size() != n) throw Error(Errc::shape_mismatch, "marginals do not match the cost matrix");
  Eigen::VectorXd f = f0 ? *f0 : Eigen::VectorXd::Zero(m);
  Eigen::VectorXd g = g0 ? *g0 : Eigen::VectorXd::Zero(n);
  const Eigen::ArrayXd la = a.array().log(), lb = b.array().log();

  // One exact log-domain sweep puts every row and column on a sane scale.
  auto log_sweep = [&] {
    for (Eigen::Index i = 0; i < m; ++i) f(i) = eps * (la(i) - detail::logsumexp((g - cost.row(i).transpose()) / eps));
    for (Eigen::Index j = 0; j < n; ++j) g(j) = eps * (lb(j) - detail::logsumexp((f - cost.col(j)) / eps));
  };
  auto kernel = [&]() -> Eigen::MatrixXd {
    return Eigen::MatrixXd(((-cost).colwise() + f).rowwise() + g.transpose()).unaryExpr([eps](double c) {
      return std::exp(c / eps);
    });
  };
  log_sweep();
  Eigen::MatrixXd k = kernel();
  Eigen::VectorXd u = Eigen::VectorXd::Ones(m), v = Eigen::VectorXd::Ones(n);
  auto absorb = [&] {
    f.array() += eps * u.array().log();
    g.array() += eps * v.array().log();
    u.setOnes();
    v.setOnes();
  };
  double err = INFINITY;
  int it = 0;
  while (it < max_iter) {
    ++it;
    const Eigen::VectorXd kv = k * v;
    u = a.cwiseQuotient(kv);
    const Eigen::VectorXd ktu = k.transpose() * u;
    v = b.cwiseQuotient(ktu);
    if (!u.allFinite() || !v.allFinite() || (kv.array() <= 0.0).any() || (ktu.array() <= 0.0).any()) {
      u.setOnes();
      v.setOnes();
      log_sweep();
      k = kernel();
      continue;
    }
    const double big = std::max(u.cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff());
    const double small = std::min(u.cwiseAbs().minCoeff(), v.cwiseAbs().minCoeff());
    if (big > 1e50 || small < 1e-50) {
      absorb();
      k = kernel();
    }
    if (it % 10 == 0 || it == max_iter) {
      err = (u.cwiseProduct(k * v) - a).cwiseAbs().sum();
      if (err < tol) break;
    }
  }
  absorb();
  Eigen::MatrixXd plan = kernel();
  err = (plan.rowwise().sum() - a).cwiseAbs().sum() + (plan.colwise().sum().transpose() - b).cwiseAbs().sum();
  if (err >= tol) err = detail::newton_polish(cost, a, b, eps, f, g, plan, tol);
  return {std::move(plan), std::move(f), std::move(g), err, it};
}

}  // namespace swp::alignment
