#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swp/alignment/embedding.hpp"
#include "swp/alignment/sinkhorn.hpp"
#include "swp/core/error.hpp"

namespace swp::alignment {

struct GwotParams {
  double epsilon = 0.05;  // relative to the median intra-domain cost
  int max_outer = 200;
  int inner_sinkhorn_iters = 500;
  double tol = 1e-9;       // L1 change of the coupling between outer iterations
  std::uint64_t seed = 0;  // recorded only: the start is the product coupling
  bool require_convergence = true;

  // Values from the stochastic reference configuration. Only the
  // regularization carries over to this solver.
  static GwotParams reference_preset() {
    GwotParams p;
    p.epsilon = 0.5;
    return p;
  }

  nlohmann::json to_json() const {
    return {{"epsilon", epsilon}, {"max_outer", max_outer}, {"inner_sinkhorn_iters", inner_sinkhorn_iters},
            {"tol", tol},         {"seed", seed}};
  }
};

struct GwotResult {
  Eigen::MatrixXd coupling;
  std::vector<double> objective_history;  // E(T) - eps H(T), starting with the initial coupling
  std::vector<double> gw_history;         // E(T) alone
  int outer_iterations = 0;
  double residual = 0.0;        // last coupling change
  double marginal_error = 0.0;  // max abs deviation of row/column sums
  bool converged = false;
};

// Squared Euclidean distances between rows, divided by the median
// off-diagonal entry.
inline Eigen::MatrixXd normalized_sq_costs(const Eigen::MatrixXd& x) {
  const auto m = x.rows();
  Eigen::MatrixXd c(m, m);
  std::vector<double> off;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      c(i, j) = (x.row(i) - x.row(j)).squaredNorm();
      if (i != j) off.push_back(c(i, j));
    }
  std::nth_element(off.begin(), off.begin() + static_cast<std::ptrdiff_t>(off.size() / 2), off.end());
  const double med = off[off.size() / 2];
  if (!(med > 0.0)) throw Error(Errc::degenerate_variance, "median intra-domain cost is zero");
  return c / med;
}

// Square-loss GW energy E(T) = sum_ijkl (Cx_ik - Cy_jl)^2 T_ij T_kl.
inline double gw_energy(const Eigen::MatrixXd& cx, const Eigen::MatrixXd& cy, const Eigen::MatrixXd& t) {
  const Eigen::VectorXd p = t.rowwise().sum(), q = t.colwise().sum().transpose();
  const double constant = p.dot(cx.cwiseProduct(cx) * p) + q.dot(cy.cwiseProduct(cy) * q);
  return constant - 2.0 * (cx * t * cy).cwiseProduct(t).sum();
}

inline double plan_entropy(const Eigen::MatrixXd& t) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i)
    if (t.data()[i] > 0.0) h -= t.data()[i] * std::log(t.data()[i]);
  return h;
}

// Entropic Gromov-Wasserstein with uniform marginals. Each outer step solves
// min_T <grad E(T_k), T> - eps H(T) by Sinkhorn. With squared Euclidean costs
// E is concave on the transport polytope, so the linearization majorizes E
// and every step decreases E(T) - eps H(T).
inline GwotResult gwot(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const GwotParams& params = {}) {
  if (!(params.epsilon > 0.0)) throw Error(Errc::invalid_parameter, "epsilon must be > 0");
  if (x.rows() < 2 || y.rows() < 2) throw Error(Errc::invalid_parameter, "GW needs at least 2 points per side");
  const Eigen::MatrixXd cx = normalized_sq_costs(x), cy = normalized_sq_costs(y);
  const auto m = x.rows(), n = y.rows();
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd const_c = (cx.cwiseProduct(cx) * p).replicate(1, n) +
                                  (cy.cwiseProduct(cy) * q).transpose().replicate(m, 1);
  GwotResult res;
  Eigen::MatrixXd t = p * q.transpose();
  auto record = [&] {
    const double e = gw_energy(cx, cy, t);
    res.gw_history.push_back(e);
    res.objective_history.push_back(e - params.epsilon * plan_entropy(t));
  };
  record();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(m), g = Eigen::VectorXd::Zero(n);
  for (int it = 0; it < params.max_outer; ++it) {
    const Eigen::MatrixXd grad = const_c - 4.0 * cx * t * cy;
    auto sk = sinkhorn_log(grad, p, q, params.epsilon, params.inner_sinkhorn_iters, 1e-13, &f, &g);
    f = sk.f;
    g = sk.g;
    res.residual = (sk.plan - t).cwiseAbs().sum();
    t = std::move(sk.plan);
    res.outer_iterations = it + 1;
    record();
    if (res.residual < params.tol) {
      res.converged = true;
      break;
    }
  }
  res.marginal_error = std::max((t.rowwise().sum() - p).cwiseAbs().maxCoeff(),
                                (t.colwise().sum().transpose() - q).cwiseAbs().maxCoeff());
  res.coupling = std::move(t);
  if (res.marginal_error > 1e-6)
    throw Error(Errc::no_convergence, "Sinkhorn marginals off by " + std::to_string(res.marginal_error));
  if (!res.converged && params.require_convergence)
    throw Error(Errc::no_convergence, "coupling still changing after " + std::to_string(params.max_outer) +
                                          " outer iterations (residual " + std::to_string(res.residual) + ")");
  return res;
}

}  // namespace swp::alignment
