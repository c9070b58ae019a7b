#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swp/analysis/correlation.hpp"
#include "swp/core/error.hpp"

namespace swp::analysis {

struct MdsOptions {
  int dim = 2;
  int max_iter = 500;
  double tol = 1e-9;  // relative change of raw stress between iterations
};

struct MdsSolution {
  std::vector<std::string> labels;
  Eigen::MatrixXd points;  // n x dim, centered, principal axes
  double stress = 0.0;     // sqrt(sum (d - delta)^2 / sum delta^2)
  std::string transform = "none";
  int iterations = 0;
  std::vector<double> stress_history;  // normalized stress after each refinement step

  Eigen::Index index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<Eigen::Index>(i);
    return -1;
  }
};

// d = 1 - r with the diagonal forced to 0.
inline Eigen::MatrixXd corr_to_dissimilarity(const Eigen::MatrixXd& r) {
  if (r.rows() != r.cols()) throw Error(Errc::non_symmetric_input, "correlation matrix is not square");
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    for (Eigen::Index j = 0; j < r.cols(); ++j)
      if (!(r(i, j) >= -1.0 - 1e-12 && r(i, j) <= 1.0 + 1e-12))
        throw Error(Errc::out_of_range, "correlation (" + std::to_string(i) + "," + std::to_string(j) +
                                            ") = " + std::to_string(r(i, j)) + " is outside [-1,1]");
  Eigen::MatrixXd d = (1.0 - r.array()).cwiseMax(0.0).cwiseMin(2.0).matrix();
  d.diagonal().setZero();
  return d;
}

inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
  }
  return d;
}

inline double normalized_stress(const Eigen::MatrixXd& x, const Eigen::MatrixXd& delta) {
  const double den = delta.squaredNorm();
  if (den == 0.0) return 0.0;
  return std::sqrt((pairwise_distances(x) - delta).squaredNorm() / den);
}

namespace detail {

inline void check_dissimilarity(const Eigen::MatrixXd& d) {
  if (d.rows() != d.cols()) throw Error(Errc::non_symmetric_input, "dissimilarity matrix is not square");
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (std::abs(d(i, i)) > 1e-12 * scale)
      throw Error(Errc::non_symmetric_input, "nonzero diagonal at " + std::to_string(i));
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (!std::isfinite(d(i, j))) throw Error(Errc::non_symmetric_input, "non-finite dissimilarity");
      if (d(i, j) < 0.0)
        throw Error(Errc::negative_dissimilarity,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) + ") = " + std::to_string(d(i, j)));
      if (std::abs(d(i, j) - d(j, i)) > 1e-12 * scale)
        throw Error(Errc::non_symmetric_input, "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                                   ") and its transpose differ");
    }
  }
}

inline Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& d, int dim) {
  const auto n = d.rows();
  const Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd b = -0.5 * j * d.cwiseProduct(d) * j;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((b + b.transpose()) / 2.0);
  if (es.info() != Eigen::Success) throw Error(Errc::no_convergence, "eigendecomposition failed");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, dim);
  for (int k = 0; k < dim && k < n; ++k) {
    const auto col = n - 1 - k;  // eigenvalues ascend
    x.col(k) = es.eigenvectors().col(col) * std::sqrt(std::max(es.eigenvalues()(col), 0.0));
  }
  return x;
}

// One Guttman transform with unit weights.
inline Eigen::MatrixXd guttman(const Eigen::MatrixXd& x, const Eigen::MatrixXd& delta) {
  const auto n = x.rows();
  const Eigen::MatrixXd d = pairwise_distances(x);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && d(i, j) > 0.0) b(i, j) = -delta(i, j) / d(i, j);
  for (Eigen::Index i = 0; i < n; ++i) b(i, i) = -b.row(i).sum();
  return b * x / static_cast<double>(n);
}

// Centers, rotates to principal axes and fixes signs so that on each axis
// the first point with a clearly nonzero coordinate is positive.
inline Eigen::MatrixXd canonicalize(Eigen::MatrixXd x) {
  x = x.rowwise() - x.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  x = x * svd.matrixV();
  const double scale = std::max(1e-300, x.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (std::abs(x(i, k)) > 1e-9 * scale) {
        if (x(i, k) < 0) x.col(k) *= -1.0;
        break;
      }
  return x;
}

}  // namespace detail

// Classical (Torgerson) start refined by stress majorization (SMACOF).
inline MdsSolution mds(const Eigen::MatrixXd& delta, std::vector<std::string> labels, const MdsOptions& opt = {}) {
  detail::check_dissimilarity(delta);
  const auto n = delta.rows();
  if (n < 2) throw Error(Errc::invalid_parameter, "MDS needs at least 2 points");
  if (opt.dim < 1) throw Error(Errc::invalid_parameter, "dim must be >= 1");
  if (labels.empty())
    for (Eigen::Index i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  if (static_cast<Eigen::Index>(labels.size()) != n) throw Error(Errc::shape_mismatch, "one label per point");

  MdsSolution sol;
  sol.labels = std::move(labels);
  Eigen::MatrixXd x = detail::classical_mds(delta, opt.dim);
  const double den = delta.squaredNorm() / 2.0;
  auto raw = [&](const Eigen::MatrixXd& y) { return (pairwise_distances(y) - delta).squaredNorm() / 2.0; };
  double prev = raw(x);
  if (den > 0.0) {
    for (int it = 0; it < opt.max_iter && prev > 1e-28 * den; ++it) {
      x = detail::guttman(x, delta);
      const double s = raw(x);
      sol.iterations = it + 1;
      sol.stress_history.push_back(std::sqrt(s / den));
      const double change = (prev - s) / prev;
      prev = s;
      if (change < opt.tol) break;
    }
  }
  sol.points = detail::canonicalize(x);
  sol.stress = normalized_stress(sol.points, delta);
  return sol;
}

inline MdsSolution mds_from_correlation(const CorrelationMatrix& c, const MdsOptions& opt = {}) {
  auto sol = mds(corr_to_dissimilarity(c.values), c.rows, opt);
  sol.transform = "one-minus-r";
  return sol;
}

inline nlohmann::json to_json(const MdsSolution& s) {
  nlohmann::json pts = nlohmann::json::array();
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) {
    std::vector<double> p(static_cast<std::size_t>(s.points.cols()));
    for (Eigen::Index k = 0; k < s.points.cols(); ++k) p[static_cast<std::size_t>(k)] = s.points(i, k);
    pts.push_back({{"label", s.labels[static_cast<std::size_t>(i)]}, {"coords", p}});
  }
  return {{"points", pts}, {"stress", s.stress}, {"transform", s.transform}, {"iterations", s.iterations}};
}

}  // namespace swp::analysis
