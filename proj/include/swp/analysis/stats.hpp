#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "swp/core/error.hpp"

namespace swp::analysis {

namespace detail {

inline bool nearly_constant(const Eigen::Ref<const Eigen::VectorXd>& x, double ss) {
  if ((x.array() == x(0)).all()) return true;
  return ss <= 1e-28 * (1.0 + x.squaredNorm());
}

}  // namespace detail

// Sample Pearson correlation (two-pass, centered).
inline double pearson(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw Error(Errc::shape_mismatch, "pearson: vectors differ in length");
  if (x.size() < 2) throw Error(Errc::degenerate_variance, "pearson: need at least 2 observations");
  const Eigen::VectorXd cx = x.array() - x.mean();
  const Eigen::VectorXd cy = y.array() - y.mean();
  const double sxx = cx.squaredNorm(), syy = cy.squaredNorm();
  if (detail::nearly_constant(x, sxx) || detail::nearly_constant(y, syy))
    throw Error(Errc::degenerate_variance, "pearson: zero variance");
  return std::clamp(cx.dot(cy) / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())),
                 Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
}

inline double cosine(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size()) throw Error(Errc::shape_mismatch, "cosine: vectors differ in length");
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw Error(Errc::zero_vector, "cosine of a zero vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

// Linear-interpolated quantile of sorted data (the common "type 7" rule).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(Errc::invalid_parameter, "quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Upper triangle (strictly above the diagonal) of a square matrix, row-major.
inline Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  Eigen::VectorXd out(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) out(k++) = m(i, j);
  return out;
}

}  // namespace swp::analysis
