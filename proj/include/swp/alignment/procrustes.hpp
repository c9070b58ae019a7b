#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "swp/alignment/embedding.hpp"
#include "swp/core/error.hpp"

namespace swp::alignment {

// Orthogonal Procrustes: Q minimizing ||Xc Q - Yc||_F over orthogonal Q,
// with Xc, Yc the column-centered inputs. Q = U V^T from the SVD of
// Xc^T Yc. When Xc^T Yc is rank deficient the minimizer is not unique; the
// unconstrained block is completed with the orthogonal map closest to the
// identity, so Y = X yields Q = I exactly.
// Orthogonal factor of the polar decomposition of m = X^T Y, i.e. the
// orthogonal Q maximizing trace(Q^T m), without any centering.
inline Eigen::MatrixXd orthogonal_polar(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw Error(Errc::svd_failure, "non-finite input");
  const auto n = m.cols();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) throw Error(Errc::svd_failure, "SVD did not converge");
  const auto& s = svd.singularValues();
  const double cut = s.size() ? s(0) * 1e-10 * static_cast<double>(n) : 0.0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  Eigen::MatrixXd q = u.leftCols(r) * v.leftCols(r).transpose();
  if (r < n) {
    // Any orthogonal W between the null spaces is optimal; pick the one
    // maximizing trace(Q), i.e. closest to I.
    const Eigen::MatrixXd u0 = u.rightCols(n - r), v0 = v.rightCols(n - r);
    Eigen::JacobiSVD<Eigen::MatrixXd> inner(v0.transpose() * u0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd w = inner.matrixV() * inner.matrixU().transpose();
    q += u0 * w * v0.transpose();
  }
  return q;
}

inline Eigen::MatrixXd procrustes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw Error(Errc::shape_mismatch, "procrustes inputs differ in shape");
  return orthogonal_polar(center_columns(x).transpose() * center_columns(y));
}

inline double orthogonality_error(const Eigen::MatrixXd& q) {
  return (q.transpose() * q - Eigen::MatrixXd::Identity(q.cols(), q.cols())).norm();
}

}  // namespace swp::alignment
