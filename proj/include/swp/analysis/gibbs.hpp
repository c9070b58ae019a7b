#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "swp/agents/synthetic_joint.hpp"
#include "swp/core/error.hpp"

namespace swp::analysis {

struct StationaryMarginals {
  Eigen::VectorXd tone;
  Eigen::VectorXd sentence;
  double residual = 0.0;  // L1 norm of pi K - pi at exit
  int iterations = 0;
};

// Tone-to-tone transition kernel of the alternating sampler:
// K(t, t') = sum_s p(s | t) p(t' | s). Rows sum to 1.
inline Eigen::MatrixXd gibbs_tone_kernel(const Eigen::MatrixXd& joint) {
  const Eigen::VectorXd row_mass = joint.rowwise().sum();
  const Eigen::RowVectorXd col_mass = joint.colwise().sum();
  for (Eigen::Index i = 0; i < joint.rows(); ++i)
    if (!(row_mass(i) > 0.0)) throw Error(Errc::non_ergodic_joint, "tone row " + std::to_string(i) + " has no mass");
  for (Eigen::Index j = 0; j < joint.cols(); ++j)
    if (!(col_mass(j) > 0.0))
      throw Error(Errc::non_ergodic_joint, "sentence column " + std::to_string(j) + " has no mass");
  const Eigen::MatrixXd s_given_t = row_mass.asDiagonal().inverse() * joint;                    // m x n
  const Eigen::MatrixXd t_given_s = (joint * col_mass.asDiagonal().inverse()).transpose();      // n x m
  return s_given_t * t_given_s;
}

// Stationary marginals of the chain by power iteration on the tone kernel,
// started from the uniform vector.
inline StationaryMarginals gibbs_stationary_exact(const Eigen::MatrixXd& joint, double tol = 1e-12,
                                                  int max_iter = 1'000'000) {
  const Eigen::MatrixXd K = gibbs_tone_kernel(joint);
  const auto m = K.rows();
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(m, 1.0 / static_cast<double>(m));
  StationaryMarginals out;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::RowVectorXd next = pi * K;
    next /= next.sum();
    out.residual = (next - pi).cwiseAbs().sum();
    pi = next;
    out.iterations = it;
    if (out.residual < tol) break;
  }
  const double final_residual = (pi * K - pi).cwiseAbs().sum();
  out.residual = final_residual;
  if (!(final_residual < tol))
    throw Error(Errc::no_convergence, "power iteration residual " + std::to_string(final_residual));
  const Eigen::VectorXd row_mass = joint.rowwise().sum();
  const Eigen::MatrixXd s_given_t = row_mass.asDiagonal().inverse() * joint;
  out.tone = pi.transpose();
  out.sentence = (pi * s_given_t).transpose();
  return out;
}

inline StationaryMarginals gibbs_stationary_exact(const agents::SyntheticJoint& joint, double tol = 1e-12) {
  return gibbs_stationary_exact(joint.probs(), tol);
}

// Total-variation distance between two distributions on the same support.
inline double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw Error(Errc::shape_mismatch, "total_variation: size mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace swp::analysis
