#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swp/alignment/embedding.hpp"
#include "swp/alignment/hungarian.hpp"
#include "swp/alignment/procrustes.hpp"
#include "swp/analysis/stats.hpp"
#include "swp/core/error.hpp"
#include "swp/core/rng.hpp"

namespace swp::alignment {

enum class BliDirection { forward, backward };

struct BliParams {
  int k_neighbors = 5;
  BliDirection direction = BliDirection::backward;
  int max_em_iters = 50;
  int restarts = 5;
  std::uint64_t seed = 0;
  // Keep the current matching's pairs among the E-step candidates. This
  // makes the restricted assignment always feasible and the objective
  // monotone; with it off the restriction can be infeasible, in which case
  // the E-step falls back to the unrestricted assignment and says so.
  bool keep_incumbent = true;
  double restart_noise = 0.05;  // sd of the perturbation added to the initial scores on restarts > 0

  nlohmann::json to_json() const {
    return {{"k_neighbors", k_neighbors},
            {"direction", direction == BliDirection::backward ? "backward" : "forward"},
            {"max_em_iters", max_em_iters},
            {"restarts", restarts},
            {"seed", seed},
            {"keep_incumbent", keep_incumbent},
            {"restart_noise", restart_noise}};
  }
};

struct BliResult {
  std::vector<Eigen::Index> matching;  // row i of X <-> row matching[i] of Y
  Eigen::MatrixXd q;
  double objective = 0.0;              // total matched cosine similarity
  std::vector<double> objective_history;
  int iterations = 0;
  int best_restart = 0;
  bool fallback_used = false;          // an E-step needed the unrestricted assignment
};

inline Eigen::MatrixXd normalize_rows(Eigen::MatrixXd x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double n = x.row(i).norm();
    if (!(n > 0.0)) throw Error(Errc::degenerate_row, "row " + std::to_string(i) + " is zero after centering");
    x.row(i) /= n;
  }
  return x;
}

namespace detail {

// Similarity-of-similarity start: each item is described by its sorted
// intra-domain cosine profile (self excluded); items across domains are
// scored by the correlation of their profiles.
inline Eigen::MatrixXd profile_scores(const Eigen::MatrixXd& xn, const Eigen::MatrixXd& yn) {
  auto profiles = [](const Eigen::MatrixXd& z) {
    const Eigen::MatrixXd s = z * z.transpose();
    Eigen::MatrixXd out(s.rows(), s.rows() - 1);
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      std::vector<double> v;
      for (Eigen::Index j = 0; j < s.cols(); ++j)
        if (j != i) v.push_back(s(i, j));
      std::sort(v.begin(), v.end(), std::greater<>());
      for (std::size_t k = 0; k < v.size(); ++k) out(i, static_cast<Eigen::Index>(k)) = v[k];
    }
    return out;
  };
  const Eigen::MatrixXd px = profiles(xn), py = profiles(yn);
  Eigen::MatrixXd s(xn.rows(), yn.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      try {
        s(i, j) = analysis::pearson(px.row(i).transpose(), py.row(j).transpose());
      } catch (const Error&) {
        s(i, j) = 0.0;
      }
    }
  return s;
}

// Candidate mask: in the backward direction every target keeps its k most
// similar sources; forward, every source keeps its k most similar targets.
inline Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> candidates(const Eigen::MatrixXd& s, int k,
                                                                       BliDirection dir) {
  const auto m = s.rows();
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> allowed =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, m, false);
  const auto kk = std::min<Eigen::Index>(k, m);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  for (Eigen::Index a = 0; a < m; ++a) {
    std::iota(idx.begin(), idx.end(), 0);
    auto val = [&](Eigen::Index b) { return dir == BliDirection::backward ? s(b, a) : s(a, b); };
    std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(), [&](Eigen::Index l, Eigen::Index r) {
      return val(l) > val(r) || (val(l) == val(r) && l < r);
    });
    for (Eigen::Index t = 0; t < kk; ++t) {
      const auto b = idx[static_cast<std::size_t>(t)];
      if (dir == BliDirection::backward) allowed(b, a) = true;
      else allowed(a, b) = true;
    }
  }
  return allowed;
}

inline double matched_total(const Eigen::MatrixXd& s, const std::vector<Eigen::Index>& match) {
  double t = 0.0;
  for (std::size_t i = 0; i < match.size(); ++i) t += s(static_cast<Eigen::Index>(i), match[i]);
  return t;
}

inline Eigen::MatrixXd fit_map(const Eigen::MatrixXd& xn, const Eigen::MatrixXd& yn,
                               const std::vector<Eigen::Index>& match) {
  Eigen::MatrixXd yp(xn.rows(), yn.cols());
  for (std::size_t i = 0; i < match.size(); ++i) yp.row(static_cast<Eigen::Index>(i)) = yn.row(match[i]);
  return orthogonal_polar(xn.transpose() * yp);
}

inline BliResult bli_once(const Eigen::MatrixXd& xn, const Eigen::MatrixXd& yn, const Eigen::MatrixXd& init,
                          const BliParams& p) {
  BliResult r;
  r.matching = hungarian_max(init);
  r.q = fit_map(xn, yn, r.matching);
  Eigen::MatrixXd s = xn * r.q * yn.transpose();
  r.objective = matched_total(s, r.matching);
  r.objective_history.push_back(r.objective);
  for (int it = 0; it < p.max_em_iters; ++it) {
    auto allowed = candidates(s, p.k_neighbors, p.direction);
    if (p.keep_incumbent)
      for (std::size_t i = 0; i < r.matching.size(); ++i) allowed(static_cast<Eigen::Index>(i), r.matching[i]) = true;
    const Eigen::MatrixXd masked = allowed.select(s, -std::numeric_limits<double>::infinity());
    auto next = hungarian_max(masked);
    if (next.empty()) {
      r.fallback_used = true;
      next = hungarian_max(s);
    }
    r.iterations = it + 1;
    const bool same = next == r.matching;
    r.matching = std::move(next);
    r.q = fit_map(xn, yn, r.matching);
    s = xn * r.q * yn.transpose();
    r.objective = matched_total(s, r.matching);
    r.objective_history.push_back(r.objective);
    if (same) break;
  }
  return r;
}

}  // namespace detail

// Unsupervised lexicon induction by hard EM: the matching is the latent
// variable (E-step: optimal one-to-one assignment on cosine similarity,
// restricted to nearest-neighbour candidates), the map is refitted by
// Procrustes on the matched pairs (M-step). Inputs are column-centered and
// row-normalized first. The best of `restarts` runs is kept.
inline BliResult bli(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const BliParams& p = {}) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw Error(Errc::shape_mismatch, "BLI inputs differ in shape");
  if (p.k_neighbors < 1) throw Error(Errc::invalid_parameter, "k_neighbors must be >= 1");
  if (p.restarts < 1) throw Error(Errc::invalid_parameter, "restarts must be >= 1");
  const Eigen::MatrixXd xn = normalize_rows(center_columns(x)), yn = normalize_rows(center_columns(y));
  const Eigen::MatrixXd init = detail::profile_scores(xn, yn);
  BliResult best;
  bool have = false;
  for (int r = 0; r < p.restarts; ++r) {
    Eigen::MatrixXd start = init;
    if (r > 0) {
      Rng rng(derive_seed(p.seed, hash_string("bli-restart"), static_cast<std::uint64_t>(r)));
      for (Eigen::Index i = 0; i < start.size(); ++i) start.data()[i] += p.restart_noise * rng.normal();
    }
    auto res = detail::bli_once(xn, yn, start, p);
    res.best_restart = r;
    if (!have || res.objective > best.objective + 1e-12) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

}  // namespace swp::alignment
