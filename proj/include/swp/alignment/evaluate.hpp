#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swp/alignment/bli.hpp"
#include "swp/alignment/embedding.hpp"
#include "swp/alignment/gwot.hpp"
#include "swp/alignment/procrustes.hpp"
#include "swp/analysis/stats.hpp"
#include "swp/core/error.hpp"
#include "swp/core/rng.hpp"

namespace swp::alignment {

enum class Method { procrustes, gwot, bli, random };

constexpr std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::procrustes: return "procrustes";
    case Method::gwot: return "gwot";
    case Method::bli: return "bli";
    case Method::random: return "random";
  }
  return "?";
}

inline Method method_from_string(std::string_view s) {
  for (auto m : {Method::procrustes, Method::gwot, Method::bli, Method::random})
    if (s == to_string(m)) return m;
  throw Error(Errc::invalid_config, "unknown method '" + std::string(s) + "'");
}

struct AlignmentResult {
  Method method = Method::procrustes;
  std::optional<Eigen::MatrixXd> map;                     // orthogonal, n x n
  std::optional<Eigen::MatrixXd> coupling;                // m x m transport plan
  std::optional<std::vector<Eigen::Index>> matching;      // row i of X <-> row matching[i] of Y
  std::uint64_t seed = 0;
  nlohmann::json hyperparameters = nlohmann::json::object();
  std::vector<double> objective_history;
  bool fallback_used = false;
};

// Procrustes under the given correspondence (identity when none: the tone
// lists are shared).
inline AlignmentResult align_procrustes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                        const std::vector<Eigen::Index>* match = nullptr) {
  AlignmentResult r;
  r.method = Method::procrustes;
  if (match) {
    Eigen::MatrixXd yp(y.rows(), y.cols());
    for (std::size_t i = 0; i < match->size(); ++i) yp.row(static_cast<Eigen::Index>(i)) = y.row((*match)[i]);
    r.map = procrustes(x, yp);
    r.matching = *match;
  } else {
    r.map = procrustes(x, y);
    std::vector<Eigen::Index> id(static_cast<std::size_t>(x.rows()));
    std::iota(id.begin(), id.end(), 0);
    r.matching = id;
  }
  r.hyperparameters = {{"correspondence", match ? "given" : "identity"}};
  return r;
}

// Baseline: a uniformly random one-to-one correspondence, then Procrustes.
inline AlignmentResult align_random(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(x.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, hash_string("random-matching")));
  rng.shuffle(perm);
  auto r = align_procrustes(x, y, &perm);
  r.method = Method::random;
  r.seed = seed;
  r.hyperparameters = {{"correspondence", "uniform random permutation"}};
  return r;
}

inline AlignmentResult align_gwot(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const GwotParams& p = {}) {
  auto g = gwot(center_columns(x), center_columns(y), p);
  AlignmentResult r;
  r.method = Method::gwot;
  r.coupling = std::move(g.coupling);
  r.seed = p.seed;
  r.hyperparameters = p.to_json();
  r.hyperparameters["outer_iterations"] = g.outer_iterations;
  r.hyperparameters["converged"] = g.converged;
  r.objective_history = std::move(g.objective_history);
  return r;
}

inline AlignmentResult align_bli(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const BliParams& p = {}) {
  auto b = bli(x, y, p);
  AlignmentResult r;
  r.method = Method::bli;
  r.map = std::move(b.q);
  r.matching = std::move(b.matching);
  r.seed = p.seed;
  r.hyperparameters = p.to_json();
  r.hyperparameters["best_restart"] = b.best_restart;
  r.objective_history = std::move(b.objective_history);
  r.fallback_used = b.fallback_used;
  return r;
}

namespace detail {

inline void check_result(const AlignmentResult& r, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() != y.cols() && r.map) throw Error(Errc::method_mismatch, "map needs equal embedding dimensions");
  if (r.map && (r.map->rows() != x.cols() || r.map->cols() != y.cols()))
    throw Error(Errc::method_mismatch, "map shape does not fit these embeddings");
  if (r.coupling && (r.coupling->rows() != x.rows() || r.coupling->cols() != y.rows()))
    throw Error(Errc::method_mismatch, "coupling shape does not fit these embeddings");
  if (!r.map && !r.coupling) throw Error(Errc::method_mismatch, "result carries neither a map nor a coupling");
}

}  // namespace detail

// X expressed in Y's coordinates: rotated centered rows plus Y's column
// means, or the coupling-weighted barycenter of Y's rows.
inline Eigen::MatrixXd map_x_into_y(const AlignmentResult& r, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  detail::check_result(r, x, y);
  if (r.map) return (center_columns(x) * *r.map).rowwise() + y.colwise().mean();
  const Eigen::VectorXd mass = r.coupling->rowwise().sum();
  return mass.cwiseInverse().asDiagonal() * (*r.coupling * y);
}

inline Eigen::MatrixXd map_y_into_x(const AlignmentResult& r, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  detail::check_result(r, x, y);
  if (r.map) return (center_columns(y) * r.map->transpose()).rowwise() + x.colwise().mean();
  const Eigen::VectorXd mass = r.coupling->colwise().sum().transpose();
  return mass.cwiseInverse().asDiagonal() * (r.coupling->transpose() * x);
}

inline Eigen::MatrixXd row_correlations(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = analysis::pearson(a.row(i).transpose(), b.row(j).transpose());
  return out;
}

// Predicted cross-domain correlation: Pearson between X mapped into Y's
// sentence coordinates and Y's rows.
inline Eigen::MatrixXd predict_cross_similarity(const AlignmentResult& r, const Eigen::MatrixXd& x,
                                                const Eigen::MatrixXd& y) {
  return row_correlations(map_x_into_y(r, x, y), y);
}

// Pearson correlation over all entries.
inline double eval_similarity_recovery(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
    throw Error(Errc::shape_mismatch, "predicted and ground-truth matrices differ in shape");
  return analysis::pearson(Eigen::Map<const Eigen::VectorXd>(predicted.data(), predicted.size()),
                           Eigen::Map<const Eigen::VectorXd>(truth.data(), truth.size()));
}

// Correlation of the upper triangles of two intra-similarity matrices.
inline double preservation(const Eigen::MatrixXd& before, const Eigen::MatrixXd& after) {
  if (before.rows() != before.cols() || after.rows() != after.cols() || before.rows() != after.rows())
    throw Error(Errc::shape_mismatch, "intra matrices must be square and of equal size");
  return analysis::pearson(analysis::upper_triangle(before), analysis::upper_triangle(after));
}

struct Preservation {
  double a;
  double b;
};

// Each domain's intra-correlation structure before and after mapping it
// into the other domain's coordinates.
inline Preservation eval_domain_preservation(const AlignmentResult& r, const Eigen::MatrixXd& x,
                                             const Eigen::MatrixXd& y) {
  return {preservation(row_correlations(x, x), row_correlations(map_x_into_y(r, x, y), map_x_into_y(r, x, y))),
          preservation(row_correlations(y, y), row_correlations(map_y_into_x(r, x, y), map_y_into_x(r, x, y)))};
}

inline constexpr std::string_view kKnnFormula =
    "mean over source tones of |top-k predicted targets intersect top-k ground-truth targets| / k; "
    "ties in a row go to the lower target index";

inline std::vector<Eigen::Index> top_k(const Eigen::Ref<const Eigen::RowVectorXd>& row, int k) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(row.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return row(a) > row(b) || (row(a) == row(b) && a < b);
  });
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline double eval_knn_matching(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth, int k) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
    throw Error(Errc::shape_mismatch, "predicted and ground-truth matrices differ in shape");
  if (k < 1 || k >= truth.cols())
    throw Error(Errc::invalid_parameter, "k must be in [1, " + std::to_string(truth.cols() - 1) + "]");
  double total = 0.0;
  for (Eigen::Index i = 0; i < truth.rows(); ++i) {
    const auto p = top_k(predicted.row(i), k), t = top_k(truth.row(i), k);
    std::vector<Eigen::Index> both;
    std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::back_inserter(both));
    total += static_cast<double>(both.size()) / k;
  }
  return total / static_cast<double>(truth.rows());
}

}  // namespace swp::alignment
