#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swp/analysis/correlation.hpp"
#include "swp/analysis/mds.hpp"
#include "swp/core/error.hpp"
#include "swp/core/features.hpp"
#include "swp/ratings/aggregate.hpp"

namespace swp::analysis {

struct FeatureArrow {
  std::string feature;
  Domain domain = Domain::synthetic;
  Eigen::Vector2d direction = Eigen::Vector2d::Zero();
  double explained_variance = 0.0;
};

// Splits "tone@domain" at the last '@'.
inline std::pair<std::string, std::string> split_label(const std::string& label) {
  const auto at = label.rfind('@');
  if (at == std::string::npos) return {label, ""};
  return {label.substr(0, at), label.substr(at + 1)};
}

// Rows of the solution whose label carries the given suffix ("human", or
// "synthetic#a" when both sides share a domain).
inline std::vector<Eigen::Index> domain_rows(const MdsSolution& s, std::string_view tag) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < s.labels.size(); ++i)
    if (split_label(s.labels[i]).second == tag) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

inline std::vector<Eigen::Index> domain_rows(const MdsSolution& s, Domain d) { return domain_rows(s, to_string(d)); }

inline Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

// Joint least squares of each coordinate axis on the standardized feature
// columns (plus intercept): coord_axis = a0 + sum_f a_f z_f. Column f of the
// result is the coefficient vector of feature f, one entry per axis.
inline Eigen::MatrixXd regress_axes(const Eigen::MatrixXd& coords, const Eigen::MatrixXd& features,
                                    const std::vector<std::string>& names = {}) {
  const auto n = features.rows(), k = features.cols();
  if (coords.rows() != n) throw Error(Errc::shape_mismatch, "one feature row per point");
  if (n < k + 2) throw Error(Errc::rank_deficient, "fewer points than regression parameters");
  Eigen::MatrixXd design(n, k + 1);
  design.col(0).setOnes();
  for (Eigen::Index f = 0; f < k; ++f) {
    const Eigen::VectorXd c = features.col(f).array() - features.col(f).mean();
    const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * std::max(1.0, features.col(f).cwiseAbs().maxCoeff())))
      throw Error(Errc::rank_deficient,
                  "feature '" + (f < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(f)]
                                                                             : std::to_string(f)) +
                      "' is constant");
    design.col(f + 1) = c / sd;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < k + 1) throw Error(Errc::rank_deficient, "feature columns are collinear");
  const Eigen::MatrixXd beta = qr.solve(coords);  // (k+1) x dim
  return beta.bottomRows(k).transpose();
}

// Share of the domain's total point variance carried by projections onto the
// arrow's direction.
inline double explained_variance(const Eigen::MatrixXd& points, const Eigen::VectorXd& arrow) {
  const double len = arrow.norm();
  if (len == 0.0) throw Error(Errc::zero_vector, "arrow has zero length");
  if (points.cols() != arrow.size()) throw Error(Errc::shape_mismatch, "arrow and points differ in dimension");
  const Eigen::MatrixXd c = points.rowwise() - points.colwise().mean();
  const double total = c.squaredNorm();
  if (!(total > 0.0)) throw Error(Errc::degenerate_variance, "points have no spread");
  return (c * (arrow / len)).squaredNorm() / total;
}

inline double explained_variance(const MdsSolution& s, const Eigen::VectorXd& arrow, Domain d) {
  return explained_variance(select_rows(s.points, domain_rows(s, d)), arrow);
}

// Feature arrows for one domain, fitted on that domain's points only.
inline std::vector<FeatureArrow> biplot_arrows(const MdsSolution& s, const ratings::FeatureRatingMatrix& fm,
                                               std::string_view tag) {
  if (s.points.cols() != 2) throw Error(Errc::shape_mismatch, "biplot needs a 2-D solution");
  const auto rows = domain_rows(s, tag);
  if (rows.empty()) throw Error(Errc::missing_cell, "solution has no points for domain " + std::string(tag));
  const Domain d = domain_from_string(tag.substr(0, tag.find('#')));
  Eigen::MatrixXd feats(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(fm.features.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto tone = split_label(s.labels[static_cast<std::size_t>(rows[r])]).first;
    auto it = std::find_if(fm.tones.begin(), fm.tones.end(), [&](const Tone& t) { return t.text() == tone; });
    if (it == fm.tones.end()) throw Error(Errc::missing_cell, "no feature ratings for tone '" + tone + "'");
    feats.row(static_cast<Eigen::Index>(r)) = fm.means.row(it - fm.tones.begin());
  }
  std::vector<std::string> names;
  for (auto f : fm.features) names.emplace_back(feature_id(f));
  const Eigen::MatrixXd pts = select_rows(s.points, rows);
  const Eigen::MatrixXd coef = regress_axes(pts, feats, names);
  std::vector<FeatureArrow> out;
  for (std::size_t f = 0; f < names.size(); ++f) {
    FeatureArrow a{names[f], d, coef.col(static_cast<Eigen::Index>(f)), 0.0};
    a.explained_variance = a.direction.norm() > 0.0 ? explained_variance(pts, a.direction) : 0.0;
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<FeatureArrow> biplot_arrows(const MdsSolution& s, const ratings::FeatureRatingMatrix& fm,
                                               Domain d) {
  return biplot_arrows(s, fm, to_string(d));
}

inline nlohmann::json to_json(const FeatureArrow& a) {
  return {{"feature", a.feature},
          {"domain", std::string(to_string(a.domain))},
          {"direction", {a.direction.x(), a.direction.y()}},
          {"explained_variance", a.explained_variance}};
}

struct ToneDistance {
  std::string tone;
  double distance;
};

// Distance between each tone's two domain points, largest first (ties by
// tone name). Labels must be "tone@domain" with exactly two domains.
inline std::vector<ToneDistance> same_tone_distances(const MdsSolution& s) {
  std::map<std::string, std::map<std::string, Eigen::Index>> where;
  std::set<std::string> domains;
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    auto [tone, dom] = split_label(s.labels[i]);
    domains.insert(dom);
    where[tone][dom] = static_cast<Eigen::Index>(i);
  }
  if (domains.size() != 2)
    throw Error(Errc::missing_counterpart, "expected points from exactly 2 domains, found " +
                                               std::to_string(domains.size()));
  std::vector<ToneDistance> out;
  for (const auto& [tone, doms] : where) {
    if (doms.size() != 2) throw Error(Errc::missing_counterpart, "tone '" + tone + "' appears in one domain only");
    out.push_back({tone, (s.points.row(doms.begin()->second) - s.points.row(doms.rbegin()->second)).norm()});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.distance > b.distance; });
  return out;
}

}  // namespace swp::analysis
