#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swp/analysis/stats.hpp"
#include "swp/core/error.hpp"
#include "swp/core/types.hpp"
#include "swp/ratings/aggregate.hpp"

namespace swp::analysis {

enum class CorrelationKind { intra, cross, combined };

constexpr std::string_view to_string(CorrelationKind k) noexcept {
  switch (k) {
    case CorrelationKind::intra: return "intra";
    case CorrelationKind::cross: return "cross";
    case CorrelationKind::combined: return "combined";
  }
  return "intra";
}

struct CorrelationMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  Eigen::MatrixXd values;
  CorrelationKind kind = CorrelationKind::intra;
};

// Row label used for a tone in a given domain, e.g. "happy@human".
inline std::string domain_label(const std::string& tone, Domain d) {
  return tone + "@" + std::string(to_string(d));
}

namespace detail {

inline Eigen::MatrixXd standardized_rows(const ratings::RatingMatrix& rm) {
  if (rm.sentences.size() < 2)
    throw Error(Errc::degenerate_variance, "correlation needs at least 2 sentences");
  const Eigen::MatrixXd c = rm.means.colwise() - rm.means.rowwise().mean();
  Eigen::MatrixXd z(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const double ss = c.row(i).squaredNorm();
    if (nearly_constant(rm.means.row(i).transpose(), ss))
      throw Error(Errc::degenerate_row, "tone '" + rm.tones[static_cast<std::size_t>(i)].text() +
                                            "' has identical ratings for every sentence");
    z.row(i) = c.row(i) / std::sqrt(ss);
  }
  return z;
}

inline void check_same_sentences(const ratings::RatingMatrix& a, const ratings::RatingMatrix& b) {
  if (a.sentences.size() != b.sentences.size())
    throw Error(Errc::sentence_set_mismatch, "matrices rate " + std::to_string(a.sentences.size()) + " and " +
                                                 std::to_string(b.sentences.size()) + " sentences");
  for (std::size_t j = 0; j < a.sentences.size(); ++j)
    if (a.sentences[j] != b.sentences[j])
      throw Error(Errc::sentence_set_mismatch, "sentence " + std::to_string(j + 1) + " differs: '" +
                                                   a.sentences[j].text() + "' vs '" + b.sentences[j].text() + "'");
}

inline std::vector<std::string> labels(const ratings::RatingMatrix& rm, bool with_domain) {
  std::vector<std::string> out;
  for (const auto& t : rm.tones) out.push_back(with_domain ? domain_label(t.text(), rm.domain) : t.text());
  return out;
}

inline Eigen::MatrixXd clamp_unit(Eigen::MatrixXd m) { return m.cwiseMax(-1.0).cwiseMin(1.0); }

}  // namespace detail

inline CorrelationMatrix intra_correlation(const ratings::RatingMatrix& rm) {
  const Eigen::MatrixXd z = detail::standardized_rows(rm);
  Eigen::MatrixXd r = detail::clamp_unit(z * z.transpose());
  r = (r + r.transpose()) / 2.0;
  r.diagonal().setOnes();
  const auto l = detail::labels(rm, false);
  return {l, l, std::move(r), CorrelationKind::intra};
}

inline CorrelationMatrix cross_correlation(const ratings::RatingMatrix& a, const ratings::RatingMatrix& b) {
  detail::check_same_sentences(a, b);
  const Eigen::MatrixXd za = detail::standardized_rows(a), zb = detail::standardized_rows(b);
  return {detail::labels(a, false), detail::labels(b, false), detail::clamp_unit(za * zb.transpose()),
          CorrelationKind::cross};
}

// [[intra_a, cross], [cross^T, intra_b]] over 2m rows labelled tone@domain.
inline CorrelationMatrix combined_matrix(const ratings::RatingMatrix& a, const ratings::RatingMatrix& b) {
  const auto ia = intra_correlation(a), ib = intra_correlation(b);
  const auto x = cross_correlation(a, b);
  const auto m = ia.values.rows(), n = ib.values.rows();
  Eigen::MatrixXd v(m + n, m + n);
  v.topLeftCorner(m, m) = ia.values;
  v.topRightCorner(m, n) = x.values;
  v.bottomLeftCorner(n, m) = x.values.transpose();
  v.bottomRightCorner(n, n) = ib.values;
  auto labels = detail::labels(a, true);
  for (auto& l : detail::labels(b, true)) labels.push_back(std::move(l));
  if (a.domain == b.domain)
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] += i < static_cast<std::size_t>(m) ? "#a" : "#b";
  return {labels, labels, std::move(v), CorrelationKind::combined};
}

inline nlohmann::json to_json(const CorrelationMatrix& c) {
  nlohmann::json values = nlohmann::json::array();
  for (Eigen::Index i = 0; i < c.values.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < c.values.cols(); ++j) row.push_back(c.values(i, j));
    values.push_back(row);
  }
  return {{"kind", std::string(to_string(c.kind))}, {"rows", c.rows}, {"cols", c.cols}, {"values", values}};
}

}  // namespace swp::analysis
