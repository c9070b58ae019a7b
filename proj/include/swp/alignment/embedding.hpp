#pragma once

#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swp/core/error.hpp"
#include "swp/core/types.hpp"
#include "swp/ratings/aggregate.hpp"

namespace swp::alignment {

// Rows are tone embeddings (mean ratings over a shared sentence list).
struct EmbeddingSet {
  std::vector<std::string> labels;
  Eigen::MatrixXd vectors;
  Domain domain = Domain::synthetic;

  Eigen::Index size() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }

  void check() const {
    if (static_cast<Eigen::Index>(labels.size()) != vectors.rows())
      throw Error(Errc::shape_mismatch, "one label per embedding row");
    std::set<std::string> seen;
    for (const auto& l : labels)
      if (!seen.insert(l).second) throw Error(Errc::invalid_item, "duplicate label '" + l + "'");
    for (Eigen::Index i = 0; i < vectors.rows(); ++i)
      if ((vectors.row(i).array() == vectors(i, 0)).all())
        throw Error(Errc::degenerate_row, "embedding '" + labels[static_cast<std::size_t>(i)] + "' is constant");
  }

  static EmbeddingSet from_ratings(const ratings::RatingMatrix& rm) {
    EmbeddingSet e;
    for (const auto& t : rm.tones) e.labels.push_back(t.text());
    e.vectors = rm.means;
    e.domain = rm.domain;
    e.check();
    return e;
  }
};

// Subtracts each column's mean across rows (per-sentence centering).
inline Eigen::MatrixXd center_columns(const Eigen::MatrixXd& x) { return x.rowwise() - x.colwise().mean(); }

}  // namespace swp::alignment
