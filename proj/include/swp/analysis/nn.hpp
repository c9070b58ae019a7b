#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swp/analysis/bootstrap.hpp"
#include "swp/analysis/correlation.hpp"
#include "swp/analysis/mds.hpp"
#include "swp/core/error.hpp"
#include "swp/ratings/aggregate.hpp"

namespace swp::analysis {

enum class NnSpace { correlation, mds };

inline NnSpace nn_space_from_string(std::string_view s) {
  if (s == "correlation") return NnSpace::correlation;
  if (s == "mds") return NnSpace::mds;
  throw Error(Errc::invalid_config, "nn space must be correlation|mds");
}

struct NnEdge {
  std::string source;
  std::string target;
  double frequency = 1.0;  // share of bootstrap replicates reproducing the edge
};

struct NnMatchGraph {
  Domain domain_a = Domain::human;
  Domain domain_b = Domain::llm;
  std::vector<NnEdge> a_to_b;  // one edge per tone of a
  std::vector<NnEdge> b_to_a;  // one edge per tone of b
  std::size_t n_replicates = 0;
  std::size_t n_discarded = 0;
};

// Best column per row of a score matrix; higher is better. Equal scores go
// to the lexicographically smallest column label.
inline std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& score, const std::vector<std::string>& col_labels) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < score.rows(); ++i) {
    std::size_t best = 0;
    for (Eigen::Index j = 1; j < score.cols(); ++j) {
      const auto ju = static_cast<std::size_t>(j);
      if (score(i, j) > score(i, static_cast<Eigen::Index>(best)) ||
          (score(i, j) == score(i, static_cast<Eigen::Index>(best)) && col_labels[ju] < col_labels[best]))
        best = ju;
    }
    out.push_back(best);
  }
  return out;
}

namespace detail {

struct NnPoint {
  std::vector<std::size_t> fwd, bwd;
};

inline std::vector<std::string> tone_texts(const std::vector<Tone>& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(t.text());
  return out;
}

inline NnPoint nn_once(const ratings::RatingMatrix& a, const ratings::RatingMatrix& b, NnSpace space,
                       const MdsOptions& mds_opt) {
  const auto la = tone_texts(a.tones), lb = tone_texts(b.tones);
  Eigen::MatrixXd score;
  if (space == NnSpace::correlation) {
    score = cross_correlation(a, b).values;
  } else {
    const auto sol = mds_from_correlation(combined_matrix(a, b), mds_opt);
    const auto m = static_cast<Eigen::Index>(a.tones.size()), n = static_cast<Eigen::Index>(b.tones.size());
    score.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) score(i, j) = -(sol.points.row(i) - sol.points.row(m + j)).norm();
  }
  return {argmax_rows(score, lb), argmax_rows(score.transpose(), la)};
}

inline ratings::RatingMatrix with_columns(const ratings::RatingMatrix& rm, const std::vector<std::size_t>& cols) {
  ratings::RatingMatrix out{rm.tones, {}, Eigen::MatrixXd(rm.means.rows(), static_cast<Eigen::Index>(cols.size())),
                            {}, rm.domain};
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.sentences.push_back(rm.sentences[cols[c]]);
    out.means.col(static_cast<Eigen::Index>(c)) = rm.means.col(static_cast<Eigen::Index>(cols[c]));
  }
  return out;
}

}  // namespace detail

// Nearest cross-domain neighbour of every tone, in both directions. The
// point estimate uses all sentences; each bootstrap replicate resamples the
// shared sentences with replacement and recomputes the match. Replicates in
// which some tone's resampled ratings are constant are discarded.
inline NnMatchGraph nn_matching(const ratings::RatingMatrix& a, const ratings::RatingMatrix& b,
                                const BootstrapOptions& opt = {}, NnSpace space = NnSpace::correlation,
                                const MdsOptions& mds_opt = {}) {
  detail::check_same_sentences(a, b);
  const auto la = detail::tone_texts(a.tones), lb = detail::tone_texts(b.tones);
  const auto point = detail::nn_once(a, b, space, mds_opt);
  NnMatchGraph g{a.domain, b.domain, {}, {}, 0, 0};
  const std::size_t n_s = a.sentences.size();
  const auto reps = detail::run_replicates<detail::NnPoint>(opt.n_boot, opt.seed, opt.threads, [&](std::size_t, Rng& rng) {
    std::vector<std::size_t> cols(n_s);
    for (auto& c : cols) c = rng.index(n_s);
    return detail::nn_once(detail::with_columns(a, cols), detail::with_columns(b, cols), space, mds_opt);
  });
  std::vector<std::size_t> hit_f(la.size(), 0), hit_b(lb.size(), 0);
  for (const auto& r : reps) {
    if (!r) {
      ++g.n_discarded;
      continue;
    }
    ++g.n_replicates;
    for (std::size_t i = 0; i < la.size(); ++i) hit_f[i] += r->fwd[i] == point.fwd[i];
    for (std::size_t j = 0; j < lb.size(); ++j) hit_b[j] += r->bwd[j] == point.bwd[j];
  }
  const double n = static_cast<double>(g.n_replicates);
  for (std::size_t i = 0; i < la.size(); ++i)
    g.a_to_b.push_back({la[i], lb[point.fwd[i]], n > 0 ? static_cast<double>(hit_f[i]) / n : 1.0});
  for (std::size_t j = 0; j < lb.size(); ++j)
    g.b_to_a.push_back({lb[j], la[point.bwd[j]], n > 0 ? static_cast<double>(hit_b[j]) / n : 1.0});
  return g;
}

// Matching read directly off a cross-correlation matrix, without resampling.
inline NnMatchGraph nn_matching(const CorrelationMatrix& cross) {
  if (cross.values.rows() != cross.values.cols()) throw Error(Errc::shape_mismatch, "cross matrix must be square");
  NnMatchGraph g;
  const auto f = argmax_rows(cross.values, cross.cols);
  const auto b = argmax_rows(cross.values.transpose(), cross.rows);
  for (std::size_t i = 0; i < f.size(); ++i) g.a_to_b.push_back({cross.rows[i], cross.cols[f[i]], 1.0});
  for (std::size_t j = 0; j < b.size(); ++j) g.b_to_a.push_back({cross.cols[j], cross.rows[b[j]], 1.0});
  return g;
}

inline nlohmann::json to_json(const NnMatchGraph& g) {
  auto edges = [](const std::vector<NnEdge>& es) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : es) j.push_back({{"source", e.source}, {"target", e.target}, {"frequency", e.frequency}});
    return j;
  };
  return {{"domain_a", std::string(to_string(g.domain_a))},
          {"domain_b", std::string(to_string(g.domain_b))},
          {"a_to_b", edges(g.a_to_b)},
          {"b_to_a", edges(g.b_to_a)},
          {"n_replicates", g.n_replicates},
          {"n_discarded", g.n_discarded}};
}

}  // namespace swp::analysis
