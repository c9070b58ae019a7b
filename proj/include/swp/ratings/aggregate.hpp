#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "swp/core/error.hpp"
#include "swp/core/features.hpp"
#include "swp/core/types.hpp"
#include "swp/ratings/records.hpp"

namespace swp::ratings {

enum class MissingPolicy { error, fill_midpoint };
inline constexpr double kLikertMidpoint = 3.0;

inline MissingPolicy missing_policy_from_string(std::string_view s) {
  if (s == "error") return MissingPolicy::error;
  if (s == "fill-midpoint" || s == "fill_midpoint") return MissingPolicy::fill_midpoint;
  throw Error(Errc::invalid_config, "missing_policy must be error|fill-midpoint");
}

// Tones x sentences mean quality-of-fit ratings. Row i is the embedding of
// tones[i].
struct RatingMatrix {
  std::vector<Tone> tones;
  std::vector<Sentence> sentences;
  Eigen::MatrixXd means;
  Eigen::MatrixXi counts;
  Domain domain = Domain::synthetic;
};

struct SimilarityMatrix {
  std::vector<Tone> tones;
  Eigen::MatrixXd values;          // symmetric, [0,1], unit diagonal
  Eigen::MatrixXi counts;          // records per unordered pair
  Eigen::VectorXd self_similarity; // normalized self-pair means; NaN where unrated
};

struct FeatureRatingMatrix {
  std::vector<Tone> tones;
  std::vector<Feature> features{kFeatures.begin(), kFeatures.end()};
  Eigen::MatrixXd means;  // tones x 4
  Eigen::MatrixXi counts;
};

namespace detail {

template <typename T>
std::unordered_map<std::string, std::size_t> index_of(const std::vector<T>& items, const char* what) {
  std::unordered_map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (!idx.emplace(items[i].text(), i).second)
      throw Error(Errc::invalid_item, std::string("duplicate ") + what + " '" + items[i].text() + "'");
  return idx;
}

inline std::size_t lookup(const std::unordered_map<std::string, std::size_t>& idx, const std::string& key,
                          const char* what) {
  auto it = idx.find(key);
  if (it == idx.end()) throw Error(Errc::unknown_item, std::string("unknown ") + what + " '" + key + "'");
  return it->second;
}

}  // namespace detail

// Per-cell mean of quality-of-fit ratings. Counts above the planned number
// of repeats are accepted as is.
inline RatingMatrix aggregate_matrix(const std::vector<RatingRecord>& records, std::vector<Tone> tones,
                                     std::vector<Sentence> sentences, MissingPolicy policy = MissingPolicy::error,
                                     Domain domain = Domain::synthetic) {
  const auto ti = detail::index_of(tones, "tone");
  const auto si = detail::index_of(sentences, "sentence");
  RatingMatrix rm{std::move(tones), std::move(sentences), {}, {}, domain};
  const auto m = static_cast<Eigen::Index>(rm.tones.size());
  const auto n = static_cast<Eigen::Index>(rm.sentences.size());
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, n);
  rm.counts = Eigen::MatrixXi::Zero(m, n);
  for (const auto& r : records) {
    const auto i = static_cast<Eigen::Index>(detail::lookup(ti, r.tone.text(), "tone"));
    const auto j = static_cast<Eigen::Index>(detail::lookup(si, r.sentence.text(), "sentence"));
    sums(i, j) += r.value;
    rm.counts(i, j) += 1;
  }
  rm.means.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (rm.counts(i, j) > 0) {
        rm.means(i, j) = sums(i, j) / rm.counts(i, j);
      } else if (policy == MissingPolicy::fill_midpoint) {
        rm.means(i, j) = kLikertMidpoint;
      } else {
        throw Error(Errc::empty_cell, "no ratings for tone '" + rm.tones[i].text() + "' x sentence '" +
                                          rm.sentences[j].text() + "'");
      }
    }
  return rm;
}

// Pair means mapped from [1,5] to [0,1] by (mean - 1) / 4. Records for
// (a, b) and (b, a) pool into one pair. Self pairs are part of the plan and
// are checked for coverage when `require_self_pairs` is set, but the
// diagonal is fixed at 1 and their normalized means are reported separately.
inline SimilarityMatrix aggregate_similarity(const std::vector<SimilarityRecord>& records, std::vector<Tone> tones,
                                             bool require_self_pairs = true) {
  const auto ti = detail::index_of(tones, "tone");
  const auto m = static_cast<Eigen::Index>(tones.size());
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, m);
  SimilarityMatrix sm{std::move(tones), Eigen::MatrixXd::Identity(m, m), Eigen::MatrixXi::Zero(m, m),
                      Eigen::VectorXd::Constant(m, std::numeric_limits<double>::quiet_NaN())};
  for (const auto& r : records) {
    auto i = static_cast<Eigen::Index>(detail::lookup(ti, r.a.text(), "tone"));
    auto j = static_cast<Eigen::Index>(detail::lookup(ti, r.b.text(), "tone"));
    if (i > j) std::swap(i, j);
    sums(i, j) += r.value;
    sm.counts(i, j) += 1;
  }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) {
      if (sm.counts(i, j) == 0) {
        if (i == j && !require_self_pairs) continue;
        throw Error(Errc::missing_pair,
                    "no similarity judgments for '" + sm.tones[i].text() + "' / '" + sm.tones[j].text() + "'");
      }
      const double v = (sums(i, j) / sm.counts(i, j) - 1.0) / 4.0;
      if (i == j) {
        sm.self_similarity(i) = v;
      } else {
        sm.values(i, j) = sm.values(j, i) = v;
        sm.counts(j, i) = sm.counts(i, j);
      }
    }
  return sm;
}

// Tones in lexicographic order, as seen in the records.
inline std::vector<Tone> tones_in(const std::vector<SimilarityRecord>& records) {
  std::set<Tone> s;
  for (const auto& r : records) {
    s.insert(r.a);
    s.insert(r.b);
  }
  return {s.begin(), s.end()};
}

inline SimilarityMatrix aggregate_similarity(const std::vector<SimilarityRecord>& records,
                                             bool require_self_pairs = true) {
  return aggregate_similarity(records, tones_in(records), require_self_pairs);
}

inline FeatureRatingMatrix aggregate_features(const std::vector<FeatureRecord>& records, std::vector<Tone> tones) {
  const auto ti = detail::index_of(tones, "tone");
  const auto m = static_cast<Eigen::Index>(tones.size());
  constexpr auto k = static_cast<Eigen::Index>(kFeatures.size());
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(m, k);
  FeatureRatingMatrix fm;
  fm.tones = std::move(tones);
  fm.counts = Eigen::MatrixXi::Zero(m, k);
  for (const auto& r : records) {
    const auto i = static_cast<Eigen::Index>(detail::lookup(ti, r.tone.text(), "tone"));
    const auto f = static_cast<Eigen::Index>(r.feature);
    sums(i, f) += r.value;
    fm.counts(i, f) += 1;
  }
  fm.means.resize(m, k);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index f = 0; f < k; ++f) {
      if (fm.counts(i, f) == 0)
        throw Error(Errc::missing_cell, "no '" + std::string(feature_id(kFeatures[f])) + "' ratings for tone '" +
                                            fm.tones[i].text() + "'");
      fm.means(i, f) = sums(i, f) / fm.counts(i, f);
    }
  return fm;
}

}  // namespace swp::ratings
