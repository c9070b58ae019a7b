#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swp/analysis/correlation.hpp"
#include "swp/analysis/stats.hpp"
#include "swp/core/error.hpp"
#include "swp/core/rng.hpp"
#include "swp/ratings/aggregate.hpp"
#include "swp/ratings/records.hpp"

namespace swp::analysis {

inline constexpr std::size_t kDefaultBootstrap = 5000;

struct BootstrapResult {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_replicates = 0;  // replicates that produced a value
  std::size_t n_discarded = 0;   // replicates whose statistic was undefined
  std::uint64_t rng_seed = 0;
};

inline nlohmann::json to_json(const BootstrapResult& r) {
  return {{"estimate", r.estimate}, {"ci_low", r.ci_low},           {"ci_high", r.ci_high},
          {"n_replicates", r.n_replicates}, {"n_discarded", r.n_discarded}, {"rng_seed", r.rng_seed}};
}

struct BootstrapOptions {
  std::size_t n_boot = kDefaultBootstrap;
  std::uint64_t seed = 0;
  double level = 0.95;
  unsigned threads = 0;  // 0 = hardware concurrency
};

namespace detail {

// Runs replicate(b, rng) for b in [0, n) across worker threads. Every
// replicate owns its own stream, derived from (seed, b), and writes to slot
// b, so the result does not depend on scheduling.
template <typename R = double>
std::vector<std::optional<R>> run_replicates(std::size_t n, std::uint64_t seed, unsigned threads,
                                             const std::function<R(std::size_t, Rng&)>& replicate) {
  std::vector<std::optional<R>> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t b; (b = next.fetch_add(1)) < n;) {
      Rng rng(derive_seed(seed, hash_string("bootstrap"), b));
      try {
        out[b] = replicate(b, rng);
      } catch (const Error& e) {
        if (e.code() != Errc::degenerate_variance && e.code() != Errc::degenerate_row) {
          std::lock_guard lk(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      } catch (...) {
        std::lock_guard lk(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

// Percentile interval of the replicate values, widened if needed so that it
// contains the point estimate.
inline BootstrapResult summarize(double estimate, const std::vector<std::optional<double>>& reps,
                                 const BootstrapOptions& opt) {
  std::vector<double> v;
  for (const auto& r : reps)
    if (r) v.push_back(*r);
  if (v.empty()) throw Error(Errc::degenerate_variance, "every bootstrap replicate was degenerate");
  std::sort(v.begin(), v.end());
  const double a = (1.0 - opt.level) / 2.0;
  BootstrapResult res;
  res.estimate = estimate;
  res.ci_low = std::min(quantile_sorted(v, a), estimate);
  res.ci_high = std::max(quantile_sorted(v, 1.0 - a), estimate);
  res.n_replicates = v.size();
  res.n_discarded = reps.size() - v.size();
  res.rng_seed = opt.seed;
  return res;
}

}  // namespace detail

// Nonparametric bootstrap: resample `data` with replacement n_boot times.
template <typename T, typename Stat>
BootstrapResult bootstrap_ci(const std::vector<T>& data, Stat statistic, const BootstrapOptions& opt = {}) {
  if (data.empty()) throw Error(Errc::invalid_parameter, "bootstrap of empty data");
  if (opt.n_boot < 1) throw Error(Errc::invalid_parameter, "n_boot must be >= 1");
  const double estimate = statistic(data);
  auto reps = detail::run_replicates<double>(opt.n_boot, opt.seed, opt.threads, [&](std::size_t, Rng& rng) {
    std::vector<T> sample;
    sample.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) sample.push_back(data[rng.index(data.size())]);
    return statistic(sample);
  });
  return detail::summarize(estimate, reps, opt);
}

inline double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

enum class PartitionUnit { trials, per_pair_ratings, sentences };

inline PartitionUnit partition_unit_from_string(std::string_view s) {
  if (s == "trials") return PartitionUnit::trials;
  if (s == "per-pair-ratings" || s == "per_pair_ratings") return PartitionUnit::per_pair_ratings;
  if (s == "sentences") return PartitionUnit::sentences;
  throw Error(Errc::invalid_config, "partition unit must be trials|per-pair-ratings|sentences");
}

// Split-half reliability. Units are bisected at random within each group
// (a single group means an unstratified split; odd groups drop one unit at
// random). `half_stat` maps the unit indices of one half to a vector; the
// replicate value is the Pearson r between the two halves' vectors. The
// estimate is the mean r over replicates. No Spearman-Brown correction.
template <typename HalfStat>
BootstrapResult split_half(const std::vector<std::vector<std::size_t>>& groups, HalfStat half_stat,
                           const BootstrapOptions& opt = {}) {
  if (opt.n_boot < 1) throw Error(Errc::invalid_parameter, "n_boot must be >= 1");
  if (groups.empty()) throw Error(Errc::insufficient_units, "no units to split");
  std::size_t total = 0;
  for (const auto& g : groups) {
    if (groups.size() > 1 && g.size() < 2)
      throw Error(Errc::insufficient_units, "every group needs at least 2 units, one per half");
    total += g.size();
  }
  if (groups.size() == 1 && total < 4) throw Error(Errc::insufficient_units, "need at least 2 units per half");
  auto reps = detail::run_replicates<double>(opt.n_boot, opt.seed, opt.threads, [&](std::size_t, Rng& rng) {
    std::vector<std::size_t> a, b;
    for (const auto& g : groups) {
      auto s = g;
      rng.shuffle(s);
      const std::size_t h = s.size() / 2;
      a.insert(a.end(), s.begin(), s.begin() + static_cast<std::ptrdiff_t>(h));
      b.insert(b.end(), s.begin() + static_cast<std::ptrdiff_t>(h), s.begin() + static_cast<std::ptrdiff_t>(2 * h));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const Eigen::VectorXd va = half_stat(a), vb = half_stat(b);
    return pearson(va, vb);
  });
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : reps)
    if (r) sum += *r, ++n;
  if (n == 0) throw Error(Errc::degenerate_variance, "every split-half replicate was degenerate");
  return detail::summarize(sum / static_cast<double>(n), reps, opt);
}

inline std::vector<std::vector<std::size_t>> single_group(std::size_t n) {
  std::vector<std::size_t> g(n);
  std::iota(g.begin(), g.end(), 0);
  return {g};
}

// Tone histogram scheme: trials are the units; each half's histogram is a
// count vector over every tone seen in the full data.
inline BootstrapResult split_half_histogram(const std::vector<std::string>& trial_tones,
                                            const BootstrapOptions& opt = {}) {
  std::map<std::string, Eigen::Index> vocab;
  for (const auto& t : trial_tones) vocab.emplace(t, 0);
  Eigen::Index k = 0;
  for (auto& [t, i] : vocab) i = k++;
  std::vector<Eigen::Index> code;
  for (const auto& t : trial_tones) code.push_back(vocab.at(t));
  return split_half(
      single_group(trial_tones.size()),
      [&](const std::vector<std::size_t>& half) {
        Eigen::VectorXd h = Eigen::VectorXd::Zero(k);
        for (auto u : half) h(code[u]) += 1.0;
        return h;
      },
      opt);
}

// Similarity scheme: the ratings of each off-diagonal pair are bisected; each
// half yields a vector of pair means. Self pairs are left out because the
// similarity diagonal is fixed.
inline BootstrapResult split_half_similarity(const std::vector<ratings::SimilarityRecord>& records,
                                             const BootstrapOptions& opt = {}) {
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_pair;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto a = records[i].a.text(), b = records[i].b.text();
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    by_pair[{a, b}].push_back(i);
  }
  if (by_pair.size() < 2) throw Error(Errc::insufficient_units, "need at least 2 rated pairs");
  std::vector<std::vector<std::size_t>> groups;
  std::vector<Eigen::Index> pair_of(records.size(), -1);
  for (const auto& [key, units] : by_pair) {
    for (auto u : units) pair_of[u] = static_cast<Eigen::Index>(groups.size());
    groups.push_back(units);
  }
  const auto n_pairs = static_cast<Eigen::Index>(groups.size());
  return split_half(
      groups,
      [&](const std::vector<std::size_t>& half) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_pairs), cnt = Eigen::VectorXd::Zero(n_pairs);
        for (auto u : half) {
          sum(pair_of[u]) += records[u].value;
          cnt(pair_of[u]) += 1.0;
        }
        return Eigen::VectorXd(sum.cwiseQuotient(cnt));
      },
      opt);
}

// Rating-matrix scheme: sentences are bisected; each half's intra-tone
// correlation matrix contributes its upper triangle.
inline BootstrapResult split_half_matrix(const ratings::RatingMatrix& rm, const BootstrapOptions& opt = {}) {
  if (rm.tones.size() < 3) throw Error(Errc::insufficient_units, "need at least 3 tones for an upper triangle");
  return split_half(
      single_group(rm.sentences.size()),
      [&](const std::vector<std::size_t>& half) {
        ratings::RatingMatrix sub{rm.tones, {}, Eigen::MatrixXd(rm.means.rows(), static_cast<Eigen::Index>(half.size())),
                                  {}, rm.domain};
        for (std::size_t c = 0; c < half.size(); ++c) {
          sub.sentences.push_back(rm.sentences[half[c]]);
          sub.means.col(static_cast<Eigen::Index>(c)) = rm.means.col(static_cast<Eigen::Index>(half[c]));
        }
        return upper_triangle(intra_correlation(sub).values);
      },
      opt);
}

}  // namespace swp::analysis
