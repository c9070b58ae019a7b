#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swp/alignment/evaluate.hpp"
#include "swp/analysis/stats.hpp"
#include "swp/core/csv.hpp"
#include "swp/core/error.hpp"
#include "swp/core/rng.hpp"

namespace swp::alignment {

inline constexpr int kMaxK = 5;

struct MetricSummary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

inline MetricSummary summarize(std::vector<double> v) {
  if (v.empty()) return {std::nan(""), std::nan(""), std::nan(""), 0};
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  // rounding can put an interpolated percentile a hair past the mean
  return {mean, std::min(mean, analysis::quantile_sorted(v, 0.025)),
          std::max(mean, analysis::quantile_sorted(v, 0.975)), v.size()};
}

struct RunMetrics {
  double recovery = 0.0;
  double preservation_a = 0.0;
  double preservation_b = 0.0;
  std::array<double, kMaxK> knn{};
  bool fallback_used = false;
};

struct MethodReport {
  Method method = Method::procrustes;
  std::size_t runs = 0;
  std::vector<std::uint64_t> failed_seeds;
  std::vector<std::string> failures;
  MetricSummary recovery, preservation_a, preservation_b;
  std::array<MetricSummary, kMaxK> knn{};
  nlohmann::json hyperparameters = nlohmann::json::object();
};

struct BenchmarkReport {
  std::vector<MethodReport> methods;
  nlohmann::json metadata = nlohmann::json::object();

  const MethodReport& at(Method m) const {
    for (const auto& r : methods)
      if (r.method == m) return r;
    throw Error(Errc::invalid_parameter, "method not in report");
  }
};

struct BenchmarkOptions {
  std::size_t seeds = 100;
  std::uint64_t base_seed = 0;
  GwotParams gwot{};
  BliParams bli{};
  bool include_random_baseline = true;
  unsigned threads = 0;
};

inline RunMetrics evaluate_run(const AlignmentResult& r, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                               const Eigen::MatrixXd& truth) {
  RunMetrics m;
  const Eigen::MatrixXd pred = predict_cross_similarity(r, x, y);
  m.recovery = eval_similarity_recovery(pred, truth);
  const auto p = eval_domain_preservation(r, x, y);
  m.preservation_a = p.a;
  m.preservation_b = p.b;
  const int kmax = static_cast<int>(std::min<Eigen::Index>(kMaxK, truth.cols() - 1));
  for (int k = 1; k <= kMaxK; ++k)
    m.knn[static_cast<std::size_t>(k - 1)] = k <= kmax ? eval_knn_matching(pred, truth, k) : std::nan("");
  m.fallback_used = r.fallback_used;
  return m;
}

// Runs every method on (X, Y) and scores it against the ground-truth cross
// correlation. Procrustes and GWOT are deterministic and run once; BLI and
// the random-matching baseline run once per seed. Cells run concurrently and
// are merged in (method, seed) order.
inline BenchmarkReport run_benchmark(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& truth,
                                     const BenchmarkOptions& opt = {}) {
  if (x.rows() != y.rows() || truth.rows() != x.rows() || truth.cols() != y.rows())
    throw Error(Errc::shape_mismatch, "embeddings and ground truth disagree on the number of tones");
  if (opt.seeds < 1) throw Error(Errc::invalid_parameter, "seeds must be >= 1");
  struct Cell {
    Method method;
    std::uint64_t seed;
    std::optional<RunMetrics> metrics;
    std::string error;
    nlohmann::json hyper;
  };
  std::vector<Cell> cells;
  cells.push_back({Method::procrustes, 0, {}, {}, {}});
  cells.push_back({Method::gwot, opt.gwot.seed, {}, {}, {}});
  for (std::size_t s = 0; s < opt.seeds; ++s) cells.push_back({Method::bli, derive_seed(opt.base_seed, s), {}, {}, {}});
  if (opt.include_random_baseline)
    for (std::size_t s = 0; s < opt.seeds; ++s)
      cells.push_back({Method::random, derive_seed(opt.base_seed, s), {}, {}, {}});

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < cells.size();) {
      auto& cell = cells[c];
      try {
        AlignmentResult r;
        switch (cell.method) {
          case Method::procrustes: r = align_procrustes(x, y); break;
          case Method::gwot: r = align_gwot(x, y, opt.gwot); break;
          case Method::bli: {
            auto p = opt.bli;
            p.seed = cell.seed;
            r = align_bli(x, y, p);
            break;
          }
          case Method::random: r = align_random(x, y, cell.seed); break;
        }
        cell.hyper = r.hyperparameters;
        cell.metrics = evaluate_run(r, x, y, truth);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  BenchmarkReport rep;
  for (auto m : {Method::bli, Method::procrustes, Method::gwot, Method::random}) {
    if (m == Method::random && !opt.include_random_baseline) continue;
    MethodReport mr;
    mr.method = m;
    std::vector<double> rec, pa, pb;
    std::array<std::vector<double>, kMaxK> knn;
    for (const auto& c : cells) {
      if (c.method != m) continue;
      ++mr.runs;
      if (!c.metrics) {
        mr.failed_seeds.push_back(c.seed);
        mr.failures.push_back(c.error);
        continue;
      }
      if (mr.hyperparameters.empty()) mr.hyperparameters = c.hyper;
      rec.push_back(c.metrics->recovery);
      pa.push_back(c.metrics->preservation_a);
      pb.push_back(c.metrics->preservation_b);
      for (std::size_t k = 0; k < kMaxK; ++k)
        if (!std::isnan(c.metrics->knn[k])) knn[k].push_back(c.metrics->knn[k]);
    }
    mr.recovery = summarize(rec);
    mr.preservation_a = summarize(pa);
    mr.preservation_b = summarize(pb);
    for (std::size_t k = 0; k < kMaxK; ++k) mr.knn[k] = summarize(knn[k]);
    if (m == Method::bli) mr.hyperparameters = opt.bli.to_json();
    if (m == Method::gwot && mr.hyperparameters.empty()) mr.hyperparameters = opt.gwot.to_json();
    rep.methods.push_back(std::move(mr));
  }
  rep.metadata = {{"seeds", opt.seeds},
                  {"base_seed", opt.base_seed},
                  {"knn_formula", std::string(kKnnFormula)},
                  {"ci", "2.5th and 97.5th percentiles over runs (linear interpolation); single runs report [v, v]"},
                  {"procrustes_correspondence", "identity (tone lists are shared)"},
                  {"preservation", "Pearson of upper triangles of intra-correlation matrices before/after mapping"},
                  {"embeddings", "column-centered per sentence before alignment"},
                  {"tones", x.rows()},
                  {"dimensions", {x.cols(), y.cols()}}};
  return rep;
}

inline nlohmann::json to_json(const MetricSummary& m) {
  return {{"mean", m.mean}, {"ci_low", m.ci_low}, {"ci_high", m.ci_high}, {"n", m.n}};
}

inline nlohmann::json to_json(const BenchmarkReport& r) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : r.methods) {
    nlohmann::json knn = nlohmann::json::object();
    for (std::size_t k = 0; k < kMaxK; ++k) knn[std::to_string(k + 1)] = to_json(m.knn[k]);
    methods.push_back({{"method", std::string(to_string(m.method))},
                       {"runs", m.runs},
                       {"failed_seeds", m.failed_seeds},
                       {"failures", m.failures},
                       {"similarity_recovery", to_json(m.recovery)},
                       {"preservation_a", to_json(m.preservation_a)},
                       {"preservation_b", to_json(m.preservation_b)},
                       {"knn_matching", knn},
                       {"hyperparameters", m.hyperparameters}});
  }
  return {{"methods", methods}, {"metadata", r.metadata}};
}

inline std::string format_cell(const MetricSummary& m) {
  if (m.n == 0) return "NA";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.3f [%.3f, %.3f]", m.mean, m.ci_low, m.ci_high);
  return buf;
}

// One row per method, one column per metric, cells "mean [low, high]".
inline void write_benchmark_csv(std::ostream& out, const BenchmarkReport& r) {
  csv::Row header{"method", "similarity_recovery", "preservation_a", "preservation_b"};
  for (int k = 1; k <= kMaxK; ++k) header.push_back("knn_k" + std::to_string(k));
  header.push_back("runs");
  header.push_back("failed");
  csv::write_row(out, header);
  for (const auto& m : r.methods) {
    csv::Row row{std::string(to_string(m.method)), format_cell(m.recovery), format_cell(m.preservation_a),
                 format_cell(m.preservation_b)};
    for (const auto& k : m.knn) row.push_back(format_cell(k));
    row.push_back(std::to_string(m.runs));
    row.push_back(std::to_string(m.failed_seeds.size()));
    csv::write_row(out, row);
  }
}

// Writes <stem>.csv and <stem>.json into `dir`.
inline void write_benchmark(const std::filesystem::path& dir, const std::string& stem, const BenchmarkReport& r) {
  std::filesystem::create_directories(dir);
  std::ofstream csv_out(dir / (stem + ".csv"));
  if (!csv_out) throw Error(Errc::io_error, "cannot write " + (dir / (stem + ".csv")).string());
  write_benchmark_csv(csv_out, r);
  std::ofstream json_out(dir / (stem + ".json"));
  if (!json_out) throw Error(Errc::io_error, "cannot write " + (dir / (stem + ".json")).string());
  json_out << to_json(r).dump(2) << '\n';
}

}  // namespace swp::alignment
