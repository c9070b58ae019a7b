#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "swp/alignment/benchmark.hpp"
#include "swp/alignment/bli.hpp"
#include "swp/alignment/evaluate.hpp"
#include "swp/alignment/fixture.hpp"
#include "swp/alignment/gwot.hpp"
#include "swp/alignment/hungarian.hpp"
#include "swp/alignment/procrustes.hpp"
#include "swp/alignment/sinkhorn.hpp"
#include "swp/core/csv.hpp"

namespace swp::alignment {
namespace {

Eigen::MatrixXd gaussian(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Rng rng(seed);
  return gaussian_matrix(r, c, rng);
}

Eigen::MatrixXd permute_rows(const Eigen::MatrixXd& y, const std::vector<Eigen::Index>& perm) {
  Eigen::MatrixXd out(y.rows(), y.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = y.row(perm[i]);
  return out;
}

// ---- Procrustes --------------------------------------------------------

TEST(Procrustes, IdenticalInputsGiveIdentity) {
  const auto x = gaussian(40, 10, 1);
  const auto q = procrustes(x, x);
  EXPECT_LT((q - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Procrustes, FullRankRecoversRotationExactly) {
  Rng rng(7);
  const auto x = gaussian_matrix(120, 80, rng);
  const auto r = random_orthogonal(80, rng);
  const auto q = procrustes(x, x * r);
  EXPECT_LT((q - r).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(orthogonality_error(q), 1e-10);
}

TEST(Procrustes, RankDeficientStillFitsDataAndStaysOrthogonal) {
  // 40 points in 80 dimensions: only the row space is identifiable
  Rng rng(8);
  const auto x = gaussian_matrix(40, 80, rng);
  const auto r = random_orthogonal(80, rng);
  const auto q = procrustes(x, x * r);
  EXPECT_LT(orthogonality_error(q), 1e-10);
  EXPECT_LT((center_columns(x) * q - center_columns(x * r)).norm(), 1e-8);
  EXPECT_GT((q - r).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Procrustes, ResidualMatchesNoiseFloor) {
  // Expected squared residual under Y = XR + sigma N, after centering:
  // sigma^2 ((m-1) n - d) with d the dimension of the fitted tangent space.
  const Eigen::Index m = 40, n = 80;
  const double sigma = 0.01;
  const Eigen::Index r = std::min(m - 1, n);
  const double d = n * (n - 1) / 2.0 - (n - r) * (n - r - 1) / 2.0;
  const double expected = sigma * std::sqrt(static_cast<double>((m - 1) * n) - d);
  double sum = 0.0;
  const int reps = 20;
  for (int s = 0; s < reps; ++s) {
    Rng rng(100 + s);
    const auto x = gaussian_matrix(m, n, rng);
    const auto rot = random_orthogonal(n, rng);
    const Eigen::MatrixXd y = x * rot + sigma * gaussian_matrix(m, n, rng);
    const auto q = procrustes(x, y);
    sum += (center_columns(x) * q - center_columns(y)).squaredNorm();
  }
  EXPECT_NEAR(std::sqrt(sum / reps) / expected, 1.0, 0.05);
}

TEST(Procrustes, BeatsRandomOrthogonalMaps) {
  Rng rng(9);
  const auto x = gaussian_matrix(30, 6, rng);
  const Eigen::MatrixXd y = x * random_orthogonal(6, rng) + 0.3 * gaussian_matrix(30, 6, rng);
  const auto q = procrustes(x, y);
  const double best = (center_columns(x) * q - center_columns(y)).norm();
  for (int t = 0; t < 100; ++t) {
    const auto other = random_orthogonal(6, rng);
    EXPECT_LE(best, (center_columns(x) * other - center_columns(y)).norm() + 1e-12);
  }
}

TEST(Procrustes, ShapeMismatch) {
  try {
    procrustes(gaussian(5, 3, 1), gaussian(5, 4, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::shape_mismatch);
  }
}

// ---- Hungarian ----------------------------------------------------------

TEST(Hungarian, MatchesBruteForce) {
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    const auto c = gaussian(n, n, 500 + trial);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double t = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) t += c(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, t);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto got = hungarian_min(c);
    ASSERT_EQ(got.size(), static_cast<std::size_t>(n));
    double t = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) t += c(i, got[static_cast<std::size_t>(i)]);
    EXPECT_NEAR(t, best, 1e-12);
    auto sorted = got;
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
  }
}

TEST(Hungarian, ForbiddenEntriesAndInfeasibility) {
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd c(3, 3);
  c << 0, inf, inf, inf, 5, 0, inf, 0, 5;
  EXPECT_EQ(hungarian_min(c), (std::vector<Eigen::Index>{0, 2, 1}));
  c << 0, inf, inf, 0, inf, inf, 1, 1, 1;
  EXPECT_TRUE(hungarian_min(c).empty());
}

// ---- Sinkhorn / GWOT ------------------------------------------------------

TEST(Sinkhorn, MarginalsHoldAcrossRegularizations) {
  const auto cost = gaussian(12, 9, 3).cwiseAbs();
  Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(12, 1, 2);
  a /= a.sum();
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(9, 1.0 / 9);
  for (double eps : {1.0, 0.1, 0.01, 0.002}) {
    const auto r = sinkhorn_log(cost, a, b, eps);
    EXPECT_LT((r.plan.rowwise().sum() - a).cwiseAbs().maxCoeff(), 1e-6) << eps;
    EXPECT_LT((r.plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff(), 1e-6) << eps;
    EXPECT_GE(r.plan.minCoeff(), 0.0);
  }
}

TEST(Gwot, SelfAlignmentConcentratesOnDiagonal) {
  const auto x = gaussian(40, 80, 11);
  GwotParams p;
  p.epsilon = 0.01;
  const auto r = gwot(x, x, p);
  EXPECT_TRUE(r.converged);
  EXPECT_GE(r.coupling.diagonal().sum(), 0.9);
  EXPECT_LT(r.marginal_error, 1e-6);
}

TEST(Gwot, ObjectiveNeverIncreases) {
  for (std::uint64_t s : {12u, 13u, 14u}) {
    const auto x = gaussian(25, 10, s), y = gaussian(25, 10, s + 100);
    GwotParams p;
    p.epsilon = 0.05;
    p.require_convergence = false;
    const auto r = gwot(x, y, p);
    for (std::size_t k = 1; k < r.objective_history.size(); ++k)
      EXPECT_LE(r.objective_history[k], r.objective_history[k - 1] + 1e-10) << "seed " << s << " step " << k;
  }
}

TEST(Gwot, FollowsAPermutationOfIsometricCopy) {
  Rng rng(15);
  const auto x = gaussian_matrix(30, 60, rng);
  std::vector<Eigen::Index> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  const Eigen::MatrixXd y = permute_rows(x, perm) * random_orthogonal(60, rng);
  GwotParams p;
  p.epsilon = 0.01;
  const auto r = gwot(x, y, p);
  // x_i sits at y row j where perm[j] == i
  double mass = 0.0;
  for (Eigen::Index j = 0; j < 30; ++j) mass += r.coupling(perm[static_cast<std::size_t>(j)], j);
  EXPECT_GE(mass, 0.9);
}

TEST(Gwot, TwoPointsKeepMarginals) {
  Eigen::MatrixXd x(2, 3);
  x << 0, 0, 0, 1, 1, 1;
  const auto r = gwot(x, x);
  EXPECT_NEAR(r.coupling.rowwise().sum()(0), 0.5, 1e-6);
  EXPECT_NEAR(r.coupling.colwise().sum()(1), 0.5, 1e-6);
}

TEST(Gwot, RejectsNonPositiveEpsilon) {
  GwotParams p;
  p.epsilon = 0.0;
  try {
    gwot(gaussian(5, 3, 1), gaussian(5, 3, 2), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_parameter);
  }
}

TEST(Gwot, NonConvergenceIsReported) {
  GwotParams p;
  p.max_outer = 1;
  p.tol = 0.0;
  try {
    gwot(gaussian(10, 4, 1), gaussian(10, 4, 2), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::no_convergence);
  }
  p.require_convergence = false;
  EXPECT_FALSE(gwot(gaussian(10, 4, 1), gaussian(10, 4, 2), p).converged);
}

// ---- BLI -------------------------------------------------------------------

TEST(Bli, IdentityOnIdenticalInputs) {
  const auto x = gaussian(40, 80, 21);
  const auto r = bli(x, x);
  for (Eigen::Index i = 0; i < 40; ++i) EXPECT_EQ(r.matching[static_cast<std::size_t>(i)], i);
}

TEST(Bli, RecoversPermutationUnderRotationAndNoise) {
  int perfect = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(300 + s);
    const auto x = gaussian_matrix(40, 80, rng);
    std::vector<Eigen::Index> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const Eigen::MatrixXd y = permute_rows(x, perm) * random_orthogonal(80, rng) + 0.05 * gaussian_matrix(40, 80, rng);
    BliParams p;
    p.seed = s;
    const auto r = bli(x, y, p);
    int hit = 0;
    for (Eigen::Index j = 0; j < 40; ++j) hit += r.matching[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] == j;
    perfect += hit == 40;
  }
  EXPECT_GE(perfect, 4);
}

TEST(Bli, DuplicateRowsAreInterchangeable) {
  Eigen::MatrixXd x = gaussian(12, 20, 22);
  x.row(5) = x.row(3);
  const auto r = bli(x, x);
  // either order of the duplicates is optimal; the objective says so
  EXPECT_NEAR(r.objective, 12.0, 1e-9);
  auto sorted = r.matching;
  std::sort(sorted.begin(), sorted.end());
  for (Eigen::Index i = 0; i < 12; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
}

TEST(Bli, ObjectiveNonDecreasingOverIterations) {
  const auto x = gaussian(30, 40, 23), y = gaussian(30, 40, 24);
  BliParams p;
  p.restarts = 1;
  const auto r = bli(x, y, p);
  for (std::size_t k = 1; k < r.objective_history.size(); ++k)
    EXPECT_GE(r.objective_history[k], r.objective_history[k - 1] - 1e-9);
}

TEST(Bli, RestrictedAssignmentFallsBackWhenInfeasible) {
  // Targets are +v or -v up to tiny noise, so with one neighbour each they
  // all name one of two sources: no perfect matching inside the candidates.
  Rng rng(25);
  const Eigen::MatrixXd x = gaussian_matrix(8, 16, rng);
  const Eigen::RowVectorXd v = gaussian_matrix(1, 16, rng);
  Eigen::MatrixXd y(8, 16);
  for (Eigen::Index i = 0; i < 8; ++i) y.row(i) = (i % 2 ? 1.0 : -1.0) * v;
  y += 1e-3 * gaussian_matrix(8, 16, rng);
  BliParams p;
  p.k_neighbors = 1;
  p.keep_incumbent = false;
  p.restarts = 1;
  const auto r = bli(x, y, p);
  EXPECT_TRUE(r.fallback_used);
  auto sorted = r.matching;
  std::sort(sorted.begin(), sorted.end());
  for (Eigen::Index i = 0; i < 8; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
}

TEST(Bli, CandidatesKeepKBestSourcesPerTarget) {
  Eigen::MatrixXd s(3, 3);
  s << 0.9, 0.1, 0.5, 0.2, 0.8, 0.4, 0.3, 0.7, 0.6;
  const auto c = detail::candidates(s, 1, BliDirection::backward);
  EXPECT_TRUE(c(0, 0) && c(1, 1) && c(2, 2));
  EXPECT_EQ(c.count(), 3);
  const auto f = detail::candidates(s, 2, BliDirection::forward);
  EXPECT_TRUE(f(0, 0) && f(0, 2) && f(1, 1) && f(1, 2) && f(2, 1) && f(2, 2));
  EXPECT_EQ(f.count(), 6);
}

TEST(Bli, DeterministicForSeed) {
  const auto x = gaussian(20, 30, 26), y = gaussian(20, 30, 27);
  BliParams p;
  p.seed = 42;
  EXPECT_EQ(bli(x, y, p).matching, bli(x, y, p).matching);
}

// ---- Metrics ----------------------------------------------------------------

TEST(Metrics, PerfectAndNegatedPrediction) {
  const auto t = gaussian(10, 10, 31);
  EXPECT_NEAR(eval_similarity_recovery(t, t), 1.0, 1e-12);
  EXPECT_NEAR(eval_similarity_recovery(-t, t), -1.0, 1e-12);
  for (int k = 1; k < 10; ++k) EXPECT_DOUBLE_EQ(eval_knn_matching(t, t, k), 1.0);
}

TEST(Metrics, ReversedRankingGivesNoNeighbours) {
  Eigen::MatrixXd t(6, 6);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) t(i, j) = static_cast<double>(j);
  EXPECT_DOUBLE_EQ(eval_knn_matching(-t, t, 1), 0.0);
  EXPECT_DOUBLE_EQ(eval_knn_matching(-t, t, 3), 0.0);
  EXPECT_DOUBLE_EQ(eval_knn_matching(-t, t, 4), 1.0 / 2.0);  // 4 of 6 must overlap in 2
}

TEST(Metrics, KnnInvariantToJointRelabeling) {
  const auto p = gaussian(12, 12, 32), t = gaussian(12, 12, 33);
  std::vector<Eigen::Index> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(34);
  rng.shuffle(perm);
  Eigen::MatrixXd pp(12, 12), tp(12, 12);
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = 0; j < 12; ++j) {
      pp(i, j) = p(perm[i], perm[j]);
      tp(i, j) = t(perm[i], perm[j]);
    }
  for (int k = 1; k <= 5; ++k) EXPECT_NEAR(eval_knn_matching(pp, tp, k), eval_knn_matching(p, t, k), 1e-12);
  EXPECT_NEAR(eval_similarity_recovery(pp, tp), eval_similarity_recovery(p, t), 1e-12);
}

TEST(Metrics, KnnRejectsBadK) {
  const auto t = gaussian(5, 5, 35);
  for (int k : {0, 5, 9}) {
    try {
      eval_knn_matching(t, t, k);
      FAIL() << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_parameter);
    }
  }
}

TEST(Metrics, OrthogonalMapPreservesIntraStructure) {
  Rng rng(36);
  const auto x = gaussian_matrix(20, 30, rng);
  const Eigen::MatrixXd y = x * random_orthogonal_fixing_ones(30, rng);
  const auto r = align_procrustes(x, y);
  const auto p = eval_domain_preservation(r, x, y);
  EXPECT_GE(p.a, 0.999);
  EXPECT_GE(p.b, 0.999);
}

TEST(Metrics, CollapsingCouplingDestroysStructure) {
  const auto x = gaussian(20, 30, 37), y = gaussian(20, 30, 38);
  AlignmentResult r;
  r.method = Method::gwot;
  // nearly everything sent to y's first row: mapped rows are almost identical
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(20, 20, 1e-6);
  t.col(0).array() = 1.0;
  for (Eigen::Index i = 0; i < 20; ++i) t(i, (i % 19) + 1) += 1e-3 * (i + 1);
  r.coupling = t;
  EXPECT_LT(eval_domain_preservation(r, x, y).a, 0.9);
}

TEST(Metrics, FixtureGroundTruthIsInvariantToTheRotation) {
  const auto f = make_fixture({});
  // undoing the rotation restores the ground truth; intra structure never moved
  const Eigen::MatrixXd unrotated = f.y * f.rotation.transpose();
  EXPECT_LT((row_correlations(f.x, unrotated) - f.ground_truth).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((row_correlations(f.y, f.y) - row_correlations(unrotated, unrotated)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(orthogonality_error(f.rotation), 1e-10);
  std::size_t moved = 0;
  for (std::size_t j = 0; j < f.truth.size(); ++j) moved += f.truth[j] != static_cast<Eigen::Index>(j);
  EXPECT_EQ(moved, 20u);
}

// ---- Benchmark ----------------------------------------------------------------

TEST(Benchmark, OrderingAndOutputs) {
  const auto f = make_fixture({});
  BenchmarkOptions o;
  o.seeds = 10;
  o.bli.restarts = 2;
  const auto rep = run_benchmark(f.x, f.y, f.ground_truth, o);
  const auto& b = rep.at(Method::bli);
  const auto& p = rep.at(Method::procrustes);
  const auto& r = rep.at(Method::random);
  EXPECT_EQ(b.runs, 10u);
  EXPECT_EQ(p.runs, 1u);
  EXPECT_TRUE(b.failed_seeds.empty());
  EXPECT_GE(b.recovery.mean, p.recovery.mean);
  EXPECT_GT(p.recovery.mean, r.recovery.mean);
  EXPECT_GT(b.recovery.ci_low, r.recovery.ci_high);
  EXPECT_LE(b.recovery.ci_low, b.recovery.mean);
  EXPECT_GE(b.recovery.ci_high, b.recovery.mean);
  EXPECT_EQ(p.recovery.ci_low, p.recovery.ci_high);

  const auto dir = test::scratch_dir("bench");
  write_benchmark(dir, "table", rep);
  const auto t = csv::read(dir / "table.csv");
  EXPECT_EQ(t.rows.size(), rep.methods.size());
  EXPECT_EQ(t.header[1], "similarity_recovery");
  EXPECT_NE(t.rows[0][1].find('['), std::string::npos);
  std::ifstream js(dir / "table.json");
  const auto j = nlohmann::json::parse(js);
  EXPECT_EQ(j["metadata"]["knn_formula"], std::string(kKnnFormula));
  EXPECT_EQ(j["methods"].size(), rep.methods.size());
}

TEST(Benchmark, ThreadCountDoesNotChangeResults) {
  const auto f = make_fixture({20, 30, 0.5, 4, 0.3, 0.3, 3.0, 5});
  BenchmarkOptions o;
  o.seeds = 4;
  o.bli.restarts = 1;
  o.threads = 1;
  const auto a = to_json(run_benchmark(f.x, f.y, f.ground_truth, o));
  o.threads = 3;
  const auto b = to_json(run_benchmark(f.x, f.y, f.ground_truth, o));
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Benchmark, FailuresAreRecordedPerSeed) {
  const auto f = make_fixture({12, 20, 0.5, 3, 0.3, 0.3, 3.0, 6});
  BenchmarkOptions o;
  o.seeds = 2;
  o.gwot.max_outer = 1;
  o.gwot.tol = 0.0;
  const auto rep = run_benchmark(f.x, f.y, f.ground_truth, o);
  const auto& g = rep.at(Method::gwot);
  EXPECT_EQ(g.failed_seeds.size(), 1u);
  EXPECT_EQ(g.recovery.n, 0u);
  EXPECT_NE(g.failures[0].find("no-convergence"), std::string::npos);
}

}  // namespace
}  // namespace swp::alignment
