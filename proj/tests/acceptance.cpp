// Acceptance suite: one PASS/FAIL/SKIP line per primary criterion.
//
// Exit status is 0 when every criterion passes or is skipped, apart from
// the ones listed in kUnattainable. Those still print FAIL with the measured
// value; see the README section on acceptance for why they cannot pass.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "support.hpp"
#include "swp/agents/agent.hpp"
#include "swp/alignment/benchmark.hpp"
#include "swp/alignment/bli.hpp"
#include "swp/alignment/fixture.hpp"
#include "swp/alignment/gwot.hpp"
#include "swp/alignment/procrustes.hpp"
#include "swp/analysis/biplot.hpp"
#include "swp/analysis/bootstrap.hpp"
#include "swp/analysis/gibbs.hpp"
#include "swp/analysis/histogram.hpp"
#include "swp/analysis/mds.hpp"
#include "swp/chain/autonomous.hpp"
#include "swp/chain/experiment.hpp"
#include "swp/cli/align_report.hpp"
#include "swp/cli/analyze_stage.hpp"
#include "validation_table.hpp"

using namespace swp;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kUnattainable = {"procrustes-exact"};

enum class Verdict { pass, fail, skip };

struct Line {
  std::string id;
  Verdict verdict;
  std::string detail;
};

std::vector<Line> lines;

void report(const std::string& id, Verdict v, const std::string& detail) {
  const char* tag = v == Verdict::pass ? "PASS" : v == Verdict::fail ? "FAIL" : "SKIP";
  std::printf("%s  %-26s %s\n", tag, id.c_str(), detail.c_str());
  std::fflush(stdout);
  lines.push_back({id, v, detail});
}

void check(const std::string& id, bool ok, const std::string& detail) {
  report(id, ok ? Verdict::pass : Verdict::fail, detail);
}

std::string f(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string f(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs a criterion; an exception turns into a FAIL line.
void guarded(const std::string& id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, Verdict::fail, std::string("threw: ") + e.what());
  }
}

MatrixXd permute_rows(const MatrixXd& y, const std::vector<Eigen::Index>& perm) {
  MatrixXd out(y.rows(), y.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = y.row(perm[i]);
  return out;
}

// ---- Gibbs stationarity

// Left eigenvector of the tone kernel for eigenvalue 1, built from the joint
// directly (not from the library kernel).
VectorXd stationary_by_eigen(const MatrixXd& joint) {
  const Eigen::Index m = joint.rows(), n = joint.cols();
  MatrixXd k = MatrixXd::Zero(m, m);
  for (Eigen::Index t = 0; t < m; ++t)
    for (Eigen::Index s = 0; s < n; ++s)
      for (Eigen::Index u = 0; u < m; ++u)
        k(t, u) += joint(t, s) / joint.row(t).sum() * joint(u, s) / joint.col(s).sum();
  Eigen::EigenSolver<MatrixXd> es(k.transpose());
  Eigen::Index best = 0;
  (es.eigenvalues().real().array() - 1.0).abs().minCoeff(&best);
  VectorXd v = es.eigenvectors().col(best).real();
  return v / v.sum();
}

void gibbs() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  auto tones = agents::default_synthetic_tones();
  tones.resize(5, Tone::make("neutral"));
  auto sentences = agents::default_synthetic_sentences();
  sentences.erase(sentences.begin() + 8, sentences.end());
  auto joint = std::make_shared<const agents::SyntheticJoint>(agents::SyntheticJoint::random(tones, sentences, rng));
  chain::ExperimentConfig cfg;
  cfg.n_chains = 200;
  cfg.n_iterations = 200;
  cfg.rng_seed = 11;
  cfg.seed_items.assign(tones.begin(), tones.end());
  chain::Experiment e(cfg, test::lexicons());
  agents::SyntheticAgent agent(joint, 12);
  chain::run_autonomous(e, agent);
  VectorXd hist = VectorXd::Zero(5);
  for (const auto& a : e.tone_trials())
    if (a.iteration > cfg.n_iterations / 2) hist(static_cast<Eigen::Index>(joint->tone_index(a.tone))) += 1.0;
  const double n = hist.sum();
  hist /= n;
  const auto exact = analysis::gibbs_stationary_exact(*joint);
  const double tv = analysis::total_variation(hist, exact.tone);
  const double oracle_gap = (exact.tone - stationary_by_eigen(joint->probs())).cwiseAbs().maxCoeff();
  const double secs = seconds_since(t0);
  check("gibbs-stationarity", tv < 0.05 && exact.residual < 1e-12 && oracle_gap < 1e-9 && secs < 30.0,
        f("TV=%.4f (<0.05) over %.0f tone draws; oracle residual=%.2e (<1e-12), eigenvector gap=%.1e; %.2f s (<30 s)",
          tv, n, exact.residual, oracle_gap, secs));
}

// ---- Procrustes

void procrustes_criteria() {
  const Eigen::Index m = 40, n = 80;
  {
    Rng rng(31);
    const auto x = alignment::gaussian_matrix(m, n, rng);
    const auto q_star = alignment::random_orthogonal(n, rng);
    const auto t0 = std::chrono::steady_clock::now();
    const auto q = alignment::procrustes(x, x * q_star);
    const double secs = seconds_since(t0);
    const double err = (q - q_star).norm();
    const double fit = (alignment::center_columns(x) * q - alignment::center_columns(x * q_star)).norm();
    check("procrustes-exact", err < 1e-8 && secs < 1.0,
          f("||Q-Q*||_F=%.3g (<1e-8); data fit ||XQ-Y||=%.1e; 40 points leave Q* unidentified off their "
            "%d-dim span; %.3f s (<1 s)",
            err, fit, static_cast<int>(m - 1), secs));
  }
  {
    const double sigma = 0.01;
    const Eigen::Index r = std::min(m - 1, n);
    const double d = n * (n - 1) / 2.0 - (n - r) * (n - r - 1) / 2.0;
    const double floor = sigma * std::sqrt(static_cast<double>((m - 1) * n) - d);
    const int reps = 50;
    double sum = 0.0, worst = 0.0;
    for (int s = 0; s < reps; ++s) {
      Rng rng(derive_seed(32, s));
      const auto x = alignment::gaussian_matrix(m, n, rng);
      const MatrixXd y = x * alignment::random_orthogonal(n, rng) + sigma * alignment::gaussian_matrix(m, n, rng);
      const auto t0 = std::chrono::steady_clock::now();
      const auto q = alignment::procrustes(x, y);
      worst = std::max(worst, seconds_since(t0));
      sum += (alignment::center_columns(x) * q - alignment::center_columns(y)).squaredNorm();
    }
    const double rms = std::sqrt(sum / reps);
    check("procrustes-noise-floor", std::abs(rms / floor - 1.0) <= 0.05 && worst < 1.0,
          f("RMS residual %.5f vs floor %.5f (ratio %.4f, within 5%%) over %d draws; slowest solve %.3f s (<1 s)", rms,
            floor, rms / floor, reps, worst));
  }
}

// ---- GWOT

void gwot_criterion() {
  Rng rng(41);
  const auto x = alignment::gaussian_matrix(40, 80, rng);
  alignment::GwotParams p;
  p.epsilon = 0.01;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = alignment::gwot(x, x, p);
  const double secs = seconds_since(t0);
  const double diag = r.coupling.diagonal().sum();
  double worst_rise = 0.0;
  for (std::size_t k = 1; k < r.objective_history.size(); ++k)
    worst_rise = std::max(worst_rise, r.objective_history[k] - r.objective_history[k - 1]);
  const double tol = 1e-12 * std::max(1.0, std::abs(r.objective_history.front()));
  check("gwot-self-alignment", diag >= 0.9 && worst_rise <= tol && secs < 10.0,
        f("diagonal mass %.4f (>=0.9); objective E-eps*H over %zu outer iterations, largest rise %.2e (<=%.0e); "
          "%.2f s (<10 s)",
          diag, r.objective_history.size() - 1, worst_rise, tol, secs));
}

// ---- BLI

void bli_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  int good = 0;
  std::string shares;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(derive_seed(51, s));
    const auto x = alignment::gaussian_matrix(40, 80, rng);
    std::vector<Eigen::Index> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const MatrixXd y = permute_rows(x, perm) * alignment::random_orthogonal(80, rng) +
                       0.05 * alignment::gaussian_matrix(40, 80, rng);
    alignment::BliParams p;
    p.seed = s;
    const auto r = alignment::bli(x, y, p);
    int hit = 0;
    for (Eigen::Index j = 0; j < 40; ++j)
      hit += r.matching[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] == j;
    good += hit >= 38;  // 95% of 40
    shares += f("%s%d", s ? "," : "", hit);
  }
  const double secs = seconds_since(t0);
  check("bli-permutation-recovery", good >= 8 && secs < 30.0,
        f("%d/10 seeds recover >=95%% (correct of 40: %s); %.2f s (<30 s)", good, shares.c_str(), secs));
}

// ---- benchmark ordering

void benchmark_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  alignment::FixtureOptions fo;
  fo.seed = 61;
  const auto fx = alignment::make_fixture(fo);
  alignment::BenchmarkOptions o;
  o.seeds = 100;
  o.base_seed = 62;
  const auto rep = alignment::run_benchmark(fx.x, fx.y, fx.ground_truth, o);
  const double secs = seconds_since(t0);
  const auto& b = rep.at(alignment::Method::bli).recovery;
  const auto& p = rep.at(alignment::Method::procrustes).recovery;
  const auto& r = rep.at(alignment::Method::random).recovery;
  const auto& g = rep.at(alignment::Method::gwot).recovery;
  check("benchmark-ordering", b.mean >= p.mean && p.mean > r.mean && b.mean > r.mean && b.n == 100 && secs < 300.0,
        f("r: BLI %.3f [%.3f, %.3f] >= Procrustes %.3f > random %.3f [%.3f, %.3f] (GWOT %.3f); 100 seeds; %.1f s (<300 s)",
          b.mean, b.ci_low, b.ci_high, p.mean, r.mean, r.ci_low, r.ci_high, g.mean, secs));
}

// ---- MDS

double planar_rigid_residual(MatrixXd a, MatrixXd b) {
  a = a.rowwise() - a.colwise().mean();
  b = b.rowwise() - b.colwise().mean();
  double best = INFINITY;
  for (int reflect = 0; reflect < 2; ++reflect) {
    MatrixXd bb = b;
    if (reflect) bb.col(1) *= -1;
    double sc = 0, ss = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      sc += a(i, 0) * bb(i, 0) + a(i, 1) * bb(i, 1);
      ss += a(i, 0) * bb(i, 1) - a(i, 1) * bb(i, 0);
    }
    const double th = std::atan2(ss, sc);
    Eigen::Matrix2d rot;
    rot << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
    best = std::min(best, (a * rot - bb).norm());
  }
  return best;
}

void mds_criteria() {
  Rng rng(71);
  MatrixXd pts(40, 2);
  for (Eigen::Index i = 0; i < 40; ++i) pts.row(i) << rng.uniform() * 10.0, rng.uniform() * 10.0;
  MatrixXd d(40, 40);
  for (Eigen::Index i = 0; i < 40; ++i)
    for (Eigen::Index j = 0; j < 40; ++j) d(i, j) = std::hypot(pts(i, 0) - pts(j, 0), pts(i, 1) - pts(j, 1));
  const auto s = analysis::mds(d, {});
  const double res = planar_rigid_residual(pts, s.points);
  check("mds-planar-recovery", res < 1e-6, f("rigid-fit residual %.2e (<1e-6) for 40 points", res));

  MatrixXd tri = MatrixXd::Ones(3, 3);
  tri.diagonal().setZero();
  const auto t = analysis::mds(tri, {});
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) worst = std::max(worst, std::abs((t.points.row(i) - t.points.row(j)).norm() - 1.0));
  check("mds-equilateral-triangle", worst < 1e-9, f("max side error %.2e (<1e-9)", worst));
}

// ---- explained variance

void explained_variance_criterion() {
  Rng rng(81);
  MatrixXd pts(500, 2);
  const double th = 0.7;
  for (Eigen::Index i = 0; i < 500; ++i) {
    const double u = 3.0 * rng.normal(), v = 0.8 * rng.normal();
    pts.row(i) << u * std::cos(th) - v * std::sin(th), u * std::sin(th) + v * std::cos(th);
  }
  // closed-form 2x2 eigen decomposition of the sample covariance
  const MatrixXd c = pts.rowwise() - pts.colwise().mean();
  const double a = c.col(0).squaredNorm(), b = c.col(0).dot(c.col(1)), dd = c.col(1).squaredNorm();
  const double mid = (a + dd) / 2.0, rad = std::hypot((a - dd) / 2.0, b);
  const double l1 = mid + rad, l2 = mid - rad;
  const Eigen::Vector2d axis = std::abs(b) > 1e-300 ? Eigen::Vector2d(b, l1 - a) : Eigen::Vector2d(1.0, 0.0);
  const double got = analysis::explained_variance(pts, axis * 2.5);
  const double want = l1 / (l1 + l2);
  check("explained-variance", std::abs(got - want) <= 1e-6,
        f("principal arrow explains %.9f, lambda1/(lambda1+lambda2)=%.9f (+-1e-6)", got, want));
}

// ---- entropy

void entropy_criterion() {
  std::vector<Tone> uniform, single(17, Tone::make("happy"));
  for (const char* t : {"a", "b", "c", "d", "e", "f", "g", "h"})
    for (int k = 0; k < 3; ++k) uniform.push_back(Tone::make(std::string("tone") + t));
  const double h8 = analysis::entropy_bits(analysis::tone_histogram(uniform));
  const double h1 = analysis::entropy_bits(analysis::tone_histogram(single));
  check("entropy", h8 == 3.0 && h1 == 0.0, f("uniform-8 = %.17g bits, single tone = %.17g bits", h8, h1));
}

// ---- bootstrap calibration

// Alphabetic tone label for index i ("aa", "ab", ...).
std::string tone_name(int i) { return {static_cast<char>('a' + i / 26), static_cast<char>('a' + i % 26)}; }

// Pair means on a fixed standardized grid plus Gaussian rating noise. With U
// ratings per pair split in halves of K = U/2, the correlation between half
// means is attenuated to var(mu) / (var(mu) + sigma^2 / K).
void bootstrap_criterion() {
  const auto t0 = std::chrono::steady_clock::now();
  const int pairs = 40, per_pair = 20, sims = 200;
  const double sigma2 = 2.5;
  const double rho = 1.0 / (1.0 + sigma2 / (per_pair / 2));
  int covered = 0;
  for (int s = 0; s < sims; ++s) {
    Rng rng(derive_seed(91, s));
    std::vector<ratings::SimilarityRecord> recs;
    for (int j = 0; j < pairs; ++j) {
      const double mu = (j - (pairs - 1) / 2.0) / std::sqrt((pairs * pairs - 1) / 12.0);
      for (int u = 0; u < per_pair; ++u)
        recs.push_back({Tone::make("anchor"), Tone::make(tone_name(j)), "r",
                        mu + std::sqrt(sigma2) * rng.normal()});
    }
    analysis::BootstrapOptions o;
    o.n_boot = 1000;
    o.seed = derive_seed(92, s);
    const auto r = analysis::split_half_similarity(recs, o);
    covered += r.ci_low <= rho && rho <= r.ci_high;
  }
  const double secs = seconds_since(t0);
  check("bootstrap-calibration", covered >= sims * 9 / 10,
        f("95%% CI covers rho=%.4f in %d/%d simulations (>=90%%), n_boot=1000; %.1f s", rho, covered, sims, secs));
}

// ---- validation filters

void validation_criterion() {
  const auto table = test::filter_table();
  int ok = 0;
  std::string bad;
  for (const auto& c : table) {
    const auto got = test::run_case(c, *test::lexicons());
    const bool match = c.expected ? (got && got->kind == *c.expected) : !got;
    ok += match;
    if (!match) bad += " [" + c.response + "]";
  }
  check("validation-filter-table", ok == static_cast<int>(table.size()) && table.size() == 30,
        f("%d/%zu cases match%s", ok, table.size(), bad.c_str()));
}

// ---- released dataset (conditional)

// Upper-triangle Pearson correlation between two labelled matrices, after
// aligning the labels of `b` to those of `a`.
double matrix_agreement(const csv::LabeledMatrix& a, const csv::LabeledMatrix& b, bool upper_only) {
  const auto ri = cli::reorder(b.rows, a.rows, "published rows");
  const auto ci = cli::reorder(b.cols, a.cols, "published columns");
  std::vector<double> x, y;
  for (Eigen::Index i = 0; i < a.values.rows(); ++i)
    for (Eigen::Index j = upper_only ? i + 1 : 0; j < a.values.cols(); ++j) {
      x.push_back(a.values(i, j));
      y.push_back(b.values(ri[static_cast<std::size_t>(i)], ci[static_cast<std::size_t>(j)]));
    }
  return analysis::pearson(x, y);
}

// Layout of $SWP_RELEASED_DATA:
//   gpt/ingest.json, human/ingest.json      column mappings for `swp ingest`
//   published/intra_gpt.csv, intra_human.csv, cross.csv   (optional)
//   published/benchmark.csv                 method plus numeric columns (optional)
void dataset_criterion() {
  const char* root_env = std::getenv("SWP_RELEASED_DATA");
  if (!root_env || !fs::exists(fs::path(root_env) / "gpt" / "ingest.json") ||
      !fs::exists(fs::path(root_env) / "human" / "ingest.json")) {
    report("released-dataset", Verdict::skip, "SWP_RELEASED_DATA not set or incomplete; dataset not ingested");
    return;
  }
  const fs::path root = root_env;
  const auto work = test::scratch_dir("acceptance-released");
  cli::RunContext ctx;
  ctx.data_dir = test::data_dir();
  ctx.config = cli::load_config(std::nullopt, ctx.data_dir);
  ctx.config["analysis"]["n_boot"] = 200;
  std::vector<std::string> problems;
  double h_gpt = NAN, h_human = NAN;
  for (const char* dom : {"gpt", "human"}) {
    ctx.out = work / dom;
    const auto spec = cli::read_json_file(root / dom / "ingest.json", Errc::invalid_config);
    cli::cmd_ingest(ctx, spec, root / dom);
    const auto data = cli::load_elicit(ctx.out);
    const double h = analysis::entropy_bits(analysis::tone_histogram(data.tones));
    (std::string(dom) == "gpt" ? h_gpt : h_human) = h;
  }
  std::string detail = f("entropy GPT %.3f (3.10+-0.05), human %.3f (5.48+-0.05)", h_gpt, h_human);
  bool ok = std::abs(h_gpt - 3.10) <= 0.05 && std::abs(h_human - 5.48) <= 0.05;
  const fs::path pub = root / "published";
  if (fs::exists(pub / "cross.csv")) {
    ctx.out = work / "analysis";
    cli::cmd_analyze(ctx, {work / "human", work / "gpt"});
    for (const auto& [mine, theirs, upper] :
         std::vector<std::tuple<std::string, std::string, bool>>{{"intra_human.csv", "intra_human.csv", true},
                                                                 {"intra_llm.csv", "intra_gpt.csv", true},
                                                                 {"cross_correlation.csv", "cross.csv", false}}) {
      if (!fs::exists(pub / theirs) || !fs::exists(ctx.out / mine)) continue;
      const double r = matrix_agreement(csv::read_matrix(ctx.out / mine), csv::read_matrix(pub / theirs), upper);
      detail += f("; %s r=%.3f (>=0.95)", theirs.c_str(), r);
      ok = ok && r >= 0.95;
    }
    if (fs::exists(pub / "benchmark.csv")) {
      cli::AlignInputs in;
      in.x = work / "human" / "rating_matrix.csv";
      in.y = work / "gpt" / "rating_matrix.csv";
      in.truth = ctx.out / "cross_correlation.csv";
      ratings::write_rating_matrix(work / "human", "rating_matrix",
                                   cli::load_domain(ctx, work / "human").rm);
      ratings::write_rating_matrix(work / "gpt", "rating_matrix", cli::load_domain(ctx, work / "gpt").rm);
      ctx.out = work / "align";
      const auto rep = alignment::to_json(cli::cmd_align(ctx, in));
      const auto t = csv::read(pub / "benchmark.csv");
      double worst = 0.0;
      for (const auto& row : t.rows)
        for (const auto& m : rep.at("methods")) {
          if (m.at("method") != row[0]) continue;
          for (std::size_t c = 1; c < t.header.size(); ++c) {
            if (row[c].empty()) continue;
            const auto& h = t.header[c];
            const nlohmann::json* cell = nullptr;
            if (m.contains(h)) cell = &m.at(h);
            else if (h.rfind("knn_k", 0) == 0) cell = &m.at("knn_matching").at(h.substr(5));
            if (!cell) continue;
            worst = std::max(worst, std::abs(cell->at("mean").get<double>() - csv::parse_double(row[c], h)));
          }
        }
      detail += f("; benchmark max deviation %.3f (<=0.1)", worst);
      ok = ok && worst <= 0.1;
    }
  }
  fs::remove_all(work);
  check("released-dataset", ok, detail);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  guarded("gibbs-stationarity", gibbs);
  guarded("procrustes", procrustes_criteria);
  guarded("gwot-self-alignment", gwot_criterion);
  guarded("bli-permutation-recovery", bli_criterion);
  guarded("benchmark-ordering", benchmark_criterion);
  guarded("mds", mds_criteria);
  guarded("explained-variance", explained_variance_criterion);
  guarded("entropy", entropy_criterion);
  guarded("bootstrap-calibration", bootstrap_criterion);
  guarded("validation-filter-table", validation_criterion);
  guarded("released-dataset", dataset_criterion);

  int pass = 0, fail = 0, skip = 0, unexpected = 0;
  for (const auto& l : lines) {
    pass += l.verdict == Verdict::pass;
    skip += l.verdict == Verdict::skip;
    if (l.verdict == Verdict::fail) {
      ++fail;
      unexpected += !kUnattainable.count(l.id);
    }
  }
  std::printf("\n%d passed, %d failed (%d known unattainable), %d skipped in %.1f s\n", pass, fail, fail - unexpected,
              skip, seconds_since(t0));
  return unexpected == 0 ? 0 : 1;
}
