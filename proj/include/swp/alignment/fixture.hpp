#pragma once

#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "swp/alignment/evaluate.hpp"
#include "swp/core/rng.hpp"

namespace swp::alignment {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the signs
// of R's diagonal folded in).
inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, Rng& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(n, n, rng));
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k)
    if (r(k, k) < 0) q.col(k) *= -1.0;
  return q;
}

// Random rotation that leaves the all-ones direction fixed, so row-wise
// Pearson correlations are the same before and after it.
inline Eigen::MatrixXd random_orthogonal_fixing_ones(Eigen::Index n, Rng& rng) {
  Eigen::MatrixXd basis = gaussian_matrix(n, n, rng);
  basis.col(0).setOnes();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd h = qr.householderQ();  // first column is +-1/sqrt(n)
  Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(n, n);
  inner.bottomRightCorner(n - 1, n - 1) = random_orthogonal(n - 1, rng);
  return h * inner * h.transpose();
}

// Two domains over the same tones and sentences. Domain B's tone j behaves
// like domain A's tone truth[j]: a share of the tones is permuted among
// themselves, the rest keep their identity. The embeddings handed to the
// methods have B's sentence coordinates rotated (about the all-ones axis),
// so nothing can be read off shared coordinates; the ground-truth cross
// correlation is computed before the rotation.
struct BenchmarkFixture {
  Eigen::MatrixXd x;             // domain A embeddings
  Eigen::MatrixXd y;             // domain B embeddings, rotated
  Eigen::MatrixXd ground_truth;  // Pearson(x_i, unrotated y_j)
  std::vector<Eigen::Index> truth;
  Eigen::MatrixXd rotation;
};

struct FixtureOptions {
  Eigen::Index tones = 40;
  Eigen::Index sentences = 80;
  double permuted_share = 0.5;
  int factors = 5;         // latent tone structure: scores with decaying scale times random loadings
  double unique = 0.3;     // tone-specific component shared by both domains
  double noise = 0.3;      // domain-specific rating noise
  double offset = 3.0;  // puts values on a rating-like scale
  std::uint64_t seed = 0;
};

inline BenchmarkFixture make_fixture(const FixtureOptions& o = {}) {
  Rng rng(derive_seed(o.seed, hash_string("benchmark-fixture")));
  Eigen::MatrixXd scores = gaussian_matrix(o.tones, o.factors, rng);
  for (int k = 0; k < o.factors; ++k) scores.col(k) *= 2.0 / (1.0 + k);
  const Eigen::MatrixXd z = (scores * gaussian_matrix(o.factors, o.sentences, rng) +
                             o.unique * gaussian_matrix(o.tones, o.sentences, rng)).array() + o.offset;
  std::vector<Eigen::Index> truth(static_cast<std::size_t>(o.tones));
  std::iota(truth.begin(), truth.end(), 0);
  std::vector<Eigen::Index> moved(truth);
  rng.shuffle(moved);
  moved.resize(static_cast<std::size_t>(std::llround(o.permuted_share * static_cast<double>(o.tones))));
  // cycle the chosen tones so none of them keeps its identity
  for (std::size_t k = 0; k < moved.size(); ++k) truth[static_cast<std::size_t>(moved[k])] = moved[(k + 1) % moved.size()];
  BenchmarkFixture f;
  f.truth = truth;
  f.x = z + o.noise * gaussian_matrix(o.tones, o.sentences, rng);
  Eigen::MatrixXd yb(o.tones, o.sentences);
  for (Eigen::Index j = 0; j < o.tones; ++j) yb.row(j) = z.row(truth[static_cast<std::size_t>(j)]);
  yb += o.noise * gaussian_matrix(o.tones, o.sentences, rng);
  f.ground_truth = row_correlations(f.x, yb);
  f.rotation = random_orthogonal_fixing_ones(o.sentences, rng);
  f.y = yb * f.rotation;
  return f;
}

}  // namespace swp::alignment
