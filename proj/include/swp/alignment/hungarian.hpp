#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "swp/core/error.hpp"

namespace swp::alignment {

// Minimum-cost perfect matching on a square cost matrix (shortest
// augmenting paths with potentials, O(n^3)). Entries equal to +infinity are
// forbidden. Returns col[i], the column assigned to row i, or an empty
// vector when no perfect matching avoids the forbidden entries.
inline std::vector<Eigen::Index> hungarian_min(const Eigen::MatrixXd& cost) {
  const Eigen::Index n = cost.rows();
  if (cost.cols() != n) throw Error(Errc::shape_mismatch, "assignment needs a square matrix");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; p[j] = row matched to column j, 0 = none.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Eigen::Index> p(n + 1, 0), way(n + 1, 0);
  for (Eigen::Index i = 1; i <= n; ++i) {
    p[0] = i;
    Eigen::Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const Eigen::Index i0 = p[j0];
      double delta = inf;
      Eigen::Index j1 = -1;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double c = cost(i0 - 1, j - 1);
        if (c != inf) {
          const double cur = c - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 < 0 || delta == inf) return {};
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Eigen::Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<Eigen::Index> col(n);
  for (Eigen::Index j = 1; j <= n; ++j) col[p[j] - 1] = j - 1;
  return col;
}

// Maximum-score assignment; forbidden pairs carry -infinity.
inline std::vector<Eigen::Index> hungarian_max(const Eigen::MatrixXd& score) { return hungarian_min(-score); }

}  // namespace swp::alignment
