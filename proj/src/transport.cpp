// Copyright 2026 The qmetric Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <vector>

#include "qmetric/convex.hpp"
#include "qmetric/errors.hpp"

namespace qmetric {

namespace {

constexpr double kPivotTol = 1e-12;

// Dense tableau: rows 0..m-1 are constraints, row m is the objective row of
// reduced costs; column n holds the right-hand side.
struct Tableau {
  RealMatrix t;
  std::vector<int> basis;

  int rows() const { return static_cast<int>(t.rows()) - 1; }
  int cols() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i <= rows(); ++i)
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    basis[static_cast<std::size_t>(r)] = c;
  }

  // Bland's rule over columns < limit. Returns false if unbounded.
  bool optimize(int limit) {
    for (int iter = 0; iter < 1000000; ++iter) {
      int enter = -1;
      for (int j = 0; j < limit; ++j)
        if (t(rows(), j) < -kPivotTol) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        if (t(i, enter) <= kPivotTol) continue;
        const double r = t(i, cols()) / t(i, enter);
        const bool smaller = r < best - kPivotTol;
        const bool tie = !smaller && r <= best + kPivotTol;
        if (leave < 0 || smaller ||
            (tie && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = (leave < 0 || smaller) ? r : std::min(best, r);
          leave = i;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw SolverError("tableau simplex iteration limit exceeded");
  }
};

}  // namespace

StandardLpResult solve_standard_lp(const RealMatrix& a, const RealVector& b, const RealVector& c) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != m || c.size() != n) throw ValidationError("LP dimensions are inconsistent");

  // phase 1 with artificials n..n+m-1
  Tableau tab;
  tab.t = RealMatrix::Zero(m + 1, n + m + 1);
  tab.basis.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double s = b(i) < 0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = s * a.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = s * b(i);
    tab.basis[static_cast<std::size_t>(i)] = n + i;
  }
  for (int i = 0; i < m; ++i) tab.t.row(m) -= tab.t.row(i);
  for (int i = 0; i < m; ++i) tab.t(m, n + i) = 0.0;
  tab.optimize(n + m);
  if (-tab.t(m, n + m) > 1e-9 * std::max(1.0, b.cwiseAbs().sum()))
    throw InfeasibleError("linear program is infeasible");

  // drive remaining artificials out of the basis; drop redundant rows
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    if (tab.basis[static_cast<std::size_t>(i)] >= n) {
      int col = -1;
      for (int j = 0; j < n; ++j)
        if (std::abs(tab.t(i, j)) > 1e-9) {
          col = j;
          break;
        }
      if (col < 0) continue;
      tab.pivot(i, col);
    }
    keep.push_back(i);
  }

  Tableau p2;
  const int mk = static_cast<int>(keep.size());
  p2.t = RealMatrix::Zero(mk + 1, n + 1);
  for (int r = 0; r < mk; ++r) {
    const int i = keep[static_cast<std::size_t>(r)];
    p2.t.row(r).head(n) = tab.t.row(i).head(n);
    p2.t(r, n) = tab.t(i, n + m);
    p2.basis.push_back(tab.basis[static_cast<std::size_t>(i)]);
  }
  p2.t.row(mk).head(n) = c.transpose();
  for (int r = 0; r < mk; ++r) {
    const int bcol = p2.basis[static_cast<std::size_t>(r)];
    p2.t.row(mk) -= c(bcol) * p2.t.row(r);
  }
  if (!p2.optimize(n)) throw SolverError("linear program is unbounded");

  StandardLpResult res;
  res.x = RealVector::Zero(n);
  for (int r = 0; r < mk; ++r) res.x(p2.basis[static_cast<std::size_t>(r)]) = p2.t(r, n);
  res.value = c.dot(res.x);
  return res;
}

void validate_metric(const RealMatrix& dist, double tol) {
  const Eigen::Index k = dist.rows();
  if (k < 1 || dist.cols() != k) throw ValidationError("distance matrix must be square");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(dist(i, i)) > tol) throw ValidationError("distance matrix diagonal must vanish");
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!std::isfinite(dist(i, j)) || dist(i, j) < -tol)
        throw ValidationError("distances must be finite and nonnegative");
      if (std::abs(dist(i, j) - dist(j, i)) > tol) throw ValidationError("distance matrix must be symmetric");
      for (Eigen::Index l = 0; l < k; ++l)
        if (dist(i, l) > dist(i, j) + dist(j, l) + tol)
          throw ValidationError("distance matrix violates the triangle inequality");
    }
  }
}

double transport_lp(const RealMatrix& dist, const RealVector& p, const RealVector& q) {
  validate_metric(dist);
  const int k = static_cast<int>(dist.rows());
  if (p.size() != k || q.size() != k) throw ValidationError("marginal length mismatch");
  for (int i = 0; i < k; ++i)
    if (p(i) < -1e-12 || q(i) < -1e-12) throw ValidationError("marginals must be nonnegative");
  if (std::abs(p.sum() - 1.0) > 1e-10 || std::abs(q.sum() - 1.0) > 1e-10)
    throw ValidationError("marginals must sum to one");

  // variables pi_ij at index i*k + j; row sums p, column sums q (last one
  // dropped as redundant)
  const int n = k * k;
  const int m = 2 * k - 1;
  RealMatrix a = RealMatrix::Zero(m, n);
  RealVector b(m);
  RealVector c(n);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      a(i, i * k + j) = 1.0;
      if (j < k - 1) a(k + j, i * k + j) = 1.0;
      c(i * k + j) = dist(i, j);
    }
  for (int i = 0; i < k; ++i) b(i) = std::max(0.0, p(i));
  for (int j = 0; j + 1 < k; ++j) b(k + j) = std::max(0.0, q(j));
  return solve_standard_lp(a, b, c).value;
}

}  // namespace qmetric
