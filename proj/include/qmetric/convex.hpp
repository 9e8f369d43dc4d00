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

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "qmetric/linalg.hpp"

namespace qmetric {

enum class NormKind {
  Spectral,   // largest singular value over the output blocks
  Euclidean,  // Euclidean norm of a single output column
  MaxEigen,   // largest eigenvalue over Hermitian output blocks
};

/// Affine matrix-valued map x -> offset + sum_i x_i C_i together with the
/// scalar function (norm or top eigenvalue) applied to it. Output entries are
/// stored block after block, column-major inside each block.
struct AffineNormMap {
  NormKind kind = NormKind::Spectral;
  std::vector<std::pair<int, int>> blocks;  // (rows, cols) per output block
  Matrix coeffs;                            // entries x dim
  Vector offset;                            // entries, empty means zero

  int dim() const { return static_cast<int>(coeffs.cols()); }
  Eigen::Index entries() const { return coeffs.rows(); }
  Vector image(const RealVector& x) const;
  double value(const RealVector& x) const;
  /// Subgradient s at x: value(y) >= value(x) + s.(y - x) for all y.
  RealVector subgradient(const RealVector& x) const;
};

/// value(x) <= rhs_coeffs . x + rhs
struct NormConstraint {
  AffineNormMap map;
  RealVector rhs_coeffs;  // empty means zero
  double rhs = 1.0;

  double violation(const RealVector& x) const;
};

struct NormProgram {
  int dim = 0;
  RealVector objective;  // maximize objective . x
  std::vector<NormConstraint> constraints;
  RealMatrix eq_matrix;  // rows x dim, may be empty
  RealVector eq_rhs;
  /// Strictly feasible point used to repair LP iterates into feasible ones.
  /// Defaults to the equality-consistent point closest to the origin when it
  /// is strictly feasible.
  std::optional<RealVector> anchor;
};

struct MinMaxProgram {
  int dim = 0;
  std::vector<AffineNormMap> objective_maps;  // minimize max_j value_j(x)
  std::vector<NormConstraint> constraints;    // hard constraints
  RealMatrix eq_matrix;
  RealVector eq_rhs;
  std::optional<RealVector> anchor;  // strictly feasible for the hard constraints
};

struct SolveOptions {
  double tol = 1e-7;
  int max_iterations = 20000;
  double max_box = 1099511627776.0;  // 2^40
  /// After a long run without gap progress, a relative gap up to this ends
  /// the loop with certified = false. When no new cut can be added or the
  /// iteration cap is reached, finite bounds are likewise returned
  /// uncertified; callers must check `certified`.
  double stall_gap = 1e-5;
  bool trace = false;
};

struct TracePoint {
  int iteration = 0;
  double lower = 0.0;
  double upper = 0.0;
  int cuts = 0;
  double box_radius = 0.0;
};

struct SolveReport {
  /// Maximization: best feasible value (a certified lower bound).
  /// Minimization: best feasible value (a certified upper bound).
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  RealVector x;  // feasible point attaining `value`
  RealVector relaxed_x;  // last LP iterate
  int cuts = 0;
  int iterations = 0;
  double violation = 0.0;  // largest constraint violation at x
  double box_radius = 0.0;
  bool certified = false;  // both bounds proven and gap <= tol * max(1, |value|)
  std::vector<TracePoint> trace;
};

SolveReport maximize_linear(const NormProgram& program, const SolveOptions& options = {});
SolveReport minimize_max_norm(const MinMaxProgram& program, const SolveOptions& options = {});

/// Exact optimum of min c.x subject to A x = b, x >= 0 by a dense two-phase
/// tableau simplex with Bland's rule. Throws InfeasibleError or SolverError
/// (unbounded).
struct StandardLpResult {
  double value = 0.0;
  RealVector x;
};
StandardLpResult solve_standard_lp(const RealMatrix& a, const RealVector& b, const RealVector& c);

/// Wasserstein-1 distance between two distributions on a finite metric space.
double transport_lp(const RealMatrix& dist, const RealVector& p, const RealVector& q);

/// Throws ValidationError unless dist is a finite (pseudo)metric within tol.
void validate_metric(const RealMatrix& dist, double tol = 1e-12);

}  // namespace qmetric
