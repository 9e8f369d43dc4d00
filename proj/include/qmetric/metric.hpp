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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qmetric/algebra.hpp"
#include "qmetric/convex.hpp"
#include "qmetric/lipnorm.hpp"

namespace qmetric {

struct DistanceResult {
  double value = 0.0;  // certified lower bound on the supremum
  double upper = 0.0;  // certified upper bound
  Element witness;     // self-adjoint a attaining `value`
  SolveReport report;
};

/// mk_L(phi, psi) = sup{|phi(a) - psi(a)| : L(a) <= 1}, solved in the
/// trace-orthogonal complement of the unit.
DistanceResult mk_distance_report(const Seminorm& L, const State& phi, const State& psi,
                                  const SolveOptions& options = {});
double mk_distance(const Seminorm& L, const State& phi, const State& psi, double tol = 1e-7);

/// bl_{L,r}(phi, psi) = sup{|phi(a) - psi(a)| : L(a) <= 1, ||a|| <= r}.
DistanceResult bl_distance_report(const Seminorm& L, double r, const State& phi, const State& psi,
                                  const SolveOptions& options = {});
double bl_distance(const Seminorm& L, double r, const State& phi, const State& psi, double tol = 1e-7);

struct DiameterBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool upper_certified = false;
  std::string method;
};

/// lower: largest mk distance over a state net (all pure states for
/// commutative shapes, net_size random pure states otherwise). upper: the
/// seminorm's certificate when present, else a non-certified solver bound.
DiameterBounds diameter_bounds(const Seminorm& L, int net_size, std::uint64_t seed, double tol = 1e-7,
                               int threads = 1);

struct HausdorffBounds {
  double lower = 0.0;
  double heuristic_upper = 0.0;
  bool certified = false;  // heuristic_upper is a proven bound
};

using StateMetric = std::function<double(const State&, const State&)>;

/// Pairwise distance matrix (rows: a, cols: b); evaluations run in
/// parallel and are stored by index.
RealMatrix pairwise_distances(const std::vector<State>& a, const std::vector<State>& b,
                              const StateMetric& d, int threads = 1);

/// Hausdorff distance of two finite nets. `mesh` is the caller's declared
/// net mesh; `mesh_certified` says whether it is proven.
HausdorffBounds hausdorff_bounds(const std::vector<State>& net_a, const std::vector<State>& net_b,
                                 const StateMetric& d, double mesh = 0.0, bool mesh_certified = false,
                                 int threads = 1);
/// A closed convex set of states given by its support function
/// h(a) = sup_{mu in K} mu(a) = max_j lambda_max(F_j(a)), where each face F_j
/// is a unital linear map into Hermitian matrix blocks.
class StateSet {
 public:
  /// Every state of the shape.
  static StateSet all(const Shape& shape);
  /// {phi o pi : phi a state of pi.target()} as states of pi.source().
  static StateSet pullback(const StarMap& pi);
  /// As pullback, restricted to target states supported on the ranges of
  /// the given isometries (one per target block, zero columns to skip).
  static StateSet compressed_pullback(const StarMap& pi, const std::vector<Matrix>& isometries);
  /// Convex hull of the union.
  static StateSet hull(const StateSet& a, const StateSet& b);

  const Shape& shape() const { return shape_; }
  const std::vector<Atom>& faces() const { return faces_; }
  double support(const Element& a) const;

 private:
  Shape shape_;
  std::vector<Atom> faces_;
};

/// mk_L distance from phi to K, computed exactly through
/// sup{phi(a) - h_K(a) : L(a) <= 1}.
DistanceResult mk_distance_to_set(const Seminorm& L, const State& phi, const StateSet& set,
                                  const SolveOptions& options = {});

/// A two-sided estimate. `upper` is a proven bound only when `certified`.
struct Bound {
  double lower = 0.0;
  double upper = 0.0;
  bool certified = false;
};

/// Pure states standing in for a whole state space: all point evaluations
/// for commutative shapes (exhaustive, since the functions maximized over
/// it are convex), else the standard basis vector states of every block
/// followed by `random_count` random pure states.
struct ExtremeNet {
  std::vector<State> states;
  bool exhaustive = false;
};
ExtremeNet extreme_state_net(const Shape& shape, int random_count, std::uint64_t seed);

/// sup over `outer` of the mk_L distance to `set`. Certified when the net
/// is exhaustive and every solve closed its gap.
Bound directed_set_distance(const Seminorm& L, const ExtremeNet& outer, const StateSet& set,
                            const SolveOptions& options = {}, int threads = 1);

/// Same from a precomputed distance matrix.
HausdorffBounds hausdorff_from_matrix(const RealMatrix& d, double mesh = 0.0, bool mesh_certified = false);
/// max_i min_j d(i, j)
double directed_hausdorff(const RealMatrix& d);

}  // namespace qmetric
