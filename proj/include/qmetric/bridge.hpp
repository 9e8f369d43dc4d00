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
#include <vector>

#include "qmetric/algebra.hpp"
#include "qmetric/lipnorm.hpp"
#include "qmetric/metric.hpp"

namespace qmetric {

/// (D, omega, pi_A, pi_B): two unital *-monomorphisms into D and a pivot
/// whose 1-level set {phi : phi(d) = phi(d omega) = phi(omega d)} is nonempty.
class Bridge {
 public:
  Bridge(Element pivot, StarMap pi_a, StarMap pi_b);
  /// omega = 1 and both maps the identity of `shape`.
  static Bridge identity(const Shape& shape);

  const Shape& ambient() const { return pivot_.shape(); }
  const Shape& domain() const { return pi_a_.source(); }
  const Shape& codomain() const { return pi_b_.source(); }
  const Element& pivot() const { return pivot_; }
  const StarMap& pi_a() const { return pi_a_; }
  const StarMap& pi_b() const { return pi_b_; }
  /// Per block of D, orthonormal columns spanning ker(1 - omega) and
  /// ker(1 - omega^*) (zero columns where the block has none).
  const std::vector<Matrix>& level_isometries() const { return level_; }

  /// pi_A(a) omega - omega pi_B(b)
  Element displacement(const Element& a, const Element& b) const;

 private:
  Element pivot_;
  StarMap pi_a_;
  StarMap pi_b_;
  std::vector<Matrix> level_;
};

/// bn(a, b) = ||pi_A(a) omega - omega pi_B(b)||
double bridge_seminorm(const Bridge& bridge, const Element& a, const Element& b);

struct OneLevelSupport {
  Element projection;  // onto the common fixed vectors of omega and omega^*
  std::vector<State> net;  // basis vector states, then random ones
};
OneLevelSupport one_level_support(const Bridge& bridge, int random_count = 0, std::uint64_t seed = 0);

struct EstimateOptions {
  int directions = 8;  // random directions per side for the reach
  int net = 8;         // random pure states per noncommutative state space
  std::uint64_t seed = 0;
  double tol = 1e-7;
  int threads = 1;
};

/// Hausdorff distance of the Lip-unit balls under the bridge seminorm. The
/// inner infimum is solved exactly; the outer supremum runs over extreme
/// points of the ball found from coordinate and random directions, so the
/// upper value is never certified.
Bound bridge_reach_bounds(const Bridge& bridge, const Seminorm& la, const Seminorm& lb,
                          const EstimateOptions& options = {});
/// max over both sides of sup_phi mk(phi, pulled-back 1-level states). The
/// distance to the set is exact; the supremum is exhaustive (certified) on
/// commutative sides and sampled otherwise.
Bound bridge_height_bounds(const Bridge& bridge, const Seminorm& la, const Seminorm& lb,
                           const EstimateOptions& options = {});

struct BridgeLength {
  Bound reach;
  Bound height;
  Bound length;  // componentwise max
};
BridgeLength bridge_length_bounds(const Bridge& bridge, const Seminorm& la, const Seminorm& lb,
                                  const EstimateOptions& options = {});

/// max{delta (1 + max(diam_a, diam_b) / 2), height}
double perturbation_bound(double delta, double diam_a, double diam_b, double height);
/// |1 - delta| (1/2 + max(diam_a, diam_b)) for a delta-bi-Lipschitz isomorphism
double bi_lipschitz_bound(double delta, double diam_a, double diam_b);

/// Componentwise maximum; certified when both are.
Bound max_bound(const Bound& a, const Bound& b);

}  // namespace qmetric
