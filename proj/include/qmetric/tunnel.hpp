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
#include <optional>
#include <vector>

#include "qmetric/bridge.hpp"

namespace qmetric {

enum class TunnelSide { A, B };

/// Sampled test of the isometric-epimorphism property: the quotient of L_D
/// through each end map agrees with the endpoint Lip-norm.
struct IsometryCheck {
  int samples = 0;  // per side
  double worst_margin = 0.0;  // max |quotient - L_side| over samples
  double tolerance = 1e-5;
  bool pass = false;
};

/// (D, L_D, pi_A, pi_B) with surjective unital *-morphisms pi: D -> A, B.
class Tunnel {
 public:
  Tunnel(Seminorm ld, StarMap pi_a, Seminorm la, StarMap pi_b, Seminorm lb);

  const Shape& ambient() const { return ld_.shape(); }
  const Seminorm& lip() const { return ld_; }
  const StarMap& pi(TunnelSide s) const { return s == TunnelSide::A ? pi_a_ : pi_b_; }
  const Seminorm& target_lip(TunnelSide s) const { return s == TunnelSide::A ? la_ : lb_; }
  const IsometryCheck& isometry() const { return check_; }

  /// Runs the sampled isometry check and stores the result.
  const IsometryCheck& check_isometry(int samples, std::uint64_t seed, double tolerance = 1e-5,
                                      double tol = 1e-8, int threads = 1);

 private:
  Seminorm ld_;
  StarMap pi_a_;
  StarMap pi_b_;
  Seminorm la_;
  Seminorm lb_;
  IsometryCheck check_;
};

/// L(a, b) = max{L_A(a), L_B(b), bn(a, b) / lambda} on A (+) B with the
/// coordinate surjections; runs the isometry check on `samples` elements.
Tunnel tunnel_from_bridge(const Bridge& bridge, const Seminorm& la, const Seminorm& lb, double lambda,
                          int samples = 20, std::uint64_t seed = 0);

struct QuotientResult {
  double value = 0.0;  // L_D of the returned lift (an upper bound)
  double lower = 0.0;  // certified lower bound on the infimum
  Element lift;
};

/// inf{L_D(d) : pi_side(d) = a}
QuotientResult quotient_seminorm(const Tunnel& tunnel, TunnelSide side, const Element& a, double tol = 1e-8);

struct TunnelQuantities {
  Bound reach;   // Hausdorff distance of the two image faces
  Bound depth;   // distance of S(D) to the hull of the faces
  Bound length;  // max(reach, depth)
  Bound extent;  // max over sides of the distance of S(D) to a face
};

/// All four quantities. Distances to faces are exact; suprema run over
/// extreme nets (exhaustive on commutative algebras). When the joint map
/// d -> (pi_A(d), pi_B(d)) is injective every state of D factors through
/// A (+) B, so the depth is certified to vanish.
TunnelQuantities tunnel_quantities(const Tunnel& tunnel, const EstimateOptions& options = {});

/// D = D1 (+) D2, L(d1, d2) = max{L1(d1), L2(d2), ||rho1(d1) - pi2(d2)|| / eps}
/// with rho1 the B-map of the first tunnel and pi2 the A-map of the second.
/// Without eps, uses 1e-3 times the larger endpoint diameter bound.
Tunnel compose_tunnels(const Tunnel& first, const Tunnel& second, std::optional<double> eps = std::nullopt,
                       int samples = 20, std::uint64_t seed = 0);

struct LiftResult {
  Element lift;       // pi_side(lift) = a, L_D(lift) <= l
  double norm = 0.0;  // ||lift||
  double lip = 0.0;   // L_D(lift)
  Element target;     // image under the other end map
};

/// A lift of a with L_D <= l and smallest norm. Throws InfeasibleError when
/// l is below the quotient value.
LiftResult lift_element(const Tunnel& tunnel, TunnelSide side, const Element& a, double l, double tol = 1e-8);

/// ||lift|| <= ||a|| + l * extent_upper + slack
bool lift_norm_within_bound(const LiftResult& lift, const Element& a, double l, double extent_upper,
                            double slack = 1e-6);

/// A bridge with the Lip-norms of its ends and a length bound supplied by
/// the caller (computed or analytic).
struct TrekStep {
  Bridge bridge;
  Seminorm la;
  Seminorm lb;
  Bound length;
};

class Trek {
 public:
  explicit Trek(std::vector<TrekStep> steps);
  const std::vector<TrekStep>& steps() const { return steps_; }
  Trek concatenate(const Trek& next) const;

 private:
  std::vector<TrekStep> steps_;
};

/// Sum of the step bounds; certified when every step is.
Bound trek_length(const Trek& trek);

/// Smallest certified trek length, or nothing when no trek is certified.
std::optional<double> propinquity_upper_bound(const std::vector<Trek>& treks);

}  // namespace qmetric
