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

#include "doctest.h"
#include "helpers.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/random.hpp"
#include "qmetric/tunnel.hpp"

using namespace qmetric;
using namespace qmetric::testing;

namespace {

RealMatrix two_points(double d) {
  RealMatrix m(2, 2);
  m << 0, d, d, 0;
  return m;
}

StarMap constants_into_two_points() {
  return StarMap::from_function(Shape({1}), Shape({1, 1}), [](const Element& c) {
    const cplx v = c.block(0)(0, 0);
    return Element(Shape({1, 1}), {Matrix::Constant(1, 1, v), Matrix::Constant(1, 1, v)});
  });
}

// two points (pivot algebra) against one point
Bridge collapse_bridge() {
  return Bridge(Element::identity(Shape({1, 1})), StarMap::identity(Shape({1, 1})), constants_into_two_points());
}

// one point against two points
Bridge expand_bridge() {
  return Bridge(Element::identity(Shape({1, 1})), constants_into_two_points(), StarMap::identity(Shape({1, 1})));
}

Seminorm one_point() { return from_metric(RealMatrix::Zero(1, 1)); }

Seminorm klein() { return from_group_action({m2(pauli_x()), m2(pauli_y()), m2(pauli_z())}, {1.0, 2.0, 1.0}); }

Matrix hadamard() {
  Matrix h(2, 2);
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

// A = B = M_2, pi_B = conjugation by the Hadamard matrix (Z -> X)
Bridge rotated_bridge() {
  const Element h = m2(hadamard());
  const StarMap rot =
      StarMap::from_function(Shape({2}), Shape({2}), [h](const Element& b) { return h * b * h.adjoint(); });
  return Bridge(Element::identity(Shape({2})), StarMap::identity(Shape({2})), rot);
}

}  // namespace

TEST_CASE("identity bridge tunnel is isometric") {
  const Seminorm L = klein();
  const Tunnel t = tunnel_from_bridge(Bridge::identity(Shape({2})), L, L, 1.0, 20, 1);
  CHECK(t.isometry().pass);
  CHECK(t.isometry().worst_margin < 1e-6);
  Rng rng = make_rng(6, 0);
  for (int i = 0; i < 5; ++i) {
    const Element a = random_self_adjoint(Shape({2}), rng);
    CHECK(std::abs(quotient_seminorm(t, TunnelSide::A, a).value - L.eval(a)) < 1e-6);
    CHECK(std::abs(quotient_seminorm(t, TunnelSide::B, a).value - L.eval(a)) < 1e-6);
  }
  CHECK_THROWS_AS(tunnel_from_bridge(Bridge::identity(Shape({2})), L, L, 0.0), ValidationError);
}

TEST_CASE("large lambda gives an isometric tunnel") {
  const Seminorm la = from_metric(two_points(1.0));
  const Seminorm lb = one_point();
  const BridgeLength len = bridge_length_bounds(collapse_bridge(), la, lb);
  const Tunnel t = tunnel_from_bridge(collapse_bridge(), la, lb, 10.0 * std::max(len.length.upper, 1e-3), 20, 2);
  CHECK(t.isometry().pass);
  // coordinate function a = (0, 1): the quotient is |a1 - a2| = 1; grid over
  // lifts (a, c) confirms no lift does better
  RealVector f(2);
  f << 0.0, 1.0;
  const Element a = Element::diagonal(Shape({1, 1}), f);
  const double q = quotient_seminorm(t, TunnelSide::A, a).value;
  CHECK(q == doctest::Approx(1.0).epsilon(1e-5));
  double grid = 1e9;
  for (int i = -400; i <= 800; ++i) {
    const double c = i / 400.0;
    const double bn = std::max(std::abs(c), std::abs(1.0 - c));
    grid = std::min(grid, std::max(1.0, bn / (10.0 * std::max(len.length.upper, 1e-3))));
  }
  CHECK(q <= grid + 1e-6);
}

TEST_CASE("small lambda breaks the isometry") {
  const Seminorm L = from_group_action({m2(pauli_x()), m2(pauli_z())}, {1.0, 2.0});
  const Tunnel t = tunnel_from_bridge(rotated_bridge(), L, L, 1e-3, 10, 3);
  CHECK_FALSE(t.isometry().pass);
  CHECK(t.isometry().worst_margin > 1e-3);
  // the first-coordinate floor holds regardless
  Rng rng = make_rng(7, 0);
  for (int i = 0; i < 10; ++i) {
    const Element a = random_self_adjoint(Shape({2}), rng);
    CHECK(quotient_seminorm(t, TunnelSide::A, a).value >= L.eval(a) - 1e-9);
  }
}

TEST_CASE("tunnel quantities") {
  const Seminorm L = klein();
  const Tunnel id = tunnel_from_bridge(Bridge::identity(Shape({2})), L, L, 1.0, 0);
  EstimateOptions o;
  o.net = 4;
  const TunnelQuantities qi = tunnel_quantities(id, o);
  // the element (c1, -c1) has quotient value 1/lambda
  CHECK(qi.reach.lower == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(qi.depth.certified);
  CHECK(qi.depth.upper == 0.0);

  const Seminorm la = from_metric(two_points(1.0));
  const Tunnel t = tunnel_from_bridge(collapse_bridge(), la, one_point(), 0.5, 0);
  const TunnelQuantities q = tunnel_quantities(t, o);
  CHECK(q.depth.certified);
  CHECK(q.depth.upper == 0.0);
  CHECK(q.reach.certified);
  CHECK(q.extent.certified);
  CHECK(q.length.lower <= q.extent.lower + 1e-6);
  CHECK(q.extent.lower <= 2.0 * q.length.lower + 1e-6);
  CHECK(q.length.lower > 0.0);
}

TEST_CASE("composition of tunnels") {
  const Seminorm la = from_metric(two_points(1.0));
  const Seminorm lb = one_point();
  const Seminorm lc = from_metric(two_points(0.5));
  const Tunnel t12 = tunnel_from_bridge(collapse_bridge(), la, lb, 0.5, 10, 4);
  const Tunnel t23 = tunnel_from_bridge(expand_bridge(), lb, lc, 0.25, 10, 5);
  CHECK(t12.isometry().pass);
  CHECK(t23.isometry().pass);
  const double eps = 0.01;
  const Tunnel t = compose_tunnels(t12, t23, eps, 10, 6);
  CHECK(t.isometry().pass);
  EstimateOptions o;
  const double e12 = tunnel_quantities(t12, o).extent.lower;
  const double e23 = tunnel_quantities(t23, o).extent.lower;
  const double e = tunnel_quantities(t, o).extent.lower;
  CHECK(e <= e12 + e23 + eps + 1e-6);
  CHECK(check_quasi_leibniz(t.lip(), PermissibleF(), 1000, 8).pass);
  CHECK_THROWS_AS(compose_tunnels(t12, t12, eps), ValidationError);

  const Seminorm L = klein();
  const Tunnel id = tunnel_from_bridge(Bridge::identity(Shape({2})), L, L, 1.0, 0);
  const Tunnel idid = compose_tunnels(id, id, std::nullopt, 5, 9);
  CHECK(idid.isometry().pass);
  o.net = 2;
  const double eid = tunnel_quantities(id, o).extent.lower;
  CHECK(eid == doctest::Approx(1.0).epsilon(1e-5));
  const double eps2 = 1e-3 * 2.0;
  CHECK(tunnel_quantities(idid, o).extent.lower <= 2.0 * eid + eps2 + 1e-6);
}

TEST_CASE("lifts") {
  const Seminorm L = klein();
  const Tunnel id = tunnel_from_bridge(Bridge::identity(Shape({2})), L, L, 1.0, 0);
  const Element a = m2(0.3 * pauli_x() - 0.2 * pauli_z());
  const LiftResult r = lift_element(id, TunnelSide::A, a, L.eval(a));
  CHECK(r.norm == doctest::Approx(operator_norm(a)).epsilon(1e-5));
  CHECK(r.lip <= L.eval(a) * (1.0 + 1e-6) + 1e-7);
  CHECK(r.target.distance(a) <= L.eval(a) + 1e-5);
  CHECK_THROWS_AS(lift_element(id, TunnelSide::A, a, 0.5 * L.eval(a)), InfeasibleError);

  const Seminorm la = from_metric(two_points(1.0));
  const Tunnel t = tunnel_from_bridge(collapse_bridge(), la, one_point(), 0.5, 0);
  RealVector f(2);
  f << 0.1, 0.3;
  const Element fa = Element::diagonal(Shape({1, 1}), f);
  const double l = 1.5 * la.eval(fa);
  const LiftResult lr = lift_element(t, TunnelSide::A, fa, l);
  CHECK(lr.lip <= l + 1e-7);
  CHECK(one_point().eval(lr.target) <= l + 1e-9);
  CHECK(t.pi(TunnelSide::A).apply(lr.lift).distance(fa) < 1e-7);
  const double ext = tunnel_quantities(t).extent.upper;
  CHECK(lift_norm_within_bound(lr, fa, l, ext));
}

TEST_CASE("treks") {
  const Seminorm L = klein();
  const Bridge id = Bridge::identity(Shape({2}));
  const Trek single({TrekStep{id, L, L, Bound{0.0, 0.0, true}}});
  const Bound s = trek_length(single);
  CHECK(s.lower == 0.0);
  CHECK(s.upper == 0.0);
  const Trek a({TrekStep{id, L, L, Bound{0.25, 0.3, true}}});
  const Trek b({TrekStep{id, L, L, Bound{0.125, 0.2, true}}});
  const Trek ab = a.concatenate(b);
  CHECK(trek_length(ab).upper == trek_length(a).upper + trek_length(b).upper);
  CHECK(trek_length(ab).lower == trek_length(a).lower + trek_length(b).lower);
  CHECK(*propinquity_upper_bound({ab}) == doctest::Approx(0.5));
  const Trek c({TrekStep{id, L, L, Bound{0.0, 0.1, false}}});
  CHECK_FALSE(propinquity_upper_bound({ab.concatenate(c)}).has_value());
  CHECK(*propinquity_upper_bound({ab, c, a}) == doctest::Approx(0.3));
  const Seminorm other = from_group_action({m2(pauli_x()), m2(pauli_z())}, {1.0, 2.0});
  CHECK_THROWS_AS(Trek({TrekStep{id, L, L, Bound{}}, TrekStep{id, other, other, Bound{}}}), ValidationError);
}
