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

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/metric.hpp"
#include "qmetric/random.hpp"

using namespace qmetric;
using namespace qmetric::testing;

namespace {

RealMatrix random_metric(int k, Rng& rng) {
  RealMatrix d(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) d(i, j) = d(j, i) = i == j ? 0.0 : 0.1 + uniform01(rng);
  for (int m = 0; m < k; ++m)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) d(i, j) = std::min(d(i, j), d(i, m) + d(m, j));
  return d;
}

RealVector random_distribution(int k, Rng& rng) {
  RealVector p(k);
  for (int i = 0; i < k; ++i) p(i) = -std::log(1.0 - uniform01(rng));
  return p / p.sum();
}

Shape points(int k) { return Shape(std::vector<int>(static_cast<std::size_t>(k), 1)); }

RealMatrix two_points() {
  RealMatrix d(2, 2);
  d << 0, 1, 1, 0;
  return d;
}

// Lip-ball of M_2 under the Pauli conjugation action, trace-free part
// a = x X + y Y + z Z: L(a) = 2 max(|(y, z)|, |(x, y)|) with lengths one
double pauli_grid_mk(const State& phi, const State& psi, int steps) {
  const double ex = evaluate_real(phi, m2(pauli_x())) - evaluate_real(psi, m2(pauli_x()));
  const double ey = evaluate_real(phi, m2(pauli_y())) - evaluate_real(psi, m2(pauli_y()));
  const double ez = evaluate_real(phi, m2(pauli_z())) - evaluate_real(psi, m2(pauli_z()));
  double best = 0.0;
  const double h = 1.0 / steps;
  for (int i = -steps; i <= steps; ++i)
    for (int j = -steps; j <= steps; ++j)
      for (int k = -steps; k <= steps; ++k) {
        const double x = 0.5 * i * h, y = 0.5 * j * h, z = 0.5 * k * h;
        const double l = 2.0 * std::max(std::hypot(y, z), std::hypot(x, y));
        if (l <= 1.0) best = std::max(best, std::abs(x * ex + y * ey + z * ez));
      }
  return best;
}

}  // namespace

TEST_CASE("mk distance on two points") {
  const Seminorm L = from_metric(two_points());
  const Shape s = points(2);
  CHECK(mk_distance(L, State::dirac(s, 0), State::dirac(s, 1)) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(mk_distance(L, State::dirac(s, 0), State::dirac(s, 0)) < 1e-9);
  // the commutator seminorm of the same space gives the same metric
  const Seminorm C = from_commutator(m2(pauli_x()), StarMap::diagonal_embedding(2));
  CHECK(mk_distance(C, State::dirac(s, 0), State::dirac(s, 1)) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("Dirac isometry and transport oracle") {
  Rng rng = make_rng(21, 0);
  for (int t = 0; t < 12; ++t) {
    const int k = 3 + t % 4;
    const RealMatrix d = random_metric(k, rng);
    const Seminorm L = from_metric(d);
    const Shape s = points(k);
    for (int x = 0; x < k; ++x)
      for (int y = x + 1; y < k; ++y)
        CHECK(std::abs(mk_distance(L, State::dirac(s, x), State::dirac(s, y)) - d(x, y)) < 1e-6);
    const RealVector p = random_distribution(k, rng);
    const RealVector q = random_distribution(k, rng);
    const double mk = mk_distance(L, State::from_distribution(s, p), State::from_distribution(s, q));
    CHECK(std::abs(mk - transport_lp(d, p, q)) < 1e-6);
  }
}

TEST_CASE("bounded Lipschitz distance") {
  const Seminorm L = from_metric(two_points());
  const Shape s = points(2);
  const State a = State::dirac(s, 0);
  const State b = State::dirac(s, 1);
  // slope at most one and |f| <= r gives min(1, 2r)
  CHECK(bl_distance(L, 0.25, a, b) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(bl_distance(L, 1.0, a, b) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(bl_distance(L, 0.25, a, a) < 1e-9);
  CHECK_THROWS_AS(bl_distance(L, 0.0, a, b), ValidationError);

  Rng rng = make_rng(4, 0);
  for (int t = 0; t < 8; ++t) {
    const int k = 3 + t % 3;
    const RealMatrix d = random_metric(k, rng);
    const Seminorm Lk = from_metric(d);
    const Shape sk = points(k);
    const State p = State::from_distribution(sk, random_distribution(k, rng));
    const State q = State::from_distribution(sk, random_distribution(k, rng));
    const double mk = mk_distance(Lk, p, q);
    double prev = 0.0;
    for (double r : {0.05, 0.2, 0.5, *Lk.diameter_certificate()}) {
      const double bl = bl_distance(Lk, r, p, q);
      CHECK(bl <= mk + 1e-8);
      CHECK(bl >= prev - 1e-8);
      prev = bl;
    }
    CHECK(std::abs(prev - mk) <= 2e-7);
  }
}

TEST_CASE("mk on M_2 against a grid over the Lip-ball") {
  const Seminorm L = from_group_action({m2(pauli_x()), m2(pauli_z())}, {1.0, 1.0});
  Vector e1(2);
  e1 << 1, 0;
  const State phi = State::vector_state(Shape({2}), 0, e1);
  const State psi = State::normalized_trace(Shape({2}));
  const double mk = mk_distance(L, phi, psi);
  const double grid = pauli_grid_mk(phi, psi, 40);
  CHECK(mk >= grid - 1e-7);
  CHECK(mk <= grid + 0.03);
  Rng rng = make_rng(8, 0);
  for (int t = 0; t < 3; ++t) {
    const State a = random_pure_state(Shape({2}), rng);
    const State b = random_mixed_state(Shape({2}), rng);
    const double v = mk_distance(L, a, b);
    const double g = pauli_grid_mk(a, b, 40);
    CHECK(v >= g - 1e-7);
    CHECK(v <= g + 0.03);
  }
}

TEST_CASE("mk is a metric on sampled states") {
  const Seminorm L = from_group_action({m2(pauli_x()), m2(pauli_z())}, {1.0, 1.0});
  Rng rng = make_rng(12, 0);
  for (int t = 0; t < 6; ++t) {
    const State a = random_mixed_state(Shape({2}), rng);
    const State b = random_pure_state(Shape({2}), rng);
    const State c = random_mixed_state(Shape({2}), rng);
    const double ab = mk_distance(L, a, b), ba = mk_distance(L, b, a);
    CHECK(std::abs(ab - ba) < 1e-8);
    CHECK(ab <= mk_distance(L, a, c) + mk_distance(L, c, b) + 1e-7);
  }
}

TEST_CASE("diameter bounds") {
  const DiameterBounds two = diameter_bounds(from_metric(two_points()), 0, 0);
  CHECK(two.lower == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(two.upper == doctest::Approx(1.0));
  CHECK(two.upper_certified);

  // Klein group with word lengths 1, 2, 1: mean over the group is 1
  const Seminorm L = from_group_action({m2(pauli_x()), m2(pauli_y()), m2(pauli_z())}, {1.0, 2.0, 1.0});
  const DiameterBounds db = diameter_bounds(L, 6, 3, 1e-7, 2);
  CHECK(db.upper == doctest::Approx(2.0));
  CHECK(db.upper_certified);
  CHECK(db.lower <= db.upper + 1e-9);
  CHECK(db.lower > 0.0);

  const Seminorm C = from_commutator(Element(Shape({3}), {[] {
                                       Matrix d = Matrix::Zero(3, 3);
                                       d(0, 1) = d(1, 0) = 1.0;
                                       d(1, 2) = d(2, 1) = 2.0;
                                       return d;
                                     }()}),
                                     StarMap::diagonal_embedding(3));
  const DiameterBounds dc = diameter_bounds(C, 0, 0);
  CHECK_FALSE(dc.upper_certified);
  CHECK(dc.lower <= dc.upper + 1e-9);
}

TEST_CASE("Hausdorff bounds of finite nets") {
  RealMatrix d(3, 3);
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const Seminorm L = from_metric(d);
  const Shape s = points(3);
  const StateMetric mk = [&](const State& a, const State& b) { return mk_distance(L, a, b); };
  const std::vector<State> one{State::dirac(s, 0)};
  const std::vector<State> ends{State::dirac(s, 0), State::dirac(s, 2)};
  const HausdorffBounds h = hausdorff_bounds(one, ends, mk);
  CHECK(h.lower == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(hausdorff_bounds(ends, ends, mk, 0.0, true, 3).lower < 1e-9);
  const std::vector<State> other{State::dirac(s, 1)};
  CHECK(hausdorff_bounds(one, other, mk).lower == doctest::Approx(1.0).epsilon(1e-7));
  CHECK_THROWS_AS(hausdorff_bounds({}, ends, mk), ValidationError);
  const HausdorffBounds meshed = hausdorff_bounds(one, ends, mk, 0.25, false);
  CHECK(meshed.heuristic_upper == doctest::Approx(2.25).epsilon(1e-7));
  CHECK_FALSE(meshed.certified);
}

TEST_CASE("pairwise distances are thread-count independent") {
  const Seminorm L = from_group_action({m2(pauli_x()), m2(pauli_z())}, {1.0, 1.0});
  const auto net = state_net(Shape({2}), NetKind::PureRandom, 4, 5);
  const StateMetric mk = [&](const State& a, const State& b) { return mk_distance(L, a, b); };
  const RealMatrix one = pairwise_distances(net, net, mk, 1);
  const RealMatrix four = pairwise_distances(net, net, mk, 4);
  CHECK((one - four).norm() == 0.0);
}

TEST_CASE("distance to a convex set of states") {
  RealMatrix d(3, 3);
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const Seminorm L = from_metric(d);
  const Shape s = points(3);
  const StarMap id = StarMap::identity(s);
  const Matrix one = Matrix::Identity(1, 1);
  const Matrix none(1, 0);
  const StateSet at2 = StateSet::compressed_pullback(id, {none, none, one});
  const StateSet at1 = StateSet::compressed_pullback(id, {none, one, none});
  const State d0 = State::dirac(s, 0);
  CHECK(mk_distance_to_set(L, d0, at2).value == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(mk_distance_to_set(L, d0, StateSet::hull(at1, at2)).value == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(mk_distance_to_set(L, d0, StateSet::all(s)).value < 1e-7);
  // mixed source state: transport to a point costs the mean distance
  RealVector p(3);
  p << 0.5, 0.25, 0.25;
  CHECK(mk_distance_to_set(L, State::from_distribution(s, p), at2).value ==
        doctest::Approx(0.5 * 2 + 0.25 * 1).epsilon(1e-7));
  const Bound b = directed_set_distance(L, extreme_state_net(s, 0, 0), at2);
  CHECK(b.lower == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(b.certified);
  CHECK(b.upper >= b.lower);

  // a singleton set recovers mk
  const Seminorm Lq = from_group_action({m2(pauli_x()), m2(pauli_z())}, {1.0, 1.0});
  const StarMap id2 = StarMap::identity(Shape({2}));
  const State e1 = State::vector_state(Shape({2}), 0, Vector::Unit(2, 0));
  const State e2 = State::vector_state(Shape({2}), 0, Vector::Unit(2, 1));
  const StateSet only_e2 = StateSet::compressed_pullback(id2, {Matrix(Vector::Unit(2, 1))});
  CHECK(mk_distance_to_set(Lq, e1, only_e2).value == doctest::Approx(mk_distance(Lq, e1, e2)).epsilon(1e-6));
  CHECK_FALSE(directed_set_distance(Lq, extreme_state_net(Shape({2}), 3, 1), only_e2).certified);
}
