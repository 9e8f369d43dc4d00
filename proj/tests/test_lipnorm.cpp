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
#include <memory>

#include "doctest.h"
#include "helpers.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/lipnorm.hpp"
#include "qmetric/random.hpp"

using namespace qmetric;
using namespace qmetric::testing;

namespace {

Seminorm pauli_action() { return from_group_action({m2(pauli_x()), m2(pauli_z())}, {1.0, 1.0}); }

Seminorm two_point_commutator() {
  return from_commutator(m2(pauli_x()), StarMap::diagonal_embedding(2));
}

Matrix tridiagonal_dirac() {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 1) = d(1, 0) = 1.0;
  d(1, 2) = d(2, 1) = 2.0;
  return d;
}

std::vector<std::shared_ptr<const ConditionalExpectation>> m2_filtration() {
  const Shape s2({2});
  return {std::make_shared<SpanExpectation>(std::vector<Element>{Element::identity(s2)}),
          std::make_shared<SpanExpectation>(std::vector<Element>{Element::identity(s2), m2(pauli_z())}),
          std::make_shared<SpanExpectation>(
              std::vector<Element>{Element::identity(s2), m2(pauli_x()), m2(pauli_y()), m2(pauli_z())})};
}

Seminorm diagonal_distance() {
  const Shape s2({2});
  return Seminorm::dist_to_subspace({Element::identity(s2), m2(pauli_z())});
}

State diag_state(double p) {
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = p;
  rho(1, 1) = 1.0 - p;
  return State(Shape({2}), {rho});
}

}  // namespace

TEST_CASE("unit is in every kernel") {
  const Element one = Element::identity(Shape({2}));
  CHECK(pauli_action().eval(one) < 1e-12);
  CHECK(two_point_commutator().eval(Element::identity(Shape({1, 1}))) < 1e-12);
  CHECK(from_filtration(m2_filtration(), {1.0, 0.5}).eval(one) < 1e-12);
  CHECK(from_stddev(State::normalized_trace(Shape({2}))).eval(one) < 1e-12);
  CHECK(diagonal_distance().eval(one) < 1e-7);
}

TEST_CASE("group action seminorm") {
  const Seminorm L = pauli_action();
  CHECK(L.eval(m2(pauli_x())) == doctest::Approx(2.0));
  CHECK(L.eval(m2(pauli_z())) == doctest::Approx(2.0));
  CHECK(L.kernel_dim() == 1);
  CHECK(L.lipschitz_pair());
  // conjugation by Z alone fixes the diagonals
  CHECK_THROWS_AS(from_group_action({m2(pauli_z())}, {1.0}), ValidationError);
  Matrix skew(2, 2);
  skew << 1, 1, 0, 1;
  CHECK_THROWS_AS(from_group_action({m2(skew)}, {1.0}), ValidationError);
  CHECK_THROWS_AS(from_group_action({m2(pauli_x()), m2(pauli_z())}, {1.0, 0.0}), ValidationError);
}

TEST_CASE("group action seminorm is invariant under the group") {
  // the full Klein group {1, X, Y, Z} acting by conjugation
  const std::vector<Element> us{m2(pauli_x()), m2(pauli_y()), m2(pauli_z())};
  const Seminorm L = from_group_action(us, {1.0, 2.0, 1.0});
  REQUIRE(L.diameter_certificate().has_value());
  CHECK(*L.diameter_certificate() == doctest::Approx(2.0 * 4.0 / 4.0));
  Rng rng = make_rng(11, 0);
  for (int t = 0; t < 50; ++t) {
    const Element a = random_self_adjoint(Shape({2}), rng);
    for (const auto& u : us) CHECK(std::abs(L.eval(u * a * u.adjoint()) - L.eval(a)) < 1e-9);
  }
  // {X, Z} alone is not closed, so no certificate is claimed
  CHECK_FALSE(pauli_action().diameter_certificate().has_value());
}

TEST_CASE("distance to a subspace") {
  const Seminorm L = diagonal_distance();
  CHECK(L.eval(m2(pauli_x())) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(L.eval(m2(pauli_z())) < 1e-7);
  const auto [lo, hi] = L.eval_bounds(m2(pauli_x() + 0.3 * pauli_y()));
  // nearest diagonal is 0 for off-diagonal a, so the value is ||a||
  const double exact = operator_norm(m2(pauli_x() + 0.3 * pauli_y()));
  CHECK(lo <= exact + 1e-9);
  CHECK(hi >= exact - 1e-9);
  CHECK(hi - lo <= 1e-6);
  CHECK_THROWS_AS(Seminorm::dist_to_subspace({m2(pauli_z())}), ValidationError);
}

TEST_CASE("commutator seminorm") {
  const Seminorm L = two_point_commutator();
  const Shape s11({1, 1});
  RealVector f(2);
  f << 0.3, -1.2;
  CHECK(L.eval(Element::diagonal(s11, f)) == doctest::Approx(1.5));
  CHECK_THROWS_AS(from_commutator(Element::zero(Shape({2})), StarMap::diagonal_embedding(2)), ValidationError);

  // [D, diag f] has entries D_ij (f_j - f_i); for this tridiagonal D its
  // only nonzero singular value is sqrt((f2-f1)^2 + 4 (f3-f2)^2)
  const Seminorm L3 = from_commutator(Element(Shape({3}), {tridiagonal_dirac()}), StarMap::diagonal_embedding(3));
  Rng rng = make_rng(5, 0);
  for (int t = 0; t < 20; ++t) {
    RealVector g(3);
    for (int i = 0; i < 3; ++i) g(i) = standard_normal(rng);
    const double expect = std::sqrt(std::pow(g(1) - g(0), 2) + 4.0 * std::pow(g(2) - g(1), 2));
    CHECK(L3.eval(Element::diagonal(Shape({1, 1, 1}), g)) == doctest::Approx(expect).epsilon(1e-12));
  }
  // a diagonal Dirac operator commutes with the diagonal representation
  Matrix dd = Matrix::Zero(3, 3);
  dd(1, 1) = 1.0;
  dd(2, 2) = 2.0;
  CHECK_THROWS_AS(from_commutator(Element(Shape({3}), {dd}), StarMap::diagonal_embedding(3)), ValidationError);
}

TEST_CASE("filtration seminorm") {
  const Seminorm L = from_filtration(m2_filtration(), {1.0, 0.5});
  CHECK(L.eval(m2(pauli_z())) == doctest::Approx(1.0));
  CHECK(L.eval(m2(pauli_x())) == doctest::Approx(2.0));
  REQUIRE(L.diameter_certificate().has_value());
  CHECK(*L.diameter_certificate() == doctest::Approx(2.0));
  CHECK_THROWS_AS(from_filtration(m2_filtration(), {1.0, -0.5}), ValidationError);
  auto reversed = m2_filtration();
  std::swap(reversed[1], reversed[2]);
  CHECK_THROWS_AS(from_filtration(reversed, {1.0, 0.5, 0.25}), ValidationError);
  // the first stage must be span{1}
  const auto stages = m2_filtration();
  CHECK_THROWS_AS(from_filtration({stages[1], stages[2]}, {1.0}), ValidationError);
}

TEST_CASE("standard deviation seminorm") {
  const Seminorm L = from_stddev(State::normalized_trace(Shape({2})));
  CHECK(L.eval(m2(pauli_z())) == doctest::Approx(1.0));
  Matrix p = Matrix::Zero(2, 2);
  p(0, 0) = 1.0;
  CHECK(from_stddev(diag_state(0.75)).eval(m2(p)) == doctest::Approx(std::sqrt(3.0) / 4.0));
  CHECK_THROWS_AS(from_stddev(diag_state(1.0)), ValidationError);
  // direct formula on random inputs
  Rng rng = make_rng(3, 0);
  const State mu = random_mixed_state(Shape({2, 3}), rng);
  const Seminorm Ls = from_stddev(mu);
  for (int t = 0; t < 20; ++t) {
    const Element a = random_self_adjoint(Shape({2, 3}), rng);
    const double m = evaluate_real(mu, a);
    const double expect = std::sqrt(evaluate_real(mu, a * a) - m * m);
    CHECK(Ls.eval(a) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("seminorm axioms on random elements") {
  Rng rng = make_rng(17, 0);
  const std::vector<Seminorm> ls{pauli_action(), from_filtration(m2_filtration(), {1.0, 0.5}),
                                 from_stddev(diag_state(0.3))};
  for (const auto& L : ls)
    for (int t = 0; t < 50; ++t) {
      const Element a = random_self_adjoint(Shape({2}), rng);
      const Element b = random_self_adjoint(Shape({2}), rng);
      const double s = standard_normal(rng);
      CHECK(std::abs(L.eval(s * a) - std::abs(s) * L.eval(a)) <= 1e-9 * (1 + L.eval(a)));
      CHECK(L.eval(a + b) <= L.eval(a) + L.eval(b) + 1e-9);
    }
}

TEST_CASE("Leibniz suites") {
  const PermissibleF leibniz;
  CHECK(check_quasi_leibniz(pauli_action(), leibniz, 1000, 1).pass);
  CHECK(check_quasi_leibniz(two_point_commutator(), leibniz, 1000, 2).pass);
  CHECK(check_quasi_leibniz(from_commutator(Element(Shape({3}), {tridiagonal_dirac()}),
                                            StarMap::diagonal_embedding(3)),
                            leibniz, 1000, 3)
            .pass);
  CHECK(check_quasi_leibniz(from_stddev(diag_state(0.3)), leibniz, 1000, 4).pass);
  CHECK(check_quasi_leibniz(diagonal_distance(), leibniz, 1000, 5).pass);
  // the filtration seminorm is quasi-Leibniz with constant 2
  CHECK(check_quasi_leibniz(from_filtration(m2_filtration(), {1.0, 0.5}), PermissibleF(2.0, 0.0), 1000, 6).pass);
}

TEST_CASE("overweighted Pauli coordinate breaks the Leibniz rule") {
  // L(a) = max(|x1|, |x2|, 4|x3|) in Pauli coordinates: {X, Y} = Z gives
  // L({X, Y}) = 4 > ||X|| L(Y) + L(X) ||Y|| = 2
  auto coordinate = [](const Matrix& p, double w) {
    return Atom::euclidean("pauli", [p, w](const Element& a) {
      Vector v(1);
      v(0) = w * (p * a.block(0)).trace() / 2.0;
      return v;
    });
  };
  const Seminorm L = Seminorm::max_of_atoms(
      Shape({2}), {coordinate(pauli_x(), 1.0), coordinate(pauli_y(), 1.0), coordinate(pauli_z(), 4.0)},
      "overweighted");
  const JordanLie xy = jordan_lie(m2(pauli_x()), m2(pauli_y()));
  CHECK(L.eval(xy.lie) == doctest::Approx(4.0));
  const LeibnizReport r = check_quasi_leibniz(L, PermissibleF(), 1000, 9);
  CHECK_FALSE(r.pass);
  CHECK(r.worst_margin > 0.1);
  CHECK(r.worst_index >= 0);
}

TEST_CASE("permissible functions") {
  CHECK(PermissibleF(2.0, 1.0)(1.0, 2.0, 3.0, 4.0) == doctest::Approx(2.0 * (4.0 + 6.0) + 12.0));
  CHECK_THROWS_AS(PermissibleF(0.5, 0.0), ValidationError);
  CHECK_THROWS_AS(PermissibleF(1.0, -1.0), ValidationError);
}

TEST_CASE("classical Lipschitz seminorm") {
  RealMatrix d(3, 3);
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const Seminorm L = from_metric(d);
  RealVector f(3);
  f << 0.0, 0.5, 2.0;
  CHECK(L.eval(Element::diagonal(Shape({1, 1, 1}), f)) == doctest::Approx(1.5));
  REQUIRE(L.diameter_certificate().has_value());
  CHECK(*L.diameter_certificate() == doctest::Approx(2.0));
  RealMatrix bad = d;
  bad(0, 2) = bad(2, 0) = 3.0;
  CHECK_THROWS_AS(from_metric(bad), ValidationError);
}
