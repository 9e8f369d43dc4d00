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
#include "qmetric/algebra.hpp"
#include "qmetric/errors.hpp"

using namespace qmetric;
using namespace qmetric::testing;

TEST_CASE("operator norm") {
  const Shape s2({2});
  CHECK(operator_norm(Element::identity(s2)) == doctest::Approx(1.0));
  CHECK(operator_norm(m2(pauli_z())) == doctest::Approx(1.0));
  Matrix a(1, 1);
  a << 3;
  Matrix b(2, 2);
  b << 0, 2, 0, 0;
  CHECK(operator_norm(Element(Shape({1, 2}), {a, b})) == doctest::Approx(3.0));
  CHECK_THROWS_AS(Element(Shape({2}), {a}), ValidationError);
}

TEST_CASE("jordan and lie products") {
  const Element x = m2(pauli_x());
  const Element z = m2(pauli_z());
  const JordanLie xx = jordan_lie(x, x);
  CHECK(xx.jordan.distance(Element::identity(Shape({2}))) < 1e-14);
  CHECK(operator_norm(xx.lie) < 1e-14);
  const JordanLie xz = jordan_lie(x, z);
  CHECK(operator_norm(xz.jordan) < 1e-14);
  CHECK(xz.lie.distance(m2(-pauli_y())) < 1e-14);
  const JordanLie ib = jordan_lie(Element::identity(Shape({2})), z);
  CHECK(ib.jordan.distance(z) < 1e-14);
  CHECK(operator_norm(ib.lie) < 1e-14);
}

TEST_CASE("evaluation of states") {
  const Shape s2({2});
  Vector e1(2);
  e1 << 1, 0;
  const State v = State::vector_state(s2, 0, e1);
  CHECK(evaluate(v, Element::identity(s2)).real() == doctest::Approx(1.0));
  RealVector d(2);
  d << 5, 7;
  CHECK(evaluate(v, Element::diagonal(s2, d)).real() == doctest::Approx(5.0));
  CHECK(std::abs(evaluate(State::normalized_trace(s2), m2(pauli_z()))) < 1e-15);
}

TEST_CASE("state validation") {
  Matrix bad(2, 2);
  bad << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(State(Shape({2}), {bad}), ValidationError);
  Matrix half = Matrix::Identity(2, 2) * 0.4;
  CHECK_THROWS_AS(State(Shape({2}), {half}), ValidationError);
}

TEST_CASE("conditional expectation onto diagonals") {
  const Shape s2({2});
  std::vector<Element> diag{Element::on_block(s2, 0, Matrix::Identity(2, 2)), m2(pauli_z())};
  CHECK(operator_norm(conditional_expectation(diag, m2(pauli_x()))) < 1e-14);
  CHECK(conditional_expectation(diag, m2(pauli_z())).distance(m2(pauli_z())) < 1e-14);
  CHECK(conditional_expectation(diag, Element::identity(s2)).distance(Element::identity(s2)) < 1e-14);
  // not closed under product
  CHECK_THROWS_AS(SpanExpectation({Element::identity(s2), m2(pauli_x() + pauli_z()), m2(pauli_x())}),
                  ValidationError);
  // rank deficient
  CHECK_THROWS_AS(SpanExpectation({Element::identity(s2), Element::identity(s2)}), ValidationError);
}

TEST_CASE("state nets") {
  const auto net = state_net(Shape({1, 1, 1}), NetKind::PureEnumerate, 1, 0);
  REQUIRE(net.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(net[k].density(k)(0, 0).real() == doctest::Approx(1.0));
  CHECK_THROWS_AS(state_net(Shape({2}), NetKind::PureEnumerate, 1, 0), ValidationError);
  const auto a = state_net(Shape({2}), NetKind::PureRandom, 5, 7);
  const auto b = state_net(Shape({2}), NetKind::PureRandom, 5, 7);
  REQUIRE(a.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK((a[i].density(0) - b[i].density(0)).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a[i].density(0));
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
  }
  const auto m = state_net(Shape({2}), NetKind::MixedRandom, 1, 3);
  CHECK(std::abs(m[0].density(0).trace().real() - 1.0) < 1e-10);
  CHECK(m[0].min_eigenvalue() > 0.0);
}

TEST_CASE("hermitian basis is trace orthonormal and spanning") {
  for (const Shape& s : {Shape({1}), Shape({3}), Shape({1, 2, 2}), Shape({1, 1, 1})}) {
    const HermitianBasis basis(s);
    REQUIRE(basis.dim() == s.real_dim());
    for (int i = 0; i < basis.dim(); ++i) {
      CHECK(basis[i].is_self_adjoint());
      for (int j = 0; j < basis.dim(); ++j) {
        const double ip = (basis[i] * basis[j]).trace().real();
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-10);
      }
    }
    Rng rng = make_rng(1, 0);
    const Element a = random_self_adjoint(s, rng);
    CHECK(basis.element(basis.coordinates(a)).distance(a) < 1e-12);
    CHECK(basis[0].distance(cplx(1.0 / std::sqrt(s.total_dim())) * Element::identity(s)) < 1e-15);
  }
}

TEST_CASE("algebra invariants on random elements") {
  const Shape s({2, 3});
  for (int t = 0; t < 50; ++t) {
    Rng rng = make_rng(11, t);
    const Element a = random_self_adjoint(s, rng);
    const Element b = random_self_adjoint(s, rng);
    const Element g = a + cplx(0, 1) * b;
    const double na = operator_norm(a);
    const double nb = operator_norm(b);
    CHECK(operator_norm(a * b) <= na * nb + 1e-9);
    CHECK(std::abs(operator_norm(g.adjoint() * g) - operator_norm(g) * operator_norm(g)) < 1e-9);
    const JordanLie jl = jordan_lie(a, b);
    CHECK(jl.jordan.is_self_adjoint());
    CHECK(jl.lie.is_self_adjoint());
    CHECK(operator_norm(jl.jordan) <= na * nb + 1e-9);
    CHECK(operator_norm(jl.lie) <= na * nb + 1e-9);
    const State phi = random_mixed_state(s, rng);
    const cplx v = evaluate(phi, a);
    CHECK(std::abs(v.imag()) < 1e-12);
    CHECK(std::abs(v) <= na + 1e-9);

    std::vector<Element> sub{Element::on_block(s, 0, Matrix::Identity(2, 2)),
                             Element::on_block(s, 1, Matrix::Identity(3, 3)),
                             Element::on_block(s, 0, pauli_z())};
    const SpanExpectation e(sub);
    const Element ea = e.apply(a);
    CHECK(e.apply(ea).distance(ea) < 1e-9);
    CHECK(std::abs(ea.trace() - a.trace()) < 1e-9);
    CHECK(operator_norm(ea) <= na + 1e-9);
    CHECK(ea.is_self_adjoint(1e-12));
  }
}

TEST_CASE("star maps") {
  const StarMap d = StarMap::diagonal_embedding(3);
  CHECK_NOTHROW(d.verify());
  CHECK(d.injective());
  CHECK_FALSE(d.surjective());
  const StarMap t = StarMap::tensor_embedding(2, 2);
  CHECK_NOTHROW(t.verify());
  const StarMap p = StarMap::coordinate_projection(Shape({2}), Shape({1}), 0);
  CHECK_NOTHROW(p.verify());
  CHECK(p.surjective());
  // the transpose map is not multiplicative
  const Shape s2({2});
  const StarMap tr = StarMap::from_function(s2, s2, [](const Element& a) {
    return Element(a.shape(), {a.block(0).transpose()});
  });
  CHECK_THROWS_AS(tr.verify(), ValidationError);
  // pullback agrees with evaluation
  Rng rng = make_rng(5, 0);
  const State phi = random_mixed_state(Shape({3}), rng);
  const State pulled = d.pullback(phi);
  RealVector f(3);
  f << 1.5, -2, 0.25;
  const Element fa = Element::diagonal(Shape({1, 1, 1}), f);
  CHECK(std::abs(evaluate(pulled, fa) - evaluate(phi, d.apply(fa))) < 1e-14);
}

TEST_CASE("automorphisms") {
  Rng rng = make_rng(9, 0);
  const Shape s({2, 2});
  const Element u = random_unitary(s, rng);
  const Automorphism swap(s, {1, 0}, {u.block(0), u.block(1)});
  const Element a = random_self_adjoint(s, rng);
  const Element b = random_self_adjoint(s, rng);
  CHECK(swap.apply(a * b).distance(swap.apply(a) * swap.apply(b)) < 1e-12);
  const Automorphism twice = swap.compose(swap);
  CHECK(twice.apply(a).distance(swap.apply(swap.apply(a))) < 1e-12);
}
