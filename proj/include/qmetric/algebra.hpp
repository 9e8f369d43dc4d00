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
#include <memory>
#include <vector>

#include "qmetric/linalg.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

inline constexpr double kSelfAdjointTol = 1e-12;
inline constexpr double kStateTol = 1e-10;

/// Block structure of a finite-dimensional C*-algebra: a direct sum of full
/// matrix algebras M_{n_1} + ... + M_{n_k}.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<int> block_dims);

  const std::vector<int>& block_dims() const { return dims_; }
  int num_blocks() const { return static_cast<int>(dims_.size()); }
  int block_dim(int i) const { return dims_.at(static_cast<std::size_t>(i)); }
  /// Real dimension of the self-adjoint part, sum of n_i^2.
  int real_dim() const;
  /// Size of the block-diagonal representation, sum of n_i.
  int total_dim() const;
  bool commutative() const;
  Shape direct_sum(const Shape& other) const;

  friend bool operator==(const Shape&, const Shape&) = default;

 private:
  std::vector<int> dims_;
};

void require_same_shape(const Shape& a, const Shape& b, const char* context);

class Element {
 public:
  Element() = default;
  Element(Shape shape, std::vector<Matrix> blocks);

  static Element zero(const Shape& shape);
  static Element identity(const Shape& shape);
  /// Diagonal element whose entries run over the concatenated block
  /// diagonals; values.size() must equal shape.total_dim().
  static Element diagonal(const Shape& shape, const RealVector& values);
  /// Element supported on a single block.
  static Element on_block(const Shape& shape, int block, const Matrix& m);
  /// Block-diagonal element from a dense total_dim x total_dim matrix;
  /// off-block entries must vanish within tol.
  static Element from_dense(const Shape& shape, const Matrix& dense,
                            double tol = kSelfAdjointTol);

  const Shape& shape() const { return shape_; }
  const std::vector<Matrix>& blocks() const { return blocks_; }
  const Matrix& block(int i) const { return blocks_.at(static_cast<std::size_t>(i)); }
  Matrix& block(int i) { return blocks_.at(static_cast<std::size_t>(i)); }

  Element adjoint() const;
  bool is_self_adjoint(double tol = kSelfAdjointTol) const;
  Element real_part() const;  // (a + a*)/2
  Element imag_part() const;  // (a - a*)/(2i)
  cplx trace() const;
  /// Largest absolute entry difference.
  double distance(const Element& other) const;
  Matrix dense() const;

  /// Column-stacked entries of all blocks, block after block.
  Vector vec() const;
  static Element unvec(const Shape& shape, const Vector& v);

  Element& operator+=(const Element& o);
  Element& operator-=(const Element& o);
  Element& operator*=(cplx s);

 private:
  Shape shape_;
  std::vector<Matrix> blocks_;
};

Element operator+(Element a, const Element& b);
Element operator-(Element a, const Element& b);
Element operator-(const Element& a);
Element operator*(cplx s, Element a);
Element operator*(const Element& a, const Element& b);

/// Largest block spectral norm.
double operator_norm(const Element& a);

struct JordanLie {
  Element jordan;  // (ab + ba)/2
  Element lie;     // (ab - ba)/(2i)
};
JordanLie jordan_lie(const Element& a, const Element& b);

Element direct_sum(const Element& a, const Element& b);

/// Block-diagonal density with unit total trace.
class State {
 public:
  State() = default;
  /// Validates Hermiticity and positivity within kStateTol; symmetrizes float
  /// noise and rejects anything larger.
  State(Shape shape, std::vector<Matrix> densities);

  static State normalized_trace(const Shape& shape);
  /// Vector state <v, . v> on a block; v is normalized here.
  static State vector_state(const Shape& shape, int block, const Vector& v);
  /// Point evaluation at the k-th one-dimensional block (commutative shapes
  /// use every block; otherwise block k must have dimension 1).
  static State dirac(const Shape& shape, int k);
  /// Probability vector over the blocks of a commutative shape.
  static State from_distribution(const Shape& shape, const RealVector& p);

  const Shape& shape() const { return shape_; }
  const std::vector<Matrix>& densities() const { return densities_; }
  const Matrix& density(int i) const { return densities_.at(static_cast<std::size_t>(i)); }
  double min_eigenvalue() const;
  bool faithful(double tol = kStateTol) const;
  /// Convex combination t*this + (1-t)*other.
  State mix(const State& other, double t) const;

 private:
  Shape shape_;
  std::vector<Matrix> densities_;
};

cplx evaluate(const State& phi, const Element& a);
/// Re evaluate(phi, a) for a self-adjoint element.
double evaluate_real(const State& phi, const Element& a);

/// Trace-orthonormal basis of the self-adjoint part. Index 0 is the unit
/// scaled to trace norm one; then the block-identity complements (when there
/// are several blocks); then per-block generalized Gell-Mann matrices.
class HermitianBasis {
 public:
  explicit HermitianBasis(const Shape& shape);

  static constexpr int kUnitIndex = 0;

  const Shape& shape() const { return shape_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const Element& operator[](int i) const { return basis_.at(static_cast<std::size_t>(i)); }

  /// Coordinates of the self-adjoint part: x_i = Re tr(B_i a).
  RealVector coordinates(const Element& a) const;
  Element element(const RealVector& x) const;
  /// As element(), with x indexing basis entries first..first+x.size()-1.
  Element element(const RealVector& x, int first) const;

 private:
  Shape shape_;
  std::vector<Element> basis_;
};

/// Shared basis instance per shape (constructed once, immutable).
std::shared_ptr<const HermitianBasis> basis_for(const Shape& shape);

Element random_self_adjoint(const Shape& shape, Rng& rng);
Element random_unitary(const Shape& shape, Rng& rng);

/// Unital, trace-preserving conditional expectation onto a *-subalgebra.
class ConditionalExpectation {
 public:
  virtual ~ConditionalExpectation() = default;
  virtual const Shape& shape() const = 0;
  virtual Element apply(const Element& a) const = 0;
  /// Dimension of the range (complex).
  virtual int range_dim() const = 0;
};

/// Trace-orthogonal projection onto the span of a basis of a unital
/// *-subalgebra. Closure under adjoint and product is verified on basis
/// pairs (all pairs for bases up to 64 elements, a seeded sample beyond).
class SpanExpectation final : public ConditionalExpectation {
 public:
  explicit SpanExpectation(const std::vector<Element>& sub_basis, double tol = 1e-9);

  const Shape& shape() const override { return shape_; }
  Element apply(const Element& a) const override;
  int range_dim() const override { return static_cast<int>(q_.cols()); }
  bool contains(const Element& a, double tol = 1e-9) const;

 private:
  Shape shape_;
  Matrix q_;  // orthonormal columns spanning the subalgebra
};

/// E(a) = (tr_2 a / m) (x) 1_m on M_{n*m} = M_n (x) M_m, the expectation onto
/// M_n (x) 1 for the normalized trace.
class PartialTraceExpectation final : public ConditionalExpectation {
 public:
  PartialTraceExpectation(int n, int m);

  const Shape& shape() const override { return shape_; }
  Element apply(const Element& a) const override;
  int range_dim() const override { return n_ * n_; }
  int outer() const { return n_; }
  int inner() const { return m_; }

 private:
  Shape shape_;
  int n_;
  int m_;
};

Element conditional_expectation(const std::vector<Element>& sub_basis, const Element& a);

enum class NetKind { PureEnumerate, PureRandom, MixedRandom };

std::vector<State> state_net(const Shape& shape, NetKind kind, int count, std::uint64_t seed);
State random_pure_state(const Shape& shape, Rng& rng);
State random_mixed_state(const Shape& shape, Rng& rng);

/// Linear map between algebras stored by the images of matrix units, i.e. a
/// complex matrix acting on vec() coordinates.
class StarMap {
 public:
  StarMap() = default;
  StarMap(Shape source, Shape target, Matrix matrix);

  static StarMap identity(const Shape& shape);
  static StarMap from_function(const Shape& source, const Shape& target,
                               const std::function<Element(const Element&)>& fn);
  /// C^k -> diagonal matrices in M_k.
  static StarMap diagonal_embedding(int k);
  /// A (+) B -> A (which = 0) or -> B (which = 1).
  static StarMap coordinate_projection(const Shape& a, const Shape& b, int which);
  /// M_n -> M_{n*m}, a -> a (x) 1_m.
  static StarMap tensor_embedding(int n, int m);

  const Shape& source() const { return source_; }
  const Shape& target() const { return target_; }
  const Matrix& matrix() const { return matrix_; }

  Element apply(const Element& a) const;
  StarMap compose(const StarMap& inner) const;  // this o inner
  /// Pull back a state of the target: (pi^* phi)(a) = phi(pi(a)).
  State pullback(const State& phi) const;

  /// Throws ValidationError unless the map is unital, adjoint-preserving and
  /// multiplicative on matrix-unit pairs within tol.
  void verify(double tol = 1e-9) const;
  bool injective() const;
  bool surjective() const;

 private:
  Shape source_;
  Shape target_;
  Matrix matrix_;
};

/// *-automorphism alpha(a)_i = W_i a_{src(i)} W_i^*.
class Automorphism {
 public:
  Automorphism(Shape shape, std::vector<int> source_block, std::vector<Matrix> unitaries);
  static Automorphism inner(const Element& unitary);

  const Shape& shape() const { return shape_; }
  Element apply(const Element& a) const;
  Automorphism compose(const Automorphism& inner) const;  // this o inner

 private:
  Shape shape_;
  std::vector<int> src_;
  std::vector<Matrix> w_;
};

}  // namespace qmetric
