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
#include <optional>
#include <string>
#include <vector>

#include "qmetric/algebra.hpp"
#include "qmetric/convex.hpp"

namespace qmetric {

/// A linear map on the self-adjoint part whose norm is one term of a
/// max-of-norms seminorm. Spectral atoms map into a list of matrices (norm:
/// largest spectral norm); Euclidean atoms map into a column (norm: 2-norm).
class Atom {
 public:
  using SpectralFn = std::function<std::vector<Matrix>(const Element&)>;
  using EuclideanFn = std::function<Vector(const Element&)>;

  static Atom spectral(std::string label, SpectralFn fn);
  static Atom euclidean(std::string label, EuclideanFn fn);

  NormKind kind() const;
  const std::string& label() const;
  double eval(const Element& a) const;
  /// The atom in HermitianBasis coordinates of `shape` (built once, cached).
  const AffineNormMap& coordinate_map(const Shape& shape) const;
  /// Restriction to the basis coordinates listed in `columns`.
  AffineNormMap coordinate_map(const Shape& shape, const std::vector<int>& columns) const;
  /// s times this atom.
  Atom scaled(double s) const;
  /// The atom precomposed with a linear map f (a -> atom(f(a))).
  Atom pulled_back(const std::function<Element(const Element&)>& f) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

class Seminorm {
 public:
  enum class Kind { MaxOfAtoms, DistToSubspace };

  /// L(a) = max over atoms. With check_kernel the stacked atom maps must
  /// have kernel exactly span{1} (rank test with threshold 1e-9); without it
  /// the caller vouches for that.
  static Seminorm max_of_atoms(const Shape& shape, std::vector<Atom> atoms, std::string name,
                               bool check_kernel = true);
  /// L(a) = min over s in span of ||a - s||. The span must contain the unit
  /// and be closed under adjoints.
  static Seminorm dist_to_subspace(const std::vector<Element>& span, std::string name = "dist");

  Kind kind() const { return kind_; }
  const Shape& shape() const { return shape_; }
  const std::string& name() const { return name_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  /// Self-adjoint basis of the span for DistToSubspace.
  const std::vector<Element>& span() const { return span_; }
  /// True for seminorms whose kernel is exactly span{1}.
  bool lipschitz_pair() const { return lipschitz_; }

  /// Value for self-adjoint a. DistToSubspace returns the solver's upper
  /// bound (within tol of the true value).
  double eval(const Element& a, double tol = 1e-7) const;
  /// Certified (lower, upper) enclosure; equal for MaxOfAtoms.
  std::pair<double, double> eval_bounds(const Element& a, double tol = 1e-7) const;

  Seminorm scaled(double s) const;

  /// Constraints L(a) <= bound for a = sum_k x_k B_{columns[k]}.
  std::vector<NormConstraint> ball_constraints(const std::vector<int>& columns, double bound) const;

  /// Joint kernel dimension of the atoms on the self-adjoint part.
  int kernel_dim() const;

  /// Proven upper bound on the mk-diameter of the state space, when the
  /// construction supplies one.
  const std::optional<double>& diameter_certificate() const { return diameter_; }
  const std::string& certificate_method() const { return certificate_method_; }
  Seminorm with_diameter_certificate(double upper, std::string method) const;

 private:
  Kind kind_ = Kind::MaxOfAtoms;
  Shape shape_;
  std::string name_;
  std::vector<Atom> atoms_;
  std::vector<Element> span_;
  bool lipschitz_ = false;
  std::optional<double> diameter_;
  std::string certificate_method_;
};

/// Seminorm value as a free function.
double seminorm_eval(const Seminorm& L, const Element& a, double tol = 1e-7);

/// L(a) = max_g ||alpha_g(a) - a|| / l(g) over the non-identity group
/// elements listed. Rejects non-ergodic actions.
Seminorm from_group_action(const std::vector<Element>& unitaries, const std::vector<double>& lengths,
                           std::string name = "group-action");
/// With check_kernel = false the caller vouches for ergodicity.
Seminorm from_automorphisms(const std::vector<Automorphism>& actions, const std::vector<double>& lengths,
                            std::string name = "group-action", bool check_kernel = true);

/// L(a) = ||[D, pi(a)]|| for Hermitian D on the representation's target.
Seminorm from_commutator(const Element& dirac, const StarMap& rep, std::string name = "commutator");

/// L(a) = max_n ||a - E_n(a)|| / beta(n) for a filtration starting at
/// span{1}. beta may omit the final stage when it is the whole algebra.
Seminorm from_filtration(const std::vector<std::shared_ptr<const ConditionalExpectation>>& stages,
                         const std::vector<double>& beta, std::string name = "filtration");

/// L(a) = sqrt(mu(a^2) - mu(a)^2) for a faithful state mu.
Seminorm from_stddev(const State& mu, std::string name = "stddev");

/// Classical Lipschitz seminorm on a finite metric space (commutative shape
/// with one block per point): max over pairs |f(x) - f(y)| / d(x, y).
Seminorm from_metric(const RealMatrix& dist, std::string name = "lipschitz");

/// F_{C,D}(x, y, lx, ly) = C (x ly + y lx) + D lx ly.
struct PermissibleF {
  double c = 1.0;
  double d = 0.0;

  PermissibleF() = default;
  PermissibleF(double c_, double d_);
  double operator()(double x, double y, double lx, double ly) const;
};

struct LeibnizReport {
  int samples = 0;
  double worst_margin = 0.0;  // max of L(product) - F(...); <= 1e-9 passes
  int worst_index = -1;
  bool pass = false;
};

LeibnizReport check_quasi_leibniz(const Seminorm& L, const PermissibleF& f, int samples,
                                  std::uint64_t seed, int threads = 1);

}  // namespace qmetric
