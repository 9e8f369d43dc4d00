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

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "qmetric/algebra.hpp"
#include "qmetric/lipnorm.hpp"

namespace qmetric {

/// Z_{m_1} x ... x Z_{m_d}. Elements are indexed 0..size()-1 in mixed radix
/// with the first coordinate varying slowest; index 0 is the identity.
class FiniteAbelianGroup {
 public:
  explicit FiniteAbelianGroup(std::vector<int> orders);

  const std::vector<int>& orders() const { return orders_; }
  int rank() const { return static_cast<int>(orders_.size()); }
  int size() const { return size_; }

  int index(const std::vector<int>& coords) const;  // coordinates taken mod orders
  std::vector<int> element(int index) const;        // coordinates in [0, m_k)
  /// Representative in the centered window floor((1-m)/2) .. floor((m-1)/2).
  std::vector<int> centered(int index) const;
  int add(int x, int y) const;
  int neg(int x) const;
  /// chi_h(g) = exp(2 pi i sum_k h_k g_k / m_k).
  cplx character(int h, int g) const;
  /// Sum_k min(g_k, m_k - g_k).
  int word_length(int g) const;
  /// Sum_k min(g_k, m_k - g_k) / m_k (the l1 length of the torus of
  /// circumference one, restricted to the subgroup).
  double torus_length(int g) const;
  /// Subgroup generated by the listed elements, sorted by index.
  std::vector<int> subgroup(const std::vector<int>& generators) const;

  friend bool operator==(const FiniteAbelianGroup&, const FiniteAbelianGroup&) = default;

 private:
  std::vector<int> orders_;
  int size_ = 1;
};

/// A 2-cocycle sigma: G x G -> unit circle, stored as a full table.
class Cocycle {
 public:
  /// table[x * |G| + y] = sigma(x, y). Validates unit modulus and the
  /// cocycle identity (exhaustively for |G| <= 64, on sampled triples beyond).
  Cocycle(FiniteAbelianGroup group, std::vector<cplx> table, double tol = 1e-12);

  static Cocycle trivial(const FiniteAbelianGroup& group);
  /// sigma((a,b),(c,d)) = conj(rho)^{b c} on Z_n x Z_n, the cocycle with
  /// (U^a V^b)(U^c V^d) = sigma U^{a+c} V^{b+d} for the clock and shift pair.
  static Cocycle clock_shift(int n, cplx rho);
  /// sigma(x, y) = exp(2 pi i theta x_2 y_1) on Z_n x Z_n; theta n must be
  /// an integer within 1e-12.
  static Cocycle rotation(int n, double theta);

  const FiniteAbelianGroup& group() const { return group_; }
  cplx operator()(int x, int y) const {
    return table_[static_cast<std::size_t>(x) * static_cast<std::size_t>(group_.size()) +
                  static_cast<std::size_t>(y)];
  }
  /// Largest |sigma(x,y) sigma(x+y,z) - sigma(x,y+z) sigma(y,z)| checked.
  double identity_residual() const { return residual_; }
  /// Elements g with sigma(g,h) = sigma(h,g) for every h.
  std::vector<int> symmetrizer() const;
  bool nondegenerate() const { return symmetrizer().size() == 1; }

 private:
  FiniteAbelianGroup group_;
  std::vector<cplx> table_;
  double residual_ = 0.0;
};

/// Cyclic shift U (U e_j = e_{j+1}) and clock V = diag(1, rho, ..., rho^{n-1}),
/// so that U V = rho V U. Requires rho^n = 1 within 1e-12.
std::pair<Element, Element> clock_shift(int n, cplx rho);

/// C*(G, sigma) realized as a direct sum of matrix blocks.
struct TwistedGroupAlgebra {
  FiniteAbelianGroup group;
  Cocycle cocycle;
  Shape shape;                     // c blocks of size k with c k^2 = |G|
  std::vector<Element> unitaries;  // U^g in `shape`
  std::vector<Matrix> regular;     // U^g on l^2(G): U^g d_h = sigma(g,h) d_{g+h}
  /// Dual action alpha^chi(U^g) = chi(g) U^g, indexed by the character index.
  std::vector<Automorphism> dual_action;
  int center_dim = 0;       // from the cocycle table
  int block_count = 0;      // found numerically, equals center_dim
  int irreducible_dim = 0;  // k
};

/// Throws SolverError if the numerical block decomposition fails.
TwistedGroupAlgebra twisted_group_algebra(const Cocycle& sigma);

/// A finite abelian group acting on a finite-dimensional C*-algebra, with an
/// eigenbasis of "Fourier modes": action[g](modes[p]) = chi_{q_p}(g) modes[p].
struct ActionModel {
  FiniteAbelianGroup group;
  Shape shape;
  std::vector<Automorphism> action;  // indexed by group element
  std::vector<Element> modes;
  std::vector<int> mode_character;   // q_p as a group index

  Element act(int g, const Element& a) const;
  /// sum_g w(g) alpha^g(a).
  Element average(const RealVector& weights, const Element& a) const;
  /// Average over the listed subgroup with uniform weights.
  Element subgroup_average(const std::vector<int>& subgroup, const Element& a) const;
  /// L(a) = max_{g != e} ||alpha^g(a) - a|| / l(g) with lengths indexed by
  /// group element (entry 0 ignored).
  Seminorm lipnorm(const RealVector& lengths, std::string name = "group-action") const;
  /// Same quantity evaluated directly, skipping elements with zero length
  /// weight (lengths[g] = +inf is allowed to drop g).
  double lip_value(const RealVector& lengths, const Element& a) const;
};

/// M_n with Z_n x Z_n acting by conjugation with U^a V^b.
ActionModel fuzzy_torus(int n, cplx rho);
/// C(Z_n x Z_n) with the translation action.
ActionModel commutative_torus(int n);
/// The dual action on a twisted group algebra.
ActionModel dual_action_model(const TwistedGroupAlgebra& algebra);

/// Lengths indexed by group element.
RealVector word_lengths(const FiniteAbelianGroup& group);
RealVector torus_lengths(const FiniteAbelianGroup& group);

struct FejerData {
  FiniteAbelianGroup group;
  std::vector<int> support;  // S, symmetric, contains 0
  RealVector weights;        // phi(g) = |sum_{s in S} chi_s(g)|^2 / (|G| |S|)
  /// Exact multipliers sum_g phi(g) chi_p(g) = #{(s,t) in S^2 : t - s = p} / |S|.
  RealVector multipliers;
  std::vector<int> range;    // S - S
  double weight_sum_error = 0.0;
  double multiplier_error = 0.0;  // numerical transform vs exact counts

  double defect(const RealVector& lengths) const;
};

FejerData fejer_data(const FiniteAbelianGroup& group, const std::vector<int>& support);
/// Symmetric box {p : |p_k| <= radius} in centered coordinates.
std::vector<int> box_support(const FiniteAbelianGroup& group, int radius);

struct FejerRangeReport {
  double eigen_residual = 0.0;     // ||alpha^phi(mode) - m mode|| / ||mode||
  double multiplier_error = 0.0;   // computed vs exact multiplier
  double outside_support = 0.0;    // largest multiplier outside S - S
  bool pass = false;               // all within 1e-10
};

FejerRangeReport verify_fejer_range(const ActionModel& model, const FejerData& data);

struct FejerContractReport {
  int samples = 0;
  double worst_margin = 0.0;  // max ||a - alpha^phi(a)|| - defect L(a)
  bool pass = false;          // worst_margin <= 1e-8
};

FejerContractReport check_fejer_contract(const ActionModel& model, const FejerData& data,
                                         const RealVector& lengths, int samples, std::uint64_t seed,
                                         int threads = 1);

/// w_{N,M}(n) = 1 for |n| <= N, (M + N - |n|) / M for N <= |n| <= M + N, 0
/// beyond, with |n| the l1 norm.
double weight_value(int N, int M, const std::vector<int>& n);
/// Lattice points {n in Z^d : |n|_1 <= radius} in lexicographic order.
std::vector<std::vector<int>> lattice_ball(int d, int radius);
/// Diagonal weight operator on lattice_ball(d, N + M) as a single block.
Element weight_operator(int N, int M, int d);

struct CommutatorCheck {
  double computed = 0.0;  // exact operator norm of the commutator
  double bound = 0.0;     // |m|_1 / M
  bool pass = false;      // computed <= bound + 1e-10
  int window = 0;         // number of lattice points used
};

/// ||[w_{N,M}, pi_{k,sigma}(delta_m)]|| for the twisted regular
/// representation on l^2(Z^d), assembled on a window where it is exactly
/// supported. k[j] = 0 means an infinite order. sigma(x, y) =
/// exp(2 pi i theta x_2 y_1) for d >= 2 (theta k_j must be integral for
/// finite orders). Requires N + M < wedge(k) and m in I_k.
CommutatorCheck commutator_bound_check(int N, int M, int d, const std::vector<int>& m,
                                       const std::vector<int>& k, double theta = 0.0);
/// min{|n| : n not in I_k}; a huge value when every order is infinite.
int wedge(const std::vector<int>& k);

struct CollapseConfig {
  int n = 5;                          // G = Z_n x Z_n acting on the fuzzy torus M_n
  std::vector<int> h_generators = {1};  // group indices generating H
  std::vector<int> js = {1, 2, 4, 8, 16};
  int samples = 20;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct CollapseRow {
  int j = 0;
  double epsilon = 0.0;      // sup_{g not in H} max(|l'/l_j - 1|, |l_j/l' - 1|)
  double diam_h = 0.0;       // max_{h in H} l_j(h)
  double delta = 0.0;        // max(epsilon, diam_h)
  double diam_a = 0.0;       // certified state-space diameter for L_j
  double diam_k = 0.0;       // certified state-space diameter for L_inf
  double bound = 0.0;        // perturbation_bound(delta, diam_a, diam_k, 0)
  double expectation_margin = 0.0;  // max ||a - E a|| - diam_h L_j(a)
  double lip_margin = 0.0;          // max L_inf(E a) - (1 + eps) L_j(a)
  double fixed_margin = 0.0;        // max |L_inf(b) - L_j(b)| - eps L_inf(b), b = E(b)
  double idempotence = 0.0;         // max ||E E a - E a||
  bool pass = false;
};

/// Dimensional collapse of the fuzzy torus M_n (rho = e^{2 pi i / n}) onto the
/// fixed points of H. l'(g) is the quotient word length of g + H and
/// l_j = l' + word_length / j.
std::vector<CollapseRow> collapse_experiment(const CollapseConfig& config);

struct UhfFiltration {
  Shape shape;
  std::vector<std::shared_ptr<const ConditionalExpectation>> stages;  // M_{2^0} .. M_{2^k}
  std::vector<double> beta;                                            // 2^{-n}, n < k

  Seminorm lipnorm(std::string name = "uhf") const;
};

/// Filtration of M_{2^k} by the tensor embeddings M_{2^n} (x) 1; k <= 8.
UhfFiltration uhf_filtration(int k);

struct SphereGrid {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> weights;  // sum to one
  int exact_degree = 0;         // polynomials up to this degree integrate exactly
};

/// Gauss-Legendre nodes in cos(theta) times equally spaced phi.
SphereGrid gauss_sphere_grid(int n_theta = 24, int n_phi = 50);

struct SpinMatrices {
  Matrix jx, jy, jz;  // basis |j,m>, m = j, j-1, ..., -j
};
SpinMatrices spin_matrices(int two_j);

/// Rotation matrix for exp(-i angle axis . J).
Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& axis, double angle);

class Berezin {
 public:
  /// Spin j = two_j / 2; grid weights must sum to one within 1e-10.
  Berezin(int two_j, SphereGrid grid);

  int two_j() const { return two_j_; }
  int dim() const { return two_j_ + 1; }
  const SphereGrid& grid() const { return grid_; }
  const SpinMatrices& spin() const { return spin_; }

  /// Unitary exp(-i angle axis . J) on C^{2j+1}.
  Matrix rotation(const Eigen::Vector3d& axis, double angle) const;
  /// alpha^{g_x}(P) for the highest-weight projection P rotated to x.
  Matrix coherent_projector(const Eigen::Vector3d& x) const;
  /// sigma_T(x) = tr(T alpha^{g_x}(P)).
  cplx symbol(const Element& t, const Eigen::Vector3d& x) const;
  std::vector<cplx> symbol_on_grid(const Element& t) const;
  /// (2j+1) sum_i w_i f(x_i) alpha^{g_i}(P).
  Element quantize(const std::vector<double>& f) const;

 private:
  int two_j_;
  SphereGrid grid_;
  SpinMatrices spin_;
  std::vector<Matrix> projectors_;
};

struct BerezinReport {
  int two_j = 0;
  double unit_symbol_error = 0.0;     // max |sigma_1 - 1| on the grid
  double unit_quantization_error = 0.0;  // ||quantize(1) - 1||
  double min_positive_symbol = 0.0;   // min over grid of sigma_T, T >= 0 random
  double min_quantized_eigen = 0.0;   // min eigenvalue of quantize(f), f >= 0 random
  double equivariance_error = 0.0;    // max |sigma_{alpha^h T}(x) - sigma_T(R_h^{-1} x)|
  bool pass = false;
};

BerezinReport check_berezin(const Berezin& b, int samples, std::uint64_t seed,
                            double tolerance = 1e-3);

}  // namespace qmetric
