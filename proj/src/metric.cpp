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

#include "qmetric/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qmetric/errors.hpp"
#include "qmetric/parallel.hpp"

namespace qmetric {

namespace {

void require_lipschitz(const Seminorm& L) {
  if (L.kind() != Seminorm::Kind::MaxOfAtoms || !L.lipschitz_pair())
    throw ValidationError("metric computations need a Lip-norm (kernel exactly span{1})");
}

std::vector<int> iota_vec(int first, int count) {
  std::vector<int> v(static_cast<std::size_t>(count));
  std::iota(v.begin(), v.end(), first);
  return v;
}

RealVector objective_for(const HermitianBasis& basis, const State& phi, const State& psi,
                         const std::vector<int>& cols) {
  RealVector c(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const Element& b = basis[cols[k]];
    c(static_cast<Eigen::Index>(k)) = evaluate_real(phi, b) - evaluate_real(psi, b);
  }
  return c;
}

DistanceResult finish(const HermitianBasis& basis, const std::vector<int>& cols, SolveReport rep) {
  DistanceResult out;
  RealVector full = RealVector::Zero(basis.dim());
  for (std::size_t k = 0; k < cols.size(); ++k)
    full(cols[k]) = rep.x.size() ? rep.x(static_cast<Eigen::Index>(k)) : 0.0;
  out.witness = basis.element(full);
  out.value = std::max(0.0, rep.lower);
  out.upper = std::max(out.value, rep.upper);
  out.report = std::move(rep);
  return out;
}

DistanceResult trivial_result(const Shape& shape) {
  DistanceResult out;
  out.witness = Element::zero(shape);
  out.report.certified = true;
  return out;
}

AffineNormMap with_zero_columns(AffineNormMap map, int extra) {
  const Eigen::Index old = map.coeffs.cols();
  map.coeffs.conservativeResize(Eigen::NoChange, old + extra);
  map.coeffs.rightCols(extra).setZero();
  return map;
}

void require_unital_face(const Atom& face, const Shape& shape) {
  const AffineNormMap& map = face.coordinate_map(shape);
  const Vector img = map.coeffs * basis_for(shape)->coordinates(Element::identity(shape)).cast<cplx>();
  Eigen::Index off = 0;
  for (const auto& [r, c] : map.blocks) {
    const Matrix blk = Eigen::Map<const Matrix>(img.data() + off, r, c);
    if ((blk - Matrix::Identity(r, c)).norm() > 1e-9) throw ValidationError("state set face is not unital");
    off += static_cast<Eigen::Index>(r) * c;
  }
}

}  // namespace

DistanceResult mk_distance_report(const Seminorm& L, const State& phi, const State& psi,
                                  const SolveOptions& options) {
  require_same_shape(L.shape(), phi.shape(), "mk distance");
  require_same_shape(L.shape(), psi.shape(), "mk distance");
  require_lipschitz(L);
  const auto basis = basis_for(L.shape());
  const std::vector<int> cols = iota_vec(1, basis->dim() - 1);
  if (cols.empty()) return trivial_result(L.shape());
  NormProgram p;
  p.dim = static_cast<int>(cols.size());
  p.objective = objective_for(*basis, phi, psi, cols);
  p.constraints = L.ball_constraints(cols, 1.0);
  p.anchor = RealVector::Zero(p.dim);
  return finish(*basis, cols, maximize_linear(p, options));
}

double mk_distance(const Seminorm& L, const State& phi, const State& psi, double tol) {
  SolveOptions opt;
  opt.tol = tol;
  return mk_distance_report(L, phi, psi, opt).value;
}

DistanceResult bl_distance_report(const Seminorm& L, double r, const State& phi, const State& psi,
                                  const SolveOptions& options) {
  if (!(r > 0.0)) throw ValidationError("cut-off must be positive");
  require_same_shape(L.shape(), phi.shape(), "bl distance");
  require_same_shape(L.shape(), psi.shape(), "bl distance");
  require_lipschitz(L);
  const auto basis = basis_for(L.shape());
  const std::vector<int> cols = iota_vec(0, basis->dim());
  NormProgram p;
  p.dim = static_cast<int>(cols.size());
  p.objective = objective_for(*basis, phi, psi, cols);
  p.constraints = L.ball_constraints(cols, 1.0);
  NormConstraint norm;
  norm.map.kind = NormKind::Spectral;
  for (int n : L.shape().block_dims()) norm.map.blocks.emplace_back(n, n);
  norm.map.coeffs.resize(L.shape().real_dim(), p.dim);
  for (int k = 0; k < p.dim; ++k) norm.map.coeffs.col(k) = (*basis)[k].vec();
  norm.rhs = r;
  p.constraints.push_back(std::move(norm));
  p.anchor = RealVector::Zero(p.dim);
  return finish(*basis, cols, maximize_linear(p, options));
}

double bl_distance(const Seminorm& L, double r, const State& phi, const State& psi, double tol) {
  SolveOptions opt;
  opt.tol = tol;
  return bl_distance_report(L, r, phi, psi, opt).value;
}

StateSet StateSet::all(const Shape& shape) {
  return pullback(StarMap::identity(shape));
}

StateSet StateSet::pullback(const StarMap& pi) {
  StateSet s;
  s.shape_ = pi.source();
  s.faces_.push_back(Atom::spectral("pullback", [pi](const Element& a) { return pi.apply(a).blocks(); }));
  return s;
}

StateSet StateSet::compressed_pullback(const StarMap& pi, const std::vector<Matrix>& isometries) {
  const Shape& t = pi.target();
  if (static_cast<int>(isometries.size()) != t.num_blocks())
    throw ValidationError("one isometry per target block is required");
  bool any = false;
  for (int b = 0; b < t.num_blocks(); ++b) {
    const Matrix& v = isometries[static_cast<std::size_t>(b)];
    if (v.rows() != t.block_dim(b)) throw ValidationError("isometry has the wrong row count");
    if (v.cols() == 0) continue;
    if ((v.adjoint() * v - Matrix::Identity(v.cols(), v.cols())).norm() > 1e-9)
      throw ValidationError("compression columns must be orthonormal");
    any = true;
  }
  if (!any) throw ValidationError("compressed state set is empty");
  StateSet s;
  s.shape_ = pi.source();
  s.faces_.push_back(Atom::spectral("compressed pullback", [pi, isometries](const Element& a) {
    const Element img = pi.apply(a);
    std::vector<Matrix> out;
    for (int b = 0; b < img.shape().num_blocks(); ++b) {
      const Matrix& v = isometries[static_cast<std::size_t>(b)];
      if (v.cols() > 0) out.push_back(v.adjoint() * img.block(b) * v);
    }
    return out;
  }));
  return s;
}

StateSet StateSet::hull(const StateSet& a, const StateSet& b) {
  require_same_shape(a.shape_, b.shape_, "state set hull");
  StateSet s = a;
  s.faces_.insert(s.faces_.end(), b.faces_.begin(), b.faces_.end());
  return s;
}

double StateSet::support(const Element& a) const {
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& f : faces_) h = std::max(h, f.coordinate_map(shape_).value(basis_for(shape_)->coordinates(a)));
  return h;
}

DistanceResult mk_distance_to_set(const Seminorm& L, const State& phi, const StateSet& set,
                                  const SolveOptions& options) {
  require_same_shape(L.shape(), phi.shape(), "distance to a state set");
  require_same_shape(L.shape(), set.shape(), "distance to a state set");
  require_lipschitz(L);
  const auto basis = basis_for(L.shape());
  const std::vector<int> cols = iota_vec(1, basis->dim() - 1);
  if (cols.empty()) return trivial_result(L.shape());
  const int m = static_cast<int>(cols.size());
  // variables (x, t): maximize phi(a(x)) - t with h_K(a(x)) <= t
  NormProgram p;
  p.dim = m + 1;
  p.objective.resize(p.dim);
  for (int k = 0; k < m; ++k) p.objective(k) = evaluate_real(phi, (*basis)[cols[static_cast<std::size_t>(k)]]);
  p.objective(m) = -1.0;
  for (auto& c : L.ball_constraints(cols, 1.0)) {
    c.map = with_zero_columns(std::move(c.map), 1);
    p.constraints.push_back(std::move(c));
  }
  for (const auto& f : set.faces()) {
    NormConstraint c;
    c.map = with_zero_columns(f.coordinate_map(L.shape(), cols), 1);
    c.map.kind = NormKind::MaxEigen;
    require_unital_face(f, L.shape());
    c.rhs_coeffs = RealVector::Zero(p.dim);
    c.rhs_coeffs(m) = 1.0;
    c.rhs = 0.0;
    p.constraints.push_back(std::move(c));
  }
  RealVector anchor = RealVector::Zero(p.dim);
  anchor(m) = 1.0;
  p.anchor = anchor;
  SolveReport rep = maximize_linear(p, options);
  DistanceResult out;
  RealVector full = RealVector::Zero(basis->dim());
  for (int k = 0; k < m; ++k) full(cols[static_cast<std::size_t>(k)]) = rep.x(k);
  out.witness = basis->element(full);
  out.value = std::max(0.0, rep.value);
  out.upper = std::max(out.value, rep.upper);
  out.report = std::move(rep);
  return out;
}

ExtremeNet extreme_state_net(const Shape& shape, int random_count, std::uint64_t seed) {
  ExtremeNet net;
  if (shape.commutative()) {
    net.states = state_net(shape, NetKind::PureEnumerate, 1, seed);
    net.exhaustive = true;
    return net;
  }
  for (int b = 0; b < shape.num_blocks(); ++b)
    for (int i = 0; i < shape.block_dim(b); ++i)
      net.states.push_back(State::vector_state(shape, b, Vector::Unit(shape.block_dim(b), i)));
  if (random_count > 0) {
    auto extra = state_net(shape, NetKind::PureRandom, random_count, seed);
    net.states.insert(net.states.end(), extra.begin(), extra.end());
  }
  return net;
}

Bound directed_set_distance(const Seminorm& L, const ExtremeNet& outer, const StateSet& set,
                            const SolveOptions& options, int threads) {
  if (outer.states.empty()) throw ValidationError("state net is empty");
  std::vector<DistanceResult> res(outer.states.size());
  parallel_for(outer.states.size(), threads,
               [&](std::size_t i) { res[i] = mk_distance_to_set(L, outer.states[i], set, options); });
  Bound b;
  b.certified = outer.exhaustive;
  for (const auto& r : res) {
    b.lower = std::max(b.lower, r.value);
    b.upper = std::max(b.upper, r.upper);
    b.certified = b.certified && r.report.certified;
  }
  return b;
}

DiameterBounds diameter_bounds(const Seminorm& L, int net_size, std::uint64_t seed, double tol, int threads) {
  require_lipschitz(L);
  const Shape& shape = L.shape();
  const auto net = shape.commutative() ? state_net(shape, NetKind::PureEnumerate, 1, seed)
                                       : state_net(shape, NetKind::PureRandom, std::max(2, net_size), seed);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = i + 1; j < net.size(); ++j) pairs.emplace_back(i, j);
  std::vector<double> values(pairs.size(), 0.0);
  std::vector<double> radii(pairs.size(), 0.0);
  SolveOptions opt;
  opt.tol = tol;
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto rep = mk_distance_report(L, net[pairs[k].first], net[pairs[k].second], opt);
    values[k] = rep.value;
    radii[k] = rep.report.box_radius;
  });
  DiameterBounds out;
  for (double v : values) out.lower = std::max(out.lower, v);
  if (L.diameter_certificate()) {
    out.upper = *L.diameter_certificate();
    out.upper_certified = true;
    out.method = L.certificate_method();
  } else {
    // every optimizer lies inside the final box, whose points have norm at
    // most sqrt(m) R; only valid for the sampled pairs
    double r = 0.0;
    for (double v : radii) r = std::max(r, v);
    out.upper = std::max(out.lower, 2.0 * std::sqrt(static_cast<double>(shape.real_dim())) * r);
    out.upper_certified = false;
    out.method = "solver box (not certified)";
  }
  return out;
}

RealMatrix pairwise_distances(const std::vector<State>& a, const std::vector<State>& b, const StateMetric& d,
                              int threads) {
  RealMatrix out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  parallel_for(a.size() * b.size(), threads, [&](std::size_t k) {
    const std::size_t i = k / b.size();
    const std::size_t j = k % b.size();
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d(a[i], b[j]);
  });
  return out;
}

double directed_hausdorff(const RealMatrix& d) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) h = std::max(h, d.row(i).minCoeff());
  return h;
}

HausdorffBounds hausdorff_from_matrix(const RealMatrix& d, double mesh, bool mesh_certified) {
  if (d.rows() == 0 || d.cols() == 0) throw ValidationError("Hausdorff distance needs nonempty nets");
  if (!(mesh >= 0.0)) throw ValidationError("net mesh must be nonnegative");
  HausdorffBounds out;
  out.lower = std::max(directed_hausdorff(d), directed_hausdorff(d.transpose()));
  out.heuristic_upper = out.lower + mesh;
  out.certified = mesh_certified;
  return out;
}

HausdorffBounds hausdorff_bounds(const std::vector<State>& net_a, const std::vector<State>& net_b,
                                 const StateMetric& d, double mesh, bool mesh_certified, int threads) {
  if (net_a.empty() || net_b.empty()) throw ValidationError("Hausdorff distance needs nonempty nets");
  return hausdorff_from_matrix(pairwise_distances(net_a, net_b, d, threads), mesh, mesh_certified);
}

}  // namespace qmetric
