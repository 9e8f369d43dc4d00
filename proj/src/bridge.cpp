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

#include "qmetric/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmetric/errors.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

Bridge::Bridge(Element pivot, StarMap pi_a, StarMap pi_b)
    : pivot_(std::move(pivot)), pi_a_(std::move(pi_a)), pi_b_(std::move(pi_b)) {
  require_same_shape(pi_a_.target(), pivot_.shape(), "bridge embedding");
  require_same_shape(pi_b_.target(), pivot_.shape(), "bridge embedding");
  pi_a_.verify();
  pi_b_.verify();
  if (!pi_a_.injective() || !pi_b_.injective()) throw ValidationError("bridge maps must be injective");
  const Shape& d = pivot_.shape();
  bool any = false;
  for (int b = 0; b < d.num_blocks(); ++b) {
    const int n = d.block_dim(b);
    const Matrix r = Matrix::Identity(n, n) - pivot_.block(b);
    Matrix stacked(2 * n, n);
    stacked << r, r.adjoint();
    level_.push_back(null_space(stacked, 1e-10));
    any = any || level_.back().cols() > 0;
  }
  if (!any) throw ValidationError("bridge pivot has an empty 1-level set");
}

Bridge Bridge::identity(const Shape& shape) {
  return Bridge(Element::identity(shape), StarMap::identity(shape), StarMap::identity(shape));
}

Element Bridge::displacement(const Element& a, const Element& b) const {
  return pi_a_.apply(a) * pivot_ - pivot_ * pi_b_.apply(b);
}

double bridge_seminorm(const Bridge& bridge, const Element& a, const Element& b) {
  return operator_norm(bridge.displacement(a, b));
}

OneLevelSupport one_level_support(const Bridge& bridge, int random_count, std::uint64_t seed) {
  const Shape& d = bridge.ambient();
  OneLevelSupport out;
  std::vector<Matrix> proj;
  std::vector<int> weights;
  for (int b = 0; b < d.num_blocks(); ++b) {
    const Matrix& v = bridge.level_isometries()[static_cast<std::size_t>(b)];
    proj.push_back(v * v.adjoint());
    for (Eigen::Index k = 0; k < v.cols(); ++k) out.net.push_back(State::vector_state(d, b, v.col(k)));
    weights.push_back(static_cast<int>(v.cols()));
  }
  out.projection = Element(d, proj);
  // random unit vectors only where the support has room for more than one
  std::vector<int> roomy;
  for (int b = 0; b < d.num_blocks(); ++b)
    if (weights[static_cast<std::size_t>(b)] > 1) roomy.push_back(b);
  for (int i = 0; i < random_count && !roomy.empty(); ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    const int b = roomy[static_cast<std::size_t>(i) % roomy.size()];
    const Matrix& v = bridge.level_isometries()[static_cast<std::size_t>(b)];
    Vector c(v.cols());
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = cplx(standard_normal(rng), standard_normal(rng));
    out.net.push_back(State::vector_state(d, b, v * c));
  }
  return out;
}

namespace {

struct Side {
  const Shape* outer_shape;
  const Seminorm* outer_l;
  const Seminorm* inner_l;
  const StarMap* outer_pi;
  const StarMap* inner_pi;
  bool outer_is_a;
};

// inf over b with L_inner(b) <= 1 of the bridge seminorm at fixed outer
// element; returns the certified lower bound and the feasible value
std::pair<double, double> inner_infimum(const Bridge& bridge, const Side& s, const Element& outer,
                                        const SolveOptions& opt) {
  const Shape& d = bridge.ambient();
  const Shape& inner_shape = s.inner_pi->source();
  const auto basis = basis_for(inner_shape);
  const Element& w = bridge.pivot();
  // displacement = sign * (pi_out(x) w or w pi_out(x)) - (pi_in(y) as above)
  auto place = [&](const StarMap& pi, const Element& x, bool is_a) {
    return is_a ? pi.apply(x) * w : w * pi.apply(x);
  };
  const double sign = s.outer_is_a ? 1.0 : -1.0;
  MinMaxProgram p;
  p.dim = basis->dim();
  AffineNormMap map;
  map.kind = NormKind::Spectral;
  for (int n : d.block_dims()) map.blocks.emplace_back(n, n);
  map.offset = sign * place(*s.outer_pi, outer, s.outer_is_a).vec();
  map.coeffs.resize(d.real_dim(), p.dim);
  for (int k = 0; k < p.dim; ++k) map.coeffs.col(k) = -sign * place(*s.inner_pi, (*basis)[k], !s.outer_is_a).vec();
  p.objective_maps.push_back(std::move(map));
  std::vector<int> all(static_cast<std::size_t>(p.dim));
  std::iota(all.begin(), all.end(), 0);
  p.constraints = s.inner_l->ball_constraints(all, 1.0);
  p.anchor = RealVector::Zero(p.dim);
  const SolveReport rep = minimize_max_norm(p, opt);
  return {std::max(0.0, rep.lower), rep.value};
}

// directed reach: sup over extreme points of the outer ball
Bound directed_reach(const Bridge& bridge, const Side& s, const EstimateOptions& o, std::uint64_t stream) {
  const auto basis = basis_for(*s.outer_shape);
  const int m = basis->dim() - 1;
  if (m == 0) return {0.0, 0.0, true};
  std::vector<RealVector> dirs;
  for (int k = 0; k < m; ++k) {
    dirs.push_back(RealVector::Unit(m, k));
    dirs.push_back(-RealVector::Unit(m, k));
  }
  for (int i = 0; i < o.directions; ++i) {
    Rng rng = make_rng(mix_seed(o.seed, stream), static_cast<std::uint64_t>(i));
    RealVector c(m);
    for (int k = 0; k < m; ++k) c(k) = standard_normal(rng);
    dirs.push_back(c);
  }
  std::vector<int> cols(static_cast<std::size_t>(m));
  std::iota(cols.begin(), cols.end(), 1);
  SolveOptions opt;
  opt.tol = o.tol;
  std::vector<std::pair<double, double>> vals(dirs.size());
  parallel_for(dirs.size(), o.threads, [&](std::size_t i) {
    NormProgram p;
    p.dim = m;
    p.objective = dirs[i];
    p.constraints = s.outer_l->ball_constraints(cols, 1.0);
    p.anchor = RealVector::Zero(m);
    const SolveReport rep = maximize_linear(p, opt);
    const Element a = basis->element(rep.x, 1);
    vals[i] = inner_infimum(bridge, s, a, opt);
  });
  Bound b;
  for (const auto& [lo, hi] : vals) {
    b.lower = std::max(b.lower, lo);
    b.upper = std::max(b.upper, hi);
  }
  return b;
}

}  // namespace

Bound max_bound(const Bound& a, const Bound& b) {
  return {std::max(a.lower, b.lower), std::max(a.upper, b.upper), a.certified && b.certified};
}

Bound bridge_reach_bounds(const Bridge& bridge, const Seminorm& la, const Seminorm& lb,
                          const EstimateOptions& options) {
  require_same_shape(la.shape(), bridge.domain(), "bridge reach");
  require_same_shape(lb.shape(), bridge.codomain(), "bridge reach");
  const Side from_a{&bridge.domain(), &la, &lb, &bridge.pi_a(), &bridge.pi_b(), true};
  const Side from_b{&bridge.codomain(), &lb, &la, &bridge.pi_b(), &bridge.pi_a(), false};
  Bound r = max_bound(directed_reach(bridge, from_a, options, 1), directed_reach(bridge, from_b, options, 2));
  r.certified = false;
  r.upper = std::max(r.upper, r.lower);
  return r;
}

Bound bridge_height_bounds(const Bridge& bridge, const Seminorm& la, const Seminorm& lb,
                           const EstimateOptions& options) {
  require_same_shape(la.shape(), bridge.domain(), "bridge height");
  require_same_shape(lb.shape(), bridge.codomain(), "bridge height");
  SolveOptions opt;
  opt.tol = options.tol;
  const Bound ha = directed_set_distance(la, extreme_state_net(bridge.domain(), options.net, mix_seed(options.seed, 3)),
                                         StateSet::compressed_pullback(bridge.pi_a(), bridge.level_isometries()),
                                         opt, options.threads);
  const Bound hb = directed_set_distance(lb, extreme_state_net(bridge.codomain(), options.net, mix_seed(options.seed, 4)),
                                         StateSet::compressed_pullback(bridge.pi_b(), bridge.level_isometries()),
                                         opt, options.threads);
  return max_bound(ha, hb);
}

BridgeLength bridge_length_bounds(const Bridge& bridge, const Seminorm& la, const Seminorm& lb,
                                  const EstimateOptions& options) {
  BridgeLength out;
  out.reach = bridge_reach_bounds(bridge, la, lb, options);
  out.height = bridge_height_bounds(bridge, la, lb, options);
  out.length = max_bound(out.reach, out.height);
  return out;
}

double perturbation_bound(double delta, double diam_a, double diam_b, double height) {
  if (!(delta >= 0.0) || !(diam_a >= 0.0) || !(diam_b >= 0.0) || !(height >= 0.0))
    throw ValidationError("perturbation bound inputs must be nonnegative");
  return std::max(delta * (1.0 + 0.5 * std::max(diam_a, diam_b)), height);
}

double bi_lipschitz_bound(double delta, double diam_a, double diam_b) {
  if (!(delta >= 1.0)) throw ValidationError("bi-Lipschitz constant must be at least 1");
  if (!(diam_a >= 0.0) || !(diam_b >= 0.0)) throw ValidationError("diameters must be nonnegative");
  return std::abs(1.0 - delta) * (0.5 + std::max(diam_a, diam_b));
}

}  // namespace qmetric
