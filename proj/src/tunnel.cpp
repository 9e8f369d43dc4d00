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

#include "qmetric/tunnel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qmetric/errors.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

namespace {

std::vector<int> all_columns(int m) {
  std::vector<int> v(static_cast<std::size_t>(m));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Real matrix of pi on HermitianBasis coordinates.
RealMatrix coordinate_matrix(const StarMap& pi) {
  const auto src = basis_for(pi.source());
  const auto dst = basis_for(pi.target());
  RealMatrix p(dst->dim(), src->dim());
  for (int k = 0; k < src->dim(); ++k) p.col(k) = dst->coordinates(pi.apply((*src)[k]));
  return p;
}

// Same shape and equal values on seeded random elements.
void require_same_seminorm(const Seminorm& a, const Seminorm& b, const char* context) {
  require_same_shape(a.shape(), b.shape(), context);
  Rng rng = make_rng(0x5eed, 0);
  for (int t = 0; t < 8; ++t) {
    const Element x = random_self_adjoint(a.shape(), rng);
    const double va = a.eval(x), vb = b.eval(x);
    if (std::abs(va - vb) > 1e-9 * std::max(1.0, std::abs(va)))
      throw ValidationError(std::string(context) + ": endpoint Lip-norms differ");
  }
}

Bound zero_bound() { return {0.0, 0.0, true}; }

}  // namespace

Tunnel::Tunnel(Seminorm ld, StarMap pi_a, Seminorm la, StarMap pi_b, Seminorm lb)
    : ld_(std::move(ld)), pi_a_(std::move(pi_a)), pi_b_(std::move(pi_b)), la_(std::move(la)), lb_(std::move(lb)) {
  if (ld_.kind() != Seminorm::Kind::MaxOfAtoms || !ld_.lipschitz_pair())
    throw ValidationError("tunnel Lip-norm must be a max-of-atoms Lip-norm");
  for (const auto* pi : {&pi_a_, &pi_b_}) {
    require_same_shape(ld_.shape(), pi->source(), "tunnel map");
    pi->verify();
    if (!pi->surjective()) throw ValidationError("tunnel maps must be surjective");
  }
  require_same_shape(pi_a_.target(), la_.shape(), "tunnel endpoint");
  require_same_shape(pi_b_.target(), lb_.shape(), "tunnel endpoint");
}

const IsometryCheck& Tunnel::check_isometry(int samples, std::uint64_t seed, double tolerance, double tol,
                                            int threads) {
  if (samples < 1) throw ValidationError("isometry check needs at least one sample");
  std::vector<double> margins(2 * static_cast<std::size_t>(samples), 0.0);
  parallel_for(margins.size(), threads, [&](std::size_t i) {
    const TunnelSide side = i < static_cast<std::size_t>(samples) ? TunnelSide::A : TunnelSide::B;
    Rng rng = make_rng(seed, i);
    const Element a = random_self_adjoint(target_lip(side).shape(), rng);
    const QuotientResult q = quotient_seminorm(*this, side, a, tol);
    const double l = target_lip(side).eval(a);
    margins[i] = std::max(std::abs(q.value - l), std::abs(q.lower - l));
  });
  check_.samples = samples;
  check_.tolerance = tolerance;
  check_.worst_margin = *std::max_element(margins.begin(), margins.end());
  check_.pass = check_.worst_margin <= tolerance;
  return check_;
}

Tunnel tunnel_from_bridge(const Bridge& bridge, const Seminorm& la, const Seminorm& lb, double lambda, int samples,
                          std::uint64_t seed) {
  if (!(lambda > 0.0)) throw ValidationError("tunnel scale lambda must be positive");
  require_same_shape(la.shape(), bridge.domain(), "tunnel from bridge");
  require_same_shape(lb.shape(), bridge.codomain(), "tunnel from bridge");
  if (la.kind() != Seminorm::Kind::MaxOfAtoms || lb.kind() != Seminorm::Kind::MaxOfAtoms)
    throw ValidationError("tunnel endpoints need max-of-atoms Lip-norms");
  const Shape& a = la.shape();
  const Shape& b = lb.shape();
  const Shape d = a.direct_sum(b);
  const StarMap pa = StarMap::coordinate_projection(a, b, 0);
  const StarMap pb = StarMap::coordinate_projection(a, b, 1);
  std::vector<Atom> atoms;
  for (const auto& at : la.atoms()) atoms.push_back(at.pulled_back([pa](const Element& x) { return pa.apply(x); }));
  for (const auto& at : lb.atoms()) atoms.push_back(at.pulled_back([pb](const Element& x) { return pb.apply(x); }));
  atoms.push_back(Atom::spectral("bridge", [bridge, pa, pb, lambda](const Element& x) {
                    return bridge.displacement(pa.apply(x), pb.apply(x)).blocks();
                  }).scaled(1.0 / lambda));
  Tunnel t(Seminorm::max_of_atoms(d, std::move(atoms), "bridge tunnel"), pa, la, pb, lb);
  if (samples > 0) t.check_isometry(samples, seed);
  return t;
}

QuotientResult quotient_seminorm(const Tunnel& tunnel, TunnelSide side, const Element& a, double tol) {
  const StarMap& pi = tunnel.pi(side);
  require_same_shape(pi.target(), a.shape(), "quotient seminorm");
  if (!a.is_self_adjoint(1e-9)) throw ValidationError("quotient seminorm needs a self-adjoint element");
  const Shape& d = tunnel.ambient();
  const auto basis = basis_for(d);
  MinMaxProgram p;
  p.dim = basis->dim();
  for (const auto& at : tunnel.lip().atoms()) p.objective_maps.push_back(at.coordinate_map(d));
  p.eq_matrix = coordinate_matrix(pi);
  p.eq_rhs = basis_for(a.shape())->coordinates(a);
  SolveOptions opt;
  opt.tol = tol;
  const SolveReport rep = minimize_max_norm(p, opt);
  QuotientResult out;
  out.lift = basis->element(rep.x);
  out.value = rep.value;
  out.lower = std::max(0.0, std::min(rep.lower, rep.value));
  return out;
}

TunnelQuantities tunnel_quantities(const Tunnel& tunnel, const EstimateOptions& options) {
  const Shape& d = tunnel.ambient();
  const Seminorm& L = tunnel.lip();
  SolveOptions opt;
  opt.tol = options.tol;
  const StateSet face_a = StateSet::pullback(tunnel.pi(TunnelSide::A));
  const StateSet face_b = StateSet::pullback(tunnel.pi(TunnelSide::B));

  auto image_net = [&](TunnelSide s, std::uint64_t stream) {
    const StarMap& pi = tunnel.pi(s);
    ExtremeNet net = extreme_state_net(pi.target(), options.net, mix_seed(options.seed, stream));
    for (auto& st : net.states) st = pi.pullback(st);
    return net;
  };
  TunnelQuantities q;
  q.reach = max_bound(directed_set_distance(L, image_net(TunnelSide::A, 1), face_b, opt, options.threads),
                      directed_set_distance(L, image_net(TunnelSide::B, 2), face_a, opt, options.threads));

  const ExtremeNet full = extreme_state_net(d, options.net, mix_seed(options.seed, 3));
  Matrix joint(tunnel.pi(TunnelSide::A).matrix().rows() + tunnel.pi(TunnelSide::B).matrix().rows(), d.real_dim());
  joint << tunnel.pi(TunnelSide::A).matrix(), tunnel.pi(TunnelSide::B).matrix();
  if (null_space(joint, 1e-10).cols() == 0) {
    q.depth = zero_bound();
  } else {
    q.depth = directed_set_distance(L, full, StateSet::hull(face_a, face_b), opt, options.threads);
  }
  q.length = max_bound(q.reach, q.depth);
  q.extent = max_bound(directed_set_distance(L, full, face_a, opt, options.threads),
                       directed_set_distance(L, full, face_b, opt, options.threads));
  return q;
}

Tunnel compose_tunnels(const Tunnel& first, const Tunnel& second, std::optional<double> eps, int samples,
                       std::uint64_t seed) {
  require_same_seminorm(first.target_lip(TunnelSide::B), second.target_lip(TunnelSide::A), "tunnel composition");
  if (!eps) {
    double diam = 0.0;
    for (const Seminorm* l : {&first.target_lip(TunnelSide::A), &second.target_lip(TunnelSide::B)}) {
      const auto& cert = l->diameter_certificate();
      diam = std::max(diam, cert ? *cert : diameter_bounds(*l, 4, seed).upper);
    }
    eps = 1e-3 * std::max(diam, 1e-9);
  }
  if (!(*eps > 0.0)) throw ValidationError("composition epsilon must be positive");
  const Shape& d1 = first.ambient();
  const Shape& d2 = second.ambient();
  const Shape d = d1.direct_sum(d2);
  const StarMap p1 = StarMap::coordinate_projection(d1, d2, 0);
  const StarMap p2 = StarMap::coordinate_projection(d1, d2, 1);
  std::vector<Atom> atoms;
  for (const auto& at : first.lip().atoms()) atoms.push_back(at.pulled_back([p1](const Element& x) { return p1.apply(x); }));
  for (const auto& at : second.lip().atoms())
    atoms.push_back(at.pulled_back([p2](const Element& x) { return p2.apply(x); }));
  const StarMap rho1 = first.pi(TunnelSide::B).compose(p1);
  const StarMap pi2 = second.pi(TunnelSide::A).compose(p2);
  atoms.push_back(Atom::spectral("junction", [rho1, pi2](const Element& x) {
                    return (rho1.apply(x) - pi2.apply(x)).blocks();
                  }).scaled(1.0 / *eps));
  Tunnel t(Seminorm::max_of_atoms(d, std::move(atoms), "composite tunnel"), first.pi(TunnelSide::A).compose(p1),
           first.target_lip(TunnelSide::A), second.pi(TunnelSide::B).compose(p2), second.target_lip(TunnelSide::B));
  if (samples > 0) t.check_isometry(samples, seed);
  return t;
}

LiftResult lift_element(const Tunnel& tunnel, TunnelSide side, const Element& a, double l, double tol) {
  const QuotientResult q = quotient_seminorm(tunnel, side, a, tol);
  const double slack = tol * std::max(1.0, q.value);
  if (l < q.lower - slack) throw InfeasibleError("Lipschitz budget is below the quotient value");
  const Shape& d = tunnel.ambient();
  const auto basis = basis_for(d);
  const TunnelSide other = side == TunnelSide::A ? TunnelSide::B : TunnelSide::A;
  LiftResult out;
  const double budget = std::max(l, q.value + slack);
  {
    MinMaxProgram p;
    p.dim = basis->dim();
    AffineNormMap norm;
    norm.kind = NormKind::Spectral;
    for (int n : d.block_dims()) norm.blocks.emplace_back(n, n);
    norm.coeffs.resize(d.real_dim(), p.dim);
    for (int k = 0; k < p.dim; ++k) norm.coeffs.col(k) = (*basis)[k].vec();
    p.objective_maps.push_back(std::move(norm));
    p.constraints = tunnel.lip().ball_constraints(all_columns(p.dim), budget);
    p.eq_matrix = coordinate_matrix(tunnel.pi(side));
    p.eq_rhs = basis_for(a.shape())->coordinates(a);
    p.anchor = basis->coordinates(q.lift);
    SolveOptions opt;
    opt.tol = tol;
    out.lift = basis->element(minimize_max_norm(p, opt).x);
  }
  out.norm = operator_norm(out.lift);
  out.lip = tunnel.lip().eval(out.lift);
  out.target = tunnel.pi(other).apply(out.lift);
  return out;
}

bool lift_norm_within_bound(const LiftResult& lift, const Element& a, double l, double extent_upper, double slack) {
  return lift.norm <= operator_norm(a) + l * extent_upper + slack;
}

Trek::Trek(std::vector<TrekStep> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw ValidationError("a trek needs at least one bridge");
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const TrekStep& s = steps_[i];
    require_same_shape(s.la.shape(), s.bridge.domain(), "trek step");
    require_same_shape(s.lb.shape(), s.bridge.codomain(), "trek step");
    if (!(s.length.lower >= 0.0) || s.length.upper < s.length.lower)
      throw ValidationError("trek step length bounds are inconsistent");
    if (i + 1 < steps_.size()) require_same_seminorm(s.lb, steps_[i + 1].la, "trek chain");
  }
}

Trek Trek::concatenate(const Trek& next) const {
  std::vector<TrekStep> all = steps_;
  all.insert(all.end(), next.steps_.begin(), next.steps_.end());
  return Trek(std::move(all));
}

Bound trek_length(const Trek& trek) {
  Bound b{0.0, 0.0, true};
  for (const auto& s : trek.steps()) {
    b.lower += s.length.lower;
    b.upper += s.length.upper;
    b.certified = b.certified && s.length.certified;
  }
  return b;
}

std::optional<double> propinquity_upper_bound(const std::vector<Trek>& treks) {
  std::optional<double> best;
  for (const auto& t : treks) {
    const Bound b = trek_length(t);
    if (b.certified && (!best || b.upper < *best)) best = b.upper;
  }
  return best;
}

}  // namespace qmetric
