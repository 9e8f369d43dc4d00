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

#include "qmetric/lipnorm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "qmetric/errors.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

// ---------------------------------------------------------------- Atom

struct Atom::Impl {
  NormKind kind = NormKind::Spectral;
  std::string label;
  SpectralFn spectral;
  EuclideanFn euclidean;
  double scale = 1.0;
  std::mutex mu;
  std::map<std::vector<int>, std::shared_ptr<const AffineNormMap>> cache;
};

Atom Atom::spectral(std::string label, SpectralFn fn) {
  Atom a;
  a.impl_ = std::make_shared<Impl>();
  a.impl_->kind = NormKind::Spectral;
  a.impl_->label = std::move(label);
  a.impl_->spectral = std::move(fn);
  return a;
}

Atom Atom::euclidean(std::string label, EuclideanFn fn) {
  Atom a;
  a.impl_ = std::make_shared<Impl>();
  a.impl_->kind = NormKind::Euclidean;
  a.impl_->label = std::move(label);
  a.impl_->euclidean = std::move(fn);
  return a;
}

NormKind Atom::kind() const { return impl_->kind; }
const std::string& Atom::label() const { return impl_->label; }

double Atom::eval(const Element& a) const {
  if (impl_->kind == NormKind::Euclidean) return impl_->scale * impl_->euclidean(a).norm();
  double n = 0.0;
  for (const auto& m : impl_->spectral(a)) n = std::max(n, spectral_norm(m));
  return impl_->scale * n;
}

const AffineNormMap& Atom::coordinate_map(const Shape& shape) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  auto it = impl_->cache.find(shape.block_dims());
  if (it != impl_->cache.end()) return *it->second;
  const auto basis = basis_for(shape);
  auto map = std::make_shared<AffineNormMap>();
  map->kind = impl_->kind;
  const int m = basis->dim();
  for (int i = 0; i < m; ++i) {
    Vector col;
    if (impl_->kind == NormKind::Euclidean) {
      col = impl_->euclidean((*basis)[i]);
      if (i == 0) {
        map->blocks = {{static_cast<int>(col.size()), 1}};
        map->coeffs.resize(col.size(), m);
      }
    } else {
      const auto out = impl_->spectral((*basis)[i]);
      if (i == 0) {
        Eigen::Index total = 0;
        for (const auto& b : out) {
          map->blocks.emplace_back(static_cast<int>(b.rows()), static_cast<int>(b.cols()));
          total += b.size();
        }
        map->coeffs.resize(total, m);
      }
      col.resize(map->coeffs.rows());
      Eigen::Index off = 0;
      for (const auto& b : out) {
        col.segment(off, b.size()) = Eigen::Map<const Vector>(b.data(), b.size());
        off += b.size();
      }
    }
    if (col.size() != map->coeffs.rows()) throw ValidationError("atom output size varies with input");
    map->coeffs.col(i) = col * impl_->scale;
  }
  impl_->cache.emplace(shape.block_dims(), map);
  return *map;
}

AffineNormMap Atom::coordinate_map(const Shape& shape, const std::vector<int>& columns) const {
  const AffineNormMap& full = coordinate_map(shape);
  AffineNormMap out;
  out.kind = full.kind;
  out.blocks = full.blocks;
  out.coeffs.resize(full.coeffs.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k)
    out.coeffs.col(static_cast<Eigen::Index>(k)) = full.coeffs.col(columns[k]);
  return out;
}

Atom Atom::scaled(double s) const {
  if (!(s > 0.0)) throw ValidationError("atom scale must be positive");
  Atom a;
  a.impl_ = std::make_shared<Impl>();
  a.impl_->kind = impl_->kind;
  a.impl_->label = impl_->label;
  a.impl_->spectral = impl_->spectral;
  a.impl_->euclidean = impl_->euclidean;
  a.impl_->scale = impl_->scale * s;
  return a;
}

Atom Atom::pulled_back(const std::function<Element(const Element&)>& f) const {
  Atom a;
  a.impl_ = std::make_shared<Impl>();
  a.impl_->kind = impl_->kind;
  a.impl_->label = impl_->label;
  a.impl_->scale = impl_->scale;
  if (impl_->kind == NormKind::Euclidean) {
    a.impl_->euclidean = [g = impl_->euclidean, f](const Element& x) { return g(f(x)); };
  } else {
    a.impl_->spectral = [g = impl_->spectral, f](const Element& x) { return g(f(x)); };
  }
  return a;
}

// ---------------------------------------------------------------- Seminorm

namespace {

RealMatrix stacked_real_map(const std::vector<Atom>& atoms, const Shape& shape) {
  Eigen::Index rows = 0;
  for (const auto& a : atoms) rows += 2 * a.coordinate_map(shape).coeffs.rows();
  RealMatrix s(rows, shape.real_dim());
  Eigen::Index off = 0;
  for (const auto& a : atoms) {
    const Matrix& c = a.coordinate_map(shape).coeffs;
    s.middleRows(off, c.rows()) = c.real();
    s.middleRows(off + c.rows(), c.rows()) = c.imag();
    off += 2 * c.rows();
  }
  return s;
}

}  // namespace

Seminorm Seminorm::max_of_atoms(const Shape& shape, std::vector<Atom> atoms, std::string name,
                                bool check_kernel) {
  Seminorm L;
  L.kind_ = Kind::MaxOfAtoms;
  L.shape_ = shape;
  L.name_ = std::move(name);
  L.atoms_ = std::move(atoms);
  if (L.atoms_.empty() && shape.real_dim() != 1)
    throw ValidationError("a max-of-atoms seminorm needs at least one atom");
  const Element one = Element::identity(shape);
  for (const auto& a : L.atoms_)
    if (a.eval(one) > 1e-9) throw ValidationError("seminorm does not vanish on the unit (atom " + a.label() + ")");
  if (check_kernel) {
    const int k = L.kernel_dim();
    if (k != 1) {
      std::ostringstream msg;
      msg << "not a Lipschitz pair: joint kernel on self-adjoints has dimension " << k;
      throw ValidationError(msg.str());
    }
  }
  L.lipschitz_ = true;
  return L;
}

Seminorm Seminorm::dist_to_subspace(const std::vector<Element>& span, std::string name) {
  if (span.empty()) throw ValidationError("distance seminorm needs a nonempty span");
  Seminorm L;
  L.kind_ = Kind::DistToSubspace;
  L.shape_ = span.front().shape();
  L.name_ = std::move(name);
  const auto basis = basis_for(L.shape_);
  // Complex span as vec columns, for closure checks.
  Matrix cols(L.shape_.real_dim(), static_cast<Eigen::Index>(span.size()));
  for (std::size_t i = 0; i < span.size(); ++i) {
    require_same_shape(L.shape_, span[i].shape(), "distance seminorm span");
    cols.col(static_cast<Eigen::Index>(i)) = span[i].vec();
  }
  Eigen::ColPivHouseholderQR<Matrix> cq(cols);
  cq.setThreshold(1e-9);
  const Matrix qr = Matrix(cq.householderQ()).leftCols(cq.rank());
  auto in_span = [&](const Element& e) {
    const Vector v = e.vec();
    return (v - qr * (qr.adjoint() * v)).norm() <= 1e-9 * std::max(1.0, v.norm());
  };
  if (!in_span(Element::identity(L.shape_))) throw ValidationError("distance span must contain the unit");
  for (const auto& e : span)
    if (!in_span(e.adjoint())) throw ValidationError("distance span must be closed under adjoints");
  // Real orthonormal basis of the self-adjoint part of the span.
  RealMatrix coords(basis->dim(), static_cast<Eigen::Index>(2 * span.size()));
  for (std::size_t i = 0; i < span.size(); ++i) {
    coords.col(static_cast<Eigen::Index>(2 * i)) = basis->coordinates(span[i].real_part());
    coords.col(static_cast<Eigen::Index>(2 * i + 1)) = basis->coordinates(span[i].imag_part());
  }
  Eigen::JacobiSVD<RealMatrix> svd(coords, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-9 * std::max(1.0, s(0))) L.span_.push_back(basis->element(svd.matrixU().col(i)));
  L.lipschitz_ = L.span_.size() == 1;
  return L;
}

std::pair<double, double> Seminorm::eval_bounds(const Element& a, double tol) const {
  require_same_shape(shape_, a.shape(), "seminorm evaluation");
  if (!a.is_self_adjoint(1e-9)) throw ValidationError("seminorms are evaluated on self-adjoint elements");
  if (kind_ == Kind::MaxOfAtoms) {
    double v = 0.0;
    for (const auto& at : atoms_) v = std::max(v, at.eval(a));
    return {v, v};
  }
  MinMaxProgram p;
  p.dim = static_cast<int>(span_.size());
  AffineNormMap map;
  map.kind = NormKind::Spectral;
  for (int n : shape_.block_dims()) map.blocks.emplace_back(n, n);
  map.offset = a.vec();
  map.coeffs.resize(map.offset.size(), p.dim);
  for (int k = 0; k < p.dim; ++k) map.coeffs.col(k) = -span_[static_cast<std::size_t>(k)].vec();
  p.objective_maps.push_back(std::move(map));
  SolveOptions opt;
  opt.tol = tol;
  const SolveReport rep = minimize_max_norm(p, opt);
  return {std::max(0.0, rep.lower), rep.upper};
}

double Seminorm::eval(const Element& a, double tol) const { return eval_bounds(a, tol).second; }

Seminorm Seminorm::scaled(double s) const {
  if (!(s > 0.0)) throw ValidationError("seminorm scale must be positive");
  if (kind_ != Kind::MaxOfAtoms) throw ValidationError("only max-of-atoms seminorms can be scaled");
  Seminorm L = *this;
  for (auto& a : L.atoms_) a = a.scaled(s);
  if (L.diameter_) L.diameter_ = *L.diameter_ / s;
  std::ostringstream nm;
  nm << s << "*" << name_;
  L.name_ = nm.str();
  return L;
}

std::vector<NormConstraint> Seminorm::ball_constraints(const std::vector<int>& columns, double bound) const {
  if (kind_ != Kind::MaxOfAtoms)
    throw ValidationError("distance-to-subspace seminorms cannot define constraint sets");
  std::vector<NormConstraint> out;
  for (const auto& a : atoms_) {
    NormConstraint c;
    c.map = a.coordinate_map(shape_, columns);
    c.rhs = bound;
    out.push_back(std::move(c));
  }
  return out;
}

Seminorm Seminorm::with_diameter_certificate(double upper, std::string method) const {
  if (!(upper >= 0.0) || !std::isfinite(upper)) throw ValidationError("diameter bound must be finite");
  Seminorm L = *this;
  L.diameter_ = upper;
  L.certificate_method_ = std::move(method);
  return L;
}

int Seminorm::kernel_dim() const {
  if (kind_ == Kind::DistToSubspace) return static_cast<int>(span_.size());
  if (atoms_.empty()) return shape_.real_dim();
  const RealMatrix s = stacked_real_map(atoms_, shape_);
  return shape_.real_dim() - numerical_rank(s, 1e-9);
}

double seminorm_eval(const Seminorm& L, const Element& a, double tol) { return L.eval(a, tol); }

// ---------------------------------------------------------------- constructors

namespace {

// True when the listed automorphisms together with the identity form a
// group, tested on two random probe elements.
bool listed_group_is_closed(const std::vector<Automorphism>& actions) {
  const std::size_t n = actions.size();
  if (n > 256) return false;
  const Shape& shape = actions.front().shape();
  Rng rng = make_rng(0x6a0, n);
  const std::vector<Element> probes{random_self_adjoint(shape, rng), random_self_adjoint(shape, rng)};
  std::vector<std::vector<Element>> images(n + 1);
  for (const auto& p : probes) images[0].push_back(p);
  for (std::size_t g = 0; g < n; ++g)
    for (const auto& p : probes) images[g + 1].push_back(actions[g].apply(p));
  auto find = [&](const std::vector<Element>& img) {
    for (std::size_t k = 0; k <= n; ++k) {
      bool same = true;
      for (std::size_t t = 0; t < img.size() && same; ++t) same = img[t].distance(images[k][t]) <= 1e-9;
      if (same) return true;
    }
    return false;
  };
  for (std::size_t g = 0; g < n; ++g)
    for (std::size_t h = 0; h < n; ++h) {
      std::vector<Element> img;
      for (const auto& p : images[h + 1]) img.push_back(actions[g].apply(p));
      if (!find(img)) return false;
    }
  return true;
}

}  // namespace

Seminorm from_automorphisms(const std::vector<Automorphism>& actions, const std::vector<double>& lengths,
                            std::string name, bool check_kernel) {
  if (actions.empty()) throw ValidationError("group action needs at least one group element");
  if (actions.size() != lengths.size()) throw ValidationError("one length per group element is required");
  const Shape shape = actions.front().shape();
  std::vector<Atom> atoms;
  for (std::size_t g = 0; g < actions.size(); ++g) {
    require_same_shape(shape, actions[g].shape(), "group action");
    const double l = lengths[g];
    if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError("lengths must be positive and finite");
    const Automorphism alpha = actions[g];
    atoms.push_back(Atom::spectral("g" + std::to_string(g), [alpha, l](const Element& a) {
      std::vector<Matrix> out = alpha.apply(a).blocks();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - a.blocks()[i]) / l;
      return out;
    }));
  }
  Seminorm L = Seminorm::max_of_atoms(shape, std::move(atoms), std::move(name), check_kernel);
  if (listed_group_is_closed(actions)) {
    // ||a - E(a)|| <= (sum_g l(g) / |G|) L(a) with E the average over G
    double total = 0.0;
    for (double l : lengths) total += l;
    const double mean = total / static_cast<double>(actions.size() + 1);
    L = L.with_diameter_certificate(2.0 * mean, "group average");
  }
  return L;
}

Seminorm from_group_action(const std::vector<Element>& unitaries, const std::vector<double>& lengths,
                           std::string name) {
  std::vector<Automorphism> actions;
  for (const auto& u : unitaries) {
    const Element uu = u.adjoint() * u;
    if (uu.distance(Element::identity(u.shape())) > 1e-9) throw ValidationError("action element is not unitary");
    actions.push_back(Automorphism::inner(u));
  }
  return from_automorphisms(actions, lengths, std::move(name));
}

Seminorm from_commutator(const Element& dirac, const StarMap& rep, std::string name) {
  require_same_shape(dirac.shape(), rep.target(), "commutator seminorm");
  if (!dirac.is_self_adjoint(1e-9)) throw ValidationError("Dirac operator must be Hermitian");
  rep.verify(1e-9);
  if (!rep.injective()) throw ValidationError("representation must be faithful");
  const Element d = dirac;
  const StarMap pi = rep;
  Atom atom = Atom::spectral("[D,pi(a)]", [d, pi](const Element& a) {
    const Element pa = pi.apply(a);
    std::vector<Matrix> out;
    for (int i = 0; i < pa.shape().num_blocks(); ++i)
      out.push_back(d.block(i) * pa.block(i) - pa.block(i) * d.block(i));
    return out;
  });
  return Seminorm::max_of_atoms(rep.source(), {atom}, std::move(name));
}

Seminorm from_filtration(const std::vector<std::shared_ptr<const ConditionalExpectation>>& stages,
                         const std::vector<double>& beta, std::string name) {
  if (stages.empty()) throw ValidationError("filtration needs at least one stage");
  const Shape shape = stages.front()->shape();
  for (const auto& s : stages) require_same_shape(shape, s->shape(), "filtration");
  if (stages.front()->range_dim() != 1) throw ValidationError("filtration must start at span{1}");
  const bool last_full = stages.back()->range_dim() == shape.real_dim();
  const std::size_t needed = last_full ? stages.size() - 1 : stages.size();
  if (beta.size() != needed && beta.size() != stages.size())
    throw ValidationError("beta needs one value per stage (the final full stage may be omitted)");
  for (double b : beta)
    if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("beta values must be positive");

  const Element one = Element::identity(shape);
  Rng rng = make_rng(0xf17e, 0);
  std::vector<Element> probes;
  for (int t = 0; t < 3; ++t) probes.push_back(random_self_adjoint(shape, rng));
  for (std::size_t n = 0; n < stages.size(); ++n) {
    if (stages[n]->apply(one).distance(one) > 1e-9) throw ValidationError("filtration stage is not unital");
    for (const auto& a : probes) {
      const Element ea = stages[n]->apply(a);
      if (std::abs(ea.trace() - a.trace()) > 1e-9 * std::max(1.0, operator_norm(a) * shape.total_dim()))
        throw ValidationError("filtration stage is not trace preserving");
      if (n + 1 < stages.size()) {
        if (stages[n + 1]->apply(ea).distance(ea) > 1e-9 ||
            stages[n]->apply(stages[n + 1]->apply(a)).distance(ea) > 1e-9)
          throw ValidationError("filtration stages are not nested");
      }
    }
  }
  std::vector<Atom> atoms;
  for (std::size_t n = 0; n < beta.size(); ++n) {
    const auto e = stages[n];
    const double b = beta[n];
    atoms.push_back(Atom::spectral("stage" + std::to_string(n), [e, b](const Element& a) {
      const Element ea = e->apply(a);
      std::vector<Matrix> out;
      for (int i = 0; i < a.shape().num_blocks(); ++i) out.push_back((a.block(i) - ea.block(i)) / b);
      return out;
    }));
  }
  // The first stage is span{1}, so the joint kernel is span{1} by
  // construction; the rank test is only a cross-check on small algebras.
  const double b0 = beta.empty() ? 0.0 : beta.front();
  Seminorm L = Seminorm::max_of_atoms(shape, std::move(atoms), std::move(name), shape.real_dim() <= 256);
  // ||a - tau(a) 1|| <= beta(0) L(a)
  return L.with_diameter_certificate(2.0 * b0, "first filtration stage");
}

Seminorm from_stddev(const State& mu, std::string name) {
  if (!mu.faithful()) throw ValidationError("standard deviation needs a faithful state");
  std::vector<Matrix> roots;
  for (const auto& d : mu.densities()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(d);
    const RealVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    roots.push_back(es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint());
  }
  const State m = mu;
  Atom atom = Atom::euclidean("gns", [m, roots](const Element& a) {
    const cplx mean = evaluate(m, a);
    Vector out(a.shape().real_dim());
    Eigen::Index off = 0;
    for (int i = 0; i < a.shape().num_blocks(); ++i) {
      const int n = a.shape().block_dim(i);
      const Matrix x = (a.block(i) - mean * Matrix::Identity(n, n)) * roots[static_cast<std::size_t>(i)];
      out.segment(off, x.size()) = Eigen::Map<const Vector>(x.data(), x.size());
      off += x.size();
    }
    return out;
  });
  // ||a - mu(a)|| <= ||(a - mu(a)) rho^{1/2}||_F / sqrt(lambda_min)
  return Seminorm::max_of_atoms(mu.shape(), {atom}, std::move(name))
      .with_diameter_certificate(2.0 / std::sqrt(mu.min_eigenvalue()), "faithful state");
}

Seminorm from_metric(const RealMatrix& dist, std::string name) {
  validate_metric(dist);
  const int k = static_cast<int>(dist.rows());
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j && !(dist(i, j) > 0.0)) throw ValidationError("distinct points need positive distance");
  const Shape shape(std::vector<int>(static_cast<std::size_t>(k), 1));
  std::vector<Atom> atoms;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      const double d = dist(i, j);
      atoms.push_back(Atom::euclidean("(" + std::to_string(i) + "," + std::to_string(j) + ")",
                                      [i, j, d](const Element& a) {
                                        Vector v(1);
                                        v(0) = (a.block(i)(0, 0) - a.block(j)(0, 0)) / d;
                                        return v;
                                      }));
    }
  return Seminorm::max_of_atoms(shape, std::move(atoms), std::move(name))
      .with_diameter_certificate(dist.maxCoeff(), "metric diameter");
}

// ---------------------------------------------------------------- Leibniz

PermissibleF::PermissibleF(double c_, double d_) : c(c_), d(d_) {
  if (!(c >= 1.0) || !(d >= 0.0)) throw ValidationError("permissible F needs C >= 1 and D >= 0");
}

double PermissibleF::operator()(double x, double y, double lx, double ly) const {
  return c * (x * ly + y * lx) + d * lx * ly;
}

LeibnizReport check_quasi_leibniz(const Seminorm& L, const PermissibleF& f, int samples,
                                  std::uint64_t seed, int threads) {
  if (samples < 1) throw ValidationError("Leibniz check needs at least one sample");
  std::vector<double> margins(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const double sa = std::exp(standard_normal(rng));
    const double sb = std::exp(standard_normal(rng));
    const Element a = cplx(sa) * random_self_adjoint(L.shape(), rng);
    const Element b = cplx(sb) * random_self_adjoint(L.shape(), rng);
    const double na = operator_norm(a);
    const double nb = operator_norm(b);
    const double la = L.eval_bounds(a).second;
    const double lb = L.eval_bounds(b).second;
    const JordanLie jl = jordan_lie(a, b);
    const double bound = f(na, nb, la, lb);
    const double lj = L.eval_bounds(jl.jordan).first;
    const double ll = L.eval_bounds(jl.lie).first;
    margins[i] = std::max(lj, ll) - bound;
  });
  LeibnizReport rep;
  rep.samples = samples;
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i)
    if (margins[static_cast<std::size_t>(i)] > rep.worst_margin) {
      rep.worst_margin = margins[static_cast<std::size_t>(i)];
      rep.worst_index = i;
    }
  rep.pass = rep.worst_margin <= 1e-9;
  return rep;
}

}  // namespace qmetric
