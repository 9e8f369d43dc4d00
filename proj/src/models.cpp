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

#include "qmetric/models.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <string>

#include "qmetric/bridge.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/linalg.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/random.hpp"

namespace qmetric {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int positive_mod(long long x, int m) {
  const long long r = x % m;
  return static_cast<int>(r < 0 ? r + m : r);
}

// rho^e for rho an n-th root of unity, exponent reduced mod n first.
cplx root_power(cplx rho, long long e, int n) {
  const int r = positive_mod(e, n);
  cplx out = 1.0;
  for (int i = 0; i < r; ++i) out *= rho;
  return out;
}

void require_root_of_unity(cplx rho, int n) {
  if (n < 2) throw ValidationError("order must be at least 2");
  cplx p = 1.0;
  for (int i = 0; i < n; ++i) p *= rho;
  if (std::abs(p - 1.0) > 1e-12) throw ValidationError("rho is not an n-th root of unity");
}

}  // namespace

// ------------------------------------------------------------------ groups

FiniteAbelianGroup::FiniteAbelianGroup(std::vector<int> orders) : orders_(std::move(orders)) {
  if (orders_.empty()) throw ValidationError("group needs at least one cyclic factor");
  for (int m : orders_) {
    if (m < 1) throw ValidationError("cyclic orders must be at least 1");
    if (size_ > INT_MAX / m) throw ValidationError("group is too large");
    size_ *= m;
  }
}

int FiniteAbelianGroup::index(const std::vector<int>& coords) const {
  if (coords.size() != orders_.size()) throw ValidationError("group element has the wrong rank");
  int idx = 0;
  for (std::size_t k = 0; k < orders_.size(); ++k) idx = idx * orders_[k] + positive_mod(coords[k], orders_[k]);
  return idx;
}

std::vector<int> FiniteAbelianGroup::element(int index) const {
  if (index < 0 || index >= size_) throw ValidationError("group index out of range");
  std::vector<int> out(orders_.size());
  for (std::size_t k = orders_.size(); k-- > 0;) {
    out[k] = index % orders_[k];
    index /= orders_[k];
  }
  return out;
}

std::vector<int> FiniteAbelianGroup::centered(int index) const {
  std::vector<int> g = element(index);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const int hi = (orders_[k] - 1) / 2;
    if (g[k] > hi) g[k] -= orders_[k];
  }
  return g;
}

int FiniteAbelianGroup::add(int x, int y) const {
  const auto a = element(x);
  const auto b = element(y);
  std::vector<int> c(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) c[k] = a[k] + b[k];
  return index(c);
}

int FiniteAbelianGroup::neg(int x) const {
  auto a = element(x);
  for (auto& v : a) v = -v;
  return index(a);
}

cplx FiniteAbelianGroup::character(int h, int g) const {
  const auto a = element(h);
  const auto b = element(g);
  double phase = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    phase += static_cast<double>(positive_mod(static_cast<long long>(a[k]) * b[k], orders_[k])) / orders_[k];
  return std::polar(1.0, kTwoPi * phase);
}

int FiniteAbelianGroup::word_length(int g) const {
  const auto a = element(g);
  int s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::min(a[k], orders_[k] - a[k]);
  return s;
}

double FiniteAbelianGroup::torus_length(int g) const {
  const auto a = element(g);
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    s += static_cast<double>(std::min(a[k], orders_[k] - a[k])) / orders_[k];
  return s;
}

std::vector<int> FiniteAbelianGroup::subgroup(const std::vector<int>& generators) const {
  std::set<int> h{0};
  std::vector<int> frontier{0};
  for (int g : generators)
    if (g < 0 || g >= size_) throw ValidationError("subgroup generator out of range");
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int x : frontier)
      for (int g : generators) {
        const int y = add(x, g);
        if (h.insert(y).second) next.push_back(y);
      }
    frontier = std::move(next);
  }
  return {h.begin(), h.end()};
}

RealVector word_lengths(const FiniteAbelianGroup& group) {
  RealVector l(group.size());
  for (int g = 0; g < group.size(); ++g) l(g) = group.word_length(g);
  return l;
}

RealVector torus_lengths(const FiniteAbelianGroup& group) {
  RealVector l(group.size());
  for (int g = 0; g < group.size(); ++g) l(g) = group.torus_length(g);
  return l;
}

// ---------------------------------------------------------------- cocycles

Cocycle::Cocycle(FiniteAbelianGroup group, std::vector<cplx> table, double tol)
    : group_(std::move(group)), table_(std::move(table)) {
  const int n = group_.size();
  if (table_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw ValidationError("cocycle table must have |G|^2 entries");
  for (const cplx& z : table_)
    if (std::abs(std::abs(z) - 1.0) > tol) throw ValidationError("cocycle values must have modulus one");
  for (int x = 0; x < n; ++x)
    if (std::abs((*this)(0, x) - 1.0) > tol || std::abs((*this)(x, 0) - 1.0) > tol)
      throw ValidationError("cocycle must be normalized: sigma(0, x) = sigma(x, 0) = 1");
  auto check = [&](int x, int y, int z) {
    const cplx lhs = (*this)(x, y) * (*this)(group_.add(x, y), z);
    const cplx rhs = (*this)(x, group_.add(y, z)) * (*this)(y, z);
    residual_ = std::max(residual_, std::abs(lhs - rhs));
  };
  if (n <= 64) {
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        for (int z = 0; z < n; ++z) check(x, y, z);
  } else {
    Rng rng = make_rng(0xc0c7c1e, static_cast<std::uint64_t>(n));
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int s = 0; s < 20000; ++s) check(pick(rng), pick(rng), pick(rng));
  }
  if (residual_ > tol) throw ValidationError("cocycle identity fails");
}

Cocycle Cocycle::trivial(const FiniteAbelianGroup& group) {
  const auto n = static_cast<std::size_t>(group.size());
  return Cocycle(group, std::vector<cplx>(n * n, cplx(1.0, 0.0)));
}

Cocycle Cocycle::clock_shift(int n, cplx rho) {
  require_root_of_unity(rho, n);
  const FiniteAbelianGroup g({n, n});
  std::vector<cplx> table(static_cast<std::size_t>(n) * n * n * n);
  const cplx rbar = std::conj(rho);
  for (int x = 0; x < g.size(); ++x)
    for (int y = 0; y < g.size(); ++y) {
      const auto a = g.element(x);
      const auto b = g.element(y);
      table[static_cast<std::size_t>(x) * g.size() + y] =
          root_power(rbar, static_cast<long long>(a[1]) * b[0], n);
    }
  return Cocycle(g, std::move(table));
}

Cocycle Cocycle::rotation(int n, double theta) {
  if (n < 2) throw ValidationError("order must be at least 2");
  if (std::abs(theta * n - std::round(theta * n)) > 1e-12)
    throw ValidationError("theta * n must be an integer");
  return clock_shift(n, std::polar(1.0, -kTwoPi * theta));
}

std::vector<int> Cocycle::symmetrizer() const {
  std::vector<int> out;
  for (int g = 0; g < group_.size(); ++g) {
    bool central = true;
    for (int h = 0; h < group_.size() && central; ++h)
      central = std::abs((*this)(g, h) - (*this)(h, g)) <= 1e-9;
    if (central) out.push_back(g);
  }
  return out;
}

std::pair<Element, Element> clock_shift(int n, cplx rho) {
  require_root_of_unity(rho, n);
  Matrix u = Matrix::Zero(n, n);
  Matrix v = Matrix::Zero(n, n);
  cplx p = 1.0;
  for (int j = 0; j < n; ++j) {
    u(positive_mod(j - 1, n), j) = 1.0;  // U e_j = e_{j-1}
    v(j, j) = p;
    p *= rho;
  }
  const Shape s({n});
  return {Element(s, {u}), Element(s, {v})};
}

// ------------------------------------------------------ twisted algebras

namespace {

std::vector<int> group_generators(const FiniteAbelianGroup& g) {
  std::vector<int> out;
  for (int k = 0; k < g.rank(); ++k) {
    if (g.orders()[static_cast<std::size_t>(k)] == 1) continue;
    std::vector<int> e(static_cast<std::size_t>(g.rank()), 0);
    e[static_cast<std::size_t>(k)] = 1;
    out.push_back(g.index(e));
  }
  return out;
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

TwistedGroupAlgebra twisted_group_algebra(const Cocycle& sigma) {
  const FiniteAbelianGroup& G = sigma.group();
  const int n = G.size();
  TwistedGroupAlgebra out{G, sigma, Shape(), {}, {}, {}, 0, 0, 0};

  out.regular.assign(static_cast<std::size_t>(n), Matrix::Zero(n, n));
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) out.regular[static_cast<std::size_t>(g)](G.add(g, h), h) = sigma(g, h);
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) {
      const Matrix lhs = out.regular[static_cast<std::size_t>(g)] * out.regular[static_cast<std::size_t>(h)];
      const Matrix rhs = sigma(g, h) * out.regular[static_cast<std::size_t>(G.add(g, h))];
      if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-10)
        throw ValidationError("regular representation violates U^g U^h = sigma(g,h) U^{g+h}");
    }

  const std::vector<int> center = sigma.symmetrizer();
  const int c = static_cast<int>(center.size());
  out.center_dim = c;
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n / c))));
  if (n % c != 0 || k * k * c != n) throw SolverError("center size is inconsistent with a block decomposition");
  out.irreducible_dim = k;

  // isotypic components are eigenspaces of a generic central element
  Rng rng = make_rng(0x7a15, static_cast<std::uint64_t>(n));
  Matrix hc = Matrix::Zero(n, n);
  for (int z : center) hc += cplx(standard_normal(rng), standard_normal(rng)) * out.regular[static_cast<std::size_t>(z)];
  Eigen::SelfAdjointEigenSolver<Matrix> ec(hermitian_part(hc));
  const RealVector& ev = ec.eigenvalues();
  const double scale = 1.0 + ev.cwiseAbs().maxCoeff();
  std::vector<std::pair<int, int>> clusters;  // [begin, end)
  int start = 0;
  for (int i = 1; i <= n; ++i)
    if (i == n || ev(i) - ev(i - 1) > 1e-8 * scale) {
      clusters.emplace_back(start, i);
      start = i;
    }
  if (static_cast<int>(clusters.size()) != c) throw SolverError("central decomposition did not separate the blocks");

  Matrix hx = Matrix::Zero(n, n);
  for (int g = 0; g < n; ++g) hx += cplx(standard_normal(rng), standard_normal(rng)) * out.regular[static_cast<std::size_t>(g)];
  hx = hermitian_part(hx);

  std::vector<Matrix> bases;
  for (const auto& [b, e] : clusters) {
    if (e - b != k * k) throw SolverError("isotypic component has unexpected dimension");
    const Matrix q = ec.eigenvectors().middleCols(b, e - b);
    Eigen::SelfAdjointEigenSolver<Matrix> ex(q.adjoint() * hx * q);
    const Vector v = q * ex.eigenvectors().col(0);
    Matrix cyc(n, n);
    for (int g = 0; g < n; ++g) cyc.col(g) = out.regular[static_cast<std::size_t>(g)] * v;
    Eigen::JacobiSVD<Matrix> svd(cyc, Eigen::ComputeThinU);
    const RealVector sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-8 * sv(0)) ++rank;
    if (rank != k) throw SolverError("cyclic subspace is not irreducible");
    bases.push_back(svd.matrixU().leftCols(k));
  }
  out.block_count = static_cast<int>(bases.size());
  out.shape = Shape(std::vector<int>(static_cast<std::size_t>(c), k));

  for (int g = 0; g < n; ++g) {
    std::vector<Matrix> blocks;
    for (const auto& b : bases) {
      Matrix p = b.adjoint() * out.regular[static_cast<std::size_t>(g)] * b;
      if ((p.adjoint() * p - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-9)
        throw SolverError("restricted representation is not unitary");
      blocks.push_back(std::move(p));
    }
    out.unitaries.emplace_back(out.shape, std::move(blocks));
  }
  {
    Matrix span(out.shape.total_dim() * k, n);
    for (int g = 0; g < n; ++g) span.col(g) = out.unitaries[static_cast<std::size_t>(g)].vec();
    Eigen::JacobiSVD<Matrix> svd(span);
    const RealVector sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-8 * sv(0)) ++rank;
    if (rank != n) throw SolverError("block realization is not faithful");
  }

  const std::vector<int> gens = group_generators(G);
  for (int h = 0; h < n; ++h) {
    std::vector<int> src;
    std::vector<Matrix> ws;
    std::vector<bool> used(static_cast<std::size_t>(c), false);
    for (int i = 0; i < c; ++i) {
      bool found = false;
      for (int j = 0; j < c && !found; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        Matrix sys(static_cast<Eigen::Index>(gens.size()) * k * k, k * k);
        const Matrix id = Matrix::Identity(k, k);
        for (std::size_t t = 0; t < gens.size(); ++t) {
          const int g = gens[t];
          const Matrix& pj = out.unitaries[static_cast<std::size_t>(g)].block(j);
          const Matrix& pi = out.unitaries[static_cast<std::size_t>(g)].block(i);
          Matrix lhs(k * k, k * k);
          // vec(W pj) - chi vec(pi W)
          for (int r = 0; r < k; ++r)
            for (int s = 0; s < k; ++s)
              for (int rr = 0; rr < k; ++rr)
                for (int ss = 0; ss < k; ++ss)
                  lhs(r + s * k, rr + ss * k) = (r == rr ? pj(ss, s) : cplx(0.0)) -
                                                G.character(h, g) * (s == ss ? pi(r, rr) : cplx(0.0));
          sys.middleRows(static_cast<Eigen::Index>(t) * k * k, k * k) = lhs;
        }
        const Matrix nsp = null_space(sys, 1e-9);
        if (nsp.cols() != 1) continue;
        Matrix w(k, k);
        for (int r = 0; r < k; ++r)
          for (int s = 0; s < k; ++s) w(r, s) = nsp(r + s * k, 0);
        const double norm2 = (w.adjoint() * w)(0, 0).real();
        w /= std::sqrt(norm2);
        if ((w.adjoint() * w - id).cwiseAbs().maxCoeff() > 1e-8) continue;
        used[static_cast<std::size_t>(j)] = true;
        src.push_back(j);
        ws.push_back(std::move(w));
        found = true;
      }
      if (!found) throw SolverError("dual action intertwiner not found");
    }
    Automorphism alpha(out.shape, std::move(src), std::move(ws));
    for (int g = 0; g < n; ++g) {
      const Element& u = out.unitaries[static_cast<std::size_t>(g)];
      if (alpha.apply(u).distance(G.character(h, g) * u) > 1e-8)
        throw SolverError("dual action does not scale U^g by chi(g)");
    }
    for (int g : gens)
      for (int gg : gens) {
        const Element& a = out.unitaries[static_cast<std::size_t>(g)];
        const Element& b = out.unitaries[static_cast<std::size_t>(gg)];
        if (alpha.apply(a * b).distance(alpha.apply(a) * alpha.apply(b)) > 1e-8)
          throw SolverError("dual action is not multiplicative");
      }
    out.dual_action.push_back(std::move(alpha));
  }
  return out;
}

// ----------------------------------------------------------- action models

Element ActionModel::act(int g, const Element& a) const {
  return action.at(static_cast<std::size_t>(g)).apply(a);
}

Element ActionModel::average(const RealVector& weights, const Element& a) const {
  if (weights.size() != group.size()) throw ValidationError("one weight per group element is required");
  Element out = Element::zero(shape);
  for (int g = 0; g < group.size(); ++g)
    if (weights(g) != 0.0) out += cplx(weights(g)) * act(g, a);
  return out;
}

Element ActionModel::subgroup_average(const std::vector<int>& subgroup, const Element& a) const {
  Element out = Element::zero(shape);
  for (int h : subgroup) out += act(h, a);
  return cplx(1.0 / static_cast<double>(subgroup.size())) * out;
}

Seminorm ActionModel::lipnorm(const RealVector& lengths, std::string name) const {
  if (lengths.size() != group.size()) throw ValidationError("one length per group element is required");
  // the modes are an eigenbasis, so the fixed points are the modes with
  // trivial character
  const auto fixed = std::count(mode_character.begin(), mode_character.end(), 0);
  if (fixed != 1)
    throw ValidationError("not a Lipschitz pair: joint kernel on self-adjoints has dimension " +
                          std::to_string(fixed));
  std::vector<Automorphism> acts(action.begin() + 1, action.end());
  std::vector<double> ls(lengths.data() + 1, lengths.data() + lengths.size());
  Seminorm L = from_automorphisms(acts, ls, std::move(name), false);
  if (!L.diameter_certificate()) {
    // the action list is the whole group: ||a - E(a)|| <= mean(l) L(a)
    L = L.with_diameter_certificate(2.0 * lengths.mean(), "group average");
  }
  return L;
}

double ActionModel::lip_value(const RealVector& lengths, const Element& a) const {
  if (lengths.size() != group.size()) throw ValidationError("one length per group element is required");
  double best = 0.0;
  for (int g = 1; g < group.size(); ++g) {
    if (lengths(g) == 0.0) continue;
    best = std::max(best, operator_norm(act(g, a) - a) / lengths(g));
  }
  return best;
}

namespace {

void assign_mode_characters(ActionModel& m) {
  const int n = m.group.size();
  if (static_cast<int>(m.action.size()) != n) throw ValidationError("one automorphism per group element is required");
  if (static_cast<int>(m.modes.size()) != m.shape.real_dim())
    throw ValidationError("modes must form a basis of the algebra");
  {
    Matrix vecs(m.shape.real_dim(), n);
    for (int p = 0; p < n; ++p) vecs.col(p) = m.modes[static_cast<std::size_t>(p)].vec();
    Eigen::SelfAdjointEigenSolver<Matrix> es(vecs.adjoint() * vecs, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 1e-9 * es.eigenvalues().maxCoeff())
      throw ValidationError("modes are linearly dependent");
  }
  {
    // alpha^{g + e} = alpha^g alpha^e on a probe, for the generators e
    Rng rng = make_rng(0x90a7, static_cast<std::uint64_t>(n));
    const Element probe = random_self_adjoint(m.shape, rng);
    for (int e : group_generators(m.group))
      for (int g = 0; g < n; ++g)
        if (m.act(m.group.add(g, e), probe).distance(m.act(g, m.act(e, probe))) > 1e-9)
          throw ValidationError("action is not a group homomorphism");
    if (m.act(0, probe).distance(probe) > 1e-12) throw ValidationError("identity must act trivially");
  }
  std::vector<cplx> chi(static_cast<std::size_t>(n) * n);
  for (int q = 0; q < n; ++q)
    for (int g = 0; g < n; ++g) chi[static_cast<std::size_t>(q) * n + g] = m.group.character(q, g);
  m.mode_character.clear();
  for (const Element& e : m.modes) {
    const Vector ev = e.vec();
    const double nn = ev.squaredNorm();
    std::vector<cplx> kappa(static_cast<std::size_t>(n));
    for (int g = 0; g < n; ++g) {
      const Vector img = m.act(g, e).vec();
      const cplx k = ev.dot(img) / nn;
      if ((img - k * ev).norm() > 1e-9 * std::sqrt(nn)) throw SolverError("mode is not an eigenvector of the action");
      kappa[static_cast<std::size_t>(g)] = k;
    }
    int found = -1;
    for (int q = 0; q < n && found < 0; ++q) {
      bool ok = true;
      for (int g = 0; g < n && ok; ++g) ok = std::abs(chi[static_cast<std::size_t>(q) * n + g] - kappa[static_cast<std::size_t>(g)]) <= 1e-9;
      if (ok) found = q;
    }
    if (found < 0) throw SolverError("mode does not transform by a character");
    m.mode_character.push_back(found);
  }
}

Matrix matrix_power(const Matrix& m, int e) {
  Matrix out = Matrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < e; ++i) out = out * m;
  return out;
}

}  // namespace

ActionModel fuzzy_torus(int n, cplx rho) {
  const auto [u, v] = clock_shift(n, rho);
  {
    cplx p = 1.0;
    for (int k = 1; k < n; ++k) {
      p *= rho;
      if (std::abs(p - 1.0) <= 1e-9)
        throw ValidationError("rho must be a primitive root of unity: the action is not ergodic");
    }
  }
  ActionModel m{FiniteAbelianGroup({n, n}), Shape({n}), {}, {}, {}};
  std::vector<Matrix> up(static_cast<std::size_t>(n)), vp(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    up[static_cast<std::size_t>(a)] = matrix_power(u.block(0), a);
    vp[static_cast<std::size_t>(a)] = matrix_power(v.block(0), a);
  }
  for (int g = 0; g < m.group.size(); ++g) {
    const auto ab = m.group.element(g);
    const Element w(m.shape, {up[static_cast<std::size_t>(ab[0])] * vp[static_cast<std::size_t>(ab[1])]});
    m.action.push_back(Automorphism::inner(w));
    m.modes.push_back(w);
  }
  assign_mode_characters(m);
  return m;
}

ActionModel commutative_torus(int n) {
  if (n < 2) throw ValidationError("order must be at least 2");
  const FiniteAbelianGroup G({n, n});
  ActionModel m{G, Shape(std::vector<int>(static_cast<std::size_t>(G.size()), 1)), {}, {}, {}};
  for (int g = 0; g < G.size(); ++g) {
    std::vector<int> src;
    std::vector<Matrix> ws;
    for (int x = 0; x < G.size(); ++x) {
      src.push_back(G.add(x, G.neg(g)));
      ws.push_back(Matrix::Identity(1, 1));
    }
    m.action.emplace_back(m.shape, std::move(src), std::move(ws));
  }
  for (int p = 0; p < G.size(); ++p) {
    std::vector<Matrix> blocks;
    for (int x = 0; x < G.size(); ++x) blocks.push_back(Matrix::Constant(1, 1, G.character(p, x)));
    m.modes.emplace_back(m.shape, std::move(blocks));
  }
  assign_mode_characters(m);
  return m;
}

ActionModel dual_action_model(const TwistedGroupAlgebra& algebra) {
  ActionModel m{algebra.group, algebra.shape, algebra.dual_action, algebra.unitaries, {}};
  assign_mode_characters(m);
  return m;
}

// ------------------------------------------------------------------ Fejer

std::vector<int> box_support(const FiniteAbelianGroup& group, int radius) {
  if (radius < 0) throw ValidationError("radius must be nonnegative");
  std::vector<int> out;
  for (int g = 0; g < group.size(); ++g) {
    const auto c = group.centered(g);
    bool in = true;
    for (std::size_t k = 0; k < c.size() && in; ++k) {
      in = std::abs(c[k]) <= radius;
    }
    if (in) out.push_back(g);
  }
  return out;
}

FejerData fejer_data(const FiniteAbelianGroup& group, const std::vector<int>& support) {
  std::set<int> s(support.begin(), support.end());
  if (s.size() != support.size()) throw ValidationError("Fourier support has repeated elements");
  if (!s.count(0)) throw ValidationError("Fourier support must contain 0");
  for (int p : support) {
    if (p < 0 || p >= group.size()) throw ValidationError("Fourier support element out of range");
    if (!s.count(group.neg(p))) throw ValidationError("Fourier support must be symmetric");
  }
  const int n = group.size();
  const double ns = static_cast<double>(support.size());
  FejerData d{group, std::vector<int>(s.begin(), s.end()), RealVector(n), RealVector::Zero(n), {}, 0.0, 0.0};
  for (int g = 0; g < n; ++g) {
    cplx dir = 0.0;
    for (int p : d.support) dir += group.character(p, g);
    // vanishing character sums are exact zeros; drop the rounding residue
    d.weights(g) = std::abs(dir) <= 1e-12 * ns ? 0.0 : std::norm(dir) / (n * ns);
  }
  d.weight_sum_error = std::abs(d.weights.sum() - 1.0);
  if (d.weight_sum_error > 1e-12) throw SolverError("Fejer weights do not sum to one");
  std::map<int, int> counts;
  for (int a : d.support)
    for (int b : d.support) ++counts[group.add(b, group.neg(a))];
  for (const auto& [p, cnt] : counts) {
    d.multipliers(p) = cnt / ns;
    d.range.push_back(p);
  }
  for (int p = 0; p < n; ++p) {
    cplx t = 0.0;
    for (int g = 0; g < n; ++g) t += d.weights(g) * group.character(p, g);
    d.multiplier_error = std::max(d.multiplier_error, std::abs(t - d.multipliers(p)));
  }
  return d;
}

double FejerData::defect(const RealVector& lengths) const {
  if (lengths.size() != group.size()) throw ValidationError("one length per group element is required");
  return weights.dot(lengths);
}

FejerRangeReport verify_fejer_range(const ActionModel& model, const FejerData& data) {
  if (!(model.group == data.group)) throw ValidationError("Fejer data and model use different groups");
  FejerRangeReport r;
  const std::set<int> range(data.range.begin(), data.range.end());
  for (std::size_t p = 0; p < model.modes.size(); ++p) {
    const Element& e = model.modes[p];
    const Element img = model.average(data.weights, e);
    const double nn = e.vec().squaredNorm();
    const cplx m = e.vec().dot(img.vec()) / nn;
    r.eigen_residual = std::max(r.eigen_residual, (img.vec() - m * e.vec()).norm() / std::sqrt(nn));
    const int q = model.mode_character[p];
    r.multiplier_error = std::max(r.multiplier_error, std::abs(m - data.multipliers(q)));
    if (!range.count(q)) r.outside_support = std::max(r.outside_support, std::abs(m));
  }
  r.pass = r.eigen_residual <= 1e-10 && r.multiplier_error <= 1e-10 && r.outside_support <= 1e-10;
  return r;
}

FejerContractReport check_fejer_contract(const ActionModel& model, const FejerData& data,
                                         const RealVector& lengths, int samples, std::uint64_t seed,
                                         int threads) {
  if (samples < 1) throw ValidationError("samples must be positive");
  const double defect = data.defect(lengths);
  std::vector<double> margins(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const Element a = random_self_adjoint(model.shape, rng);
    const double lhs = operator_norm(a - model.average(data.weights, a));
    margins[i] = lhs - defect * model.lip_value(lengths, a);
  });
  FejerContractReport r;
  r.samples = samples;
  r.worst_margin = *std::max_element(margins.begin(), margins.end());
  r.pass = r.worst_margin <= 1e-8;
  return r;
}

// --------------------------------------------------------- weight operator

double weight_value(int N, int M, const std::vector<int>& n) {
  if (N < 1 || M < 1) throw ValidationError("N and M must be at least 1");
  int s = 0;
  for (int v : n) s += std::abs(v);
  if (s <= N) return 1.0;
  if (s <= N + M) return static_cast<double>(M + N - s) / M;
  return 0.0;
}

std::vector<std::vector<int>> lattice_ball(int d, int radius) {
  if (d < 1) throw ValidationError("dimension must be at least 1");
  if (radius < 0) throw ValidationError("radius must be nonnegative");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(d), 0);
  auto rec = [&](auto&& self, int k, int left) -> void {
    if (k == d) {
      out.push_back(cur);
      return;
    }
    for (int v = -left; v <= left; ++v) {
      cur[static_cast<std::size_t>(k)] = v;
      self(self, k + 1, left - std::abs(v));
    }
  };
  rec(rec, 0, radius);
  return out;
}

Element weight_operator(int N, int M, int d) {
  const auto pts = lattice_ball(d, N + M);
  RealVector w(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) w(static_cast<Eigen::Index>(i)) = weight_value(N, M, pts[i]);
  return Element::diagonal(Shape({static_cast<int>(pts.size())}), w);
}

int wedge(const std::vector<int>& k) {
  int best = INT_MAX / 4;
  for (int kj : k)
    if (kj != 0) best = std::min(best, kj / 2 + 1);  // ceil((k-1)/2) + 1
  return best;
}

CommutatorCheck commutator_bound_check(int N, int M, int d, const std::vector<int>& m,
                                       const std::vector<int>& k, double theta) {
  if (N < 1 || M < 1) throw ValidationError("N and M must be at least 1");
  if (d < 1) throw ValidationError("dimension must be at least 1");
  if (static_cast<int>(m.size()) != d || static_cast<int>(k.size()) != d)
    throw ValidationError("m and k must have d entries");
  for (int kj : k)
    if (kj != 0 && kj < 2) throw ValidationError("finite orders must be at least 2");
  if (N + M >= wedge(k)) throw ValidationError("window precondition N + M < wedge(k) fails");
  for (int j = 0; j < d; ++j) {
    const int kj = k[static_cast<std::size_t>(j)];
    if (kj == 0) continue;
    const int lo = (1 - kj) >= 0 ? (1 - kj) / 2 : -((kj) / 2);  // floor((1-k)/2)
    const int hi = (kj - 1) / 2;
    if (m[static_cast<std::size_t>(j)] < lo || m[static_cast<std::size_t>(j)] > hi)
      throw ValidationError("m must lie in the fundamental window I_k");
  }
  if (d >= 2)
    for (int j = 0; j < 2; ++j) {
      const int kj = k[static_cast<std::size_t>(j)];
      if (kj != 0 && std::abs(theta * kj - std::round(theta * kj)) > 1e-12)
        throw ValidationError("theta * k_j must be an integer for finite orders");
    }

  int mnorm = 0;
  for (int v : m) mnorm += std::abs(v);
  const int radius = N + M + mnorm;
  auto in_cell = [&](const std::vector<int>& h) {
    for (int j = 0; j < d; ++j) {
      const int kj = k[static_cast<std::size_t>(j)];
      if (kj == 0) continue;
      const int lo = -(kj / 2);
      const int hi = (kj - 1) / 2;
      if (h[static_cast<std::size_t>(j)] < lo || h[static_cast<std::size_t>(j)] > hi) return false;
    }
    return true;
  };
  auto shift = [&](const std::vector<int>& h) {
    std::vector<int> t(h.size());
    for (int j = 0; j < d; ++j) {
      const int kj = k[static_cast<std::size_t>(j)];
      int v = h[static_cast<std::size_t>(j)] + m[static_cast<std::size_t>(j)];
      if (kj != 0) {
        const int lo = -(kj / 2);
        v = positive_mod(v - lo, kj) + lo;
      }
      t[static_cast<std::size_t>(j)] = v;
    }
    return t;
  };
  std::vector<std::vector<int>> window;
  for (auto& h : lattice_ball(d, radius))
    if (in_cell(h)) window.push_back(std::move(h));
  std::map<std::vector<int>, int> where;
  for (std::size_t i = 0; i < window.size(); ++i) where[window[i]] = static_cast<int>(i);

  // the commutator is monomial: column h carries (w(h+m) - w(h)) sigma(m,h)
  // in row h+m, so its norm is the largest entry modulus
  std::vector<int> row_used(window.size(), 0);
  double norm = 0.0;
  for (const auto& h : window) {
    const auto t = shift(h);
    const double c = weight_value(N, M, t) - weight_value(N, M, h);
    if (c == 0.0) continue;
    const auto it = where.find(t);
    if (it == where.end()) throw SolverError("commutator leaves the window");
    if (row_used[static_cast<std::size_t>(it->second)]++) throw SolverError("commutator is not monomial");
    const cplx phase = d >= 2 ? std::polar(1.0, kTwoPi * theta * m[1] * h[0]) : cplx(1.0);
    norm = std::max(norm, std::abs(phase * c));
  }
  CommutatorCheck r;
  r.computed = norm;
  r.bound = static_cast<double>(mnorm) / M;
  r.pass = r.computed <= r.bound + 1e-10;
  r.window = static_cast<int>(window.size());
  return r;
}

// ---------------------------------------------------------------- collapse

std::vector<CollapseRow> collapse_experiment(const CollapseConfig& cfg) {
  if (cfg.n < 2) throw ValidationError("collapse needs n >= 2");
  if (cfg.samples < 1) throw ValidationError("samples must be positive");
  for (int j : cfg.js)
    if (j < 1) throw ValidationError("sequence indices must be positive");
  const ActionModel model = fuzzy_torus(cfg.n, std::polar(1.0, kTwoPi / cfg.n));
  const FiniteAbelianGroup& G = model.group;
  const std::vector<int> H = G.subgroup(cfg.h_generators);
  const std::set<int> hset(H.begin(), H.end());
  const int n = G.size();

  RealVector limit(n);  // quotient word length of g + H
  for (int g = 0; g < n; ++g) {
    int best = INT_MAX;
    for (int h : H) best = std::min(best, G.word_length(G.add(g, h)));
    limit(g) = best;
  }
  for (int g = 0; g < n; ++g)
    if ((limit(g) == 0.0) != static_cast<bool>(hset.count(g)))
      throw ValidationError("limit length must vanish exactly on H");

  const double diam_k = 2.0 * limit.mean();
  const std::size_t rows = cfg.js.size();
  std::vector<CollapseRow> out(rows);
  std::vector<RealVector> lj(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const int j = cfg.js[r];
    CollapseRow& row = out[r];
    row.j = j;
    lj[r] = RealVector(n);
    for (int g = 0; g < n; ++g) lj[r](g) = limit(g) + static_cast<double>(G.word_length(g)) / j;
    for (int g = 1; g < n; ++g) {
      if (hset.count(g)) {
        row.diam_h = std::max(row.diam_h, lj[r](g));
      } else {
        const double q = limit(g) / lj[r](g);
        row.epsilon = std::max({row.epsilon, std::abs(q - 1.0), std::abs(1.0 / q - 1.0)});
      }
    }
    row.delta = std::max(row.epsilon, row.diam_h);
    row.diam_a = 2.0 * lj[r].mean();
    row.diam_k = diam_k;
    row.bound = perturbation_bound(row.delta, row.diam_a, row.diam_k, 0.0);
  }

  struct Margins {
    double e = 0.0, l = 0.0, f = 0.0, idem = 0.0;
  };
  std::vector<Margins> m(rows * static_cast<std::size_t>(cfg.samples));
  parallel_for(m.size(), cfg.threads, [&](std::size_t cell) {
    const std::size_t r = cell / static_cast<std::size_t>(cfg.samples);
    const std::size_t s = cell % static_cast<std::size_t>(cfg.samples);
    const CollapseRow& row = out[r];
    Rng rng = make_rng(mix_seed(cfg.seed, r), s);
    const Element a = random_self_adjoint(model.shape, rng);
    const double la = model.lip_value(lj[r], a);
    const Element ea = model.subgroup_average(H, a);
    Margins& mm = m[cell];
    mm.e = operator_norm(a - ea) - row.diam_h * la;
    const double linf = model.lip_value(limit, ea);
    mm.l = linf - (1.0 + row.epsilon) * la;
    mm.f = std::abs(linf - model.lip_value(lj[r], ea)) - row.epsilon * linf;
    mm.idem = model.subgroup_average(H, ea).distance(ea);
  });
  const Element one = Element::identity(model.shape);
  const double unital = model.subgroup_average(H, one).distance(one);
  for (std::size_t r = 0; r < rows; ++r) {
    CollapseRow& row = out[r];
    row.expectation_margin = row.lip_margin = row.fixed_margin = -INFINITY;
    for (int s = 0; s < cfg.samples; ++s) {
      const Margins& mm = m[r * static_cast<std::size_t>(cfg.samples) + static_cast<std::size_t>(s)];
      row.expectation_margin = std::max(row.expectation_margin, mm.e);
      row.lip_margin = std::max(row.lip_margin, mm.l);
      row.fixed_margin = std::max(row.fixed_margin, mm.f);
      row.idempotence = std::max(row.idempotence, mm.idem);
    }
    row.idempotence = std::max(row.idempotence, unital);
    row.pass = row.expectation_margin <= 1e-8 && row.lip_margin <= 1e-8 && row.fixed_margin <= 1e-8 &&
               row.idempotence <= 1e-12;
  }
  return out;
}

// --------------------------------------------------------------------- UHF

Seminorm UhfFiltration::lipnorm(std::string name) const { return from_filtration(stages, beta, std::move(name)); }

UhfFiltration uhf_filtration(int k) {
  if (k < 1 || k > 8) throw ValidationError("UHF filtration depth must be between 1 and 8");
  UhfFiltration f;
  const int dim = 1 << k;
  f.shape = Shape({dim});
  for (int n = 0; n <= k; ++n) {
    f.stages.push_back(std::make_shared<PartialTraceExpectation>(1 << n, 1 << (k - n)));
    if (n < k) f.beta.push_back(std::ldexp(1.0, -n));
  }
  return f;
}

// ----------------------------------------------------------------- Berezin

SphereGrid gauss_sphere_grid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw ValidationError("grid sizes must be positive");
  // Golub-Welsch for Gauss-Legendre nodes on [-1, 1]
  RealMatrix jac = RealMatrix::Zero(n_theta, n_theta);
  for (int i = 1; i < n_theta; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(jac);
  SphereGrid grid;
  for (int i = 0; i < n_theta; ++i) {
    const double z = es.eigenvalues()(i);
    const double w = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int l = 0; l < n_phi; ++l) {
      const double phi = kTwoPi * l / n_phi;
      grid.points.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
      grid.weights.push_back(w / (2.0 * n_phi));
    }
  }
  grid.exact_degree = std::min(2 * n_theta - 1, n_phi - 1);
  return grid;
}

SpinMatrices spin_matrices(int two_j) {
  if (two_j < 1) throw ValidationError("spin must be at least 1/2");
  const int n = two_j + 1;
  const double j = two_j / 2.0;
  Matrix jp = Matrix::Zero(n, n);
  Matrix jz = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double mi = j - i;
    jz(i, i) = mi;
    if (i > 0) jp(i - 1, i) = std::sqrt(j * (j + 1.0) - mi * (mi + 1.0));
  }
  const Matrix jm = jp.adjoint();
  return {0.5 * (jp + jm), cplx(0.0, -0.5) * (jp - jm), jz};
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw ValidationError("rotation axis must be nonzero");
  return Eigen::AngleAxisd(angle, axis / n).toRotationMatrix();
}

Berezin::Berezin(int two_j, SphereGrid grid) : two_j_(two_j), grid_(std::move(grid)), spin_(spin_matrices(two_j)) {
  if (grid_.points.size() != grid_.weights.size() || grid_.points.empty())
    throw ValidationError("quadrature needs one weight per point");
  double total = 0.0;
  for (double w : grid_.weights) {
    if (!(w >= 0.0)) throw ValidationError("quadrature weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("quadrature weights must sum to one");
  for (const auto& p : grid_.points)
    if (std::abs(p.norm() - 1.0) > 1e-10) throw ValidationError("quadrature points must lie on the unit sphere");
  for (const auto& p : grid_.points) projectors_.push_back(coherent_projector(p));
}

Matrix Berezin::rotation(const Eigen::Vector3d& axis, double angle) const {
  const double n = axis.norm();
  if (!(n > 0.0)) throw ValidationError("rotation axis must be nonzero");
  const Eigen::Vector3d u = axis / n;
  const Matrix gen = u.x() * spin_.jx + u.y() * spin_.jy + u.z() * spin_.jz;
  return unitary_exp(gen, -angle);
}

Matrix Berezin::coherent_projector(const Eigen::Vector3d& x) const {
  const double r = x.norm();
  if (!(r > 0.0)) throw ValidationError("point must be nonzero");
  const double theta = std::acos(std::clamp(x.z() / r, -1.0, 1.0));
  const double phi = std::atan2(x.y(), x.x());
  const Matrix rot = unitary_exp(spin_.jz, -phi) * unitary_exp(spin_.jy, -theta);
  const Vector v = rot.col(0);
  return v * v.adjoint();
}

cplx Berezin::symbol(const Element& t, const Eigen::Vector3d& x) const {
  require_same_shape(t.shape(), Shape({dim()}), "Berezin symbol");
  return (t.block(0) * coherent_projector(x)).trace();
}

std::vector<cplx> Berezin::symbol_on_grid(const Element& t) const {
  require_same_shape(t.shape(), Shape({dim()}), "Berezin symbol");
  std::vector<cplx> out;
  out.reserve(projectors_.size());
  for (const auto& p : projectors_) out.push_back((t.block(0) * p).trace());
  return out;
}

Element Berezin::quantize(const std::vector<double>& f) const {
  if (f.size() != projectors_.size()) throw ValidationError("one function value per grid point is required");
  Matrix out = Matrix::Zero(dim(), dim());
  for (std::size_t i = 0; i < f.size(); ++i) out += (dim() * grid_.weights[i] * f[i]) * projectors_[i];
  return Element(Shape({dim()}), {out});
}

BerezinReport check_berezin(const Berezin& b, int samples, std::uint64_t seed, double tolerance) {
  BerezinReport r;
  r.two_j = b.two_j();
  const int n = b.dim();
  const Shape s({n});
  const Element one = Element::identity(s);
  for (const cplx& v : b.symbol_on_grid(one)) r.unit_symbol_error = std::max(r.unit_symbol_error, std::abs(v - 1.0));
  const std::vector<double> ones(b.grid().points.size(), 1.0);
  r.unit_quantization_error = operator_norm(b.quantize(ones) - one);
  r.min_positive_symbol = INFINITY;
  r.min_quantized_eigen = INFINITY;
  for (int t = 0; t < samples; ++t) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
    Matrix x(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) x(i, j) = cplx(standard_normal(rng), standard_normal(rng));
    const Element pos(s, {x * x.adjoint()});
    for (const cplx& v : b.symbol_on_grid(pos)) r.min_positive_symbol = std::min(r.min_positive_symbol, v.real());
    std::vector<double> f(b.grid().points.size());
    for (auto& v : f) v = uniform01(rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b.quantize(f).block(0));
    r.min_quantized_eigen = std::min(r.min_quantized_eigen, es.eigenvalues().minCoeff());

    const Element h = random_self_adjoint(s, rng);
    const Eigen::Vector3d axis(standard_normal(rng), standard_normal(rng), standard_normal(rng));
    const double angle = kTwoPi * uniform01(rng);
    const Matrix d = b.rotation(axis, angle);
    const Element rotated(s, {d * h.block(0) * d.adjoint()});
    const Eigen::Matrix3d rinv = rotation_matrix(axis, angle).transpose();
    const auto lhs = b.symbol_on_grid(rotated);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      const cplx rhs = b.symbol(h, rinv * b.grid().points[i]);
      r.equivariance_error = std::max(r.equivariance_error, std::abs(lhs[i] - rhs));
    }
  }
  r.pass = r.unit_symbol_error <= 1e-12 && r.unit_quantization_error <= tolerance &&
           r.min_positive_symbol >= -1e-10 && r.min_quantized_eigen >= -1e-10 &&
           r.equivariance_error <= tolerance;
  return r;
}

}  // namespace qmetric
