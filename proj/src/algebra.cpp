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

#include "qmetric/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "qmetric/errors.hpp"

namespace qmetric {

// ---------------------------------------------------------------- Shape

Shape::Shape(std::vector<int> block_dims) : dims_(std::move(block_dims)) {
  if (dims_.empty()) throw ValidationError("shape needs at least one block");
  for (int n : dims_)
    if (n < 1) throw ValidationError("block dimensions must be positive");
}

int Shape::real_dim() const {
  int s = 0;
  for (int n : dims_) s += n * n;
  return s;
}

int Shape::total_dim() const { return std::accumulate(dims_.begin(), dims_.end(), 0); }

bool Shape::commutative() const {
  return std::all_of(dims_.begin(), dims_.end(), [](int n) { return n == 1; });
}

Shape Shape::direct_sum(const Shape& other) const {
  std::vector<int> d = dims_;
  d.insert(d.end(), other.dims_.begin(), other.dims_.end());
  return Shape(std::move(d));
}

void require_same_shape(const Shape& a, const Shape& b, const char* context) {
  if (!(a == b)) throw ValidationError(std::string("shape mismatch in ") + context);
}

// ---------------------------------------------------------------- Element

Element::Element(Shape shape, std::vector<Matrix> blocks)
    : shape_(std::move(shape)), blocks_(std::move(blocks)) {
  if (static_cast<int>(blocks_.size()) != shape_.num_blocks())
    throw ValidationError("element block count does not match shape");
  for (int i = 0; i < shape_.num_blocks(); ++i) {
    const int n = shape_.block_dim(i);
    if (blocks_[i].rows() != n || blocks_[i].cols() != n)
      throw ValidationError("element block size does not match shape");
  }
}

Element Element::zero(const Shape& shape) {
  std::vector<Matrix> b;
  for (int n : shape.block_dims()) b.push_back(Matrix::Zero(n, n));
  return Element(shape, std::move(b));
}

Element Element::identity(const Shape& shape) {
  std::vector<Matrix> b;
  for (int n : shape.block_dims()) b.push_back(Matrix::Identity(n, n));
  return Element(shape, std::move(b));
}

Element Element::diagonal(const Shape& shape, const RealVector& values) {
  if (values.size() != shape.total_dim())
    throw ValidationError("diagonal length does not match shape");
  Element e = zero(shape);
  int off = 0;
  for (int i = 0; i < shape.num_blocks(); ++i) {
    for (int j = 0; j < shape.block_dim(i); ++j) e.block(i)(j, j) = values(off + j);
    off += shape.block_dim(i);
  }
  return e;
}

Element Element::on_block(const Shape& shape, int block, const Matrix& m) {
  Element e = zero(shape);
  if (block < 0 || block >= shape.num_blocks()) throw ValidationError("block index out of range");
  if (m.rows() != shape.block_dim(block) || m.cols() != shape.block_dim(block))
    throw ValidationError("block matrix size does not match shape");
  e.block(block) = m;
  return e;
}

Element Element::from_dense(const Shape& shape, const Matrix& dense, double tol) {
  const int n = shape.total_dim();
  if (dense.rows() != n || dense.cols() != n) throw ValidationError("dense matrix size mismatch");
  Element e = zero(shape);
  Matrix rest = dense;
  int off = 0;
  for (int i = 0; i < shape.num_blocks(); ++i) {
    const int d = shape.block_dim(i);
    e.block(i) = dense.block(off, off, d, d);
    rest.block(off, off, d, d).setZero();
    off += d;
  }
  if (rest.size() && rest.cwiseAbs().maxCoeff() > tol)
    throw ValidationError("dense matrix is not block diagonal for the shape");
  return e;
}

Element Element::adjoint() const {
  Element e = *this;
  for (auto& b : e.blocks_) b.adjointInPlace();
  return e;
}

bool Element::is_self_adjoint(double tol) const {
  for (const auto& b : blocks_)
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

Element Element::real_part() const {
  Element e = *this;
  for (auto& b : e.blocks_) b = (b + b.adjoint()).eval() * 0.5;
  return e;
}

Element Element::imag_part() const {
  Element e = *this;
  for (auto& b : e.blocks_) b = (b - b.adjoint()).eval() * cplx(0.0, -0.5);
  return e;
}

cplx Element::trace() const {
  cplx t = 0.0;
  for (const auto& b : blocks_) t += b.trace();
  return t;
}

double Element::distance(const Element& other) const {
  require_same_shape(shape_, other.shape_, "distance");
  double d = 0.0;
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    d = std::max(d, (blocks_[i] - other.blocks_[i]).cwiseAbs().maxCoeff());
  return d;
}

Matrix Element::dense() const {
  const int n = shape_.total_dim();
  Matrix m = Matrix::Zero(n, n);
  int off = 0;
  for (const auto& b : blocks_) {
    m.block(off, off, b.rows(), b.cols()) = b;
    off += static_cast<int>(b.rows());
  }
  return m;
}

Vector Element::vec() const {
  Vector v(shape_.real_dim());
  Eigen::Index off = 0;
  for (const auto& b : blocks_) {
    v.segment(off, b.size()) = Eigen::Map<const Vector>(b.data(), b.size());
    off += b.size();
  }
  return v;
}

Element Element::unvec(const Shape& shape, const Vector& v) {
  if (v.size() != shape.real_dim()) throw ValidationError("vector length does not match shape");
  std::vector<Matrix> blocks;
  Eigen::Index off = 0;
  for (int n : shape.block_dims()) {
    blocks.push_back(Eigen::Map<const Matrix>(v.data() + off, n, n));
    off += n * n;
  }
  return Element(shape, std::move(blocks));
}

Element& Element::operator+=(const Element& o) {
  require_same_shape(shape_, o.shape_, "addition");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += o.blocks_[i];
  return *this;
}

Element& Element::operator-=(const Element& o) {
  require_same_shape(shape_, o.shape_, "subtraction");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= o.blocks_[i];
  return *this;
}

Element& Element::operator*=(cplx s) {
  for (auto& b : blocks_) b *= s;
  return *this;
}

Element operator+(Element a, const Element& b) { return a += b; }
Element operator-(Element a, const Element& b) { return a -= b; }
Element operator-(const Element& a) { return cplx(-1.0) * a; }
Element operator*(cplx s, Element a) { return a *= s; }

Element operator*(const Element& a, const Element& b) {
  require_same_shape(a.shape(), b.shape(), "product");
  std::vector<Matrix> out;
  out.reserve(a.blocks().size());
  for (std::size_t i = 0; i < a.blocks().size(); ++i) out.push_back(a.blocks()[i] * b.blocks()[i]);
  return Element(a.shape(), std::move(out));
}

double operator_norm(const Element& a) {
  double n = 0.0;
  for (const auto& b : a.blocks()) n = std::max(n, spectral_norm(b));
  return n;
}

JordanLie jordan_lie(const Element& a, const Element& b) {
  require_same_shape(a.shape(), b.shape(), "jordan_lie");
  const Element ab = a * b;
  const Element ba = b * a;
  JordanLie out{cplx(0.5) * (ab + ba), cplx(0.0, -0.5) * (ab - ba)};
  if (a.is_self_adjoint() && b.is_self_adjoint()) {
    const double scale = std::max(1.0, operator_norm(a) * operator_norm(b));
    if (!out.jordan.is_self_adjoint(1e-12 * scale) || !out.lie.is_self_adjoint(1e-12 * scale))
      throw SolverError("jordan_lie lost self-adjointness");
  }
  return out;
}

Element direct_sum(const Element& a, const Element& b) {
  std::vector<Matrix> blocks = a.blocks();
  blocks.insert(blocks.end(), b.blocks().begin(), b.blocks().end());
  return Element(a.shape().direct_sum(b.shape()), std::move(blocks));
}

// ---------------------------------------------------------------- State

State::State(Shape shape, std::vector<Matrix> densities)
    : shape_(std::move(shape)), densities_(std::move(densities)) {
  if (static_cast<int>(densities_.size()) != shape_.num_blocks())
    throw ValidationError("state block count does not match shape");
  double total = 0.0;
  for (int i = 0; i < shape_.num_blocks(); ++i) {
    Matrix& d = densities_[static_cast<std::size_t>(i)];
    const int n = shape_.block_dim(i);
    if (d.rows() != n || d.cols() != n) throw ValidationError("density size does not match shape");
    const double asym = (d - d.adjoint()).cwiseAbs().maxCoeff();
    if (asym > kStateTol) {
      std::ostringstream msg;
      msg << "density block " << i << " is not Hermitian (deviation " << asym << ")";
      throw ValidationError(msg.str());
    }
    d = (d + d.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    if (lo < -kStateTol) {
      std::ostringstream msg;
      msg << "density block " << i << " has negative eigenvalue " << lo;
      throw ValidationError(msg.str());
    }
    total += d.trace().real();
  }
  if (std::abs(total - 1.0) > kStateTol) {
    std::ostringstream msg;
    msg << "state trace is " << total << ", expected 1";
    throw ValidationError(msg.str());
  }
}

State State::normalized_trace(const Shape& shape) {
  const double n = shape.total_dim();
  std::vector<Matrix> d;
  for (int k : shape.block_dims()) d.push_back(Matrix::Identity(k, k) / n);
  return State(shape, std::move(d));
}

State State::vector_state(const Shape& shape, int block, const Vector& v) {
  if (block < 0 || block >= shape.num_blocks()) throw ValidationError("block index out of range");
  if (v.size() != shape.block_dim(block)) throw ValidationError("vector length does not match block");
  const double nv = v.norm();
  if (nv == 0.0) throw ValidationError("zero vector has no vector state");
  std::vector<Matrix> d;
  for (int k : shape.block_dims()) d.push_back(Matrix::Zero(k, k));
  const Vector u = v / nv;
  d[static_cast<std::size_t>(block)] = u * u.adjoint();
  return State(shape, std::move(d));
}

State State::dirac(const Shape& shape, int k) {
  if (k < 0 || k >= shape.num_blocks() || shape.block_dim(k) != 1)
    throw ValidationError("dirac state needs a one-dimensional block");
  return vector_state(shape, k, Vector::Ones(1));
}

State State::from_distribution(const Shape& shape, const RealVector& p) {
  if (!shape.commutative()) throw ValidationError("distributions need a commutative shape");
  if (p.size() != shape.num_blocks()) throw ValidationError("distribution length mismatch");
  std::vector<Matrix> d;
  for (Eigen::Index i = 0; i < p.size(); ++i) d.push_back(Matrix::Constant(1, 1, p(i)));
  return State(shape, std::move(d));
}

double State::min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& d : densities_) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues()(0));
  }
  return lo;
}

bool State::faithful(double tol) const { return min_eigenvalue() > tol; }

State State::mix(const State& other, double t) const {
  require_same_shape(shape_, other.shape_, "state mix");
  std::vector<Matrix> d;
  for (std::size_t i = 0; i < densities_.size(); ++i)
    d.push_back(t * densities_[i] + (1.0 - t) * other.densities_[i]);
  return State(shape_, std::move(d));
}

cplx evaluate(const State& phi, const Element& a) {
  require_same_shape(phi.shape(), a.shape(), "evaluate");
  cplx s = 0.0;
  for (int i = 0; i < a.shape().num_blocks(); ++i)
    s += (phi.density(i).transpose().cwiseProduct(a.block(i))).sum();
  return s;
}

double evaluate_real(const State& phi, const Element& a) { return evaluate(phi, a).real(); }

// ---------------------------------------------------------------- basis

HermitianBasis::HermitianBasis(const Shape& shape) : shape_(shape) {
  const int k = shape.num_blocks();
  const double total = shape.total_dim();
  basis_.push_back(cplx(1.0 / std::sqrt(total)) * Element::identity(shape));

  // Block-identity complements: coefficient vectors over blocks with the
  // weighted inner product sum_i c_i c'_i n_i.
  std::vector<RealVector> coeffs{RealVector::Constant(k, 1.0 / std::sqrt(total))};
  auto inner = [&](const RealVector& a, const RealVector& b) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += a(i) * b(i) * shape.block_dim(i);
    return s;
  };
  for (int i = 0; i + 1 < k; ++i) {
    RealVector c = RealVector::Unit(k, i);
    for (const auto& q : coeffs) c -= inner(c, q) * q;
    c /= std::sqrt(inner(c, c));
    coeffs.push_back(c);
    std::vector<Matrix> blocks;
    for (int b = 0; b < k; ++b) {
      const int n = shape.block_dim(b);
      blocks.push_back(Matrix::Identity(n, n) * c(b));
    }
    basis_.emplace_back(shape, std::move(blocks));
  }

  const double r2 = 1.0 / std::sqrt(2.0);
  for (int b = 0; b < k; ++b) {
    const int n = shape.block_dim(b);
    for (int j = 0; j < n; ++j) {
      for (int l = j + 1; l < n; ++l) {
        Matrix s = Matrix::Zero(n, n);
        s(j, l) = r2;
        s(l, j) = r2;
        basis_.push_back(Element::on_block(shape, b, s));
        Matrix a = Matrix::Zero(n, n);
        a(j, l) = cplx(0.0, -r2);
        a(l, j) = cplx(0.0, r2);
        basis_.push_back(Element::on_block(shape, b, a));
      }
    }
    for (int d = 1; d < n; ++d) {
      Matrix m = Matrix::Zero(n, n);
      const double scale = 1.0 / std::sqrt(static_cast<double>(d) * (d + 1));
      for (int j = 0; j < d; ++j) m(j, j) = scale;
      m(d, d) = -d * scale;
      basis_.push_back(Element::on_block(shape, b, m));
    }
  }
}

RealVector HermitianBasis::coordinates(const Element& a) const {
  require_same_shape(shape_, a.shape(), "coordinates");
  RealVector x(dim());
  for (int i = 0; i < dim(); ++i) {
    double s = 0.0;
    const Element& bi = basis_[static_cast<std::size_t>(i)];
    for (int b = 0; b < shape_.num_blocks(); ++b)
      s += bi.block(b).transpose().cwiseProduct(a.block(b)).sum().real();
    x(i) = s;
  }
  return x;
}

Element HermitianBasis::element(const RealVector& x) const { return element(x, 0); }

Element HermitianBasis::element(const RealVector& x, int first) const {
  if (first < 0 || first + x.size() > dim()) throw ValidationError("coordinate range exceeds basis");
  Element e = Element::zero(shape_);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) != 0.0) e += cplx(x(i)) * basis_[static_cast<std::size_t>(first + i)];
  return e;
}

std::shared_ptr<const HermitianBasis> basis_for(const Shape& shape) {
  static std::mutex mu;
  static std::map<std::vector<int>, std::shared_ptr<const HermitianBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(shape.block_dims());
  if (it != cache.end()) return it->second;
  auto b = std::make_shared<const HermitianBasis>(shape);
  cache.emplace(shape.block_dims(), b);
  return b;
}

// ---------------------------------------------------------------- random

namespace {

Matrix ginibre(int rows, int cols, Rng& rng) {
  Matrix g(rows, cols);
  const double s = 1.0 / std::sqrt(2.0);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      g(r, c) = cplx(re * s, im * s);
    }
  return g;
}

Vector haar_vector(int n, Rng& rng) {
  Vector v = ginibre(n, 1, rng).col(0);
  double nv = v.norm();
  while (nv < 1e-300) {
    v = ginibre(n, 1, rng).col(0);
    nv = v.norm();
  }
  return v / nv;
}

}  // namespace

Element random_self_adjoint(const Shape& shape, Rng& rng) {
  std::vector<Matrix> blocks;
  for (int n : shape.block_dims()) {
    const Matrix g = ginibre(n, n, rng);
    blocks.push_back((g + g.adjoint()) * 0.5);
  }
  return Element(shape, std::move(blocks));
}

Element random_unitary(const Shape& shape, Rng& rng) {
  std::vector<Matrix> blocks;
  for (int n : shape.block_dims()) {
    Eigen::HouseholderQR<Matrix> qr(ginibre(n, n, rng));
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
      const cplx d = r(j, j);
      const double ad = std::abs(d);
      if (ad > 0) q.col(j) *= d / ad;
    }
    blocks.push_back(q);
  }
  return Element(shape, std::move(blocks));
}

// ---------------------------------------------------------------- expectations

namespace {

double span_residual(const Matrix& q, const Vector& v) {
  return (v - q * (q.adjoint() * v)).norm();
}

}  // namespace

SpanExpectation::SpanExpectation(const std::vector<Element>& sub_basis, double tol) {
  if (sub_basis.empty()) throw ValidationError("subalgebra basis is empty");
  shape_ = sub_basis.front().shape();
  const Eigen::Index count = static_cast<Eigen::Index>(sub_basis.size());
  Matrix s(shape_.real_dim(), count);
  for (Eigen::Index i = 0; i < count; ++i) {
    require_same_shape(shape_, sub_basis[static_cast<std::size_t>(i)].shape(), "subalgebra basis");
    s.col(i) = sub_basis[static_cast<std::size_t>(i)].vec();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(s);
  qr.setThreshold(tol);
  if (qr.rank() < count) throw ValidationError("subalgebra basis is rank deficient");
  Eigen::HouseholderQR<Matrix> thin(s);
  q_ = thin.householderQ() * Matrix::Identity(s.rows(), count);

  auto check = [&](const Element& e, const char* what) {
    const Vector v = e.vec();
    if (span_residual(q_, v) > tol * std::max(1.0, v.norm()))
      throw ValidationError(std::string("subalgebra basis not closed under ") + what);
  };
  check(Element::identity(shape_), "the unit");
  for (const auto& e : sub_basis) check(e.adjoint(), "adjoint");
  const std::size_t n = sub_basis.size();
  if (n <= 64) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) check(sub_basis[i] * sub_basis[j], "product");
  } else {
    Rng rng = make_rng(0x5eed, n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int t = 0; t < 4096; ++t) {
      const std::size_t i = pick(rng);
      const std::size_t j = pick(rng);
      check(sub_basis[i] * sub_basis[j], "product");
    }
  }
}

Element SpanExpectation::apply(const Element& a) const {
  require_same_shape(shape_, a.shape(), "conditional expectation");
  return Element::unvec(shape_, q_ * (q_.adjoint() * a.vec()));
}

bool SpanExpectation::contains(const Element& a, double tol) const {
  const Vector v = a.vec();
  return span_residual(q_, v) <= tol * std::max(1.0, v.norm());
}

PartialTraceExpectation::PartialTraceExpectation(int n, int m)
    : shape_(std::vector<int>{n * m}), n_(n), m_(m) {
  if (n < 1 || m < 1) throw ValidationError("tensor factors must be positive");
}

Element PartialTraceExpectation::apply(const Element& a) const {
  require_same_shape(shape_, a.shape(), "conditional expectation");
  const Matrix& x = a.block(0);
  Matrix t = Matrix::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      cplx s = 0.0;
      for (int al = 0; al < m_; ++al) s += x(i * m_ + al, j * m_ + al);
      t(i, j) = s / static_cast<double>(m_);
    }
  Matrix out = Eigen::kroneckerProduct(t, Matrix::Identity(m_, m_));
  return Element(shape_, {out});
}

Element conditional_expectation(const std::vector<Element>& sub_basis, const Element& a) {
  return SpanExpectation(sub_basis).apply(a);
}

// ---------------------------------------------------------------- nets

State random_pure_state(const Shape& shape, Rng& rng) {
  const int total = shape.total_dim();
  std::uniform_int_distribution<int> pick(0, total - 1);
  int r = pick(rng);
  int block = 0;
  while (r >= shape.block_dim(block)) {
    r -= shape.block_dim(block);
    ++block;
  }
  return State::vector_state(shape, block, haar_vector(shape.block_dim(block), rng));
}

State random_mixed_state(const Shape& shape, Rng& rng) {
  std::vector<Matrix> d;
  double total = 0.0;
  for (int n : shape.block_dims()) {
    const Matrix g = ginibre(n, n, rng);
    Matrix rho = g * g.adjoint() + 1e-3 * Matrix::Identity(n, n);
    total += rho.trace().real();
    d.push_back(rho);
  }
  for (auto& m : d) {
    m /= total;
    m = (m + m.adjoint()).eval() * 0.5;
  }
  return State(shape, std::move(d));
}

std::vector<State> state_net(const Shape& shape, NetKind kind, int count, std::uint64_t seed) {
  if (count < 1) throw ValidationError("state net needs count >= 1");
  std::vector<State> out;
  if (kind == NetKind::PureEnumerate) {
    if (!shape.commutative())
      throw ValidationError("pure-enumerate nets need a commutative shape");
    for (int k = 0; k < shape.num_blocks(); ++k) out.push_back(State::dirac(shape, k));
    return out;
  }
  for (int i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    out.push_back(kind == NetKind::PureRandom ? random_pure_state(shape, rng)
                                              : random_mixed_state(shape, rng));
  }
  return out;
}

// ---------------------------------------------------------------- StarMap

namespace {

struct UnitIndex {
  int block;
  int row;
  int col;
};

std::vector<UnitIndex> matrix_units(const Shape& shape) {
  std::vector<UnitIndex> u;
  for (int b = 0; b < shape.num_blocks(); ++b) {
    const int n = shape.block_dim(b);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) u.push_back({b, r, c});
  }
  return u;
}

Element unit_element(const Shape& shape, const UnitIndex& u) {
  Element e = Element::zero(shape);
  e.block(u.block)(u.row, u.col) = 1.0;
  return e;
}

}  // namespace

StarMap::StarMap(Shape source, Shape target, Matrix matrix)
    : source_(std::move(source)), target_(std::move(target)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != target_.real_dim() || matrix_.cols() != source_.real_dim())
    throw ValidationError("linear map size does not match shapes");
}

StarMap StarMap::identity(const Shape& shape) {
  return StarMap(shape, shape, Matrix::Identity(shape.real_dim(), shape.real_dim()));
}

StarMap StarMap::from_function(const Shape& source, const Shape& target,
                               const std::function<Element(const Element&)>& fn) {
  const auto units = matrix_units(source);
  Matrix m(target.real_dim(), source.real_dim());
  for (std::size_t i = 0; i < units.size(); ++i) {
    const Element img = fn(unit_element(source, units[i]));
    require_same_shape(target, img.shape(), "map image");
    m.col(static_cast<Eigen::Index>(i)) = img.vec();
  }
  return StarMap(source, target, std::move(m));
}

StarMap StarMap::diagonal_embedding(int k) {
  const Shape src(std::vector<int>(static_cast<std::size_t>(k), 1));
  const Shape dst(std::vector<int>{k});
  Matrix m = Matrix::Zero(k * k, k);
  for (int i = 0; i < k; ++i) m(i + i * k, i) = 1.0;
  return StarMap(src, dst, std::move(m));
}

StarMap StarMap::coordinate_projection(const Shape& a, const Shape& b, int which) {
  if (which != 0 && which != 1) throw ValidationError("projection side must be 0 or 1");
  const Shape sum = a.direct_sum(b);
  const Shape& dst = which == 0 ? a : b;
  Matrix m = Matrix::Zero(dst.real_dim(), sum.real_dim());
  const int off = which == 0 ? 0 : a.real_dim();
  m.block(0, off, dst.real_dim(), dst.real_dim()).setIdentity();
  return StarMap(sum, dst, std::move(m));
}

StarMap StarMap::tensor_embedding(int n, int m) {
  const Shape src(std::vector<int>{n});
  const Shape dst(std::vector<int>{n * m});
  const Matrix id = Matrix::Identity(m, m);
  return from_function(src, dst, [&](const Element& a) {
    return Element(dst, {Matrix(Eigen::kroneckerProduct(a.block(0), id))});
  });
}

Element StarMap::apply(const Element& a) const {
  require_same_shape(source_, a.shape(), "map application");
  return Element::unvec(target_, matrix_ * a.vec());
}

StarMap StarMap::compose(const StarMap& inner) const {
  require_same_shape(inner.target_, source_, "map composition");
  return StarMap(inner.source_, target_, matrix_ * inner.matrix_);
}

State StarMap::pullback(const State& phi) const {
  require_same_shape(target_, phi.shape(), "state pullback");
  Vector r(target_.real_dim());
  Eigen::Index off = 0;
  for (const auto& d : phi.densities()) {
    const Matrix dt = d.transpose();
    r.segment(off, dt.size()) = Eigen::Map<const Vector>(dt.data(), dt.size());
    off += dt.size();
  }
  const Vector vals = (r.transpose() * matrix_).transpose();
  std::vector<Matrix> dens;
  off = 0;
  for (int n : source_.block_dims()) {
    Matrix d(n, n);
    for (int c = 0; c < n; ++c)
      for (int row = 0; row < n; ++row) d(c, row) = vals(off + row + c * n);
    dens.push_back(d);
    off += n * n;
  }
  return State(source_, std::move(dens));
}

void StarMap::verify(double tol) const {
  const auto units = matrix_units(source_);
  std::vector<Element> img;
  img.reserve(units.size());
  for (std::size_t i = 0; i < units.size(); ++i)
    img.push_back(Element::unvec(target_, matrix_.col(static_cast<Eigen::Index>(i))));
  if (apply(Element::identity(source_)).distance(Element::identity(target_)) > tol)
    throw ValidationError("map is not unital");
  auto index_of = [&](int b, int r, int c) {
    int off = 0;
    for (int k = 0; k < b; ++k) off += source_.block_dim(k) * source_.block_dim(k);
    return static_cast<std::size_t>(off + r + c * source_.block_dim(b));
  };
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    if (img[i].adjoint().distance(img[index_of(u.block, u.col, u.row)]) > tol)
      throw ValidationError("map does not preserve adjoints");
  }
  auto check_pair = [&](std::size_t i, std::size_t j) {
    const auto& a = units[i];
    const auto& b = units[j];
    const Element prod = img[i] * img[j];
    const bool joins = a.block == b.block && a.col == b.row;
    const Element expect =
        joins ? img[index_of(a.block, a.row, b.col)] : Element::zero(target_);
    if (prod.distance(expect) > tol) throw ValidationError("map is not multiplicative");
  };
  const std::size_t n = units.size();
  if (n <= 64) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) check_pair(i, j);
  } else {
    Rng rng = make_rng(0x5eed, n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int t = 0; t < 4096; ++t) check_pair(pick(rng), pick(rng));
    // every unit against its own row/column partners keeps diagonal relations covered
    for (std::size_t i = 0; i < n; ++i) check_pair(i, index_of(units[i].block, units[i].col, units[i].col));
  }
}

bool StarMap::injective() const {
  Eigen::JacobiSVD<Matrix> svd(matrix_);
  const auto& s = svd.singularValues();
  const double cut = 1e-9 * std::max(1.0, s.size() ? s(0) : 0.0);
  return (s.array() > cut).count() == source_.real_dim();
}

bool StarMap::surjective() const {
  Eigen::JacobiSVD<Matrix> svd(matrix_);
  const auto& s = svd.singularValues();
  const double cut = 1e-9 * std::max(1.0, s.size() ? s(0) : 0.0);
  return (s.array() > cut).count() == target_.real_dim();
}

// ---------------------------------------------------------------- Automorphism

Automorphism::Automorphism(Shape shape, std::vector<int> source_block, std::vector<Matrix> unitaries)
    : shape_(std::move(shape)), src_(std::move(source_block)), w_(std::move(unitaries)) {
  const int k = shape_.num_blocks();
  if (static_cast<int>(src_.size()) != k || static_cast<int>(w_.size()) != k)
    throw ValidationError("automorphism data does not match shape");
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (int i = 0; i < k; ++i) {
    const int s = src_[static_cast<std::size_t>(i)];
    if (s < 0 || s >= k || seen[static_cast<std::size_t>(s)])
      throw ValidationError("automorphism block map is not a permutation");
    seen[static_cast<std::size_t>(s)] = true;
    const int n = shape_.block_dim(i);
    if (shape_.block_dim(s) != n) throw ValidationError("automorphism permutes unequal blocks");
    const Matrix& w = w_[static_cast<std::size_t>(i)];
    if (w.rows() != n || w.cols() != n) throw ValidationError("automorphism unitary size mismatch");
    if ((w.adjoint() * w - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9)
      throw ValidationError("automorphism matrix is not unitary");
  }
}

Automorphism Automorphism::inner(const Element& unitary) {
  std::vector<int> src(static_cast<std::size_t>(unitary.shape().num_blocks()));
  std::iota(src.begin(), src.end(), 0);
  return Automorphism(unitary.shape(), std::move(src), unitary.blocks());
}

Element Automorphism::apply(const Element& a) const {
  require_same_shape(shape_, a.shape(), "automorphism");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < w_.size(); ++i)
    out.push_back(w_[i] * a.block(src_[i]) * w_[i].adjoint());
  return Element(shape_, std::move(out));
}

Automorphism Automorphism::compose(const Automorphism& inner) const {
  require_same_shape(shape_, inner.shape_, "automorphism composition");
  std::vector<int> src;
  std::vector<Matrix> w;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    const auto s = static_cast<std::size_t>(src_[i]);
    src.push_back(inner.src_[s]);
    w.push_back(w_[i] * inner.w_[s]);
  }
  return Automorphism(shape_, std::move(src), std::move(w));
}

}  // namespace qmetric
