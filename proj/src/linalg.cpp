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

#include "qmetric/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace qmetric {

namespace {

bool is_hermitian(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * scale;
}

}  // namespace

SingularPair top_singular_pair(const Matrix& m) {
  SingularPair out;
  if (m.size() == 0) return out;
  if (m.rows() == 1 || m.cols() == 1) {
    // rank one: the normalized vector itself is the singular direction
    const double n = m.norm();
    out.value = n;
    if (m.rows() == 1) {
      out.left = Vector::Ones(1);
      out.right = n > 0 ? Vector(m.row(0).adjoint() / n) : Vector(Vector::Unit(m.cols(), 0));
    } else {
      out.right = Vector::Ones(1);
      out.left = n > 0 ? Vector(m.col(0) / n) : Vector(Vector::Unit(m.rows(), 0));
    }
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.value = svd.singularValues()(0);
  out.left = svd.matrixU().col(0);
  out.right = svd.matrixV().col(0);
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  if (is_hermitian(m)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

EigenPair top_eigenpair(const Matrix& hermitian) {
  EigenPair out;
  if (hermitian.rows() == 1) {
    out.value = hermitian(0, 0).real();
    out.vector = Vector::Ones(1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  const Eigen::Index last = hermitian.rows() - 1;
  out.value = es.eigenvalues()(last);
  out.vector = es.eigenvectors().col(last);
  return out;
}

RealMatrix null_space(const RealMatrix& m, double threshold) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return RealMatrix::Identity(n, n);
  Eigen::JacobiSVD<RealMatrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = threshold * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

int numerical_rank(const RealMatrix& m, double threshold) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<RealMatrix> svd(m);
  const auto& s = svd.singularValues();
  const double cut = threshold * std::max(1.0, s(0));
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++rank;
  return rank;
}

Matrix null_space(const Matrix& m, double threshold) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = threshold * std::max(1.0, s.size() ? s(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Matrix unitary_exp(const Matrix& hermitian, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  const Vector phases =
      (es.eigenvalues().cast<cplx>() * cplx(0.0, t)).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace qmetric
