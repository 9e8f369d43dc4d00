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

#include <complex>
#include <vector>

namespace qmetric {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

struct SingularPair {
  double value = 0.0;
  Vector left;
  Vector right;
};

/// Largest singular value with its left/right singular vectors. Ties are
/// broken by the SVD's ordering, which is deterministic for equal input.
SingularPair top_singular_pair(const Matrix& m);

/// Largest singular value; uses the Hermitian eigensolver when m is
/// Hermitian to within 1e-14 relative.
double spectral_norm(const Matrix& m);

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

/// Largest eigenvalue of a Hermitian matrix with a unit eigenvector.
EigenPair top_eigenpair(const Matrix& hermitian);

/// Orthonormal basis (columns) of the null space of a real matrix; singular
/// values below `threshold * max(1, s_max)` count as zero.
RealMatrix null_space(const RealMatrix& m, double threshold);

/// Numerical rank under the same convention as null_space.
int numerical_rank(const RealMatrix& m, double threshold);

/// Orthonormal basis of the null space of a complex matrix.
Matrix null_space(const Matrix& m, double threshold);

/// exp(i t H) for Hermitian H.
Matrix unitary_exp(const Matrix& hermitian, double t);

}  // namespace qmetric
