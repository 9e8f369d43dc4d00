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
#include <string>
#include <vector>

#include "qmetric/io.hpp"
#include "qmetric/models.hpp"

namespace qmetric {

/// Columns computed,bound,status for one commutator check.
Table commutator_table(int N, int M, int d, const std::vector<int>& m, const std::vector<int>& k,
                       double theta = 0.0);

/// Every (d, N, M, m) with d in {1, 2}, 1 <= N, M <= max_nm and |m|_1 <= max_m,
/// on the infinite lattice and on the finite torus with k_j = 2(N+M)+2
/// (twisted by theta = 1/k_j when d = 2) whenever m lies in I_k.
/// Columns d,N,M,m,k,theta,computed,bound,status.
Table commutator_sweep(int max_nm = 5, int max_m = 6, int threads = 1);

Table collapse_table(const CollapseConfig& config);

struct FejerConfig {
  int n = 5;                      // G = Z_n x Z_n
  std::string model = "fuzzy";    // "fuzzy" (primitive rho) or "commutative"
  std::string lengths = "torus";  // "torus" or "word"
  std::vector<int> radii = {0, 1, 2};
  int samples = 200;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Columns radius,support,defect,weight_sum_error,multiplier_error,
/// range_error,contract_margin,status.
Table fejer_table(const FejerConfig& config);

struct ConvergenceConfig {
  std::vector<int> ns = {5, 8, 13, 21};
  double theta = 0.6180339887498949;  // limit rotation; 0 gives the commutative tori
  int radius = 1;                     // Fejer box radius; 0 selects max(1, floor(n^(1/3)))
  int mk_max_n = 8;                   // mk columns are nan above this n
  double tol = 1e-7;
  int threads = 1;
};

struct ConvergenceResult {
  Table table;
  /// First row from which the bound column is nonincreasing.
  int burn_in = 0;
};

/// Per n: theta_n = round(theta n) / n, a Fejer box with torus lengths, the cocycle discrepancy on
/// the Fourier window, the composite bound defect + (1 + diam / 2) window,
/// the pivot commutator check, and mk between a basis vector state and the
/// trace, with the transport oracle on commutative rows. Columns
/// n,theta_n,radius,defect,window,diam,bound,comm_computed,comm_bound,
/// mk_probe,mk_oracle.
ConvergenceResult convergence_experiment(const ConvergenceConfig& config);

struct BerezinConfig {
  std::vector<int> two_js = {1, 2, 3, 4};
  int n_theta = 24;
  int n_phi = 50;
  int samples = 5;
  std::uint64_t seed = 0;
  double tolerance = 1e-3;
  int threads = 1;
};

/// Columns two_j,unit_symbol_error,unit_quantization_error,
/// min_positive_symbol,min_quantized_eigen,equivariance_error,status.
Table berezin_table(const BerezinConfig& config);

/// Reads experiment settings from a {"format": "qmetric/experiment"} file;
/// absent fields keep their defaults.
CollapseConfig collapse_config_from_json(const Json& j);
FejerConfig fejer_config_from_json(const Json& j);
ConvergenceConfig convergence_config_from_json(const Json& j);
BerezinConfig berezin_config_from_json(const Json& j);

}  // namespace qmetric
