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


// Acceptance checks: one pass/fail line per criterion, exit status 1 when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "qmetric/bridge.hpp"
#include "qmetric/convex.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/experiments.hpp"
#include "qmetric/lipnorm.hpp"
#include "qmetric/metric.hpp"
#include "qmetric/models.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/random.hpp"
#include "qmetric/tunnel.hpp"

using namespace qmetric;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

// ---------------------------------------------------------------- fixtures

Matrix pauli(char c) {
  Matrix m = Matrix::Zero(2, 2);
  if (c == 'x') m << 0, 1, 1, 0;
  if (c == 'y') m << 0, cplx(0, -1), cplx(0, 1), 0;
  if (c == 'z') m << 1, 0, 0, -1;
  return m;
}

Element m2(const Matrix& m) { return Element(Shape({2}), {m}); }

Shape points(int k) { return Shape(std::vector<int>(static_cast<std::size_t>(k), 1)); }

RealMatrix random_metric(int k, Rng& rng) {
  RealMatrix d(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) d(i, j) = d(j, i) = i == j ? 0.0 : 0.1 + uniform01(rng);
  for (int m = 0; m < k; ++m)
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) d(i, j) = std::min(d(i, j), d(i, m) + d(m, j));
  return d;
}

RealVector random_distribution(int k, Rng& rng) {
  RealVector p(k);
  for (int i = 0; i < k; ++i) p(i) = -std::log(1.0 - uniform01(rng));
  return p / p.sum();
}

struct MetricCase {
  RealMatrix d;
  RealVector p, q;
};

std::vector<MetricCase> metric_suite() {
  std::vector<MetricCase> cases;
  for (int i = 0; i < 200; ++i) {
    Rng rng = make_rng(101, static_cast<std::uint64_t>(i));
    const int k = 3 + i % 4;
    MetricCase c{random_metric(k, rng), RealVector(), RealVector()};
    c.p = random_distribution(k, rng);
    c.q = random_distribution(k, rng);
    cases.push_back(std::move(c));
  }
  return cases;
}

StarMap constants_into(int k) {
  return StarMap::from_function(Shape({1}), points(k), [k](const Element& c) {
    const cplx v = c.block(0)(0, 0);
    return Element(points(k), std::vector<Matrix>(static_cast<std::size_t>(k), Matrix::Constant(1, 1, v)));
  });
}

// Cayley transform of a random self-adjoint matrix scaled by s.
Matrix random_unitary(double s, Rng& rng) {
  const Matrix h = random_self_adjoint(Shape({2}), rng).block(0);
  const Matrix id = Matrix::Identity(2, 2);
  return (id + cplx(0, s) * h) * (id - cplx(0, s) * h).inverse();
}

struct SampledBridge {
  Bridge bridge;
  Seminorm la;
  Seminorm lb;
};

// Five M_2 bridges twisted by a unitary conjugation, three identity bridges
// between perturbed metrics on three points, two collapses of three points
// onto one.
std::vector<SampledBridge> sampled_bridges() {
  std::vector<SampledBridge> out;
  for (int i = 0; i < 10; ++i) {
    Rng rng = make_rng(202, static_cast<std::uint64_t>(i));
    if (i < 5) {
      auto lengths = [&] { return std::vector<double>{1.0 + uniform01(rng), 1.0 + uniform01(rng), 1.0 + uniform01(rng)}; };
      const std::vector<Element> us = {m2(pauli('x')), m2(pauli('y')), m2(pauli('z'))};
      const Seminorm la = from_group_action(us, lengths());
      const Seminorm lb = from_group_action(us, lengths());
      const Element u = m2(random_unitary(0.05 + 0.45 * uniform01(rng), rng));
      const StarMap conj =
          StarMap::from_function(Shape({2}), Shape({2}), [u](const Element& b) { return u * b * u.adjoint(); });
      out.push_back({Bridge(Element::identity(Shape({2})), StarMap::identity(Shape({2})), conj), la, lb});
    } else if (i < 8) {
      const RealMatrix d = random_metric(3, rng);
      RealMatrix e = d;
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) e(a, b) = e(b, a) = d(a, b) * (1.0 + 0.2 * uniform01(rng));
      for (int m = 0; m < 3; ++m)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) e(a, b) = std::min(e(a, b), e(a, m) + e(m, b));
      out.push_back({Bridge::identity(points(3)), from_metric(d), from_metric(e)});
    } else {
      out.push_back({Bridge(Element::identity(points(3)), StarMap::identity(points(3)), constants_into(3)),
                     from_metric(random_metric(3, rng)), from_metric(RealMatrix::Zero(1, 1))});
    }
  }
  return out;
}

struct BuiltTunnel {
  Tunnel tunnel;
  double lambda;
};

const std::vector<BuiltTunnel>& sampled_tunnels() {
  static const std::vector<BuiltTunnel> tunnels = [] {
    std::vector<BuiltTunnel> out;
    std::uint64_t seed = 0;
    for (const SampledBridge& b : sampled_bridges()) {
      const BridgeLength len = bridge_length_bounds(b.bridge, b.la, b.lb);
      const double lambda = 10.0 * std::max(len.length.upper, 1e-3);
      out.push_back({tunnel_from_bridge(b.bridge, b.la, b.lb, lambda, 20, ++seed), lambda});
    }
    return out;
  }();
  return tunnels;
}

// ---------------------------------------------------------------- criteria

void criterion1(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const MetricCase& c : metric_suite()) {
    const Shape s = points(static_cast<int>(c.d.rows()));
    const double mk = mk_distance(from_metric(c.d), State::from_distribution(s, c.p), State::from_distribution(s, c.q));
    worst = std::max(worst, std::abs(mk - transport_lp(c.d, c.p, c.q)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(worst <= 1e-6, "mk differs from transport");
  o.require(secs < 60.0, "runtime over 60 s");
  o.detail << "200 spaces, max |mk - transport| = " << worst << ", " << secs << " s";
}

void criterion2(Outcome& o) {
  double worst = 0.0;
  int pairs = 0;
  for (const MetricCase& c : metric_suite()) {
    const int k = static_cast<int>(c.d.rows());
    const Seminorm L = from_metric(c.d);
    for (int x = 0; x < k; ++x)
      for (int y = x + 1; y < k; ++y, ++pairs)
        worst = std::max(worst, std::abs(mk_distance(L, State::dirac(points(k), x), State::dirac(points(k), y)) -
                                         c.d(x, y)));
  }
  o.require(worst <= 1e-6, "Dirac distance differs from d");
  o.detail << pairs << " pairs, max |mk - d| = " << worst;
}

void criterion3(Outcome& o) {
  double worst = 0.0, worst_order = -1e300;
  SolveOptions so;
  so.tol = 1e-8;
  for (const MetricCase& c : metric_suite()) {
    const Shape s = points(static_cast<int>(c.d.rows()));
    const Seminorm L = from_metric(c.d);
    const State phi = State::from_distribution(s, c.p), psi = State::from_distribution(s, c.q);
    const double r = L.diameter_certificate().value();
    const DistanceResult mk = mk_distance_report(L, phi, psi, so);
    const DistanceResult bl = bl_distance_report(L, r, phi, psi, so);
    worst = std::max(worst, std::abs(bl.value - mk.value));
    // ordering up to floating-point rounding of equal values
    worst_order = std::max(worst_order, bl.value - mk.upper - 1e-12 * std::max(1.0, mk.upper));
  }
  o.require(worst <= 2e-7, "bl differs from mk at the certified diameter");
  o.require(worst_order <= 0.0, "bl exceeds mk");
  o.detail << "max |bl - mk| = " << worst << ", max (bl - mk upper - rounding slack) = " << worst_order;
}

void criterion4(Outcome& o) {
  const Shape s2({2});
  Matrix dirac = Matrix::Zero(3, 3);
  dirac(0, 1) = dirac(1, 0) = 1.0;
  dirac(1, 2) = dirac(2, 1) = 2.0;
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.3;
  rho(1, 1) = 0.7;
  const std::vector<std::shared_ptr<const ConditionalExpectation>> stages = {
      std::make_shared<SpanExpectation>(std::vector<Element>{Element::identity(s2)}),
      std::make_shared<SpanExpectation>(std::vector<Element>{Element::identity(s2), m2(pauli('z'))}),
      std::make_shared<SpanExpectation>(
          std::vector<Element>{Element::identity(s2), m2(pauli('x')), m2(pauli('y')), m2(pauli('z'))})};
  const std::vector<std::pair<std::string, Seminorm>> suites = {
      {"group-action", from_group_action({m2(pauli('x')), m2(pauli('z'))}, {1.0, 1.0})},
      {"commutator", from_commutator(Element(Shape({3}), {dirac}), StarMap::diagonal_embedding(3))},
      {"filtration", from_filtration(stages, {1.0, 0.5})},
      {"filtration-uhf", uhf_filtration(2).lipnorm()},
      {"stddev", from_stddev(State(s2, {rho}))},
      {"dist-to-subspace", Seminorm::dist_to_subspace({Element::identity(s2), m2(pauli('z'))})},
  };
  std::uint64_t seed = 40;
  for (const auto& [name, L] : suites) {
    const LeibnizReport r = check_quasi_leibniz(L, PermissibleF(), 1000, ++seed);
    o.require(r.samples >= 1000 && r.worst_margin <= 1e-9, name + " violates the Leibniz rule");
    o.detail << name << " " << r.worst_margin << "; ";
  }
}

void criterion5(Outcome& o) {
  for (int n : {2, 3, 5, 7}) {
    const cplx rho = std::polar(1.0, 2.0 * std::numbers::pi / n);
    const ActionModel m = fuzzy_torus(n, rho);
    const int k = m.lipnorm(torus_lengths(m.group)).kernel_dim();
    o.require(k == 1, "kernel rank of fuzzy torus " + std::to_string(n));
    o.detail << "n=" << n << " kernel " << k << "; ";
  }
  bool rejected = false;
  try {
    fuzzy_torus(4, -1.0);
  } catch (const ValidationError&) {
    rejected = true;
  }
  o.require(rejected, "non-primitive rho accepted");
  const auto [u, v] = clock_shift(5, std::polar(1.0, 2.0 * std::numbers::pi / 5));
  std::vector<Element> shifts;
  Element p = u;
  for (int a = 1; a < 5; ++a, p = p * u) shifts.push_back(p);
  bool single = false;
  try {
    from_group_action(shifts, {1, 2, 2, 1});
  } catch (const ValidationError&) {
    single = true;
  }
  o.require(single, "single-generator action accepted");
  o.detail << "non-primitive rejected " << rejected << ", single generator rejected " << single;
}

void criterion6(Outcome& o) {
  const Table t = commutator_sweep(5, 6, default_thread_count());
  const auto bad = std::count_if(t.rows.begin(), t.rows.end(), [](const auto& r) { return r.back() != "pass"; });
  o.require(bad == 0, "sweep failures");
  const CommutatorCheck tight = commutator_bound_check(2, 3, 1, {1}, {0}, 0.0);
  const double e = std::max(std::abs(tight.computed - 1.0 / 3.0), std::abs(tight.bound - 1.0 / 3.0));
  o.require(e <= 1e-12, "tight case is not 1/3");
  const CommutatorCheck fin = commutator_bound_check(1, 2, 2, {1, 1}, {9, 9}, 1.0 / 9.0);
  o.require(fin.pass && fin.computed <= 1.0, "finite d=2 case");
  o.detail << t.rows.size() << " sweep cases, " << bad << " failures; tight error " << e << "; k=(9,9) computed "
           << fin.computed;
}

void criterion7(Outcome& o) {
  double worst = 0.0, floor_gap = 0.0;
  int k = 0;
  for (const BuiltTunnel& bt : sampled_tunnels()) {
    const IsometryCheck& c = bt.tunnel.isometry();
    o.require(c.samples >= 20 && c.worst_margin <= 1e-5, "tunnel " + std::to_string(k) + " isometry");
    worst = std::max(worst, c.worst_margin);
    Rng rng = make_rng(303, static_cast<std::uint64_t>(k++));
    for (TunnelSide side : {TunnelSide::A, TunnelSide::B}) {
      const Shape& s = bt.tunnel.pi(side).target();
      for (int i = 0; i < 20; ++i) {
        const Element a = random_self_adjoint(s, rng);
        const double q = quotient_seminorm(bt.tunnel, side, a).value;
        floor_gap = std::max(floor_gap, bt.tunnel.target_lip(side).eval(a) - q);
      }
    }
  }
  o.require(floor_gap <= 1e-9, "quotient below the endpoint Lip-norm");
  o.detail << "10 tunnels, worst isometry margin " << worst << ", worst floor gap " << floor_gap;
}

void criterion8(Outcome& o) {
  int k = 0;
  for (const BuiltTunnel& bt : sampled_tunnels()) {
    const TunnelQuantities q = tunnel_quantities(bt.tunnel);
    o.require(q.depth.certified && q.depth.upper == 0.0, "depth of tunnel " + std::to_string(k));
    ++k;
  }
  o.detail << k << " tunnels with certified depth 0";
}

void criterion9(Outcome& o) {
  double worst_low = -1e300, worst_high = -1e300;
  int k = 0;
  for (const BuiltTunnel& bt : sampled_tunnels()) {
    const TunnelQuantities q = tunnel_quantities(bt.tunnel);
    const double net_tol = 2.0 * (q.length.upper - q.length.lower) + 1e-6;
    worst_low = std::max(worst_low, q.length.lower - q.extent.lower);
    worst_high = std::max(worst_high, q.extent.lower - 2.0 * q.length.lower - net_tol);
    o.require(q.length.lower <= q.extent.lower + 1e-6, "length above extent, tunnel " + std::to_string(k));
    o.require(q.extent.lower <= 2.0 * q.length.lower + net_tol, "extent above twice length, tunnel " + std::to_string(k));
    ++k;
  }
  o.detail << "max (length - extent) = " << worst_low << ", max (extent - 2 length - tol) = " << worst_high;
}

void criterion10(Outcome& o) {
  const std::vector<double> vals = {0.0, 0.125, 0.5, 1.0, 2.5};
  for (double d : vals)
    for (double a : vals)
      for (double b : vals)
        for (double h : vals) {
          const double expect = std::max(d * (1.0 + std::max(a, b) / 2.0), h);
          o.require(perturbation_bound(d, a, b, h) == expect, "perturbation bound closed form");
        }
  for (double a : vals)
    for (double b : vals) {
      o.require(perturbation_bound(0.0, a, b, 0.75) == 0.75, "delta = 0 gives the height");
      o.require(bi_lipschitz_bound(1.0, a, b) == 0.0, "delta = 1 gives 0");
      for (double d : {1.25, 2.0, 3.5})
        o.require(bi_lipschitz_bound(d, a, b) == (d - 1.0) * (0.5 + std::max(a, b)), "bi-Lipschitz closed form");
    }
  CollapseConfig c;
  c.js = {1, 2, 4, 8, 16, 32, 64};
  const std::vector<CollapseRow> rows = collapse_experiment(c);
  double worst = -1e300;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CollapseRow& r = rows[i];
    worst = std::max({worst, r.expectation_margin, r.lip_margin, r.fixed_margin, r.idempotence});
    if (i > 0) o.require(r.bound < rows[i - 1].bound, "collapse bound not decreasing");
  }
  o.require(worst <= 1e-8, "collapse inequality spot check");
  o.require(rows.back().bound < 0.01 * rows.front().bound, "collapse bound not tending to 0");
  o.detail << "collapse bound " << rows.front().bound << " -> " << rows.back().bound << " (j = "
           << rows.back().j << "), worst spot margin " << worst;
}

// phi(g) for the box of radius r in Z_n x Z_n: product of one-dimensional
// Fejer kernels sin^2(pi w x / n) / (n w sin^2(pi x / n)), w = 2r + 1.
double fejer_kernel_oracle(int n, int r, int x) {
  const double w = 2.0 * r + 1.0;
  if (x % n == 0) return w / n;
  const double s = std::sin(std::numbers::pi * x / n), t = std::sin(std::numbers::pi * w * x / n);
  return t * t / (n * w * s * s);
}

void criterion11(Outcome& o) {
  double worst_margin = -1e300, worst_defect = 0.0;
  for (const auto& [model, n] : std::vector<std::pair<std::string, int>>{{"fuzzy", 5}, {"fuzzy", 7}, {"commutative", 5}}) {
    const ActionModel m =
        model == "fuzzy" ? fuzzy_torus(n, std::polar(1.0, 2.0 * std::numbers::pi / n)) : commutative_torus(n);
    const RealVector len = torus_lengths(m.group);
    for (int r = 0; 2 * r + 1 <= n; ++r) {
      const FejerData data = fejer_data(m.group, box_support(m.group, r));
      double oracle = 0.0;
      for (int g = 0; g < m.group.size(); ++g) {
        const auto c = m.group.element(g);
        oracle += fejer_kernel_oracle(n, r, c[0]) * fejer_kernel_oracle(n, r, c[1]) * m.group.torus_length(g);
      }
      worst_defect = std::max(worst_defect, std::abs(data.defect(len) - oracle));
      const FejerContractReport rep = check_fejer_contract(m, data, len, 200, 11);
      worst_margin = std::max(worst_margin, rep.worst_margin);
    }
  }
  o.require(worst_margin <= 1e-8, "Fejer contract violated");
  o.require(worst_defect <= 1e-12, "defect differs from the closed-form kernel");
  ConvergenceConfig cc;
  cc.theta = 0.0;
  cc.ns = {3, 5, 7};
  cc.mk_max_n = 7;
  cc.threads = default_thread_count();
  const Table t = convergence_experiment(cc).table;
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(t.header.begin(), t.header.end(), name) - t.header.begin());
  };
  double worst_mk = 0.0;
  for (const auto& row : t.rows)
    worst_mk = std::max(worst_mk, std::abs(std::stod(row[col("mk_probe")]) - std::stod(row[col("mk_oracle")])));
  o.require(worst_mk <= 1e-6, "commutative mk differs from transport");
  o.detail << "worst contract margin " << worst_margin << ", defect error " << worst_defect
           << ", commutative mk vs transport " << worst_mk;
}

void criterion12(Outcome& o) {
  for (int two_j : {1, 2, 3, 4}) {
    const BerezinReport r = check_berezin(Berezin(two_j, gauss_sphere_grid()), 5, 12);
    o.require(r.pass, "Berezin checks for 2j = " + std::to_string(two_j));
    o.require(r.unit_symbol_error <= 1e-12, "unit symbol for 2j = " + std::to_string(two_j));
    o.detail << "2j=" << two_j << " unit " << r.unit_symbol_error << " quant " << r.unit_quantization_error
             << " equiv " << r.equivariance_error << "; ";
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion13(Outcome& o) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases = {
      {"commutator_sweep.csv", {"experiment", "commutator", "--sweep", "--max-nm", "2", "--max-m", "2"}},
      {"collapse.csv", {"experiment", "collapse"}},
      {"fejer.csv", {"experiment", "fejer"}},
      {"fejer_commutative.csv", {"experiment", "fejer", "--model", "commutative", "--lengths", "word"}},
      {"berezin.csv", {"experiment", "berezin"}},
      {"convergence.csv", {"experiment", "convergence", "--ns", "3,5", "--mk-max-n", "5"}},
      {"convergence_commutative.csv", {"experiment", "convergence", "--theta", "0", "--ns", "3,5", "--mk-max-n", "5"}},
  };
  int runs = 0;
  for (const auto& [file, args] : cases) {
    const std::string expected = read_file(std::string(QMETRIC_GOLDEN_DIR) + "/" + file);
    o.require(!expected.empty(), "missing golden " + file);
    for (const char* threads : {"1", "2", "4"})
      for (int rep = 0; rep < 2; ++rep, ++runs) {
        std::vector<std::string> a = args;
        a.insert(a.end(), {"--threads", threads});
        std::ostringstream out, err;
        const int code = cli::run(a, out, err);
        o.require(code == 0 && out.str() == expected, file + " with " + threads + " threads");
      }
  }
  o.detail << cases.size() << " drivers, " << runs << " runs compared byte for byte";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"Kantorovich duality oracle", criterion1},
      {"Dirac isometry", criterion2},
      {"bounded-Lipschitz coincidence", criterion3},
      {"Leibniz suites", criterion4},
      {"ergodicity gate", criterion5},
      {"commutator bound", criterion6},
      {"tunnel-from-bridge isometry", criterion7},
      {"direct-sum depth", criterion8},
      {"length/extent sandwich", criterion9},
      {"perturbation arithmetic and collapse", criterion10},
      {"Fejer contract and commutative convergence", criterion11},
      {"Berezin sanity", criterion12},
      {"determinism", criterion13},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::cout << "criterion " << (i + 1) << " [" << criteria[i].first << "]: " << (o.pass ? "PASS" : "FAIL") << " ("
              << o.detail.str() << ") " << secs << " s" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << std::endl;
  return failed == 0 ? 0 : 1;
}
