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


#include "qmetric/experiments.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "qmetric/convex.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/metric.hpp"
#include "qmetric/parallel.hpp"

namespace qmetric {

namespace {

std::string status(bool pass) { return pass ? "pass" : "fail"; }

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

template <class T>
void read_field(const Json& j, const char* name, T& out) {
  if (!j.contains(name)) return;
  try {
    out = j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("field \"") + name + "\": " + e.what());
  }
}

void check_experiment(const Json& j, const std::string& name) {
  check_format(j, "qmetric/experiment");
  if (j.contains("experiment") && j.at("experiment") != name)
    throw ValidationError("configuration is for a different experiment");
}

struct SweepCase {
  int d, N, M;
  std::vector<int> m, k;
  double theta;
};

}  // namespace

Table commutator_table(int N, int M, int d, const std::vector<int>& m, const std::vector<int>& k, double theta) {
  const CommutatorCheck c = commutator_bound_check(N, M, d, m, k, theta);
  Table t{{"computed", "bound", "status"}, {}};
  t.add_row({format_number(c.computed), format_number(c.bound), status(c.pass)});
  return t;
}

Table commutator_sweep(int max_nm, int max_m, int threads) {
  std::vector<SweepCase> cases;
  for (int d = 1; d <= 2; ++d)
    for (int N = 1; N <= max_nm; ++N)
      for (int M = 1; M <= max_nm; ++M)
        for (const auto& m : lattice_ball(d, max_m)) {
          cases.push_back({d, N, M, m, std::vector<int>(static_cast<std::size_t>(d), 0), 0.0});
          const int kf = 2 * (N + M) + 2;
          bool inside = true;
          for (int v : m) inside = inside && v >= -(kf / 2) && v <= (kf - 1) / 2;
          if (inside)
            cases.push_back({d, N, M, m, std::vector<int>(static_cast<std::size_t>(d), kf), d == 2 ? 1.0 / kf : 0.0});
        }
  std::vector<CommutatorCheck> res(cases.size());
  parallel_for(cases.size(), threads, [&](std::size_t i) {
    const SweepCase& c = cases[i];
    res[i] = commutator_bound_check(c.N, c.M, c.d, c.m, c.k, c.theta);
  });
  Table t{{"d", "N", "M", "m", "k", "theta", "computed", "bound", "status"}, {}};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const SweepCase& c = cases[i];
    t.add_row({std::to_string(c.d), std::to_string(c.N), std::to_string(c.M), join(c.m),
               c.k[0] == 0 ? "inf" : std::to_string(c.k[0]), format_number(c.theta), format_number(res[i].computed),
               format_number(res[i].bound), status(res[i].pass)});
  }
  return t;
}

Table collapse_table(const CollapseConfig& config) {
  Table t{{"j", "epsilon", "diam_h", "delta", "diam_a", "diam_k", "bound", "expectation_margin", "lip_margin",
           "fixed_margin", "idempotence", "status"},
          {}};
  for (const auto& r : collapse_experiment(config))
    t.add_row({std::to_string(r.j), format_number(r.epsilon), format_number(r.diam_h), format_number(r.delta),
               format_number(r.diam_a), format_number(r.diam_k), format_number(r.bound),
               format_number(r.expectation_margin), format_number(r.lip_margin), format_number(r.fixed_margin),
               format_number(r.idempotence), status(r.pass)});
  return t;
}

Table fejer_table(const FejerConfig& cfg) {
  if (cfg.n < 2) throw ValidationError("n must be at least 2");
  ActionModel model = cfg.model == "fuzzy"         ? fuzzy_torus(cfg.n, std::polar(1.0, 2.0 * std::numbers::pi / cfg.n))
                      : cfg.model == "commutative" ? commutative_torus(cfg.n)
                                                   : throw ValidationError("model must be \"fuzzy\" or \"commutative\"");
  const RealVector lengths = cfg.lengths == "torus" ? torus_lengths(model.group)
                             : cfg.lengths == "word"
                                 ? word_lengths(model.group)
                                 : throw ValidationError("lengths must be \"torus\" or \"word\"");
  Table t{{"radius", "support", "defect", "weight_sum_error", "multiplier_error", "range_error", "contract_margin",
           "status"},
          {}};
  for (std::size_t i = 0; i < cfg.radii.size(); ++i) {
    const int r = cfg.radii[i];
    const FejerData d = fejer_data(model.group, box_support(model.group, r));
    const FejerRangeReport range = verify_fejer_range(model, d);
    const FejerContractReport c =
        check_fejer_contract(model, d, lengths, cfg.samples, mix_seed(cfg.seed, i), cfg.threads);
    const double range_error = std::max({range.eigen_residual, range.multiplier_error, range.outside_support});
    t.add_row({std::to_string(r), std::to_string(d.support.size()), format_number(d.defect(lengths)),
               format_number(d.weight_sum_error), format_number(d.multiplier_error), format_number(range_error),
               format_number(c.worst_margin), status(range.pass && c.pass && d.weight_sum_error <= 1e-12)});
  }
  return t;
}

ConvergenceResult convergence_experiment(const ConvergenceConfig& cfg) {
  if (cfg.ns.empty()) throw ValidationError("at least one n is required");
  for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
    if (cfg.ns[i] < 3) throw ValidationError("n must be at least 3");
    if (i > 0 && cfg.ns[i] <= cfg.ns[i - 1]) throw ValidationError("n must increase");
  }
  if (!(cfg.theta >= 0.0 && cfg.theta < 1.0)) throw ValidationError("theta must lie in [0, 1)");
  if (cfg.radius < 0) throw ValidationError("radius must be nonnegative");
  struct Row {
    double theta_n, defect, window, diam, bound, comm_computed, comm_bound, mk_probe, mk_oracle;
    int radius;
  };
  std::vector<Row> rows(cfg.ns.size());
  parallel_for(cfg.ns.size(), cfg.threads, [&](std::size_t i) {
    const int n = cfg.ns[i];
    const int p = static_cast<int>(std::lround(cfg.theta * n)) % n;
    if (p != 0 && std::gcd(p, n) != 1) throw ValidationError("round(theta n) must be coprime to n");
    Row& row = rows[i];
    row.theta_n = static_cast<double>(p) / n;
    const ActionModel model =
        p == 0 ? commutative_torus(n) : fuzzy_torus(n, std::polar(1.0, 2.0 * std::numbers::pi * row.theta_n));
    const RealVector lengths = torus_lengths(model.group);
    const Seminorm L = model.lipnorm(lengths);
    row.radius = cfg.radius > 0 ? cfg.radius : std::max(1, static_cast<int>(std::floor(std::cbrt(n) + 1e-12)));
    const FejerData fd = fejer_data(model.group, box_support(model.group, row.radius));
    row.defect = fd.defect(lengths);
    row.window = 0.0;
    for (int a : fd.support)
      for (int b : fd.support) {
        const double e = (row.theta_n - cfg.theta) * model.group.centered(a)[1] * model.group.centered(b)[0];
        row.window = std::max(row.window, std::abs(std::polar(1.0, 2.0 * std::numbers::pi * e) - 1.0));
      }
    row.diam = *L.diameter_certificate();
    row.bound = row.defect + (1.0 + 0.5 * row.diam) * row.window;
    const int w = wedge({n, n});
    if (w >= 3) {
      const CommutatorCheck c = commutator_bound_check(1, w - 2, 2, {1, 1}, {n, n}, row.theta_n);
      row.comm_computed = c.computed;
      row.comm_bound = c.bound;
    } else {
      row.comm_computed = row.comm_bound = NAN;
    }
    row.mk_probe = row.mk_oracle = NAN;
    if (n > cfg.mk_max_n) return;
    const State probe = model.shape.commutative() ? State::dirac(model.shape, 0)
                                                  : State::vector_state(model.shape, 0, Vector::Unit(n, 0));
    const State tr = State::normalized_trace(model.shape);
    row.mk_probe = mk_distance(L, probe, tr, cfg.tol);
    if (p == 0) {
      const int g = model.group.size();
      RealMatrix dist(g, g);
      for (int x = 0; x < g; ++x)
        for (int y = 0; y < g; ++y) dist(x, y) = lengths(model.group.add(x, model.group.neg(y)));
      row.mk_oracle = transport_lp(dist, RealVector::Unit(g, 0), RealVector::Constant(g, 1.0 / g));
    }
  });
  ConvergenceResult out;
  out.table.header = {"n",    "theta_n", "radius",        "defect",     "window",   "diam",
                      "bound", "comm_computed", "comm_bound", "mk_probe", "mk_oracle"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    out.table.add_row({std::to_string(cfg.ns[i]), format_number(r.theta_n), std::to_string(r.radius),
                       format_number(r.defect), format_number(r.window), format_number(r.diam),
                       format_number(r.bound), format_number(r.comm_computed), format_number(r.comm_bound),
                       format_number(r.mk_probe), format_number(r.mk_oracle)});
  }
  out.burn_in = static_cast<int>(rows.size()) - 1;
  while (out.burn_in > 0 && rows[static_cast<std::size_t>(out.burn_in) - 1].bound >= rows[static_cast<std::size_t>(out.burn_in)].bound)
    --out.burn_in;
  return out;
}

Table berezin_table(const BerezinConfig& cfg) {
  const SphereGrid grid = gauss_sphere_grid(cfg.n_theta, cfg.n_phi);
  std::vector<BerezinReport> res(cfg.two_js.size());
  parallel_for(cfg.two_js.size(), cfg.threads, [&](std::size_t i) {
    res[i] = check_berezin(Berezin(cfg.two_js[i], grid), cfg.samples, mix_seed(cfg.seed, i), cfg.tolerance);
  });
  Table t{{"two_j", "unit_symbol_error", "unit_quantization_error", "min_positive_symbol", "min_quantized_eigen",
           "equivariance_error", "status"},
          {}};
  for (const auto& r : res)
    t.add_row({std::to_string(r.two_j), format_number(r.unit_symbol_error), format_number(r.unit_quantization_error),
               format_number(r.min_positive_symbol), format_number(r.min_quantized_eigen),
               format_number(r.equivariance_error), status(r.pass)});
  return t;
}

CollapseConfig collapse_config_from_json(const Json& j) {
  check_experiment(j, "collapse");
  CollapseConfig c;
  read_field(j, "n", c.n);
  read_field(j, "h_generators", c.h_generators);
  read_field(j, "js", c.js);
  read_field(j, "samples", c.samples);
  read_field(j, "seed", c.seed);
  read_field(j, "threads", c.threads);
  return c;
}

FejerConfig fejer_config_from_json(const Json& j) {
  check_experiment(j, "fejer");
  FejerConfig c;
  read_field(j, "n", c.n);
  read_field(j, "model", c.model);
  read_field(j, "lengths", c.lengths);
  read_field(j, "radii", c.radii);
  read_field(j, "samples", c.samples);
  read_field(j, "seed", c.seed);
  read_field(j, "threads", c.threads);
  return c;
}

ConvergenceConfig convergence_config_from_json(const Json& j) {
  check_experiment(j, "convergence");
  ConvergenceConfig c;
  read_field(j, "ns", c.ns);
  read_field(j, "theta", c.theta);
  read_field(j, "radius", c.radius);
  read_field(j, "mk_max_n", c.mk_max_n);
  read_field(j, "tol", c.tol);
  read_field(j, "threads", c.threads);
  return c;
}

BerezinConfig berezin_config_from_json(const Json& j) {
  check_experiment(j, "berezin");
  BerezinConfig c;
  read_field(j, "two_js", c.two_js);
  read_field(j, "n_theta", c.n_theta);
  read_field(j, "n_phi", c.n_phi);
  read_field(j, "samples", c.samples);
  read_field(j, "seed", c.seed);
  read_field(j, "tolerance", c.tolerance);
  read_field(j, "threads", c.threads);
  return c;
}

}  // namespace qmetric
