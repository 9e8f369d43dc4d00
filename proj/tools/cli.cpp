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


#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "qmetric/errors.hpp"
#include "qmetric/experiments.hpp"
#include "qmetric/io.hpp"
#include "qmetric/metric.hpp"
#include "qmetric/parallel.hpp"
#include "qmetric/tunnel.hpp"

namespace qmetric::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitSolver = 3;

struct RunConfig {
  double tol = 1e-7;
  std::uint64_t seed = 0;
  int samples = -1;  // -1: command default
  int net = -1;      // -1: command default
  int threads = 0;   // 0: default_thread_count()
  std::string out;
  std::string trace;

  int thread_count() const { return threads > 0 ? threads : default_thread_count(); }
  int samples_or(int fallback) const { return samples >= 0 ? samples : fallback; }

  EstimateOptions estimate() const {
    EstimateOptions o;
    if (net >= 0) o.net = net;
    o.seed = seed;
    o.tol = tol;
    o.threads = thread_count();
    return o;
  }

  SolveOptions solve() const {
    SolveOptions o;
    o.tol = tol;
    o.trace = !trace.empty();
    return o;
  }
};

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::vector<std::string> bound_row(const std::string& name, const Bound& b) {
  return {name, format_number(b.lower), format_number(b.upper), bool_text(b.certified)};
}

// A scalar on stdout; integral values keep a trailing ".0".
std::string scalar_text(double x) {
  std::string s = format_number(x);
  if (s.find_first_of(".eni") == std::string::npos) s += ".0";
  return s;
}

// The table goes to --out when given, otherwise to stdout.
void emit(const RunConfig& rc, const Table& table, std::ostream& out) {
  if (rc.out.empty())
    write_csv(out, table);
  else
    write_csv_file(rc.out, table);
}

void write_trace(const RunConfig& rc, const Json& j) {
  if (rc.trace.empty()) return;
  std::ofstream f(rc.trace);
  if (!f) throw ValidationError("cannot write " + rc.trace);
  f << j.dump(2) << '\n';
}

void validate(const RunConfig& rc) {
  if (!(rc.tol > 0.0 && rc.tol <= 1e-2)) throw ValidationError("--tol must lie in (0, 1e-2]");
  if (rc.threads < 0) throw ValidationError("--threads must be >= 1");
  if (rc.samples < -1) throw ValidationError("--samples must be >= 0");
  if (rc.net < -1) throw ValidationError("--net must be >= 0");
}

double distance_command(const RunConfig& rc, const std::string& space_path, const std::string& phi_name,
                        const std::string& psi_name, std::optional<double> r, std::ostream& out) {
  const LoadedSpace space = load_space(read_json_file(space_path));
  const State phi = resolve_state(space, phi_name);
  const State psi = resolve_state(space, psi_name);
  const DistanceResult d = r ? bl_distance_report(space.lipnorm, *r, phi, psi, rc.solve())
                             : mk_distance_report(space.lipnorm, phi, psi, rc.solve());
  if (!d.report.certified) throw SolverError("distance solve did not reach the requested tolerance");
  out << scalar_text(d.value) << '\n';
  if (!rc.out.empty()) {
    Table t{{"phi", "psi", "lower", "upper", "certified"}, {}};
    t.add_row({phi_name, psi_name, format_number(d.value), format_number(d.upper), bool_text(d.report.certified)});
    write_csv_file(rc.out, t);
  }
  write_trace(rc, solve_report_to_json(d.report));
  return d.value;
}

double default_radius(const RunConfig& rc, const Seminorm& L) {
  if (L.diameter_certificate()) return *L.diameter_certificate();
  return diameter_bounds(L, rc.net >= 0 ? rc.net : 8, rc.seed, rc.tol, rc.thread_count()).upper;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum metric geometry on finite-dimensional C*-algebras", "qmetric"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig rc;
  app.add_option("--tol", rc.tol, "solver tolerance in (0, 1e-2]")->capture_default_str();
  app.add_option("--seed", rc.seed, "random seed")->capture_default_str();
  app.add_option("--samples", rc.samples, "sample count (command default when omitted)");
  app.add_option("--net", rc.net, "random pure states per state-space net");
  app.add_option("--threads", rc.threads, "worker threads (QMETRIC_THREADS or hardware by default)");
  app.add_option("--out", rc.out, "CSV output path");
  app.add_option("--trace", rc.trace, "solver trace JSON path");

  std::function<int()> action;

  // mk / bl
  std::string space_path, phi_name, psi_name;
  std::optional<double> radius;
  auto* mk = app.add_subcommand("mk", "Monge-Kantorovich distance between two states");
  auto* bl = app.add_subcommand("bl", "bounded-Lipschitz distance between two states");
  for (auto* sc : {mk, bl}) {
    sc->add_option("--space", space_path, "space JSON")->required();
    sc->add_option("--phi", phi_name, "first state")->required();
    sc->add_option("--psi", psi_name, "second state")->required();
  }
  bl->add_option("--r", radius, "norm cut-off (certified diameter by default)");
  mk->callback([&] {
    action = [&] {
      distance_command(rc, space_path, phi_name, psi_name, std::nullopt, out);
      return kExitOk;
    };
  });
  bl->callback([&] {
    action = [&] {
      if (!radius) {
        const LoadedSpace space = load_space(read_json_file(space_path));
        radius = default_radius(rc, space.lipnorm);
      }
      if (!(*radius > 0.0)) throw ValidationError("--r must be positive");
      distance_command(rc, space_path, phi_name, psi_name, radius, out);
      return kExitOk;
    };
  });

  // bridge-length / tunnel
  std::string bridge_path;
  std::optional<double> lambda;
  auto* blen = app.add_subcommand("bridge-length", "reach, height and length bounds of a bridge");
  auto* tun = app.add_subcommand("tunnel", "tunnel built from a bridge and its quantities");
  for (auto* sc : {blen, tun}) sc->add_option("--bridge", bridge_path, "bridge JSON")->required();
  tun->add_option("--lambda", lambda, "tunnel parameter (10x heuristic bridge length by default)");
  blen->callback([&] {
    action = [&] {
      const LoadedBridge b = load_bridge(read_json_file(bridge_path));
      const BridgeLength len = bridge_length_bounds(b.bridge, b.la, b.lb, rc.estimate());
      Table t{{"quantity", "lower", "upper", "certified"}, {}};
      t.add_row(bound_row("reach", len.reach));
      t.add_row(bound_row("height", len.height));
      t.add_row(bound_row("length", len.length));
      emit(rc, t, out);
      return kExitOk;
    };
  });
  tun->callback([&] {
    action = [&] {
      const LoadedBridge b = load_bridge(read_json_file(bridge_path));
      const EstimateOptions eo = rc.estimate();
      double lam = 0.0;
      if (lambda) {
        lam = *lambda;
      } else {
        const BridgeLength len = bridge_length_bounds(b.bridge, b.la, b.lb, eo);
        lam = 10.0 * std::max(len.length.upper, 1e-3);
      }
      const Tunnel t = tunnel_from_bridge(b.bridge, b.la, b.lb, lam, rc.samples_or(20), rc.seed);
      const TunnelQuantities q = tunnel_quantities(t, eo);
      Table tab{{"quantity", "lower", "upper", "certified"}, {}};
      tab.add_row({"lambda", format_number(lam), format_number(lam), "true"});
      tab.add_row(bound_row("reach", q.reach));
      tab.add_row(bound_row("depth", q.depth));
      tab.add_row(bound_row("length", q.length));
      tab.add_row(bound_row("extent", q.extent));
      const IsometryCheck& iso = t.isometry();
      tab.add_row({"isometry_margin", format_number(iso.worst_margin), format_number(iso.worst_margin),
                   bool_text(iso.pass)});
      emit(rc, tab, out);
      return iso.pass ? kExitOk : kExitCheckFailed;
    };
  });

  // propinquity-bound
  std::string treks_path;
  auto* prop = app.add_subcommand("propinquity-bound", "propinquity upper bound from treks");
  prop->add_option("--treks", treks_path, "treks JSON")->required();
  prop->callback([&] {
    action = [&] {
      const std::vector<Trek> treks = load_treks(read_json_file(treks_path), rc.estimate());
      Table t{{"trek", "steps", "lower", "upper", "certified"}, {}};
      for (std::size_t i = 0; i < treks.size(); ++i) {
        const Bound b = trek_length(treks[i]);
        t.add_row({std::to_string(i), std::to_string(treks[i].steps().size()), format_number(b.lower),
                   format_number(b.upper), bool_text(b.certified)});
      }
      const std::optional<double> best = propinquity_upper_bound(treks);
      const std::string v = best ? format_number(*best) : format_number(std::numeric_limits<double>::quiet_NaN());
      t.add_row({"best", "", "0", v, bool_text(best.has_value())});
      emit(rc, t, out);
      return kExitOk;
    };
  });

  // check
  std::string lipnorm_path;
  double fc = 1.0, fd = 0.0;
  auto* check = app.add_subcommand("check", "property checks on a Lip-norm");
  check->require_subcommand(1);
  auto* leib = check->add_subcommand("leibniz", "sampled quasi-Leibniz check");
  auto* kern = check->add_subcommand("kernel", "joint kernel dimension on self-adjoints");
  for (auto* sc : {leib, kern}) sc->add_option("--lipnorm", lipnorm_path, "seminorm JSON")->required();
  leib->add_option("--c", fc, "Leibniz constant C")->capture_default_str();
  leib->add_option("--d", fd, "Leibniz constant D")->capture_default_str();
  leib->callback([&] {
    action = [&] {
      const Seminorm L = seminorm_from_json(read_json_file(lipnorm_path));
      const LeibnizReport r =
          check_quasi_leibniz(L, PermissibleF(fc, fd), rc.samples_or(1000), rc.seed, rc.thread_count());
      Table t{{"seminorm", "samples", "worst_margin", "status"}, {}};
      t.add_row({L.name(), std::to_string(r.samples), format_number(r.worst_margin), r.pass ? "pass" : "fail"});
      emit(rc, t, out);
      return r.pass ? kExitOk : kExitCheckFailed;
    };
  });
  kern->callback([&] {
    action = [&] {
      const Seminorm L = seminorm_from_json(read_json_file(lipnorm_path));
      const int k = L.kernel_dim();
      Table t{{"seminorm", "kernel_dim", "status"}, {}};
      t.add_row({L.name(), std::to_string(k), k == 1 ? "pass" : "fail"});
      emit(rc, t, out);
      return k == 1 ? kExitOk : kExitCheckFailed;
    };
  });

  // experiments
  auto* exp = app.add_subcommand("experiment", "experiment drivers");
  exp->require_subcommand(1);
  std::string config_path;
  auto load_config = [&](const std::function<void(const Json&)>& apply) {
    if (!config_path.empty()) apply(read_json_file(config_path));
  };

  int cN = 2, cM = 3, cd = 1;
  std::vector<int> cm = {1}, ck;
  double ctheta = 0.0;
  bool sweep = false;
  int max_nm = 5, max_m = 6;
  auto* ecomm = exp->add_subcommand("commutator", "commutator bound for the weight operator");
  ecomm->add_option("--N", cN, "window parameter N")->capture_default_str();
  ecomm->add_option("--M", cM, "window parameter M")->capture_default_str();
  ecomm->add_option("--d", cd, "lattice dimension")->capture_default_str();
  ecomm->add_option("--m", cm, "frequency (d integers)")->delimiter(',');
  ecomm->add_option("--k", ck, "orders (d integers, 0 for infinite; infinite when omitted)")->delimiter(',');
  ecomm->add_option("--theta", ctheta, "rotation for finite orders")->capture_default_str();
  ecomm->add_flag("--sweep", sweep, "exhaustive sweep over N, M, m");
  ecomm->add_option("--max-nm", max_nm, "sweep bound on N and M")->capture_default_str();
  ecomm->add_option("--max-m", max_m, "sweep bound on |m|")->capture_default_str();
  ecomm->callback([&] {
    action = [&] {
      if (sweep) {
        const Table t = commutator_sweep(max_nm, max_m, rc.thread_count());
        emit(rc, t, out);
        const auto bad = std::count_if(t.rows.begin(), t.rows.end(), [](const auto& r) { return r.back() != "pass"; });
        return bad == 0 ? kExitOk : kExitCheckFailed;
      }
      if (ck.empty()) ck.assign(static_cast<std::size_t>(std::max(cd, 0)), 0);
      const Table t = commutator_table(cN, cM, cd, cm, ck, ctheta);
      emit(rc, t, out);
      return t.rows.back().back() == "pass" ? kExitOk : kExitCheckFailed;
    };
  });

  std::optional<int> opt_n;
  auto* ecol = exp->add_subcommand("collapse", "dimensional collapse of group-action Lip-norms");
  auto* efej = exp->add_subcommand("fejer", "Fejer kernel contract on finite tori");
  auto* econv = exp->add_subcommand("convergence", "fuzzy tori against the limit rotation");
  auto* eber = exp->add_subcommand("berezin", "Berezin quantization of the sphere");
  for (auto* sc : {ecol, efej, econv, eber}) sc->add_option("--config", config_path, "experiment config JSON");
  for (auto* sc : {ecol, efej}) sc->add_option("--n", opt_n, "torus size");
  std::optional<std::string> opt_model, opt_lengths;
  efej->add_option("--model", opt_model, "fuzzy or commutative");
  efej->add_option("--lengths", opt_lengths, "torus or word");
  std::optional<double> opt_theta;
  std::optional<int> opt_radius, opt_mk_max;
  std::vector<int> opt_ns;
  econv->add_option("--theta", opt_theta, "limit rotation");
  econv->add_option("--radius", opt_radius, "Fejer radius (0: cube-root schedule)");
  econv->add_option("--mk-max-n", opt_mk_max, "largest n with mk columns");
  econv->add_option("--ns", opt_ns, "torus sizes")->delimiter(',');

  auto seed_given = [&] { return app.count("--seed") > 0; };

  ecol->callback([&] {
    action = [&] {
      CollapseConfig c;
      load_config([&](const Json& j) { c = collapse_config_from_json(j); });
      if (opt_n) c.n = *opt_n;
      if (rc.samples >= 0) c.samples = rc.samples;
      if (seed_given()) c.seed = rc.seed;
      c.threads = rc.thread_count();
      const Table t = collapse_table(c);
      emit(rc, t, out);
      return kExitOk;
    };
  });
  efej->callback([&] {
    action = [&] {
      FejerConfig c;
      load_config([&](const Json& j) { c = fejer_config_from_json(j); });
      if (opt_n) c.n = *opt_n;
      if (opt_model) c.model = *opt_model;
      if (opt_lengths) c.lengths = *opt_lengths;
      if (rc.samples >= 0) c.samples = rc.samples;
      if (seed_given()) c.seed = rc.seed;
      c.threads = rc.thread_count();
      const Table t = fejer_table(c);
      emit(rc, t, out);
      return kExitOk;
    };
  });
  econv->callback([&] {
    action = [&] {
      ConvergenceConfig c;
      load_config([&](const Json& j) { c = convergence_config_from_json(j); });
      if (opt_theta) c.theta = *opt_theta;
      if (opt_radius) c.radius = *opt_radius;
      if (opt_mk_max) c.mk_max_n = *opt_mk_max;
      if (!opt_ns.empty()) c.ns = opt_ns;
      if (app.count("--tol") > 0) c.tol = rc.tol;
      c.threads = rc.thread_count();
      const ConvergenceResult r = convergence_experiment(c);
      emit(rc, r.table, out);
      err << "burn-in row: " << r.burn_in << '\n';
      return kExitOk;
    };
  });
  eber->callback([&] {
    action = [&] {
      BerezinConfig c;
      load_config([&](const Json& j) { c = berezin_config_from_json(j); });
      if (rc.samples >= 0) c.samples = rc.samples;
      if (seed_given()) c.seed = rc.seed;
      c.threads = rc.thread_count();
      const Table t = berezin_table(c);
      emit(rc, t, out);
      const bool ok = std::all_of(t.rows.begin(), t.rows.end(), [](const auto& r) { return r.back() == "pass"; });
      return ok ? kExitOk : kExitCheckFailed;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    validate(rc);
    if (!action) throw ValidationError("no command given");
    return action();
  } catch (const InfeasibleError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace qmetric::cli
