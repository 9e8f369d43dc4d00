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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qmetric/convex.hpp"
#include "qmetric/errors.hpp"

namespace qmetric {

// ---------------------------------------------------------------- maps

Vector AffineNormMap::image(const RealVector& x) const {
  Vector v = coeffs * x.cast<cplx>();
  if (offset.size()) v += offset;
  return v;
}

namespace {

Matrix block_view(const Vector& v, Eigen::Index off, int rows, int cols) {
  return Eigen::Map<const Matrix>(v.data() + off, rows, cols);
}

double map_value(const AffineNormMap& map, const Vector& img) {
  if (map.kind == NormKind::Euclidean) return img.norm();
  double best = -std::numeric_limits<double>::infinity();
  Eigen::Index off = 0;
  for (const auto& [r, c] : map.blocks) {
    const Matrix m = block_view(img, off, r, c);
    off += static_cast<Eigen::Index>(r) * c;
    if (map.kind == NormKind::Spectral) {
      best = std::max(best, spectral_norm(m));
    } else {
      best = std::max(best, top_eigenpair((m + m.adjoint()) * 0.5).value);
    }
  }
  return best;
}

}  // namespace

double AffineNormMap::value(const RealVector& x) const { return map_value(*this, image(x)); }

RealVector AffineNormMap::subgradient(const RealVector& x) const {
  const Vector img = image(x);
  if (kind == NormKind::Euclidean) {
    const double n = img.norm();
    if (n == 0.0) return RealVector::Zero(dim());
    return (img.adjoint() * coeffs).real().transpose() / n;
  }
  // locate the block attaining the value; first index wins ties
  double best = -std::numeric_limits<double>::infinity();
  Eigen::Index best_off = 0;
  int best_r = 0;
  int best_c = 0;
  Vector u;
  Vector v;
  Eigen::Index off = 0;
  for (const auto& [r, c] : blocks) {
    const Matrix m = block_view(img, off, r, c);
    if (kind == NormKind::Spectral) {
      SingularPair sp = top_singular_pair(m);
      if (sp.value > best) {
        best = sp.value;
        best_off = off;
        best_r = r;
        best_c = c;
        u = sp.left;
        v = sp.right;
      }
    } else {
      EigenPair ep = top_eigenpair((m + m.adjoint()) * 0.5);
      if (ep.value > best) {
        best = ep.value;
        best_off = off;
        best_r = r;
        best_c = c;
        u = ep.vector;
        v = ep.vector;
      }
    }
    off += static_cast<Eigen::Index>(r) * c;
  }
  // Re(u^* C_i v) = Re(sum_{r,c} conj(u_r) v_c C_i(r,c))
  Vector w(static_cast<Eigen::Index>(best_r) * best_c);
  for (int c = 0; c < best_c; ++c)
    for (int r = 0; r < best_r; ++r) w(r + c * best_r) = std::conj(u(r)) * v(c);
  return (w.transpose() * coeffs.middleRows(best_off, w.size())).real().transpose();
}

double NormConstraint::violation(const RealVector& x) const {
  double rhs_val = rhs;
  if (rhs_coeffs.size()) rhs_val += rhs_coeffs.dot(x);
  return map.value(x) - rhs_val;
}

// ---------------------------------------------------------------- LP over cuts

namespace {

// max c.x s.t. g_j.x <= h_j (cuts) and |x_i| <= R, solved through its dual
// min h.y s.t. G^T y = c, y >= 0 by a revised primal simplex. Adding cuts or
// changing R keeps the current dual basis feasible, so solves warm start.
class CutLp {
 public:
  CutLp(int dim, RealVector objective) : m_(dim), c_(std::move(objective)) {
    for (int i = 0; i < m_; ++i) {
      rows_.push_back(RealVector::Unit(m_, i));
      rhs_.push_back(1.0);
      rows_.push_back(-RealVector::Unit(m_, i));
      rhs_.push_back(1.0);
      basis_.push_back(c_(i) >= 0 ? 2 * i : 2 * i + 1);
    }
    in_basis_.assign(rows_.size(), 0);
    idle_.assign(rows_.size(), 0);
    for (int b : basis_) in_basis_[static_cast<std::size_t>(b)] = 1;
  }

  void set_radius(double r) {
    radius_ = r;
    for (int i = 0; i < 2 * m_; ++i) rhs_[static_cast<std::size_t>(i)] = r;
  }
  double radius() const { return radius_; }

  // Returns true when the cut removes the current LP point.
  bool add_cut(const RealVector& g, double h) {
    const double n = g.norm();
    if (!(n > 1e-13)) {
      if (h < -1e-9) throw InfeasibleError("cut 0 <= negative: constraint set is empty");
      return false;
    }
    RealVector gn = g / n;
    const double hn = h / n;
    // Progress means the current LP point is cut by more than the pricing
    // threshold; weaker cuts cannot enter the basis.
    const double scale = 1.0 + std::abs(hn);
    const bool cuts_point = x_.size() != m_ || gn.dot(x_) - hn > 1e-9 * scale;
    // near-parallel duplicates make the basis ill-conditioned; keep the
    // tighter of the two right-hand sides instead unless the new row is
    // needed to cut the current point
    for (std::size_t j = 2 * static_cast<std::size_t>(m_); j < rows_.size(); ++j) {
      if ((rows_[j] - gn).lpNorm<Eigen::Infinity>() <= 1e-9 && std::abs(rhs_[j] - hn) <= 1e-9 * scale) {
        if (hn < rhs_[j]) rhs_[j] = hn;
        if (!cuts_point) return false;
        break;
      }
    }
    rows_.push_back(std::move(gn));
    rhs_.push_back(hn);
    in_basis_.push_back(0);
    idle_.push_back(0);
    return cuts_point;
  }

  // Drops cuts that have been slack and out of the basis for `max_idle`
  // consecutive solves. The relaxation only loosens, so later LP values stay
  // valid upper bounds.
  void prune(int max_idle) {
    std::vector<int> remap(rows_.size(), -1);
    std::size_t keep = 0;
    for (std::size_t j = 0; j < rows_.size(); ++j) {
      const bool box_row = j < 2 * static_cast<std::size_t>(m_);
      if (!box_row && !in_basis_[j]) {
        const double slack = rhs_[j] - rows_[j].dot(x_);
        idle_[j] = slack > 1e-9 * (1.0 + std::abs(rhs_[j])) ? idle_[j] + 1 : 0;
      } else {
        idle_[j] = 0;
      }
      if (!box_row && idle_[j] > max_idle) continue;
      remap[j] = static_cast<int>(keep);
      if (keep != j) {
        rows_[keep] = std::move(rows_[j]);
        rhs_[keep] = rhs_[j];
        in_basis_[keep] = in_basis_[j];
        idle_[keep] = idle_[j];
      }
      ++keep;
    }
    rows_.resize(keep);
    rhs_.resize(keep);
    in_basis_.resize(keep);
    idle_.resize(keep);
    for (int& b : basis_) b = remap[static_cast<std::size_t>(b)];
  }

  int cuts() const { return static_cast<int>(rows_.size()) - 2 * m_; }

  void solve() {
    int degenerate_run = 0;
    double last_objective = std::numeric_limits<double>::infinity();
    const int max_pivots = 200000;
    bool bland = false;
    // objective perturbation level; breaks degeneracy of the dual basic
    // variables, and upper_bound() stays valid for the true objective
    int level = 0;
    RealVector cvec = c_;
    const double cscale = 1.0 + c_.lpNorm<Eigen::Infinity>();
    RealMatrix bmat(m_, m_);
    for (int pivot = 0; pivot < max_pivots; ++pivot) {
      for (int i = 0; i < m_; ++i) bmat.col(i) = rows_[static_cast<std::size_t>(basis_[i])];
      Eigen::PartialPivLU<RealMatrix> lu(bmat);
      binv_ = lu.inverse();
      yb_ = binv_ * cvec;
      for (int i = 0; i < m_; ++i)
        if (yb_(i) < 0.0) yb_(i) = 0.0;
      RealVector hb(m_);
      for (int i = 0; i < m_; ++i) hb(i) = rhs_[static_cast<std::size_t>(basis_[i])];
      x_ = binv_.transpose() * hb;

      const double objective = hb.dot(yb_);
      if (objective >= last_objective - 1e-11 * (1.0 + std::abs(objective))) {
        ++degenerate_run;
      } else {
        degenerate_run = 0;
        last_objective = objective;
      }
      // Bland's rule only while the objective is stuck
      bland = degenerate_run > 50;
      if (degenerate_run > 0 && degenerate_run % 200 == 0 && level < 6) {
        ++level;
        const double eps = 1e-10 * std::pow(10.0, level) * cscale;
        for (int i = 0; i < m_; ++i)
          cvec(i) = c_(i) + eps * static_cast<double>((static_cast<unsigned>(i) * 2654435761u) % 997 + 1) / 997.0;
        last_objective = std::numeric_limits<double>::infinity();
        continue;
      }
      if (degenerate_run > 0 && degenerate_run % 1000 == 0) {
        // floating-point cycling: loosen the cuts by a tiny amount, which
        // keeps the relaxation valid while breaking ties
        for (std::size_t j = 2 * static_cast<std::size_t>(m_); j < rhs_.size(); ++j)
          rhs_[j] += 1e-10 * (1.0 + std::abs(rhs_[j])) * static_cast<double>((j * 2654435761u) % 997 + 1) / 997.0;
        continue;
      }

      int enter = -1;
      double best = 0.0;
      for (std::size_t j = 0; j < rows_.size(); ++j) {
        if (in_basis_[j]) continue;
        const double d = rhs_[j] - rows_[j].dot(x_);
        if (d < -1e-9 * (1.0 + std::abs(rhs_[j])) && d < best) {
          enter = static_cast<int>(j);
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return;

      const RealVector w = binv_ * rows_[static_cast<std::size_t>(enter)];
      // Harris two-pass ratio test: bound the step with slightly relaxed
      // ratios, then take the largest pivot element within that step
      const double piv_tol = 1e-9 * std::max(1.0, w.lpNorm<Eigen::Infinity>());
      double step = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i)
        if (w(i) > piv_tol) step = std::min(step, (yb_(i) + 1e-12) / w(i));
      int leave = -1;
      for (int i = 0; i < m_; ++i) {
        if (w(i) <= piv_tol || yb_(i) / w(i) > step) continue;
        if (leave < 0) {
          leave = i;
        } else if (bland) {
          if (basis_[i] < basis_[leave]) leave = i;
        } else if (w(i) > w(leave) || (w(i) == w(leave) && basis_[i] < basis_[leave])) {
          leave = i;
        }
      }
      if (leave < 0) throw InfeasibleError("cutting-plane relaxation is infeasible");
      in_basis_[static_cast<std::size_t>(basis_[leave])] = 0;
      basis_[leave] = enter;
      in_basis_[static_cast<std::size_t>(enter)] = 1;
    }
    throw SolverError("simplex pivot limit exceeded");
  }

  const RealVector& x() const { return x_; }
  double value() const { return c_.dot(x_); }

  // Weak-duality bound on max c.x over the cuts and the box: with
  // c = sum_B y_i g_i, each term is at most y_i h_i when y_i >= 0 and at
  // most |y_i| |g_i|_1 R otherwise.
  double upper_bound() const {
    const RealVector y = binv_ * c_;
    double ub = 0.0;
    for (int i = 0; i < m_; ++i) {
      const auto j = static_cast<std::size_t>(basis_[i]);
      ub += y(i) >= 0.0 ? y(i) * rhs_[j] : -y(i) * rows_[j].lpNorm<1>() * radius_;
    }
    return std::max(ub, value());
  }

  // True when the box carries positive dual weight, i.e. the LP optimum may
  // depend on the radius.
  bool box_binding() const {
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < 2 * m_ && yb_(i) > 1e-12) return true;
    return false;
  }

 private:
  int m_;
  RealVector c_;
  double radius_ = 1.0;
  std::vector<RealVector> rows_;
  std::vector<double> rhs_;
  std::vector<int> basis_;
  std::vector<char> in_basis_;
  std::vector<int> idle_;
  RealVector yb_;
  RealVector x_;
  RealMatrix binv_;
};

struct KelleyProblem {
  int dim = 0;
  RealVector objective;
  double objective_constant = 0.0;
  std::vector<NormConstraint> constraints;
  std::vector<char> repairable;
  std::optional<RealVector> anchor;
  // objective value at a point satisfying the repairable constraints
  std::function<double(const RealVector&)> feasible_value;
};

void add_cut_at(CutLp& lp, const NormConstraint& con, const RealVector& z, bool& added) {
  RealVector s = con.map.subgradient(z);
  const double f = con.violation(z);
  if (con.rhs_coeffs.size()) s -= con.rhs_coeffs;
  if (lp.add_cut(s, s.dot(z) - f)) added = true;
}

// Largest theta in [0,1] with the constraint satisfied at a + theta (z - a),
// given it holds strictly at a and fails at z.
double boundary_step(const NormConstraint& con, const RealVector& a, const RealVector& z,
                     bool homogeneous) {
  if (homogeneous) {
    const double v = con.map.value(z);
    return std::clamp(con.rhs / v, 0.0, 1.0);
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (con.violation(a + mid * (z - a)) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

SolveReport run_kelley(const KelleyProblem& p, const SolveOptions& opt) {
  SolveReport rep;
  const int m = p.dim;
  auto objective_at = [&](const RealVector& z) {
    return p.feasible_value ? p.feasible_value(z) : p.objective.dot(z) + p.objective_constant;
  };
  if (m == 0) {
    const RealVector z(0);
    for (const auto& con : p.constraints)
      rep.violation = std::max(rep.violation, con.violation(z));
    rep.value = rep.lower = rep.upper = objective_at(z);
    rep.x = z;
    rep.relaxed_x = z;
    rep.certified = rep.violation <= opt.tol;
    return rep;
  }

  bool homogeneous = !p.anchor || p.anchor->lpNorm<Eigen::Infinity>() == 0.0;
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    const auto& con = p.constraints[j];
    if (!p.repairable[j]) continue;
    if ((con.map.offset.size() && con.map.offset.cwiseAbs().maxCoeff() != 0.0) ||
        (con.rhs_coeffs.size() && con.rhs_coeffs.cwiseAbs().maxCoeff() != 0.0) ||
        con.map.kind == NormKind::MaxEigen || !(con.rhs > 0.0))
      homogeneous = false;
  }

  CutLp lp(m, p.objective);
  double radius = 1.0;
  lp.set_radius(radius);
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  RealVector best;
  const int ncon = static_cast<int>(p.constraints.size());
  // iterations without gap progress after which a small gap is accepted
  constexpr int kStallWindow = 500;
  // solves a cut may stay slack and nonbasic before it is dropped
  constexpr int kMaxIdle = 40;
  double best_gap = std::numeric_limits<double>::infinity();
  int last_progress = 0;

  for (int it = 1; it <= opt.max_iterations; ++it) {
    try {
      lp.solve();
    } catch (const InfeasibleError&) {
      // valid cuts can contradict a box that is still too small
      radius *= 2.0;
      if (radius > opt.max_box) throw;
      lp.set_radius(radius);
      continue;
    }
    lp.prune(kMaxIdle);
    const RealVector z = lp.x();
    const bool box = lp.box_binding();
    const double ub = lp.upper_bound() + p.objective_constant;
    if (!box) upper = std::min(upper, ub);
    rep.relaxed_x = z;
    rep.iterations = it;

    bool added = false;
    std::vector<double> viol(static_cast<std::size_t>(ncon));
    bool all_repairable_ok = true;
    for (int j = 0; j < ncon; ++j) {
      const auto& con = p.constraints[static_cast<std::size_t>(j)];
      viol[static_cast<std::size_t>(j)] = con.violation(z);
      if (viol[static_cast<std::size_t>(j)] > 1e-13) add_cut_at(lp, con, z, added);
      if (p.repairable[static_cast<std::size_t>(j)] && viol[static_cast<std::size_t>(j)] > 0.0)
        all_repairable_ok = false;
    }

    // repair the iterate into a feasible point
    std::optional<RealVector> feasible;
    if (all_repairable_ok) {
      feasible = z;
    } else if (p.anchor) {
      double theta = 1.0;
      for (int j = 0; j < ncon; ++j) {
        const auto& con = p.constraints[static_cast<std::size_t>(j)];
        if (!p.repairable[static_cast<std::size_t>(j)] || viol[static_cast<std::size_t>(j)] <= 0.0)
          continue;
        const double tj = boundary_step(con, *p.anchor, z, homogeneous);
        theta = std::min(theta, tj);
        // tangent cut at the constraint's own boundary point
        add_cut_at(lp, con, *p.anchor + tj * (z - *p.anchor), added);
      }
      feasible = *p.anchor + theta * (z - *p.anchor);
    }
    if (feasible) {
      const double v = objective_at(*feasible);
      if (v > lower) {
        lower = v;
        best = *feasible;
      }
    }

    if (opt.trace) rep.trace.push_back({it, lower, upper, lp.cuts(), radius});

    if (!box && upper - lower <= opt.tol * std::max(1.0, std::abs(upper))) {
      rep.certified = true;
      break;
    }
    if (!box && upper - lower < best_gap * (1.0 - 1e-6)) {
      best_gap = upper - lower;
      last_progress = it;
    }
    if (!box && it - last_progress > kStallWindow &&
        upper - lower <= opt.stall_gap * std::max(1.0, std::abs(upper)))
      break;
    if (box && !added) {
      radius *= 2.0;
      if (radius > opt.max_box)
        throw SolverError("feasible region appears unbounded (box radius cap reached)");
      lp.set_radius(radius);
      continue;
    }
    if (!added) {
      // the LP cannot resolve finer cuts; valid bounds are returned uncertified
      if (!box && std::isfinite(upper - lower)) break;
      std::ostringstream msg;
      msg << "cutting-plane loop stalled with gap " << (upper - lower);
      throw SolverError(msg.str());
    }
  }
  if (!rep.certified && !std::isfinite(upper - lower)) {
    std::ostringstream msg;
    msg << "cutting-plane iteration cap reached with gap " << (upper - lower);
    throw SolverError(msg.str());
  }
  rep.lower = lower;
  rep.upper = upper;
  rep.gap = std::max(0.0, upper - lower);
  rep.value = lower;
  rep.x = best;
  rep.cuts = lp.cuts();
  rep.box_radius = radius;
  for (int j = 0; j < ncon; ++j)
    if (p.repairable[static_cast<std::size_t>(j)])
      rep.violation = std::max(rep.violation, p.constraints[static_cast<std::size_t>(j)].violation(best));
  return rep;
}

struct Reduction {
  RealVector x0;
  RealMatrix n;  // orthonormal columns
};

Reduction reduce_equalities(int dim, const RealMatrix& e, const RealVector& f) {
  Reduction r;
  if (e.rows() == 0) {
    r.x0 = RealVector::Zero(dim);
    r.n = RealMatrix::Identity(dim, dim);
    return r;
  }
  if (e.cols() != dim || f.size() != e.rows())
    throw ValidationError("equality system has inconsistent dimensions");
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(e);
  cod.setThreshold(1e-12);
  r.x0 = cod.solve(f);
  const double res = (e * r.x0 - f).norm();
  if (res > 1e-8 * std::max(1.0, f.norm())) throw ValidationError("inconsistent equality constraints");
  r.n = null_space(e, 1e-10);
  return r;
}

NormConstraint reduce_constraint(const NormConstraint& con, const Reduction& r) {
  NormConstraint out;
  out.map.kind = con.map.kind;
  out.map.blocks = con.map.blocks;
  out.map.coeffs = con.map.coeffs * r.n.cast<cplx>();
  out.map.offset = con.map.coeffs * r.x0.cast<cplx>();
  if (con.map.offset.size()) out.map.offset += con.map.offset;
  out.rhs = con.rhs;
  if (con.rhs_coeffs.size()) {
    out.rhs += con.rhs_coeffs.dot(r.x0);
    out.rhs_coeffs = r.n.transpose() * con.rhs_coeffs;
  }
  return out;
}

void check_map(const AffineNormMap& map, int dim) {
  if (map.coeffs.cols() != dim) throw ValidationError("constraint map dimension mismatch");
  Eigen::Index entries = 0;
  for (const auto& [r, c] : map.blocks) {
    if (r < 1 || c < 1) throw ValidationError("constraint block sizes must be positive");
    if (map.kind == NormKind::MaxEigen && r != c) throw ValidationError("eigenvalue blocks must be square");
    entries += static_cast<Eigen::Index>(r) * c;
  }
  if (map.kind == NormKind::Euclidean && map.blocks.size() != 1)
    throw ValidationError("Euclidean maps have a single output column");
  if (entries != map.coeffs.rows()) throw ValidationError("constraint block sizes do not match map");
  if (map.offset.size() && map.offset.size() != entries) throw ValidationError("offset length mismatch");
}

std::optional<RealVector> reduced_anchor(const std::optional<RealVector>& anchor, const Reduction& r,
                                         const RealMatrix& e, const RealVector& f) {
  if (!anchor) return std::nullopt;
  if (anchor->size() != r.x0.size()) throw ValidationError("anchor dimension mismatch");
  if (e.rows() && (e * *anchor - f).norm() > 1e-8 * std::max(1.0, f.norm()))
    throw ValidationError("anchor violates the equality constraints");
  return RealVector(r.n.transpose() * (*anchor - r.x0));
}

}  // namespace

SolveReport maximize_linear(const NormProgram& program, const SolveOptions& options) {
  if (program.objective.size() != program.dim) throw ValidationError("objective dimension mismatch");
  for (const auto& con : program.constraints) check_map(con.map, program.dim);
  const Reduction red = reduce_equalities(program.dim, program.eq_matrix, program.eq_rhs);

  KelleyProblem kp;
  kp.dim = static_cast<int>(red.n.cols());
  kp.objective = red.n.transpose() * program.objective;
  kp.objective_constant = program.objective.dot(red.x0);
  for (const auto& con : program.constraints) kp.constraints.push_back(reduce_constraint(con, red));
  kp.repairable.assign(kp.constraints.size(), 1);
  kp.anchor = reduced_anchor(program.anchor, red, program.eq_matrix, program.eq_rhs);
  if (!kp.anchor) {
    const RealVector zero = RealVector::Zero(kp.dim);
    bool strict = true;
    for (const auto& con : kp.constraints) strict = strict && con.violation(zero) < -1e-12;
    if (strict) kp.anchor = zero;
  }
  SolveReport rep = run_kelley(kp, options);
  rep.x = red.x0 + red.n * rep.x;
  rep.relaxed_x = red.x0 + red.n * rep.relaxed_x;
  return rep;
}

SolveReport minimize_max_norm(const MinMaxProgram& program, const SolveOptions& options) {
  if (program.objective_maps.empty()) throw ValidationError("no maps to minimize");
  for (const auto& m : program.objective_maps) check_map(m, program.dim);
  for (const auto& con : program.constraints) check_map(con.map, program.dim);
  const Reduction red = reduce_equalities(program.dim, program.eq_matrix, program.eq_rhs);
  const int k = static_cast<int>(red.n.cols());

  // variables (z, t): maximize -t with value_j(z) <= t
  auto lift = [&](const NormConstraint& con, bool epigraph) {
    NormConstraint c = reduce_constraint(con, red);
    c.map.coeffs.conservativeResize(Eigen::NoChange, k + 1);
    c.map.coeffs.col(k).setZero();
    RealVector g = RealVector::Zero(k + 1);
    if (c.rhs_coeffs.size()) g.head(k) = c.rhs_coeffs;
    if (epigraph) g(k) = 1.0;
    c.rhs_coeffs = g;
    return c;
  };

  KelleyProblem kp;
  kp.dim = k + 1;
  kp.objective = -RealVector::Unit(k + 1, k);
  std::vector<NormConstraint> obj_maps;
  for (const auto& m : program.objective_maps) {
    NormConstraint c;
    c.map = m;
    c.rhs = 0.0;
    obj_maps.push_back(reduce_constraint(c, red));
    kp.constraints.push_back(lift(c, true));
    kp.repairable.push_back(0);
  }
  for (const auto& con : program.constraints) {
    kp.constraints.push_back(lift(con, false));
    kp.repairable.push_back(1);
  }
  kp.feasible_value = [&obj_maps, k](const RealVector& zt) {
    const RealVector z = zt.head(k);
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& c : obj_maps) v = std::max(v, c.map.value(z));
    return -v;
  };
  std::optional<RealVector> za = reduced_anchor(program.anchor, red, program.eq_matrix, program.eq_rhs);
  if (!za) {
    const RealVector zero = RealVector::Zero(k);
    bool strict = true;
    for (const auto& con : program.constraints)
      strict = strict && reduce_constraint(con, red).violation(zero) < -1e-12;
    if (strict) za = zero;
  }
  if (za) {
    RealVector a(k + 1);
    a.head(k) = *za;
    a(k) = 0.0;
    kp.anchor = a;
  } else if (!program.constraints.empty()) {
    throw ValidationError("minimization with hard constraints needs a strictly feasible anchor");
  }

  SolveReport rep = run_kelley(kp, options);
  const double lo = -rep.upper;
  const double hi = -rep.lower;
  rep.lower = lo;
  rep.upper = hi;
  rep.value = hi;
  rep.x = red.x0 + red.n * RealVector(rep.x.head(k));
  rep.relaxed_x = red.x0 + red.n * RealVector(rep.relaxed_x.head(k));
  for (auto& t : rep.trace) {
    const double l = -t.upper;
    t.upper = -t.lower;
    t.lower = l;
  }
  return rep;
}

}  // namespace qmetric
