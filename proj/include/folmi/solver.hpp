#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "folmi/lmi.hpp"
#include "folmi/matrix.hpp"

namespace folmi {

// Strict-feasibility SDP solver for small dense problems.
//
// The problem is recast on the epigraph: minimize t subject to
//   G_k(x) <= t I   for every constraint (negdef as-is, posdef sign-flipped,
//                    per-constraint margins folded into the constant part),
//   lb_i <= x_i <= box
// and solved with a log-det barrier and damped Newton steps along the
// central path. The box keeps t* finite (the raw epigraph is unbounded
// below whenever the constraints are jointly scalable), and the verdict is
// feasible iff t* < -opts.margin. Constraint matrices are pre-scaled by
// their max-abs entry, so t is measured in per-constraint relative units.

struct SolveOptions {
  double tol = 1e-8;       // target barrier gap on t
  int max_iter = 2000;     // total Newton step cap
  double margin = 0.0;     // verdict threshold: feasible iff t* < -margin
  double box = 1e4;        // |x_i| bound (also default lower bound -box)
  double mu0 = 1.0;        // initial barrier weight
  double mu_factor = 10.0; // barrier weight growth per outer iteration
  std::optional<Vec> init; // cold-start override for x (not t)
};

enum class Verdict { Feasible, Infeasible, Indeterminate };

struct Feasibility {
  Verdict verdict = Verdict::Indeterminate;
  Vec assignment;          // interior point (min-t center), always returned
  double t_star = 0.0;     // scaled epigraph optimum
  double achieved_margin = 0.0;  // min unscaled constraint margin at assignment
  int iterations = 0;
  double residual = 0.0;   // final barrier gap estimate on t
};

namespace detail {

struct EpigraphConstraint {
  Mat g0;                       // scaled constant part (margin folded in)
  std::vector<int> var_index;   // scalar indices with nonzero coefficients
  std::vector<Mat> coeff;       // scaled coefficient matrices
  int dim = 0;
};

inline std::vector<EpigraphConstraint> build_epigraph(const LmiProblem& p) {
  std::vector<EpigraphConstraint> out;
  for (const auto& c : p.constraints()) {
    const double sign = (c.sense == Sense::NegDef) ? 1.0 : -1.0;
    EpigraphConstraint e;
    e.dim = c.expr.rows();
    e.g0 = sign * c.expr.constant_part() + c.margin * Mat::Identity(e.dim, e.dim);
    double scale = e.g0.cwiseAbs().maxCoeff();
    for (const auto& [k, m] : c.expr.terms()) scale = std::max(scale, m.cwiseAbs().maxCoeff());
    scale = std::max(scale, 1.0);
    e.g0 /= scale;
    for (const auto& [k, m] : c.expr.terms()) {
      e.var_index.push_back(k);
      e.coeff.push_back((sign / scale) * m);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace detail

inline Feasibility solve_feasibility(const LmiProblem& p, const SolveOptions& opts = {}) {
  p.require_wellformed();
  const int nx = p.vars().size();
  const auto cons = detail::build_epigraph(p);

  Vec lo = Vec::Constant(nx, -opts.box);
  Vec hi = Vec::Constant(nx, opts.box);
  for (const auto& b : p.bounds()) lo(b.index) = std::max(lo(b.index), b.lower);

  // Barrier complexity: one unit per constraint-matrix row plus one per
  // finite bound side.
  double nu = 2.0 * nx;
  for (const auto& c : cons) nu += c.dim;

  Vec x = Vec::Zero(nx);
  if (opts.init) {
    if (opts.init->size() != nx) throw DimensionError("solve_feasibility: init size mismatch");
    x = *opts.init;
  }
  for (int i = 0; i < nx; ++i)
    x(i) = std::clamp(x(i), lo(i) + 1e-3 * (hi(i) - lo(i)), hi(i) - 1e-3 * (hi(i) - lo(i)));

  auto eval_constraint = [&](const detail::EpigraphConstraint& c, const Vec& xv) {
    Mat g = c.g0;
    for (std::size_t j = 0; j < c.coeff.size(); ++j) g += xv(c.var_index[j]) * c.coeff[j];
    return g;
  };

  // t0 strictly above every lambda_max(G_k(x0)).
  double t = -1e30;
  for (const auto& c : cons) t = std::max(t, max_eig_sym(eval_constraint(c, x)));
  t += 1.0;

  struct Factored {
    Eigen::LLT<Mat> llt;
    bool ok = false;
  };
  auto factor_all = [&](const Vec& xv, double tv, std::vector<Factored>& fs) -> bool {
    fs.resize(cons.size());
    for (std::size_t k = 0; k < cons.size(); ++k) {
      Mat s = tv * Mat::Identity(cons[k].dim, cons[k].dim) - eval_constraint(cons[k], xv);
      fs[k].llt.compute(s);
      fs[k].ok = fs[k].llt.info() == Eigen::Success;
      if (!fs[k].ok) return false;
    }
    for (int i = 0; i < nx; ++i)
      if (!(xv(i) > lo(i) && xv(i) < hi(i))) return false;
    return true;
  };

  auto barrier_value = [&](const Vec& xv, double tv, const std::vector<Factored>& fs, double mu) {
    double f = mu * tv;
    for (const auto& fac : fs) {
      const Mat l = fac.llt.matrixL();
      for (Eigen::Index i = 0; i < l.rows(); ++i) f -= 2.0 * std::log(l(i, i));
    }
    for (int i = 0; i < nx; ++i) f -= std::log(xv(i) - lo(i)) + std::log(hi(i) - xv(i));
    return f;
  };

  double mu = opts.mu0;
  int total_newton = 0;
  bool capped = false;

  std::vector<Factored> fs;
  if (!factor_all(x, t, fs)) throw NumericalError("solve_feasibility: initialization failed");

  const int nv = nx + 1;  // x then t
  for (;;) {
    // Newton-center min mu*t + barrier at fixed mu.
    for (;;) {
      if (total_newton >= opts.max_iter) {
        capped = true;
        break;
      }
      Vec grad = Vec::Zero(nv);
      Mat hess = Mat::Zero(nv, nv);
      grad(nx) = mu;
      for (std::size_t k = 0; k < cons.size(); ++k) {
        const auto& c = cons[k];
        const int nk = static_cast<int>(c.coeff.size());
        // Dhat_a = L^-1 D_a L^-T for D_a in {-G_i} and D_t = I.
        std::vector<Mat> dhat(nk + 1);
        for (int a = 0; a < nk; ++a) {
          Mat tmp = fs[k].llt.matrixL().solve(-c.coeff[a]);
          dhat[a] = fs[k].llt.matrixL().solve(tmp.transpose()).transpose();
        }
        {
          Mat tmp = fs[k].llt.matrixL().solve(Mat::Identity(c.dim, c.dim));
          dhat[nk] = tmp * tmp.transpose();  // L^-1 I L^-T, matching the x coefficients
        }
        auto vidx = [&](int a) { return a < nk ? c.var_index[a] : nx; };
        for (int a = 0; a <= nk; ++a) {
          grad(vidx(a)) -= dhat[a].trace();
          for (int b = a; b <= nk; ++b) {
            const double hab = (dhat[a].array() * dhat[b].array()).sum();
            hess(vidx(a), vidx(b)) += hab;
            if (a != b) hess(vidx(b), vidx(a)) += hab;
          }
        }
      }
      for (int i = 0; i < nx; ++i) {
        const double dl = x(i) - lo(i), dh = hi(i) - x(i);
        grad(i) += -1.0 / dl + 1.0 / dh;
        hess(i, i) += 1.0 / (dl * dl) + 1.0 / (dh * dh);
      }

      Vec step;
      {
        Eigen::LDLT<Mat> ldlt(hess);
        step = -ldlt.solve(grad);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
          Mat ridged = hess + 1e-10 * hess.trace() / nv * Mat::Identity(nv, nv);
          Eigen::LDLT<Mat> retry(ridged);
          step = -retry.solve(grad);
          if (retry.info() != Eigen::Success || !step.allFinite())
            throw NumericalError("solve_feasibility: Newton system breakdown");
        }
      }
      const double decrement2 = -grad.dot(step);
      ++total_newton;
      // lambda^2 / (2 mu) estimates the centering error in t.
      if (decrement2 / 2.0 < 1e-9 * mu) break;

      // Backtracking with domain feasibility.
      const double f0 = barrier_value(x, t, fs, mu);
      double alpha = 1.0;
      bool moved = false;
      std::vector<Factored> trial_fs;
      while (alpha > 1e-14) {
        Vec xt = x + alpha * step.head(nx);
        double tt = t + alpha * step(nx);
        if (factor_all(xt, tt, trial_fs)) {
          const double ft = barrier_value(xt, tt, trial_fs, mu);
          if (ft <= f0 + 0.25 * alpha * grad.dot(step)) {
            x = xt;
            t = tt;
            fs = trial_fs;
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      // A stalled line search means double precision is exhausted at this
      // barrier weight; the mu schedule still advances, and verdict quality
      // is guarded by recheck in the callers.
      if (!moved) break;
    }
    if (capped) break;
    if (nu / mu <= opts.tol) break;
    mu *= opts.mu_factor;
  }

  Feasibility result;
  result.assignment = x;
  result.t_star = t;
  result.iterations = total_newton;
  result.residual = nu / mu;
  if (capped) {
    result.verdict = Verdict::Indeterminate;
  } else {
    result.verdict = (t < -opts.margin) ? Verdict::Feasible : Verdict::Infeasible;
  }

  double worst = 1e300;
  for (const auto& c : p.constraints()) {
    const Mat v = c.expr.eval(x);
    const double m =
        (c.sense == Sense::NegDef) ? -max_eig_sym(0.5 * (v + v.transpose()))
                                   : min_eig_sym(0.5 * (v + v.transpose()));
    worst = std::min(worst, m);
  }
  result.achieved_margin = worst;
  return result;
}

/// Sense-adjusted definiteness margin of every constraint at a candidate
/// assignment: negdef constraints report -lambda_max, posdef ones
/// lambda_min. Positive everywhere means the assignment is strictly inside.
inline std::vector<double> recheck(const LmiProblem& p, const Vec& assignment) {
  if (assignment.size() != p.vars().size())
    throw DimensionError("recheck: assignment length mismatch");
  std::vector<double> margins;
  for (const auto& c : p.constraints()) {
    const Mat v = c.expr.eval(assignment);
    const Mat s = 0.5 * (v + v.transpose());
    margins.push_back(c.sense == Sense::NegDef ? -max_eig_sym(s) : min_eig_sym(s));
  }
  return margins;
}

}  // namespace folmi
