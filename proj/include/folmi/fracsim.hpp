#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "folmi/matrix.hpp"
#include "folmi/model.hpp"

namespace folmi {

// Caputo-dynamics simulation: Adams-Bashforth-Moulton predictor-corrector
// with full (untruncated) memory, plus the Mittag-Leffler series used as the
// exact-solution oracle for the scalar linear test problem.

/// E_q(z) = sum_k z^k / Gamma(q k + 1), truncated when a term drops below
/// 1e-16 of the partial sum. Desk range only; term growth past the guard
/// reports a numerical failure rather than returning garbage.
inline double mittag_leffler(double q, double z) {
  if (!(q > 0.0 && q <= 1.0)) throw DimensionError("mittag_leffler: need 0 < q <= 1");
  if (!(std::abs(z) <= 50.0)) throw DomainError("mittag_leffler: |z| exceeds supported range 50");
  double sum = 1.0;  // k = 0
  double peak = 1.0;
  const double lz = std::log(std::abs(z));
  if (z == 0.0) return 1.0;
  for (int k = 1; k < 100000; ++k) {
    const double lt = k * lz - std::lgamma(q * k + 1.0);
    if (lt > 280.0) throw NumericalError("mittag_leffler: series term overflow");
    double term = std::exp(lt);
    if (z < 0.0 && (k & 1)) term = -term;
    sum += term;
    peak = std::max(peak, std::abs(term));
    if (std::abs(term) < 1e-16 * std::max(std::abs(sum), 1e-300) && k > 2 &&
        std::abs(term) < peak)
      return sum;
  }
  throw NumericalError("mittag_leffler: series did not converge");
}

using VectorField = std::function<Vec(double, const Vec&)>;

struct CaputoSolution {
  std::vector<double> t;
  Mat states;      // one row per grid point
  bool diverged = false;
};

/// Predictor-corrector scheme for D^q x = f(t, x), x(0) = x0, 0 < q < 1,
/// uniform step h on [0, T]. One corrector pass, history re-evaluated at the
/// corrected state. Non-finite or astronomically large states truncate the
/// trajectory with the divergence flag set; that is a legitimate outcome for
/// unstable dynamics, not an error.
inline CaputoSolution integrate_caputo(const VectorField& f, double q, const Vec& x0, double T,
                                       double h) {
  if (!(q > 0.0 && q < 1.0)) throw DimensionError("integrate_caputo: need 0 < q < 1");
  if (!(h > 0.0) || !(T >= h)) throw DimensionError("integrate_caputo: need h > 0 and T >= h");
  const int N = static_cast<int>(std::llround(T / h));
  const int d = static_cast<int>(x0.size());

  // Weight tables, stored reversed so the history convolution walks both
  // arrays forward: brev[N+1-k] = k^q - (k-1)^q, crev[N+1-k] = corrector kernel.
  std::vector<double> kq(N + 2), kq1(N + 2);
  for (int k = 0; k <= N + 1; ++k) {
    kq[k] = std::pow(static_cast<double>(k), q);
    kq1[k] = std::pow(static_cast<double>(k), q + 1.0);
  }
  std::vector<double> brev(N + 2, 0.0), crev(N + 2, 0.0);
  for (int k = 1; k <= N + 1; ++k) brev[N + 1 - k] = kq[k] - kq[k - 1];
  for (int k = 1; k <= N; ++k) crev[N + 1 - k] = kq1[k + 1] + kq1[k - 1] - 2.0 * kq1[k];

  const double cg = std::pow(h, q) / std::tgamma(q + 1.0);
  const double cg2 = std::pow(h, q) / std::tgamma(q + 2.0);

  Mat hist(N + 1, d);   // f samples, component-contiguous columns
  Mat xs(N + 1, d);
  xs.row(0) = x0.transpose();
  hist.row(0) = f(0.0, x0).transpose();

  CaputoSolution sol;
  for (int n = 0; n < N; ++n) {
    Vec pred = x0, corr = x0;
    const int len = n + 1;
    const int off = N - n;
    for (int c = 0; c < d; ++c) {
      Eigen::Map<const Vec> fc(hist.col(c).data(), len);
      Eigen::Map<const Vec> wb(brev.data() + off, len);
      Eigen::Map<const Vec> wc(crev.data() + off, len);
      pred(c) += cg * wb.dot(fc);
      corr(c) += cg2 * wc.dot(fc);
    }
    // j = 0 uses the special corrector weight instead of the kernel value.
    const double a0 = kq1[n] - (n - q) * kq[n + 1];
    corr += cg2 * (a0 - crev[off]) * hist.row(0).transpose();
    const double tn1 = (n + 1) * h;
    corr += cg2 * f(tn1, pred);
    xs.row(n + 1) = corr.transpose();
    if (!corr.allFinite() || corr.cwiseAbs().maxCoeff() > 1e10) {
      sol.diverged = true;
      xs.conservativeResize(n + 2, d);
      break;
    }
    hist.row(n + 1) = f(tn1, corr).transpose();
  }

  const int kept = static_cast<int>(xs.rows());
  sol.states = xs;
  sol.t.resize(kept);
  for (int i = 0; i < kept; ++i) sol.t[i] = i * h;
  return sol;
}

struct SimOptions {
  double T = 20.0;
  double h = 1e-3;
};

struct Trajectory {
  std::vector<double> t;
  Mat x;   // plant states, one row per grid point
  Mat xc;  // controller states
  Mat u;   // inputs
  Mat y;   // outputs
  bool diverged = false;

  double final_plant_norm() const { return x.row(x.rows() - 1).norm(); }
};

/// Closed-loop Caputo simulation. The uncertainty realization (if any) is
/// folded into the plant matrices first; the input is the explicit output
/// feedback law evaluated at the current state, so no implicit solve is
/// needed inside a step.
inline Trajectory simulate_closed_loop(const Plant& plant, const std::optional<Mat>& delta,
                                       const Controller& ctrl, const Vec& x0, const Vec& xc0,
                                       const SimOptions& opts) {
  plant.require_consistent();
  ctrl.require_consistent_with(plant);
  const Plant realized = (delta && plant.unc) ? realize_plant(plant, *delta) : plant;
  const int n = plant.n(), nc = ctrl.nc();
  if (x0.size() != n) throw DimensionError("simulate_closed_loop: x0 size mismatch");
  if (xc0.size() != nc) throw DimensionError("simulate_closed_loop: xc0 size mismatch");

  const ClosedLoop cl = assemble_closed_loop(realized, ctrl);
  const Mat& a_psi = cl.A_psi;

  Vec z0(n + nc);
  z0.head(n) = x0;
  z0.tail(nc) = xc0;

  const PhiFunction& phi = plant.phi;
  auto field = [&](double, const Vec& z) {
    Vec u = ctrl.Dc * (plant.C * z.head(n));
    if (nc > 0) u += ctrl.Cc * z.tail(nc);
    Vec dz = a_psi * z;
    dz.head(n) += phi.eval(z.head(n), u);
    return dz;
  };

  const CaputoSolution sol = integrate_caputo(field, plant.q, z0, opts.T, opts.h);
  const int rows = static_cast<int>(sol.states.rows());

  Trajectory traj;
  traj.t = sol.t;
  traj.diverged = sol.diverged;
  traj.x = sol.states.leftCols(n);
  traj.xc = sol.states.rightCols(nc);
  traj.u.resize(rows, plant.m());
  traj.y.resize(rows, plant.p());
  for (int i = 0; i < rows; ++i) {
    const Vec xi = traj.x.row(i).transpose();
    Vec u = ctrl.Dc * (plant.C * xi);
    if (nc > 0) u += ctrl.Cc * traj.xc.row(i).transpose();
    traj.u.row(i) = u.transpose();
    traj.y.row(i) = (plant.C * xi).transpose();
  }
  return traj;
}

}  // namespace folmi
