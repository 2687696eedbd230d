#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "folmi/expr.hpp"
#include "folmi/matrix.hpp"
#include "folmi/rng.hpp"

namespace folmi {

/// Norm-bounded positive-real uncertainty structure: the plant matrices are
/// perturbed by M*Delta*[N1 N2] where Delta = Z(I + J*Z)^-1 for some Z with
/// Sym(Z) >= 0, and Sym(J) > 0 keeps Delta well defined.
struct UncertaintyModel {
  Mat M;   // n x m0
  Mat N1;  // m0 x n
  Mat N2;  // m0 x m
  Mat J;   // m0 x m0

  int m0() const { return static_cast<int>(M.cols()); }
};

struct Plant {
  Mat A;  // n x n
  Mat B;  // n x m
  Mat C;  // p x n
  double q = 0.9;
  PhiFunction phi;
  double xi = 0.0;
  std::optional<UncertaintyModel> unc;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(C.rows()); }

  void require_consistent() const {
    if (A.rows() != A.cols()) throw DimensionError("plant: A must be square");
    if (B.rows() != A.rows()) throw DimensionError("plant: B row count must match A");
    if (C.cols() != A.rows()) throw DimensionError("plant: C column count must match A");
    if (phi.n_states() != n() || phi.n_inputs() != m())
      throw DimensionError("plant: phi dimensions must match (n, m)");
    if (xi < 0.0) throw DimensionError("plant: xi must be nonnegative");
    if (unc) {
      const auto& u = *unc;
      if (u.M.rows() != n()) throw DimensionError("uncertainty: M row count must match n");
      if (u.N1.rows() != u.M.cols() || u.N1.cols() != n())
        throw DimensionError("uncertainty: N1 must be m0 x n");
      if (u.N2.rows() != u.M.cols() || u.N2.cols() != m())
        throw DimensionError("uncertainty: N2 must be m0 x m");
      if (u.J.rows() != u.M.cols() || u.J.cols() != u.M.cols())
        throw DimensionError("uncertainty: J must be m0 x m0");
    }
  }
};

/// Fixed-order dynamic output-feedback controller
///   D^q xc = Ac xc + Bc y,   u = Cc xc + Dc y.
/// n_c = 0 degenerates to static output feedback (only Dc).
struct Controller {
  Mat Ac;  // nc x nc
  Mat Bc;  // nc x p
  Mat Cc;  // m x nc
  Mat Dc;  // m x p

  int nc() const { return static_cast<int>(Ac.rows()); }

  static Controller zero_static(int m, int p) {
    Controller c;
    c.Ac = Mat(0, 0);
    c.Bc = Mat(0, p);
    c.Cc = Mat(m, 0);
    c.Dc = Mat::Zero(m, p);
    return c;
  }

  void require_consistent_with(const Plant& plant) const {
    const int k = nc();
    if (Ac.cols() != k) throw DimensionError("controller: Ac must be square");
    if (Bc.rows() != k || Bc.cols() != plant.p())
      throw DimensionError("controller: Bc must be nc x p");
    if (Cc.rows() != plant.m() || Cc.cols() != k)
      throw DimensionError("controller: Cc must be m x nc");
    if (Dc.rows() != plant.m() || Dc.cols() != plant.p())
      throw DimensionError("controller: Dc must be m x p");
    if (!Ac.allFinite() || !Bc.allFinite() || !Cc.allFinite() || !Dc.allFinite())
      throw DimensionError("controller: non-finite entries");
  }
};

/// Closed-loop aggregate over the stacked state [x; xc].
struct ClosedLoop {
  Mat A_psi;   // (n+nc) x (n+nc)
  Mat Mtilde;  // (n+nc) x m0 (empty when the plant is certain)
  Mat Ntilde;  // m0 x (n+nc)
};

inline ClosedLoop assemble_closed_loop(const Plant& plant, const Controller& ctrl) {
  plant.require_consistent();
  ctrl.require_consistent_with(plant);
  const int n = plant.n(), nc = ctrl.nc();
  ClosedLoop cl;
  cl.A_psi.resize(n + nc, n + nc);
  cl.A_psi.topLeftCorner(n, n) = plant.A + plant.B * ctrl.Dc * plant.C;
  if (nc > 0) {
    cl.A_psi.topRightCorner(n, nc) = plant.B * ctrl.Cc;
    cl.A_psi.bottomLeftCorner(nc, n) = ctrl.Bc * plant.C;
    cl.A_psi.bottomRightCorner(nc, nc) = ctrl.Ac;
  }
  if (plant.unc) {
    const auto& u = *plant.unc;
    const int m0 = u.m0();
    cl.Mtilde.setZero(n + nc, m0);
    cl.Mtilde.topRows(n) = u.M;
    cl.Ntilde.resize(m0, n + nc);
    cl.Ntilde.leftCols(n) = u.N1 + u.N2 * ctrl.Dc * plant.C;
    if (nc > 0) cl.Ntilde.rightCols(nc) = u.N2 * ctrl.Cc;
  } else {
    cl.Mtilde = Mat(n + nc, 0);
    cl.Ntilde = Mat(0, n + nc);
  }
  return cl;
}

/// Delta = Z (I + J Z)^-1 for a given Z. Exposed separately so tests can
/// force a specific Z.
inline Mat delta_from_z(const Mat& z, const Mat& j) {
  const Mat gain = Mat::Identity(z.rows(), z.cols()) + j * z;
  Eigen::FullPivLU<Mat> lu(gain);
  if (!lu.isInvertible()) throw NumericalError("delta_from_z: I + J*Z is singular");
  return z * lu.inverse();
}

/// Draw an admissible uncertainty realization: Z = scale * (S S^T + K) with
/// S Gaussian and K skew-symmetric, so Sym(Z) >= 0 holds by construction,
/// then Delta = Z (I + J Z)^-1. Deterministic given the seed.
inline Mat sample_uncertainty(const UncertaintyModel& unc, std::uint64_t seed, double scale) {
  if (scale < 0.0) throw Error("sample_uncertainty: scale must be nonnegative");
  const int m0 = unc.m0();
  for (int attempt = 0; attempt < 8; ++attempt) {
    Rng rng(seed, 0x5eed0000ull + static_cast<std::uint64_t>(attempt));
    Mat s(m0, m0), k(m0, m0);
    for (int i = 0; i < m0; ++i)
      for (int j = 0; j < m0; ++j) s(i, j) = rng.normal();
    for (int i = 0; i < m0; ++i)
      for (int j = 0; j < m0; ++j) k(i, j) = rng.normal();
    const Mat z = scale * (s * s.transpose() + 0.5 * (k - k.transpose()));
    try {
      return delta_from_z(z, unc.J);
    } catch (const NumericalError&) {
      // Cannot happen for admissible Z with Sym(J) > 0; retry defensively
      // against a degenerate draw before giving up.
    }
  }
  throw NumericalError("sample_uncertainty: resampling exhausted");
}

/// Both clauses of the admissibility characterization:
/// det(I - Delta J) != 0 and Delta Sym(J) Delta^T <= Sym(Delta).
inline bool uncertainty_admissible(const Mat& delta, const Mat& j, double tol = 1e-10) {
  const Mat gap = sym(delta) - delta * sym(j) * delta.transpose();
  const Mat test = Mat::Identity(delta.rows(), delta.cols()) - delta * j;
  return std::abs(test.determinant()) > 1e-14 &&
         min_eig_sym(0.5 * (gap + gap.transpose())) >= -tol;
}

/// Plant with the uncertainty realized at a fixed Delta: A <- A + M Delta N1,
/// B <- B + M Delta N2. The uncertainty block is cleared on the result.
inline Plant realize_plant(const Plant& plant, const Mat& delta) {
  if (!plant.unc) throw DimensionError("realize_plant: plant has no uncertainty model");
  const auto& u = *plant.unc;
  if (delta.rows() != u.m0() || delta.cols() != u.m0())
    throw DimensionError("realize_plant: Delta must be m0 x m0");
  Plant out = plant;
  out.A = plant.A + u.M * delta * u.N1;
  out.B = plant.B + u.M * delta * u.N2;
  out.unc.reset();
  return out;
}

struct ValidationCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Model-assumption screening: Kalman controllability/observability ranks,
/// Sym(J) > 0, 0 < q < 1, phi(0,0) = 0.
inline ValidationReport validate(const Plant& plant) {
  plant.require_consistent();
  ValidationReport rep;
  const int n = plant.n();

  Mat ctrb(n, n * plant.m());
  Mat block = plant.B;
  for (int k = 0; k < n; ++k) {
    ctrb.middleCols(k * plant.m(), plant.m()) = block;
    block = plant.A * block;
  }
  const int cr = numerical_rank(ctrb);
  rep.checks.push_back({"controllable", cr == n,
                        "rank of [B AB ...] = " + std::to_string(cr) + " of " + std::to_string(n)});

  Mat obsv(n * plant.p(), n);
  Mat oblock = plant.C;
  for (int k = 0; k < n; ++k) {
    obsv.middleRows(k * plant.p(), plant.p()) = oblock;
    oblock = oblock * plant.A;
  }
  const int orank = numerical_rank(obsv);
  rep.checks.push_back({"observable", orank == n,
                        "rank of [C; CA; ...] = " + std::to_string(orank) + " of " + std::to_string(n)});

  if (plant.unc) {
    bool pd = false;
    std::string detail;
    try {
      pd = is_posdef(sym(plant.unc->J), 0.0);
      detail = pd ? "Sym(J) positive definite" : "Sym(J) has a nonpositive eigenvalue";
    } catch (const Error& e) {
      detail = e.what();
    }
    rep.checks.push_back({"sym_J_posdef", pd, detail});
  }

  rep.checks.push_back({"fractional_order", plant.q > 0.0 && plant.q < 1.0,
                        "q = " + std::to_string(plant.q)});

  bool zero = false;
  std::string zdetail;
  try {
    zero = plant.phi.is_zero_at_origin();
    zdetail = zero ? "phi(0,0) = 0" : "phi(0,0) != 0";
  } catch (const Error& e) {
    zdetail = e.what();
  }
  rep.checks.push_back({"phi_vanishes_at_origin", zero, zdetail});
  return rep;
}

}  // namespace folmi
