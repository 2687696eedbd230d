#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>
#include <string>
#include <vector>

#include "folmi/errors.hpp"

namespace folmi {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

/// Tolerance under which a matrix must match its transpose to be accepted
/// as symmetric. Offenders are rejected, not repaired: a lopsided matrix
/// at this layer means a model-construction bug upstream.
inline constexpr double kSymmetryTol = 1e-10;

inline void require_square(const Mat& m, const char* who) {
  if (m.rows() != m.cols())
    throw DimensionError(std::string(who) + ": matrix must be square, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline bool is_symmetric(const Mat& m, double tol = kSymmetryTol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_hermitian(const CMat& m, double tol = kSymmetryTol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// M + M^T (conjugate transpose for complex input).
inline Mat sym(const Mat& m) {
  require_square(m, "sym");
  return m + m.transpose();
}

inline CMat sym(const CMat& m) {
  if (m.rows() != m.cols()) throw DimensionError("sym: matrix must be square");
  return m + m.adjoint();
}

/// All eigenvalues of a square real matrix, unordered.
struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;
};

inline Spectrum eigenvalues(const Mat& a) {
  require_square(a, "eigenvalues");
  if (!a.allFinite()) throw NumericalError("eigenvalues: non-finite entries");
  Eigen::EigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalError("eigenvalues: QR iteration did not converge");
  Spectrum s;
  s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
  return s;
}

/// Moore-Penrose pseudo-inverse via SVD with singular values below
/// 1e-10 * sigma_max truncated to zero. The fixed relative cutoff keeps the
/// result deterministic on exactly singular inputs.
inline Mat pinv(const Mat& a) {
  if (!a.allFinite()) throw NumericalError("pinv: non-finite entries");
  if (a.size() == 0) return Mat(a.cols(), a.rows());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double cutoff = 1e-10 * (sv.size() ? sv(0) : 0.0);
  Vec inv = Vec::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Smallest eigenvalue of a symmetric matrix (asymmetric input rejected).
inline double min_eig_sym(const Mat& m) {
  if (!is_symmetric(m))
    throw DimensionError("min_eig_sym: input is not symmetric within 1e-10");
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("min_eig_sym: eigensolver failed");
  return es.eigenvalues()(0);
}

inline double max_eig_sym(const Mat& m) { return -min_eig_sym(Mat(-m)); }

/// True iff the smallest eigenvalue exceeds `margin` (strictly).
inline bool is_posdef(const Mat& m, double margin = 0.0) {
  return min_eig_sym(m) > margin;
}

inline bool is_posdef(const CMat& m, double margin = 0.0) {
  if (!is_hermitian(m))
    throw DimensionError("is_posdef: input is not Hermitian within 1e-10");
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("is_posdef: eigensolver failed");
  return es.eigenvalues()(0) > margin;
}

/// Numerical rank with relative singular-value tolerance (default matches
/// the Kalman-rank checks: 1e-8 * sigma_max).
inline int numerical_rank(const Mat& a, double rel_tol = 1e-8) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = rel_tol * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

/// Orthonormal basis of the row space of C (columns of the result), plus
/// an orthonormal basis of its orthogonal complement. Rank decided at the
/// given relative tolerance.
inline void rowspace_split(const Mat& c, Mat& basis, Mat& complement,
                           double rel_tol = 1e-8) {
  const Eigen::Index n = c.cols();
  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  int r = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    const double cut = rel_tol * sv(0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++r;
  }
  basis = svd.matrixV().leftCols(r);
  complement = svd.matrixV().rightCols(n - r);
}

}  // namespace folmi
