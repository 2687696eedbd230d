#pragma once

#include <complex>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "folmi/matrix.hpp"

namespace folmi {

// Affine LMI modeling: a flat real decision vector is carved into named
// blocks (VarSpace), and constraints are affine matrix-valued functions
// F(x) = F0 + sum_k x_k Fk of those scalars (AffineExpr). Everything is
// dense; problems here are at most a few dozen scalars and blocks of
// dimension ~20.

enum class VarKind { Scalar, Full, Symmetric, Skew, Hermitian };

struct VarBlock {
  std::string name;
  VarKind kind;
  int rows = 1;
  int cols = 1;
  int offset = 0;
  int size = 1;
};

class VarSpace {
 public:
  int add_scalar(const std::string& name) { return add(name, VarKind::Scalar, 1, 1, 1); }

  int add_full(const std::string& name, int rows, int cols) {
    if (rows < 1 || cols < 1) throw DimensionError("VarSpace: full block needs positive dims");
    return add(name, VarKind::Full, rows, cols, rows * cols);
  }

  int add_symmetric(const std::string& name, int n) {
    if (n < 1) throw DimensionError("VarSpace: symmetric block needs positive dim");
    return add(name, VarKind::Symmetric, n, n, n * (n + 1) / 2);
  }

  /// Skew-symmetric block; contributes n(n-1)/2 scalars (none for n = 1).
  int add_skew(const std::string& name, int n) {
    if (n < 1) throw DimensionError("VarSpace: skew block needs positive dim");
    return add(name, VarKind::Skew, n, n, n * (n - 1) / 2);
  }

  /// Hermitian block: n(n+1)/2 real-part scalars then n(n-1)/2 imaginary.
  int add_hermitian(const std::string& name, int n) {
    if (n < 1) throw DimensionError("VarSpace: hermitian block needs positive dim");
    return add(name, VarKind::Hermitian, n, n, n * n);
  }

  int size() const { return total_; }
  const std::vector<VarBlock>& blocks() const { return blocks_; }

  const VarBlock& block(const std::string& name) const {
    for (const auto& b : blocks_)
      if (b.name == name) return b;
    throw Error("VarSpace: unknown block '" + name + "'");
  }

  bool has(const std::string& name) const {
    for (const auto& b : blocks_)
      if (b.name == name) return true;
    return false;
  }

  /// Dense real basis matrix of scalar k within its block (value of the
  /// block when that scalar is 1 and the rest 0). Hermitian blocks use the
  /// complex overload.
  Mat basis(const VarBlock& b, int k) const {
    Mat e = Mat::Zero(b.rows, b.cols);
    switch (b.kind) {
      case VarKind::Scalar:
        e(0, 0) = 1.0;
        return e;
      case VarKind::Full:
        e(k / b.cols, k % b.cols) = 1.0;
        return e;
      case VarKind::Symmetric: {
        auto [i, j] = sym_index(b.rows, k);
        e(i, j) = 1.0;
        e(j, i) = 1.0;
        return e;
      }
      case VarKind::Skew: {
        auto [i, j] = strict_upper_index(b.rows, k);
        e(i, j) = 1.0;
        e(j, i) = -1.0;
        return e;
      }
      case VarKind::Hermitian:
        throw Error("VarSpace: hermitian block used in a real expression");
    }
    throw Error("VarSpace: corrupt block");
  }

  CMat cbasis(const VarBlock& b, int k) const {
    const int n = b.rows;
    CMat e = CMat::Zero(n, n);
    const int nre = n * (n + 1) / 2;
    if (k < nre) {
      auto [i, j] = sym_index(n, k);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
    } else {
      auto [i, j] = strict_upper_index(n, k - nre);
      e(i, j) = std::complex<double>(0.0, 1.0);
      e(j, i) = std::complex<double>(0.0, -1.0);
    }
    return e;
  }

  double scalar_value(const std::string& name, const Vec& x) const {
    const VarBlock& b = block(name);
    if (b.kind != VarKind::Scalar) throw Error("VarSpace: '" + name + "' is not a scalar");
    return x(b.offset);
  }

  Mat matrix_value(const std::string& name, const Vec& x) const {
    const VarBlock& b = block(name);
    if (b.kind == VarKind::Hermitian)
      throw Error("VarSpace: use hermitian_value for '" + name + "'");
    Mat out = Mat::Zero(b.rows, b.cols);
    for (int k = 0; k < b.size; ++k) out += x(b.offset + k) * basis(b, k);
    return out;
  }

  CMat hermitian_value(const std::string& name, const Vec& x) const {
    const VarBlock& b = block(name);
    if (b.kind != VarKind::Hermitian) throw Error("VarSpace: '" + name + "' is not hermitian");
    CMat out = CMat::Zero(b.rows, b.cols);
    for (int k = 0; k < b.size; ++k) out += x(b.offset + k) * cbasis(b, k);
    return out;
  }

 private:
  static std::pair<int, int> sym_index(int n, int k) {
    for (int i = 0; i < n; ++i) {
      const int row_len = n - i;
      if (k < row_len) return {i, i + k};
      k -= row_len;
    }
    throw Error("VarSpace: symmetric index out of range");
  }

  static std::pair<int, int> strict_upper_index(int n, int k) {
    for (int i = 0; i < n; ++i) {
      const int row_len = n - i - 1;
      if (k < row_len) return {i, i + 1 + k};
      k -= row_len;
    }
    throw Error("VarSpace: skew index out of range");
  }

  int add(const std::string& name, VarKind kind, int rows, int cols, int size) {
    if (has(name)) throw Error("VarSpace: duplicate block name '" + name + "'");
    VarBlock b{name, kind, rows, cols, total_, size};
    blocks_.push_back(b);
    total_ += size;
    return b.offset;
  }

  std::vector<VarBlock> blocks_;
  int total_ = 0;
};

/// Real affine matrix-valued function of the decision vector.
class AffineExpr {
 public:
  AffineExpr() = default;
  AffineExpr(int rows, int cols) : rows_(rows), cols_(cols), f0_(Mat::Zero(rows, cols)) {}

  static AffineExpr constant(const Mat& m) {
    AffineExpr e(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    e.f0_ = m;
    return e;
  }

  static AffineExpr zero(int rows, int cols) { return AffineExpr(rows, cols); }

  /// The named block as a matrix-valued expression.
  static AffineExpr variable(const VarSpace& vs, const std::string& name) {
    const VarBlock& b = vs.block(name);
    if (b.kind == VarKind::Hermitian)
      throw Error("AffineExpr: hermitian block needs HermitianAffineExpr");
    AffineExpr e(b.rows, b.cols);
    for (int k = 0; k < b.size; ++k) e.terms_[b.offset + k] = vs.basis(b, k);
    return e;
  }

  /// x_name * coeff * I_dim for a scalar decision variable.
  static AffineExpr scalar_identity(const VarSpace& vs, const std::string& name, int dim,
                                    double coeff = 1.0) {
    const VarBlock& b = vs.block(name);
    if (b.kind != VarKind::Scalar) throw Error("AffineExpr: '" + name + "' is not a scalar");
    AffineExpr e(dim, dim);
    e.terms_[b.offset] = coeff * Mat::Identity(dim, dim);
    return e;
  }

  /// Single term x_k * coeff at a raw scalar index.
  static AffineExpr term(int scalar_index, const Mat& coeff) {
    AffineExpr e(static_cast<int>(coeff.rows()), static_cast<int>(coeff.cols()));
    e.terms_[scalar_index] = coeff;
    return e;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Mat& constant_part() const { return f0_; }
  const std::map<int, Mat>& terms() const { return terms_; }

  AffineExpr transposed() const {
    AffineExpr e(cols_, rows_);
    e.f0_ = f0_.transpose();
    for (const auto& [k, m] : terms_) e.terms_[k] = m.transpose();
    return e;
  }

  Mat eval(const Vec& x) const {
    Mat out = f0_;
    for (const auto& [k, m] : terms_) out += x(k) * m;
    return out;
  }

  bool symmetric_structure(double tol = kSymmetryTol) const {
    if (rows_ != cols_) return false;
    if ((f0_ - f0_.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    for (const auto& [k, m] : terms_)
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    return true;
  }

  friend AffineExpr operator+(const AffineExpr& a, const AffineExpr& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw DimensionError("AffineExpr: size mismatch in +");
    AffineExpr e = a;
    e.f0_ += b.f0_;
    for (const auto& [k, m] : b.terms_) {
      auto it = e.terms_.find(k);
      if (it == e.terms_.end())
        e.terms_[k] = m;
      else
        it->second += m;
    }
    return e;
  }

  friend AffineExpr operator-(const AffineExpr& a, const AffineExpr& b) { return a + (-1.0) * b; }

  friend AffineExpr operator*(double s, const AffineExpr& a) {
    AffineExpr e = a;
    e.f0_ *= s;
    for (auto& [k, m] : e.terms_) m *= s;
    return e;
  }

  friend AffineExpr operator*(const Mat& lhs, const AffineExpr& a) {
    if (lhs.cols() != a.rows_) throw DimensionError("AffineExpr: size mismatch in L*expr");
    AffineExpr e(static_cast<int>(lhs.rows()), a.cols_);
    e.f0_ = lhs * a.f0_;
    for (const auto& [k, m] : a.terms_) e.terms_[k] = lhs * m;
    return e;
  }

  friend AffineExpr operator*(const AffineExpr& a, const Mat& rhs) {
    if (a.cols_ != rhs.rows()) throw DimensionError("AffineExpr: size mismatch in expr*R");
    AffineExpr e(a.rows_, static_cast<int>(rhs.cols()));
    e.f0_ = a.f0_ * rhs;
    for (const auto& [k, m] : a.terms_) e.terms_[k] = m * rhs;
    return e;
  }

 private:
  int rows_ = 0, cols_ = 0;
  Mat f0_;
  std::map<int, Mat> terms_;
};

/// expr + expr^T.
inline AffineExpr symmetrize(const AffineExpr& e) { return e + e.transposed(); }

// ---------------------------------------------------------------------------
// Block assembly with the star convention: cells strictly below the diagonal
// may be Star, meaning "transpose of the mirrored cell".

struct BlockCell {
  enum class Tag { Expr, Star, Zero } tag;
  AffineExpr expr;

  BlockCell(const AffineExpr& e) : tag(Tag::Expr), expr(e) {}  // NOLINT implicit
  BlockCell(const Mat& m) : tag(Tag::Expr), expr(AffineExpr::constant(m)) {}  // NOLINT
  explicit BlockCell(Tag t) : tag(t) {}
};

inline BlockCell star() { return BlockCell(BlockCell::Tag::Star); }
inline BlockCell zero_cell() { return BlockCell(BlockCell::Tag::Zero); }

inline AffineExpr assemble_block(const std::vector<std::vector<BlockCell>>& grid) {
  if (grid.empty() || grid[0].empty()) throw DimensionError("assemble_block: empty grid");
  const int nr = static_cast<int>(grid.size());
  const int ncol = static_cast<int>(grid[0].size());
  for (const auto& row : grid)
    if (static_cast<int>(row.size()) != ncol)
      throw DimensionError("assemble_block: ragged grid");

  auto cell_dims = [&](int r, int c, int& h, int& w) -> bool {
    const BlockCell& cell = grid[r][c];
    if (cell.tag == BlockCell::Tag::Expr) {
      h = cell.expr.rows();
      w = cell.expr.cols();
      return true;
    }
    if (cell.tag == BlockCell::Tag::Star) {
      if (c >= nr || r >= ncol || grid[c][r].tag == BlockCell::Tag::Star)
        throw DimensionError("assemble_block: star cell has no mirrored expression");
      if (grid[c][r].tag != BlockCell::Tag::Expr) return false;  // mirrors a zero cell
      h = grid[c][r].expr.cols();
      w = grid[c][r].expr.rows();
      return true;
    }
    return false;
  };

  std::vector<int> rh(nr, -1), cw(ncol, -1);
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c < ncol; ++c) {
      int h, w;
      if (!cell_dims(r, c, h, w)) continue;
      if (rh[r] == -1) rh[r] = h;
      if (cw[c] == -1) cw[c] = w;
      if (rh[r] != h || cw[c] != w)
        throw DimensionError("assemble_block: inconsistent block sizes at (" +
                             std::to_string(r) + "," + std::to_string(c) + ")");
    }
  for (int r = 0; r < nr; ++r)
    if (rh[r] == -1) throw DimensionError("assemble_block: row " + std::to_string(r) + " has no sized cell");
  for (int c = 0; c < ncol; ++c)
    if (cw[c] == -1) throw DimensionError("assemble_block: column " + std::to_string(c) + " has no sized cell");

  int total_r = 0, total_c = 0;
  std::vector<int> roff(nr), coff(ncol);
  for (int r = 0; r < nr; ++r) {
    roff[r] = total_r;
    total_r += rh[r];
  }
  for (int c = 0; c < ncol; ++c) {
    coff[c] = total_c;
    total_c += cw[c];
  }

  AffineExpr out(total_r, total_c);
  auto place = [&](int r, int c, const AffineExpr& e) {
    AffineExpr padded(total_r, total_c);
    Mat lift = Mat::Zero(total_r, e.rows());
    lift.block(roff[r], 0, e.rows(), e.rows()).setIdentity();
    Mat drop = Mat::Zero(e.cols(), total_c);
    drop.block(0, coff[c], e.cols(), e.cols()).setIdentity();
    out = out + lift * e * drop;
  };
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c < ncol; ++c) {
      const BlockCell& cell = grid[r][c];
      if (cell.tag == BlockCell::Tag::Expr)
        place(r, c, cell.expr);
      else if (cell.tag == BlockCell::Tag::Star && grid[c][r].tag == BlockCell::Tag::Expr)
        place(r, c, grid[c][r].expr.transposed());
    }
  return out;
}

// ---------------------------------------------------------------------------
// Complex Hermitian affine expressions (real decision scalars, Hermitian
// coefficient matrices). Lowered to real form via the standard embedding.

class HermitianAffineExpr {
 public:
  explicit HermitianAffineExpr(int dim) : dim_(dim), h0_(CMat::Zero(dim, dim)) {}

  static HermitianAffineExpr constant(const CMat& m) {
    if (!is_hermitian(m)) throw DimensionError("HermitianAffineExpr: constant not Hermitian");
    HermitianAffineExpr e(static_cast<int>(m.rows()));
    e.h0_ = m;
    return e;
  }

  static HermitianAffineExpr variable(const VarSpace& vs, const std::string& name) {
    const VarBlock& b = vs.block(name);
    if (b.kind != VarKind::Hermitian)
      throw Error("HermitianAffineExpr: '" + name + "' is not a hermitian block");
    HermitianAffineExpr e(b.rows);
    for (int k = 0; k < b.size; ++k) e.terms_[b.offset + k] = vs.cbasis(b, k);
    return e;
  }

  int dim() const { return dim_; }
  const CMat& constant_part() const { return h0_; }
  const std::map<int, CMat>& terms() const { return terms_; }

  CMat eval(const Vec& x) const {
    CMat out = h0_;
    for (const auto& [k, m] : terms_) out += x(k) * m;
    return out;
  }

  friend HermitianAffineExpr operator+(const HermitianAffineExpr& a, const HermitianAffineExpr& b) {
    if (a.dim_ != b.dim_) throw DimensionError("HermitianAffineExpr: size mismatch");
    HermitianAffineExpr e = a;
    e.h0_ += b.h0_;
    for (const auto& [k, m] : b.terms_) {
      auto it = e.terms_.find(k);
      if (it == e.terms_.end())
        e.terms_[k] = m;
      else
        it->second += m;
    }
    return e;
  }

 private:
  int dim_;
  CMat h0_;
  std::map<int, CMat> terms_;

  friend AffineExpr hermitian_to_real(const HermitianAffineExpr&);
  friend AffineExpr real_rotation(std::complex<double>, const HermitianAffineExpr&);
};

/// [[Re H, -Im H], [Im H, Re H]]: Hermitian positive definiteness of H is
/// equivalent to positive definiteness of the doubled real form, each
/// eigenvalue appearing twice.
inline AffineExpr hermitian_to_real(const HermitianAffineExpr& h) {
  const int d = h.dim_;
  auto embed = [d](const CMat& m) {
    Mat out(2 * d, 2 * d);
    out.topLeftCorner(d, d) = m.real();
    out.topRightCorner(d, d) = -m.imag();
    out.bottomLeftCorner(d, d) = m.imag();
    out.bottomRightCorner(d, d) = m.real();
    return out;
  };
  if (!is_hermitian(h.h0_))
    throw DimensionError("hermitian_to_real: constant part is not Hermitian");
  for (const auto& [k, m] : h.terms_)
    if (!is_hermitian(m)) throw DimensionError("hermitian_to_real: coefficient is not Hermitian");
  AffineExpr e = AffineExpr::constant(embed(h.h0_));
  for (const auto& [k, m] : h.terms_) e = e + AffineExpr::term(k, embed(m));
  return e;
}

/// r*H + conj(r*H) = 2 Re(r H) as a real affine expression. This is the
/// standard trick for the fractional-order sector LMI: the combination is
/// real (generally nonsymmetric) even though H is complex.
inline AffineExpr real_rotation(std::complex<double> r, const HermitianAffineExpr& h) {
  AffineExpr e = AffineExpr::constant(Mat((r * h.h0_ + std::conj(r) * h.h0_.conjugate()).real()));
  for (const auto& [k, m] : h.terms_)
    e = e + AffineExpr::term(k, Mat((r * m + std::conj(r) * m.conjugate()).real()));
  return e;
}

// ---------------------------------------------------------------------------

enum class Sense { NegDef, PosDef };

struct LmiConstraint {
  AffineExpr expr;
  Sense sense;
  double margin;
  std::string label;
};

struct ScalarBound {
  int index;
  double lower;
  std::string label;
};

/// Strict-feasibility problem: a set of definiteness constraints plus simple
/// lower bounds on individual scalars. Strict inequalities are carried by
/// per-constraint margins ("< 0" enters as "<= -margin I").
class LmiProblem {
 public:
  explicit LmiProblem(VarSpace vars) : vars_(std::move(vars)) {}

  const VarSpace& vars() const { return vars_; }
  const std::vector<LmiConstraint>& constraints() const { return constraints_; }
  const std::vector<ScalarBound>& bounds() const { return bounds_; }

  void add_negdef(const AffineExpr& e, double margin, const std::string& label) {
    add(e, Sense::NegDef, margin, label);
  }

  void add_posdef(const AffineExpr& e, double margin, const std::string& label) {
    add(e, Sense::PosDef, margin, label);
  }

  void add_lower_bound(const std::string& scalar_name, double lower) {
    const VarBlock& b = vars_.block(scalar_name);
    if (b.kind != VarKind::Scalar) throw Error("LmiProblem: bound on non-scalar block");
    bounds_.push_back({b.offset, lower, scalar_name});
  }

  void require_wellformed() const {
    if (constraints_.empty()) throw Error("LmiProblem: no constraints");
  }

 private:
  void add(const AffineExpr& e, Sense sense, double margin, const std::string& label) {
    if (e.rows() != e.cols()) throw DimensionError("LmiProblem: constraint must be square");
    if (!e.symmetric_structure())
      throw DimensionError("LmiProblem: constraint '" + label + "' is not symmetric");
    if (margin < 0.0) throw Error("LmiProblem: negative margin");
    constraints_.push_back({e, sense, margin, label});
  }

  VarSpace vars_;
  std::vector<LmiConstraint> constraints_;
  std::vector<ScalarBound> bounds_;
};

/// Plain-text dump of (F0, {Fi}) per constraint; format documented in
/// docs/lmi_dump.md. Intended for cross-checks against external SDP tools.
inline void dump_problem(const LmiProblem& p, std::ostream& os) {
  os << "folmi-lmi-dump 1\n";
  os << "nvars " << p.vars().size() << "\n";
  os << "nconstraints " << p.constraints().size() << "\n";
  os << "nbounds " << p.bounds().size() << "\n";
  os.precision(17);
  for (const auto& b : p.bounds())
    os << "bound " << b.index << " " << b.lower << " # " << b.label << "\n";
  int ci = 0;
  for (const auto& c : p.constraints()) {
    os << "constraint " << ci++ << " dim " << c.expr.rows() << " sense "
       << (c.sense == Sense::NegDef ? "negdef" : "posdef") << " margin " << c.margin << " # "
       << c.label << "\n";
    auto put = [&os](const Mat& m) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
        os << "\n";
      }
    };
    os << "F 0\n";
    put(c.expr.constant_part());
    for (const auto& [k, m] : c.expr.terms()) {
      os << "F " << (k + 1) << "\n";
      put(m);
    }
  }
}

}  // namespace folmi
