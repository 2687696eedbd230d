#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "folmi/errors.hpp"
#include "folmi/matrix.hpp"
#include "folmi/rng.hpp"

namespace folmi {

// Vector nonlinearity phi(x, u) parsed from text. Grammar (see
// docs/expr_grammar.md):
//
//   components := expr { ';' expr }
//   expr       := term { ('+'|'-') term }
//   term       := unary { ('*'|'/') unary }
//   unary      := '-' unary | primary
//   primary    := number | var | func '(' expr ')' | '(' expr ')'
//   func       := 'sin' | 'cos' | 'tanh' | 'abs'
//   var        := ('x'|'u') integer          (1-based)
//
// One component per state equation; empty components are rejected.

enum class NodeKind { Constant, StateVar, InputVar, Neg, Sin, Cos, Tanh, Abs, Add, Sub, Mul, Div };

struct ExprNode {
  NodeKind kind;
  double value = 0.0;  // Constant
  int index = 0;       // StateVar / InputVar, 0-based
  int child0 = -1;
  int child1 = -1;
};

class PhiFunction {
 public:
  PhiFunction() = default;

  static PhiFunction parse(const std::string& src, int n_states, int n_inputs);

  int n_states() const { return n_states_; }
  int n_inputs() const { return n_inputs_; }

  Vec eval(const Vec& x, const Vec& u) const {
    if (x.size() != n_states_ || u.size() != n_inputs_)
      throw DimensionError("PhiFunction::eval: argument size mismatch");
    Vec out(n_states_);
    for (int c = 0; c < n_states_; ++c) out(c) = eval_node(roots_[c], x, u);
    return out;
  }

  /// Canonical text form; parse(print()) evaluates identically.
  std::string print() const {
    std::string out;
    for (std::size_t c = 0; c < roots_.size(); ++c) {
      if (c) out += "; ";
      out += print_node(roots_[c], 0);
    }
    return out;
  }

  bool is_zero_at_origin(double tol = 1e-12) const {
    const Vec v = eval(Vec::Zero(n_states_), Vec::Zero(n_inputs_));
    return v.cwiseAbs().maxCoeff() <= tol;
  }

 private:
  double eval_node(int id, const Vec& x, const Vec& u) const {
    const ExprNode& n = nodes_[id];
    switch (n.kind) {
      case NodeKind::Constant: return n.value;
      case NodeKind::StateVar: return x(n.index);
      case NodeKind::InputVar: return u(n.index);
      case NodeKind::Neg: return -eval_node(n.child0, x, u);
      case NodeKind::Sin: return std::sin(eval_node(n.child0, x, u));
      case NodeKind::Cos: return std::cos(eval_node(n.child0, x, u));
      case NodeKind::Tanh: return std::tanh(eval_node(n.child0, x, u));
      case NodeKind::Abs: return std::abs(eval_node(n.child0, x, u));
      case NodeKind::Add: return eval_node(n.child0, x, u) + eval_node(n.child1, x, u);
      case NodeKind::Sub: return eval_node(n.child0, x, u) - eval_node(n.child1, x, u);
      case NodeKind::Mul: return eval_node(n.child0, x, u) * eval_node(n.child1, x, u);
      case NodeKind::Div: {
        const double den = eval_node(n.child1, x, u);
        if (den == 0.0) throw DomainError("phi evaluation: division by zero");
        return eval_node(n.child0, x, u) / den;
      }
    }
    throw Error("PhiFunction: corrupt node");
  }

  // prec: 0 additive context, 1 multiplicative, 2 unary operand.
  std::string print_node(int id, int prec) const {
    const ExprNode& n = nodes_[id];
    switch (n.kind) {
      case NodeKind::Constant: {
        std::ostringstream os;
        os.precision(17);
        os << n.value;
        std::string s = os.str();
        return (n.value < 0 && prec > 0) ? "(" + s + ")" : s;
      }
      case NodeKind::StateVar: return "x" + std::to_string(n.index + 1);
      case NodeKind::InputVar: return "u" + std::to_string(n.index + 1);
      case NodeKind::Neg: {
        std::string s = "-" + print_node(n.child0, 2);
        return prec > 0 ? "(" + s + ")" : s;
      }
      case NodeKind::Sin: return "sin(" + print_node(n.child0, 0) + ")";
      case NodeKind::Cos: return "cos(" + print_node(n.child0, 0) + ")";
      case NodeKind::Tanh: return "tanh(" + print_node(n.child0, 0) + ")";
      case NodeKind::Abs: return "abs(" + print_node(n.child0, 0) + ")";
      case NodeKind::Add: {
        std::string s = print_node(n.child0, 0) + "+" + print_node(n.child1, 1);
        return prec > 0 ? "(" + s + ")" : s;
      }
      case NodeKind::Sub: {
        std::string s = print_node(n.child0, 0) + "-" + print_node(n.child1, 1);
        return prec > 0 ? "(" + s + ")" : s;
      }
      case NodeKind::Mul: {
        std::string s = print_node(n.child0, 1) + "*" + print_node(n.child1, 2);
        return prec > 1 ? "(" + s + ")" : s;
      }
      case NodeKind::Div: {
        std::string s = print_node(n.child0, 1) + "/" + print_node(n.child1, 2);
        return prec > 1 ? "(" + s + ")" : s;
      }
    }
    throw Error("PhiFunction: corrupt node");
  }

  friend class PhiParser;

  std::vector<ExprNode> nodes_;
  std::vector<int> roots_;
  int n_states_ = 0;
  int n_inputs_ = 0;
};

class PhiParser {
 public:
  PhiParser(const std::string& src, int n_states, int n_inputs)
      : src_(src), n_(n_states), m_(n_inputs) {}

  PhiFunction run() {
    PhiFunction f;
    f.n_states_ = n_;
    f.n_inputs_ = m_;
    out_ = &f;
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] == ';')
        throw ParseError("empty component expression", pos_);
      f.roots_.push_back(parse_expr());
      skip_ws();
      if (pos_ >= src_.size()) break;
      if (src_[pos_] != ';') throw ParseError("expected ';' or end of input", pos_);
      ++pos_;
    }
    if (static_cast<int>(f.roots_.size()) != n_)
      throw ParseError("component-count mismatch: got " + std::to_string(f.roots_.size()) +
                           ", state dimension is " + std::to_string(n_),
                       pos_);
    return f;
  }

 private:
  int add(ExprNode n) {
    out_->nodes_.push_back(n);
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        int rhs = parse_term();
        lhs = add({NodeKind::Add, 0, 0, lhs, rhs});
      } else if (eat('-')) {
        int rhs = parse_term();
        lhs = add({NodeKind::Sub, 0, 0, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (eat('*')) {
        int rhs = parse_unary();
        lhs = add({NodeKind::Mul, 0, 0, lhs, rhs});
      } else if (eat('/')) {
        int rhs = parse_unary();
        lhs = add({NodeKind::Div, 0, 0, lhs, rhs});
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (eat('-')) return add({NodeKind::Neg, 0, 0, parse_unary(), -1});
    return parse_primary();
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    if (c == '(') {
      ++pos_;
      int e = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  int parse_number() {
    const std::size_t start = pos_;
    std::size_t consumed = 0;
    double v = 0.0;
    try {
      v = std::stod(src_.substr(start), &consumed);
    } catch (const std::exception&) {
      throw ParseError("malformed number", start);
    }
    pos_ = start + consumed;
    return add({NodeKind::Constant, v, 0, -1, -1});
  }

  int parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string name = src_.substr(start, pos_ - start);
    if (name == "sin" || name == "cos" || name == "tanh" || name == "abs") {
      if (!eat('(')) throw ParseError("expected '(' after function name", pos_);
      int arg = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      NodeKind k = name == "sin"    ? NodeKind::Sin
                   : name == "cos"  ? NodeKind::Cos
                   : name == "tanh" ? NodeKind::Tanh
                                    : NodeKind::Abs;
      return add({k, 0, 0, arg, -1});
    }
    if (name == "x" || name == "u") {
      std::size_t dstart = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ == dstart) throw ParseError("expected index after '" + name + "'", pos_);
      const int idx = std::stoi(src_.substr(dstart, pos_ - dstart));
      const int limit = (name == "x") ? n_ : m_;
      if (idx < 1 || idx > limit)
        throw ParseError("unknown identifier '" + name + std::to_string(idx) + "'", start);
      return add({name == "x" ? NodeKind::StateVar : NodeKind::InputVar, 0, idx - 1, -1, -1});
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int n_, m_;
  PhiFunction* out_ = nullptr;
};

inline PhiFunction PhiFunction::parse(const std::string& src, int n_states, int n_inputs) {
  if (n_states < 1) throw DimensionError("PhiFunction::parse: n_states must be >= 1");
  if (n_inputs < 0) throw DimensionError("PhiFunction::parse: n_inputs must be >= 0");
  return PhiParser(src, n_states, n_inputs).run();
}

/// Per-coordinate sampling intervals for the Lipschitz estimate.
struct SampleBox {
  std::vector<std::pair<double, double>> x;
  std::vector<std::pair<double, double>> u;
};

/// Sampled lower estimate of the Lipschitz constant of phi in x, uniform
/// over the box with a shared input draw per pair. Advisory only: the
/// synthesis xi is always config-supplied. Deterministic given the seed,
/// and monotone nondecreasing in `samples` on a fixed seed (sample i draws
/// from its own counter stream).
inline double estimate_lipschitz(const PhiFunction& phi, const SampleBox& box, int samples,
                                 std::uint64_t seed) {
  if (samples < 2) throw Error("estimate_lipschitz: need at least 2 samples");
  if (static_cast<int>(box.x.size()) != phi.n_states() ||
      static_cast<int>(box.u.size()) != phi.n_inputs())
    throw DimensionError("estimate_lipschitz: box does not match phi dimensions");
  for (const auto& iv : box.x)
    if (!(iv.first <= iv.second)) throw Error("estimate_lipschitz: empty box interval");
  for (const auto& iv : box.u)
    if (!(iv.first <= iv.second)) throw Error("estimate_lipschitz: empty box interval");

  const int n = phi.n_states();
  const int m = phi.n_inputs();
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(i));
    Vec x1(n), x2(n), u(m);
    for (int k = 0; k < n; ++k) x1(k) = rng.uniform(box.x[k].first, box.x[k].second);
    for (int k = 0; k < n; ++k) x2(k) = rng.uniform(box.x[k].first, box.x[k].second);
    for (int k = 0; k < m; ++k) u(k) = rng.uniform(box.u[k].first, box.u[k].second);
    const double dx = (x1 - x2).norm();
    if (dx < 1e-12) continue;
    const double dphi = (phi.eval(x1, u) - phi.eval(x2, u)).norm();
    best = std::max(best, dphi / dx);
  }
  return best;
}

}  // namespace folmi
