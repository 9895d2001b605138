#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "conelab/dual.hpp"
#include "conelab/errors.hpp"

namespace conelab {

// 1-based position in the source text.
struct SourcePos {
  int line = 1;
  int column = 1;
};

// An Error tied to a place in the source (UnknownIdentifier, AsymmetricMetric, ParseError).
class LocatedError : public Error {
 public:
  LocatedError(ErrorCode code, SourcePos pos, const std::string& what);
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

class ParseError : public LocatedError {
 public:
  ParseError(SourcePos pos, std::set<std::string> expected, const std::string& found);
  const std::set<std::string>& expected() const { return expected_; }

 private:
  std::set<std::string> expected_;
};

// Text with offset -> line/column mapping (columns count UTF-8 code points).
class SourceText {
 public:
  explicit SourceText(std::string text, SourcePos origin = {});
  const std::string& text() const { return text_; }
  std::size_t size() const { return text_.size(); }
  char at(std::size_t i) const { return i < text_.size() ? text_[i] : '\0'; }
  SourcePos pos(std::size_t offset) const;

 private:
  std::string text_;
  SourcePos origin_;
  std::vector<std::size_t> line_starts_;
};

class Expr;

// Recursive-descent expression parser over a shared cursor, so the manifest reader can
// parse expressions in place. Stops before the first character that cannot extend the
// expression. With `multiline`, newlines and # comments count as blanks.
class ExprParser {
 public:
  ExprParser(const SourceText& src, std::size_t& cursor, bool multiline);
  Expr parse();

 private:
  int parse_sum(Expr& e);
  int parse_product(Expr& e);
  int parse_unary(Expr& e);
  int parse_power(Expr& e);
  int parse_primary(Expr& e);
  void skip_blank();
  std::string describe_here() const;
  [[noreturn]] void fail(std::set<std::string> expected) const;

  const SourceText& src_;
  std::size_t& cur_;
  bool multiline_;
  int depth_ = 0;
};

enum class Func { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Ln, Sqrt, Atan, Artanh, Arcsinh, Abs };
const char* func_name(Func f);

enum class Op : std::uint8_t { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

struct ExprNode {
  Op op = Op::Num;
  double value = 0.0;       // Num
  std::string name;         // Var
  int slot = -1;            // Var, after bind()
  Func func = Func::Sin;    // Call
  int lhs = -1;             // child indices into the arena (always smaller than this node)
  int rhs = -1;
  SourcePos pos;
};

// Expression stored as an arena in evaluation order.
class Expr {
 public:
  Expr() = default;

  // Parses a whole expression; `origin` is the position of text[0] in the enclosing file.
  static Expr parse(const std::string& text, SourcePos origin = {});

  const std::vector<ExprNode>& nodes() const { return nodes_; }
  bool empty() const { return nodes_.empty(); }

  // Resolves identifiers to slots in `vars`; the constants pi and inf need no slot.
  // UnknownIdentifier otherwise.
  void bind(const std::vector<std::string>& vars);
  bool bound() const { return bound_; }
  std::set<std::string> identifiers() const;  // excluding pi and inf

  // Fully parenthesised with %.17g literals; reparses to the same tree.
  std::string to_string() const;

  // Structural equality (positions ignored).
  bool same_tree(const Expr& other) const;

  // Numerically constant (no variables).
  bool is_constant() const;

  template <class T>
  T eval(std::span<const T> vars) const;

 private:
  friend class ExprParser;
  std::vector<ExprNode> nodes_;
  bool bound_ = false;
};

namespace detail {

template <class T>
T int_pow(const T& x, long n) {
  if (n < 0) return T(1.0) / int_pow(x, -n);
  T acc(1.0), b = x;
  while (n > 0) {
    if (n & 1) acc = acc * b;
    b = b * b;
    n >>= 1;
  }
  return acc;
}

template <class T>
T apply(Func f, const T& x) {
  switch (f) {
    case Func::Sin: return sin(x);
    case Func::Cos: return cos(x);
    case Func::Tan: return tan(x);
    case Func::Sinh: return sinh(x);
    case Func::Cosh: return cosh(x);
    case Func::Tanh: return tanh(x);
    case Func::Exp: return exp(x);
    case Func::Ln: return log(x);
    case Func::Sqrt: return sqrt(x);
    case Func::Atan: return atan(x);
    case Func::Artanh: return atanh(x);
    case Func::Arcsinh: return asinh(x);
    case Func::Abs: return abs(x);
  }
  return x;
}

}  // namespace detail

template <class T>
T Expr::eval(std::span<const T> vars) const {
  if (!bound_) throw Error(ErrorCode::InvalidArgument, "expression evaluated before bind()");
  std::vector<T> v(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const ExprNode& n = nodes_[i];
    switch (n.op) {
      case Op::Num: v[i] = T(n.value); break;
      case Op::Var: v[i] = n.slot >= 0 ? vars[static_cast<std::size_t>(n.slot)] : T(n.value); break;
      case Op::Neg: v[i] = -v[n.lhs]; break;
      case Op::Add: v[i] = v[n.lhs] + v[n.rhs]; break;
      case Op::Sub: v[i] = v[n.lhs] - v[n.rhs]; break;
      case Op::Mul: v[i] = v[n.lhs] * v[n.rhs]; break;
      case Op::Div: v[i] = v[n.lhs] / v[n.rhs]; break;
      case Op::Pow: {
        const ExprNode& e = nodes_[n.rhs];
        if (e.op == Op::Num && e.value == std::round(e.value) && std::abs(e.value) <= 64) {
          v[i] = detail::int_pow(v[n.lhs], static_cast<long>(e.value));
        } else {
          using std::pow;
          v[i] = pow(v[n.lhs], v[n.rhs]);
        }
        break;
      }
      case Op::Call: v[i] = detail::apply(n.func, v[n.lhs]); break;
    }
  }
  return v.back();
}

}  // namespace conelab
