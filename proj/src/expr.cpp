#include "conelab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>

namespace conelab {

namespace {

std::string where(SourcePos p) { return "line " + std::to_string(p.line) + ", column " + std::to_string(p.column); }

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

const std::map<std::string, Func>& function_table() {
  static const std::map<std::string, Func> table = {
      {"sin", Func::Sin},   {"cos", Func::Cos},       {"tan", Func::Tan},         {"sinh", Func::Sinh},
      {"cosh", Func::Cosh}, {"tanh", Func::Tanh},     {"exp", Func::Exp},         {"ln", Func::Ln},
      {"sqrt", Func::Sqrt}, {"atan", Func::Atan},     {"artanh", Func::Artanh},   {"arcsinh", Func::Arcsinh},
      {"abs", Func::Abs}};
  return table;
}

bool constant_value(const std::string& name, double& v) {
  if (name == "pi") v = std::numbers::pi;
  else if (name == "inf") v = std::numeric_limits<double>::infinity();
  else return false;
  return true;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

char op_char(Op op) {
  switch (op) {
    case Op::Add: return '+';
    case Op::Sub: return '-';
    case Op::Mul: return '*';
    case Op::Div: return '/';
    case Op::Pow: return '^';
    default: return '?';
  }
}

}  // namespace

LocatedError::LocatedError(ErrorCode code, SourcePos pos, const std::string& what)
    : Error(code, where(pos) + ": " + what), pos_(pos) {}

ParseError::ParseError(SourcePos pos, std::set<std::string> expected, const std::string& found)
    : LocatedError(ErrorCode::ParseError, pos, "expected one of {" + join(expected) + "}, found " + found),
      expected_(std::move(expected)) {}

const char* func_name(Func f) {
  for (const auto& [name, fn] : function_table())
    if (fn == f) return name.c_str();
  return "?";
}

SourceText::SourceText(std::string text, SourcePos origin) : text_(std::move(text)), origin_(origin) {
  line_starts_.push_back(0);
  for (std::size_t i = 0; i < text_.size(); ++i)
    if (text_[i] == '\n') line_starts_.push_back(i + 1);
}

SourcePos SourceText::pos(std::size_t offset) const {
  offset = std::min(offset, text_.size());
  const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  const std::size_t line = static_cast<std::size_t>(it - line_starts_.begin()) - 1;
  int col = 1;
  for (std::size_t i = line_starts_[line]; i < offset; ++i)
    if ((static_cast<unsigned char>(text_[i]) & 0xC0) != 0x80) ++col;
  SourcePos p;
  p.line = origin_.line + static_cast<int>(line);
  p.column = line == 0 ? origin_.column + col - 1 : col;
  return p;
}

// ---------------------------------------------------------------- parser

ExprParser::ExprParser(const SourceText& src, std::size_t& cursor, bool multiline)
    : src_(src), cur_(cursor), multiline_(multiline) {}

void ExprParser::skip_blank() {
  for (;;) {
    const char c = src_.at(cur_);
    if (c == ' ' || c == '\t' || c == '\r') {
      ++cur_;
    } else if ((multiline_ || depth_ > 0) && c == '\n') {
      ++cur_;
    } else if ((multiline_ || depth_ > 0) && c == '#') {
      while (cur_ < src_.size() && src_.at(cur_) != '\n') ++cur_;
    } else {
      return;
    }
  }
}

std::string ExprParser::describe_here() const {
  if (cur_ >= src_.size()) return "end of input";
  const char c = src_.at(cur_);
  if (c == '\n') return "end of line";
  std::size_t end = cur_ + 1;
  if (ident_char(c))
    while (ident_char(src_.at(end))) ++end;
  else
    while (end < src_.size() && (static_cast<unsigned char>(src_.at(end)) & 0xC0) == 0x80) ++end;
  return "'" + src_.text().substr(cur_, end - cur_) + "'";
}

void ExprParser::fail(std::set<std::string> expected) const {
  throw ParseError(src_.pos(cur_), std::move(expected), describe_here());
}

Expr ExprParser::parse() {
  Expr e;
  skip_blank();
  parse_sum(e);
  return e;
}

namespace {

int push(std::vector<ExprNode>& nodes, ExprNode n) {
  nodes.push_back(std::move(n));
  return static_cast<int>(nodes.size()) - 1;
}

}  // namespace

int ExprParser::parse_sum(Expr& e) {
  int lhs = parse_product(e);
  for (;;) {
    skip_blank();
    const char c = src_.at(cur_);
    if (c != '+' && c != '-') return lhs;
    ExprNode n;
    n.op = c == '+' ? Op::Add : Op::Sub;
    n.pos = src_.pos(cur_);
    ++cur_;
    skip_blank();
    n.lhs = lhs;
    n.rhs = parse_product(e);
    lhs = push(e.nodes_, n);
  }
}

int ExprParser::parse_product(Expr& e) {
  int lhs = parse_unary(e);
  for (;;) {
    skip_blank();
    const char c = src_.at(cur_);
    if (c != '*' && c != '/') return lhs;
    ExprNode n;
    n.op = c == '*' ? Op::Mul : Op::Div;
    n.pos = src_.pos(cur_);
    ++cur_;
    skip_blank();
    n.lhs = lhs;
    n.rhs = parse_unary(e);
    lhs = push(e.nodes_, n);
  }
}

int ExprParser::parse_unary(Expr& e) {
  if (src_.at(cur_) == '-') {
    ExprNode n;
    n.op = Op::Neg;
    n.pos = src_.pos(cur_);
    ++cur_;
    skip_blank();
    n.lhs = parse_unary(e);
    return push(e.nodes_, n);
  }
  return parse_power(e);
}

int ExprParser::parse_power(Expr& e) {
  const int base = parse_primary(e);
  skip_blank();
  if (src_.at(cur_) != '^') return base;
  ExprNode n;
  n.op = Op::Pow;
  n.pos = src_.pos(cur_);
  ++cur_;
  skip_blank();
  n.lhs = base;
  n.rhs = parse_unary(e);  // right associative, allows 2^-1
  return push(e.nodes_, n);
}

int ExprParser::parse_primary(Expr& e) {
  static const std::set<std::string> kOperand = {"number", "identifier", "'('", "'-'"};
  const char c = src_.at(cur_);
  const std::size_t start = cur_;
  if (digit(c) || (c == '.' && digit(src_.at(cur_ + 1)))) {
    std::size_t end = cur_;
    while (digit(src_.at(end))) ++end;
    if (src_.at(end) == '.') {
      ++end;
      while (digit(src_.at(end))) ++end;
    }
    if (src_.at(end) == 'e' || src_.at(end) == 'E') {
      std::size_t k = end + 1;
      if (src_.at(k) == '+' || src_.at(k) == '-') ++k;
      if (!digit(src_.at(k))) {
        cur_ = k;
        fail({"exponent digits"});
      }
      while (digit(src_.at(k))) ++k;
      end = k;
    }
    const std::string lit = src_.text().substr(start, end - start);
    ExprNode n;
    n.op = Op::Num;
    n.value = std::strtod(lit.c_str(), nullptr);
    n.pos = src_.pos(start);
    if (!std::isfinite(n.value)) fail({"finite number"});
    cur_ = end;
    return push(e.nodes_, n);
  }
  if (ident_start(c)) {
    std::size_t end = cur_;
    while (ident_char(src_.at(end))) ++end;
    const std::string name = src_.text().substr(start, end - start);
    const SourcePos pos = src_.pos(start);
    cur_ = end;
    skip_blank();
    const auto fn = function_table().find(name);
    if (src_.at(cur_) == '(') {
      if (fn == function_table().end())
        throw LocatedError(ErrorCode::UnknownIdentifier, pos, "unknown function '" + name + "'");
      ++cur_;
      ++depth_;
      skip_blank();
      ExprNode n;
      n.op = Op::Call;
      n.func = fn->second;
      n.pos = pos;
      n.lhs = parse_sum(e);
      skip_blank();
      if (src_.at(cur_) != ')') fail({"')'", "operator"});
      --depth_;
      ++cur_;
      return push(e.nodes_, n);
    }
    if (fn != function_table().end()) fail({"'('"});
    ExprNode n;
    n.op = Op::Var;
    n.name = name;
    n.pos = pos;
    return push(e.nodes_, n);
  }
  if (c == '(') {
    ++cur_;
    ++depth_;
    skip_blank();
    const int inner = parse_sum(e);
    skip_blank();
    if (src_.at(cur_) != ')') fail({"')'", "operator"});
    --depth_;
    ++cur_;
    return inner;
  }
  fail(kOperand);
}

// ---------------------------------------------------------------- Expr

Expr Expr::parse(const std::string& text, SourcePos origin) {
  const SourceText src(text, origin);
  std::size_t cur = 0;
  ExprParser p(src, cur, true);
  Expr e = p.parse();
  while (cur < src.size() && (src.at(cur) == ' ' || src.at(cur) == '\t' || src.at(cur) == '\r' || src.at(cur) == '\n'))
    ++cur;
  if (cur < src.size()) throw ParseError(src.pos(cur), {"operator", "end of input"}, "'" + text.substr(cur, 1) + "'");
  return e;
}

void Expr::bind(const std::vector<std::string>& vars) {
  for (auto& n : nodes_) {
    if (n.op != Op::Var) continue;
    const auto it = std::find(vars.begin(), vars.end(), n.name);
    if (it != vars.end()) {
      n.slot = static_cast<int>(it - vars.begin());
      continue;
    }
    double v = 0.0;
    if (!constant_value(n.name, v)) {
      std::string known;
      for (const auto& s : vars) known += (known.empty() ? "" : ", ") + s;
      throw LocatedError(ErrorCode::UnknownIdentifier, n.pos,
                         "'" + n.name + "' is not a declared coordinate (known: " + known + ")");
    }
    n.slot = -1;
    n.value = v;
  }
  bound_ = true;
}

std::set<std::string> Expr::identifiers() const {
  std::set<std::string> out;
  double v = 0.0;
  for (const auto& n : nodes_)
    if (n.op == Op::Var && !constant_value(n.name, v)) out.insert(n.name);
  return out;
}

bool Expr::is_constant() const { return identifiers().empty(); }

std::string Expr::to_string() const {
  if (nodes_.empty()) return "";
  std::vector<std::string> s(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const ExprNode& n = nodes_[i];
    switch (n.op) {
      case Op::Num: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        s[i] = buf;
        break;
      }
      case Op::Var: s[i] = n.name; break;
      case Op::Neg: s[i] = "(-" + s[n.lhs] + ")"; break;
      case Op::Call: s[i] = std::string(func_name(n.func)) + "(" + s[n.lhs] + ")"; break;
      default: s[i] = "(" + s[n.lhs] + " " + op_char(n.op) + " " + s[n.rhs] + ")"; break;
    }
  }
  return s.back();
}

bool Expr::same_tree(const Expr& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const ExprNode& a = nodes_[i];
    const ExprNode& b = other.nodes_[i];
    if (a.op != b.op || a.lhs != b.lhs || a.rhs != b.rhs) return false;
    if (a.op == Op::Num && a.value != b.value) return false;
    if (a.op == Op::Var && a.name != b.name) return false;
    if (a.op == Op::Call && a.func != b.func) return false;
  }
  return true;
}

}  // namespace conelab
