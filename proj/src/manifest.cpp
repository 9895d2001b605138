#include "conelab/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <set>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

[[noreturn]] void invalid(SourcePos pos, const std::string& what) {
  throw LocatedError(ErrorCode::InvalidArgument, pos, what);
}

// ---------------------------------------------------------------- reader

class Reader {
 public:
  explicit Reader(const std::string& text) : src_(text) {}

  Document read() {
    Document doc;
    std::size_t current = 0;  // 0: root, k: sections[k-1]
    auto table = [&]() -> Table& { return current == 0 ? doc.root : doc.sections[current - 1]; };
    while (cur_ < src_.size()) {
      skip_spaces();
      const char c = src_.at(cur_);
      if (c == '\n') {
        ++cur_;
      } else if (c == '#') {
        skip_comment();
      } else if (c == '\0' && cur_ >= src_.size()) {
        break;
      } else if (c == '[') {
        Table t = header();
        if (!t.array)
          for (const auto& s : doc.sections)
            if (s.name == t.name) invalid(t.pos, "section [" + t.name + "] appears twice");
        doc.sections.push_back(std::move(t));
        current = doc.sections.size();
      } else if (ident_start(c)) {
        Entry e = entry();
        if (table().find(e.key)) invalid(e.pos, "duplicate key '" + e.key + "'");
        table().entries.push_back(std::move(e));
      } else {
        fail({"key", "section header", "comment", "end of line"});
      }
    }
    return doc;
  }

 private:
  void skip_spaces() {
    while (src_.at(cur_) == ' ' || src_.at(cur_) == '\t' || src_.at(cur_) == '\r') ++cur_;
  }
  void skip_comment() {
    while (cur_ < src_.size() && src_.at(cur_) != '\n') ++cur_;
  }
  void skip_blank_lines() {
    for (;;) {
      skip_spaces();
      if (src_.at(cur_) == '\n') ++cur_;
      else if (src_.at(cur_) == '#') skip_comment();
      else return;
    }
  }

  std::string found() const {
    if (cur_ >= src_.size()) return "end of input";
    if (src_.at(cur_) == '\n') return "end of line";
    std::size_t end = cur_ + 1;
    if (ident_char(src_.at(cur_)))
      while (ident_char(src_.at(end))) ++end;
    else
      while (end < src_.size() && (static_cast<unsigned char>(src_.at(end)) & 0xC0) == 0x80) ++end;
    return "'" + src_.text().substr(cur_, end - cur_) + "'";
  }

  [[noreturn]] void fail(std::set<std::string> expected) const {
    throw ParseError(src_.pos(cur_), std::move(expected), found());
  }

  std::string identifier() {
    if (!ident_start(src_.at(cur_))) fail({"identifier"});
    const std::size_t start = cur_;
    while (ident_char(src_.at(cur_))) ++cur_;
    return src_.text().substr(start, cur_ - start);
  }

  void end_of_line(std::set<std::string> expected) {
    skip_spaces();
    if (src_.at(cur_) == '#') skip_comment();
    if (cur_ < src_.size() && src_.at(cur_) != '\n') fail(std::move(expected));
    if (cur_ < src_.size()) ++cur_;
  }

  Table header() {
    Table t;
    t.pos = src_.pos(cur_);
    ++cur_;
    if (src_.at(cur_) == '[') {
      t.array = true;
      ++cur_;
    }
    skip_spaces();
    t.name = identifier();
    skip_spaces();
    if (src_.at(cur_) != ']') fail({t.array ? "']]'" : "']'"});
    ++cur_;
    if (t.array) {
      if (src_.at(cur_) != ']') fail({"']]'"});
      ++cur_;
    }
    end_of_line({"end of line"});
    return t;
  }

  Entry entry() {
    Entry e;
    e.pos = src_.pos(cur_);
    e.key = identifier();
    skip_spaces();
    if (src_.at(cur_) != '=') fail({"'='"});
    ++cur_;
    skip_spaces();
    e.value = value(0);
    end_of_line({"operator", "end of line"});
    return e;
  }

  Value value(int depth) {
    Value v;
    v.pos = src_.pos(cur_);
    const char c = src_.at(cur_);
    if (c == '"') {
      v.kind = Value::Kind::String;
      ++cur_;
      while (src_.at(cur_) != '"') {
        if (cur_ >= src_.size() || src_.at(cur_) == '\n') fail({"'\"'"});
        if (src_.at(cur_) == '\\' && (src_.at(cur_ + 1) == '"' || src_.at(cur_ + 1) == '\\')) ++cur_;
        v.text += src_.at(cur_++);
      }
      ++cur_;
      return v;
    }
    if (c == '[') {
      v.kind = Value::Kind::List;
      ++cur_;
      skip_blank_lines();
      if (src_.at(cur_) == ']') {
        ++cur_;
        return v;
      }
      for (;;) {
        v.items.push_back(value(depth + 1));
        skip_blank_lines();
        if (src_.at(cur_) == ',') {
          ++cur_;
          skip_blank_lines();
          if (src_.at(cur_) == ']') {
            ++cur_;
            return v;
          }
          continue;
        }
        if (src_.at(cur_) == ']') {
          ++cur_;
          return v;
        }
        fail({"','", "']'", "operator"});
      }
    }
    if (ident_start(c)) {
      std::size_t end = cur_;
      while (ident_char(src_.at(end))) ++end;
      const std::string word = src_.text().substr(cur_, end - cur_);
      if (word == "true" || word == "false") {
        v.kind = Value::Kind::Bool;
        v.flag = word == "true";
        cur_ = end;
        return v;
      }
    }
    if (cur_ >= src_.size() || c == '\n' || c == '#') fail({"value"});
    v.kind = Value::Kind::Expr;
    ExprParser p(src_, cur_, depth > 0);
    v.expr = p.parse();
    return v;
  }

  SourceText src_;
  std::size_t cur_ = 0;
};

}  // namespace

// ---------------------------------------------------------------- Value / Table

double Value::number() const {
  if (kind != Kind::Expr) invalid(pos, "expected a number");
  Expr e = expr;
  if (!e.is_constant()) invalid(pos, "expected a constant, got '" + e.to_string() + "'");
  e.bind({});
  return e.eval<double>(std::span<const double>());
}

long Value::integer() const {
  const double x = number();
  if (x != std::round(x) || std::abs(x) > 1e15) invalid(pos, "expected an integer");
  return static_cast<long>(x);
}

const std::string& Value::string() const {
  if (kind != Kind::String) invalid(pos, "expected a quoted string");
  return text;
}

bool Value::boolean() const {
  if (kind != Kind::Bool) invalid(pos, "expected true or false");
  return flag;
}

const std::vector<Value>& Value::list() const {
  if (kind != Kind::List) invalid(pos, "expected a list [ ... ]");
  return items;
}

Interval Value::interval() const {
  const auto& l = list();
  if (l.size() != 2) invalid(pos, "expected an interval [lo, hi]");
  const Interval iv{l[0].number(), l[1].number()};
  if (!(iv.lo < iv.hi)) invalid(pos, "empty interval");
  return iv;
}

const Entry* Table::find(const std::string& key) const {
  for (const auto& e : entries)
    if (e.key == key) return &e;
  return nullptr;
}

const Value& Table::require(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) invalid(pos, (name.empty() ? std::string("top level") : "[" + name + "]") + " needs '" + key + "'");
  return e->value;
}

Document parse_document(const std::string& text) { return Reader(text).read(); }

std::string to_string(ConstructionKind k) {
  switch (k) {
    case ConstructionKind::Cone: return "cone";
    case ConstructionKind::Warped: return "warped";
    case ConstructionKind::DoublyWarped: return "doubly_warped";
    case ConstructionKind::NullPlane: return "nullplane";
  }
  return "?";
}

const std::map<std::string, std::vector<std::string>>& check_operations() {
  static const std::map<std::string, std::vector<std::string>> ops = {
      {"flatness", {"stage", "samples", "seed", "tol"}},
      {"curvature", {"stage", "samples", "seed", "tol", "kappa"}},
      {"symmetries", {"stage", "samples", "seed", "tol"}},
      {"cross_mode", {"stage", "samples", "seed", "tol"}},
      {"parallel", {"field", "samples", "seed", "tol"}},
      {"potential_identities", {"field", "samples", "seed", "tol"}},
      {"split", {"potential", "epsilon", "branch", "seed", "tol", "level_points", "flow_times"}},
      {"holonomy", {"stage", "point", "loops", "probes", "seed", "expect"}},
      {"completeness", {"base_complete", "seed", "expect"}},
      {"nullplane", {"samples", "seed", "tol", "tol_vz"}},
      {"killing_warp", {"epsilon", "lambda", "lambda_imag", "tol"}},
  };
  return ops;
}

// ---------------------------------------------------------------- manifest

namespace {

StageRef stage_ref(const Value& v) {
  const std::string& s = v.string();
  if (s == "base") return StageRef::Base;
  if (s == "final") return StageRef::Final;
  throw ParseError(v.pos, {"\"base\"", "\"final\""}, "\"" + s + "\"");
}

bool reserved(const std::string& name) {
  static const std::set<std::string> words = {"sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "ln", "sqrt",
                                              "atan", "artanh", "arcsinh", "abs", "pi", "inf", "true", "false"};
  return words.contains(name);
}

int epsilon_of(const Value& v) {
  const long e = v.integer();
  if (e != 1 && e != -1) invalid(v.pos, "epsilon must be 1 or -1");
  return static_cast<int>(e);
}

void check_keys(const Table& t, const std::vector<std::string>& allowed) {
  for (const auto& e : t.entries)
    if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end())
      throw ParseError(e.pos, std::set<std::string>(allowed.begin(), allowed.end()), "'" + e.key + "'");
}

Expr bound_expr(const Value& v, const std::vector<std::string>& vars) {
  if (v.kind != Value::Kind::Expr) invalid(v.pos, "expected an expression");
  Expr e = v.expr;
  e.bind(vars);
  return e;
}

}  // namespace

Manifest parse_manifest(const std::string& text) {
  const Document doc = parse_document(text);
  Manifest m;

  check_keys(doc.root, {"title", "seed", "metric"});
  if (const Entry* e = doc.root.find("title")) m.title = e->value.string();
  if (const Entry* e = doc.root.find("seed")) {
    const long s = e->value.integer();
    if (s < 0) invalid(e->pos, "seed must be non-negative");
    m.seed = static_cast<std::uint64_t>(s);
  }

  static const std::set<std::string> kSections = {"coordinates", "sampling", "construction", "field", "potential",
                                                  "check"};
  const Table* coords = nullptr;
  const Table* sampling = nullptr;
  for (const auto& s : doc.sections) {
    if (!kSections.contains(s.name)) throw ParseError(s.pos, kSections, "[" + s.name + "]");
    const bool want_array = s.name != "coordinates" && s.name != "sampling";
    if (s.array != want_array)
      invalid(s.pos, want_array ? "use [[" + s.name + "]] (one block per item)" : "use [" + s.name + "]");
    if (s.name == "coordinates") coords = &s;
    if (s.name == "sampling") sampling = &s;
  }

  // coordinates
  if (!coords || coords->entries.empty()) invalid(doc.root.pos, "a [coordinates] section with at least one entry is required");
  std::vector<std::string> names;
  for (const auto& e : coords->entries) {
    if (reserved(e.key)) invalid(e.pos, "'" + e.key + "' is reserved");
    m.coordinates.push_back({e.key, e.value.interval(), std::nullopt, e.pos});
    names.push_back(e.key);
  }
  if (sampling)
    for (const auto& e : sampling->entries) {
      auto it = std::find(names.begin(), names.end(), e.key);
      if (it == names.end())
        throw LocatedError(ErrorCode::UnknownIdentifier, e.pos, "'" + e.key + "' is not a declared coordinate");
      const Interval iv = e.value.interval();
      const Interval& dom = m.coordinates[static_cast<std::size_t>(it - names.begin())].domain;
      if (iv.lo < dom.lo || iv.hi > dom.hi) invalid(e.pos, "sampling window leaves the domain of '" + e.key + "'");
      m.coordinates[static_cast<std::size_t>(it - names.begin())].sampling = iv;
    }
  const std::size_t n = names.size();

  // constructions (needed before the metric: a leading nullplane adds u to the metric's variables)
  for (const auto& s : doc.sections) {
    if (s.name != "construction") continue;
    const Value& kv = s.require("kind");
    const std::string& kind = kv.string();
    ConstructionDecl c;
    c.params = s;
    if (kind == "cone") {
      c.kind = ConstructionKind::Cone;
      check_keys(s, {"kind", "epsilon", "range", "sampling"});
      epsilon_of(s.require("epsilon"));
    } else if (kind == "warped") {
      c.kind = ConstructionKind::Warped;
      check_keys(s, {"kind", "epsilon", "warp", "range", "sampling"});
      epsilon_of(s.require("epsilon"));
      bound_expr(s.require("warp"), {"s"});
    } else if (kind == "doubly_warped") {
      c.kind = ConstructionKind::DoublyWarped;
      check_keys(s, {"kind", "form", "split", "range", "sampling"});
      const Value& f = s.require("form");
      if (f.string() != "plus" && f.string() != "minus") throw ParseError(f.pos, {"\"plus\"", "\"minus\""}, "\"" + f.string() + "\"");
      const long k = s.require("split").integer();
      if (k < 1 || static_cast<std::size_t>(k) >= n) invalid(s.require("split").pos, "split must lie in [1, dim - 1]");
      if (!m.constructions.empty()) invalid(s.pos, "doubly_warped must be the first construction");
    } else if (kind == "nullplane") {
      c.kind = ConstructionKind::NullPlane;
      check_keys(s, {"kind", "f1", "f2", "c", "u_range", "u_sampling"});
      if (!m.constructions.empty()) invalid(s.pos, "nullplane must be the first construction");
    } else {
      throw ParseError(kv.pos, {"\"cone\"", "\"doubly_warped\"", "\"nullplane\"", "\"warped\""}, "\"" + kind + "\"");
    }
    if (s.find("range")) s.find("range")->value.interval();
    if (s.find("sampling")) s.find("sampling")->value.interval();
    m.constructions.push_back(std::move(c));
  }
  const bool leading_nullplane = !m.constructions.empty() && m.constructions.front().kind == ConstructionKind::NullPlane;

  // metric
  const Value& mv = doc.root.require("metric");
  const auto& rows = mv.list();
  if (rows.size() != n)
    invalid(mv.pos, "metric has " + std::to_string(rows.size()) + " rows for " + std::to_string(n) + " coordinates");
  std::vector<std::string> metric_vars = names;
  if (leading_nullplane) metric_vars.push_back("u");
  for (const auto& row : rows) {
    const auto& cells = row.list();
    if (cells.size() != n) invalid(row.pos, "metric row needs " + std::to_string(n) + " entries");
    std::vector<Expr> r;
    for (const auto& cell : cells) r.push_back(bound_expr(cell, metric_vars));
    m.metric.push_back(std::move(r));
  }

  // symmetry: textual, else numeric on sample points
  {
    Rng rng(7);
    std::vector<std::vector<double>> pts;
    for (int k = 0; k < 20; ++k) {
      std::vector<double> p;
      for (const auto& c : m.coordinates) {
        const Interval w = c.sampling.value_or(default_sampling(c.domain));
        p.push_back(rng.uniform(w.lo, w.hi));
      }
      if (leading_nullplane) p.push_back(rng.uniform(-1.0, 1.0));
      pts.push_back(std::move(p));
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const Expr& a = m.metric[i][j];
        const Expr& b = m.metric[j][i];
        if (a.same_tree(b)) continue;
        for (const auto& p : pts) {
          const double va = a.eval<double>(p), vb = b.eval<double>(p);
          if (!std::isfinite(va) && !std::isfinite(vb)) continue;
          if (!(std::abs(va - vb) <= 1e-12 * std::max({1.0, std::abs(va), std::abs(vb)})))
            throw LocatedError(ErrorCode::AsymmetricMetric, rows[j].list()[i].pos,
                               "entry (" + std::to_string(j + 1) + "," + std::to_string(i + 1) + ") '" + b.to_string() +
                                   "' differs from (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") '" +
                                   a.to_string() + "'");
        }
      }
  }

  // doubly warped: block diagonal with each block depending on its own coordinates only
  if (!m.constructions.empty() && m.constructions.front().kind == ConstructionKind::DoublyWarped) {
    const auto k = static_cast<std::size_t>(m.constructions.front().params.require("split").integer());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const bool same = (i < k) == (j < k);
        const Expr& e = m.metric[i][j];
        const SourcePos pos = rows[i].list()[j].pos;
        if (!same) {
          if (!e.is_constant() || e.eval<double>(std::span<const double>()) != 0.0)
            invalid(pos, "doubly_warped needs a block diagonal metric");
          continue;
        }
        for (const auto& id : e.identifiers()) {
          const auto idx = static_cast<std::size_t>(std::find(names.begin(), names.end(), id) - names.begin());
          if ((idx < k) != (i < k)) invalid(pos, "block entry depends on '" + id + "' from the other block");
        }
      }
  }

  // chart names of the last stage
  std::vector<std::string> final_names = names;
  auto add_front = [&](const std::string& name, SourcePos pos) {
    if (std::find(final_names.begin(), final_names.end(), name) != final_names.end())
      invalid(pos, "construction adds coordinate '" + name + "', which is already declared");
    final_names.insert(final_names.begin(), name);
  };
  for (const auto& c : m.constructions) {
    switch (c.kind) {
      case ConstructionKind::Cone: add_front("r", c.params.pos); break;
      case ConstructionKind::Warped:
      case ConstructionKind::DoublyWarped: add_front("s", c.params.pos); break;
      case ConstructionKind::NullPlane: {
        for (const char* extra : {"s", "u", "t"})
          if (std::find(names.begin(), names.end(), extra) != names.end())
            invalid(c.params.pos, std::string("nullplane adds coordinate '") + extra + "', which is already declared");
        final_names.insert(final_names.end(), {"s", "u", "t"});
        bound_expr(c.params.require("f1"), {"u"});
        std::vector<std::string> f2_vars = names;
        f2_vars.insert(f2_vars.end(), {"s", "u"});
        bound_expr(c.params.require("f2"), f2_vars);
        if (const Entry* ce = c.params.find("c")) {
          if (ce->value.list().size() != n) invalid(ce->pos, "c needs one constant per M0 coordinate");
          for (const auto& x : ce->value.list()) x.number();
        }
        if (c.params.find("u_range")) c.params.find("u_range")->value.interval();
        if (c.params.find("u_sampling")) c.params.find("u_sampling")->value.interval();
        break;
      }
    }
  }
  std::vector<std::string> base_names = names;

  std::set<std::string> field_names, potential_names;
  for (const auto& s : doc.sections) {
    if (s.name == "field") {
      check_keys(s, {"name", "components", "stage"});
      FieldDecl f;
      f.pos = s.pos;
      f.name = s.require("name").string();
      if (!field_names.insert(f.name).second) invalid(s.pos, "field '" + f.name + "' defined twice");
      if (const Entry* e = s.find("stage")) f.stage = stage_ref(e->value);
      const auto& vars = f.stage == StageRef::Base ? base_names : final_names;
      const Value& cv = s.require("components");
      if (cv.list().size() != vars.size())
        invalid(cv.pos, "field '" + f.name + "' needs " + std::to_string(vars.size()) + " components");
      for (const auto& x : cv.list()) f.components.push_back(bound_expr(x, vars));
      m.fields.push_back(std::move(f));
    } else if (s.name == "potential") {
      check_keys(s, {"name", "expr", "stage"});
      PotentialDecl p;
      p.pos = s.pos;
      p.name = s.require("name").string();
      if (!potential_names.insert(p.name).second) invalid(s.pos, "potential '" + p.name + "' defined twice");
      if (const Entry* e = s.find("stage")) p.stage = stage_ref(e->value);
      p.expr = bound_expr(s.require("expr"), p.stage == StageRef::Base ? base_names : final_names);
      m.potentials.push_back(std::move(p));
    } else if (s.name == "check") {
      CheckDecl c;
      c.pos = s.pos;
      const Value& opv = s.require("op");
      c.op = opv.string();
      const auto it = check_operations().find(c.op);
      if (it == check_operations().end()) {
        std::set<std::string> known;
        for (const auto& [k, v] : check_operations()) known.insert("\"" + k + "\"");
        throw ParseError(opv.pos, known, "\"" + c.op + "\"");
      }
      std::vector<std::string> allowed = it->second;
      allowed.insert(allowed.end(), {"name", "op"});
      check_keys(s, allowed);
      c.name = s.find("name") ? s.find("name")->value.string() : c.op;
      if (const Entry* e = s.find("field"); e && !field_names.contains(e->value.string()))
        throw LocatedError(ErrorCode::UnknownIdentifier, e->value.pos, "no field named '" + e->value.string() + "'");
      if (const Entry* e = s.find("potential"); e && !potential_names.contains(e->value.string()))
        throw LocatedError(ErrorCode::UnknownIdentifier, e->value.pos, "no potential named '" + e->value.string() + "'");
      if (const Entry* e = s.find("stage")) stage_ref(e->value);
      c.params = s;
      m.checks.push_back(std::move(c));
    }
  }
  return m;
}

// ---------------------------------------------------------------- model

ChartFunction expr_function(std::vector<Expr> exprs, std::size_t in_dim) {
  auto ex = std::make_shared<const std::vector<Expr>>(std::move(exprs));
  const std::size_t out = ex->size();
  return ChartFunction(in_dim, out, [ex](auto x) {
    using T = scalar_of<decltype(x)>;
    std::vector<T> v;
    v.reserve(ex->size());
    for (const auto& e : *ex) v.push_back(e.template eval<T>(x));
    return v;
  });
}

namespace {

std::vector<Expr> flatten(const std::vector<std::vector<Expr>>& m) {
  std::vector<Expr> out;
  for (const auto& row : m) out.insert(out.end(), row.begin(), row.end());
  return out;
}

Warp warp_from_expr(const Expr& e) {
  const std::string s = e.to_string();
  if (s == "cosh(s)") return warp_cosh();
  if (s == "exp(s)") return warp_exp();
  if (s == "sinh(s)") return warp_sinh();
  if (s == "cos(s)") return warp_cos();
  if (s == "sin(s)") return warp_sin();
  return warp_custom(s, expr_function({e}, 1));
}

// Block of the metric on coordinates [lo, hi), as a metric on those coordinates alone.
MetricField block_metric(const Manifest& m, std::size_t lo, std::size_t hi) {
  const std::size_t n = m.coordinates.size(), k = hi - lo;
  std::vector<std::string> names;
  std::vector<Interval> dom, samp;
  std::vector<Expr> cells;
  for (std::size_t i = lo; i < hi; ++i) {
    names.push_back(m.coordinates[i].name);
    dom.push_back(m.coordinates[i].domain);
    samp.push_back(m.coordinates[i].sampling.value_or(default_sampling(m.coordinates[i].domain)));
    for (std::size_t j = lo; j < hi; ++j) cells.push_back(m.metric[i][j]);
  }
  auto ex = std::make_shared<const std::vector<Expr>>(std::move(cells));
  ChartFunction f(k, k * k, [ex, n, lo, k](auto x) {
    using T = scalar_of<decltype(x)>;
    std::vector<T> full(n, T(0.0));
    for (std::size_t i = 0; i < k; ++i) full[lo + i] = x[i];
    std::vector<T> v;
    for (const auto& e : *ex) v.push_back(e.template eval<T>(std::span<const T>(full)));
    return v;
  });
  return MetricField(CoordinateChart(names, dom, samp), f);
}

Interval interval_or(const Table& t, const char* key, Interval fallback) {
  const Entry* e = t.find(key);
  return e ? e->value.interval() : fallback;
}

}  // namespace

Model build_model(const Manifest& m) {
  Model model;
  const std::size_t n = m.coordinates.size();
  std::vector<std::string> names;
  std::vector<Interval> dom, samp;
  for (const auto& c : m.coordinates) {
    names.push_back(c.name);
    dom.push_back(c.domain);
    samp.push_back(c.sampling.value_or(default_sampling(c.domain)));
  }
  const CoordinateChart chart(names, dom, samp);

  std::size_t first = 0;
  if (!m.constructions.empty() && m.constructions.front().kind == ConstructionKind::NullPlane) {
    const Table& p = m.constructions.front().params;
    auto g0 = std::make_shared<const std::vector<Expr>>(flatten(m.metric));
    NullPlaneInputs in;
    in.m0 = chart;
    in.u_range = interval_or(p, "u_range", Interval{});
    in.u_sampling = interval_or(p, "u_sampling", Interval{-1.0, 1.0});
    in.f1 = expr_function({bound_expr(p.require("f1"), {"u"})}, 1);
    std::vector<std::string> f2_vars = names;
    f2_vars.insert(f2_vars.end(), {"s", "u"});
    auto f2 = std::make_shared<const Expr>(bound_expr(p.require("f2"), f2_vars));
    auto [f2v, df2] = make_f2(n, [f2](auto y) {
      using T = scalar_of<decltype(y)>;
      return f2->template eval<T>(y);
    });
    in.f2 = f2v;
    in.df2 = df2;
    in.g0 = ChartFunction(n + 1, n * n, [g0](auto y) {
      using T = scalar_of<decltype(y)>;
      std::vector<T> v;
      for (const auto& e : *g0) v.push_back(e.template eval<T>(y));
      return v;
    });
    if (const Entry* ce = p.find("c"))
      for (const auto& x : ce->value.list()) in.C.push_back(x.number());
    // M0 itself at u = 0
    const MetricField m0(chart, ChartFunction(n, n * n, [g0, n](auto x) {
                           using T = scalar_of<decltype(x)>;
                           std::vector<T> y(x.begin(), x.end());
                           y.push_back(T(0.0));
                           std::vector<T> v;
                           for (const auto& e : *g0) v.push_back(e.template eval<T>(std::span<const T>(y)));
                           return v;
                         }));
    model.stages.push_back({"base", m0, std::nullopt, std::nullopt, std::nullopt});
    GeneratedNullPlane gen = generate_nullplane_metric(in);
    model.stages.push_back({"nullplane", gen.metric, std::nullopt, std::nullopt, gen.spec});
    first = 1;
  } else {
    model.stages.push_back({"base", MetricField(chart, expr_function(flatten(m.metric), n)), std::nullopt,
                            std::nullopt, std::nullopt});
  }

  for (std::size_t i = first; i < m.constructions.size(); ++i) {
    const ConstructionDecl& c = m.constructions[i];
    const Table& p = c.params;
    const MetricField prev = model.stages.back().metric;
    Stage st;
    st.label = to_string(c.kind);
    switch (c.kind) {
      case ConstructionKind::Cone: {
        ConeSpec spec;
        spec.epsilon = epsilon_of(p.require("epsilon"));
        spec.base = prev;
        spec.r_range = interval_or(p, "range", Interval{0.0, kInf});
        spec.r_sampling = interval_or(p, "sampling", Interval{0.5, 2.0});
        st.metric = build_cone(spec);
        st.cone = spec;
        break;
      }
      case ConstructionKind::Warped: {
        WarpedSpec spec;
        spec.epsilon = epsilon_of(p.require("epsilon"));
        spec.warp = warp_from_expr(bound_expr(p.require("warp"), {"s"}));
        spec.base = prev;
        spec.s_range = interval_or(p, "range", Interval{});
        if (p.find("sampling")) spec.s_sampling = p.find("sampling")->value.interval();
        st.metric = build_warped(spec);
        st.warped = spec;
        break;
      }
      case ConstructionKind::DoublyWarped: {
        const auto k = static_cast<std::size_t>(p.require("split").integer());
        const DoublyWarpedForm form = p.require("form").string() == "plus" ? DoublyWarpedForm::Plus : DoublyWarpedForm::Minus;
        std::optional<Interval> s_samp;
        if (p.find("sampling")) s_samp = p.find("sampling")->value.interval();
        const Interval s_range =
            interval_or(p, "range", form == DoublyWarpedForm::Plus ? Interval{0.0, 1.5707963267948966} : Interval{0.0, kInf});
        st.metric = build_doubly_warped(form, block_metric(m, 0, k), block_metric(m, k, n), s_range, s_samp);
        break;
      }
      case ConstructionKind::NullPlane: break;  // only as the first construction
    }
    model.stages.push_back(std::move(st));
  }

  for (const auto& f : m.fields) {
    const std::size_t dim = model.stage(f.stage).metric.dim();
    model.fields[f.name] = {f.stage, expr_function(f.components, dim)};
  }
  for (const auto& p : m.potentials) {
    const std::size_t dim = model.stage(p.stage).metric.dim();
    auto ex = std::make_shared<const Expr>(p.expr);
    model.potentials[p.name] = {p.stage, make_potential(dim, [ex](auto x) {
                                  using T = scalar_of<decltype(x)>;
                                  return ex->template eval<T>(x);
                                })};
  }
  return model;
}

}  // namespace conelab
