#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conelab/cone.hpp"
#include "conelab/expr.hpp"
#include "conelab/metric.hpp"
#include "conelab/nullplane.hpp"
#include "conelab/split_fields.hpp"
#include "conelab/warped.hpp"

namespace conelab {

// ---------------------------------------------------------------- raw key-value layer

struct Value {
  enum class Kind { Expr, String, Bool, List };
  Kind kind = Kind::Expr;
  Expr expr;
  std::string text;
  bool flag = false;
  std::vector<Value> items;
  SourcePos pos;

  // Constant expression (pi and inf allowed). InvalidArgument otherwise.
  double number() const;
  long integer() const;
  const std::string& string() const;
  bool boolean() const;
  const std::vector<Value>& list() const;
  Interval interval() const;  // [lo, hi]
};

struct Entry {
  std::string key;
  Value value;
  SourcePos pos;
};

struct Table {
  std::string name;     // empty for the top level
  bool array = false;   // [[name]]
  SourcePos pos;
  std::vector<Entry> entries;

  const Entry* find(const std::string& key) const;
  const Value& require(const std::string& key) const;
};

struct Document {
  Table root;
  std::vector<Table> sections;  // in file order
};

// Line-based reader; the grammar is in docs/manifest.md.
Document parse_document(const std::string& text);

// ---------------------------------------------------------------- manifest

struct CoordinateDecl {
  std::string name;
  Interval domain;
  std::optional<Interval> sampling;
  SourcePos pos;
};

enum class ConstructionKind { Cone, Warped, DoublyWarped, NullPlane };
std::string to_string(ConstructionKind k);

struct ConstructionDecl {
  ConstructionKind kind = ConstructionKind::Cone;
  Table params;
};

enum class StageRef { Base, Final };

struct FieldDecl {
  std::string name;
  std::vector<Expr> components;
  StageRef stage = StageRef::Final;
  SourcePos pos;
};

struct PotentialDecl {
  std::string name;
  Expr expr;
  StageRef stage = StageRef::Base;
  SourcePos pos;
};

struct CheckDecl {
  std::string name;
  std::string op;
  Table params;
  SourcePos pos;
};

struct Manifest {
  std::string title;
  std::optional<std::uint64_t> seed;
  std::vector<CoordinateDecl> coordinates;
  std::vector<std::vector<Expr>> metric;
  std::vector<ConstructionDecl> constructions;
  std::vector<FieldDecl> fields;
  std::vector<PotentialDecl> potentials;
  std::vector<CheckDecl> checks;
};

// ParseError, UnknownIdentifier, AsymmetricMetric (all located).
Manifest parse_manifest(const std::string& text);

// Check operations and the parameters each accepts.
const std::map<std::string, std::vector<std::string>>& check_operations();

// ---------------------------------------------------------------- model

struct Stage {
  std::string label;  // "base", "cone", ...
  MetricField metric;
  std::optional<ConeSpec> cone;          // the stage is a cone over the previous one
  std::optional<WarpedSpec> warped;
  std::optional<NullPlaneMetricSpec> nullplane;
};

struct Model {
  std::vector<Stage> stages;  // stages[0] is the declared metric (or the null-plane input M0)
  std::map<std::string, std::pair<StageRef, ChartFunction>> fields;
  std::map<std::string, std::pair<StageRef, Potential>> potentials;

  const Stage& stage(StageRef ref) const { return ref == StageRef::Base ? stages.front() : stages.back(); }
};

// Builds the metric stages, fields and potentials (expressions are evaluated through
// one arena in real and dual arithmetic).
Model build_model(const Manifest& m);

// Vector of expressions over `in_dim` variables as a chart function.
ChartFunction expr_function(std::vector<Expr> exprs, std::size_t in_dim);

}  // namespace conelab
