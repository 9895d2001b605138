// conelab command-line front end. Exit codes: 0 all checks pass, 1 a check failed
// or was undetermined, 2 usage or input error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "conelab/clifford_spin.hpp"
#include "conelab/cone.hpp"
#include "conelab/errors.hpp"
#include "conelab/geodesic.hpp"
#include "conelab/holonomy.hpp"
#include "conelab/manifest.hpp"
#include "conelab/report.hpp"
#include "conelab/stock.hpp"

using namespace conelab;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string out;
  double tol = 0.0;
  bool timing = false;
  bool sequential = false;
  CLI::Option* tol_opt = nullptr;

  void attach(CLI::App* sub) {
    sub->add_option("--out", out, "write the report here instead of stdout");
    tol_opt = sub->add_option("--tol", tol, "replace built-in default tolerances");
    sub->add_flag("--timing", timing, "add wall_time to each check record");
    sub->add_flag("--sequential", sequential, "run checks one after another");
  }

  RunOptions options() const {
    RunOptions o;
    o.default_seed = seed_from_env();
    if (tol_opt && tol_opt->count() > 0) o.tol_override = tol;
    o.timing = timing;
    o.concurrent = !sequential;
    return o;
  }
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int emit(const Json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw UsageError("cannot write " + out);
    f << text;
  }
  return report["status"] == "pass" ? kExitPass : kExitFail;
}

std::pair<int, int> signature_pair(const std::vector<int>& v) {
  if (v.size() != 2 || v[0] < 0 || v[1] < 0) throw UsageError("--signature expects two non-negative integers a,b");
  return {v[0], v[1]};
}

std::pair<Manifest, Model> load(const std::string& path) {
  Manifest m = parse_manifest(read_file(path));
  Model model = build_model(m);
  return {std::move(m), std::move(model)};
}

// ---------------------------------------------------------------- check

int cmd_check(const std::string& path, const Common& common) {
  const auto [manifest, model] = load(path);
  RunOptions o = common.options();
  if (manifest.seed) o.default_seed = *manifest.seed;
  const auto records = run_checks(manifest, model, o);
  Json extra;
  extra["manifest"] = path;
  extra["title"] = manifest.title;
  return emit(make_report("check", o, records, extra), common.out);
}

// ---------------------------------------------------------------- geodesic

struct GeodesicArgs {
  double r0 = 1.0;
  double a = 0.0;
  int c = 0;
  double L = 1.0;
  int eps = 1;
  double horizon = 50.0;
  std::string csv;
  std::size_t rows = 201;
};

// Base vector on -dx^2 + dy^2 with g(X,X) = c L^2.
Vector minkowski_tangent(int c, double L) {
  Vector X(2);
  if (c > 0) X << 0.3 * L, std::sqrt(1.09) * L;
  else if (c < 0) X << std::sqrt(1.09) * L, 0.3 * L;
  else X << L, L;
  return X;
}

int cmd_geodesic(const GeodesicArgs& g, const Common& common) {
  if (g.c < -1 || g.c > 1) throw UsageError("--c must be -1, 0 or 1");
  if (g.eps != 1 && g.eps != -1) throw UsageError("--eps must be 1 or -1");
  if (g.r0 <= 0.0) throw UsageError("--r0 must be positive");
  if (g.L <= 0.0) throw UsageError("--L must be positive");
  const RunOptions o = common.options();
  const ConeGeodesic cf = closed_form_geodesic(g.r0, g.a, g.c, g.L, g.eps);
  const ConeSpec spec{g.eps, stock::minkowski2()};
  const MetricField cone = build_cone(spec);
  Point q(3);
  q << g.r0, 0.0, 0.0;
  Vector v(3);
  v << g.a, minkowski_tangent(g.c, g.L);

  const double tol = 1e-10;
  GeodesicOptions go;
  go.record_steps = false;
  for (std::size_t k = 1; k + 1 < g.rows; ++k)
    go.output_times.push_back(g.horizon * static_cast<double>(k) / static_cast<double>(g.rows - 1));
  const GeodesicResult run = geodesic_integrate(cone, q, v, g.horizon, tol, go);

  std::vector<CheckRecord> recs;
  CheckRecord esc;
  esc.name = "escape_time";
  esc.op = "geodesic";
  esc.seed = o.default_seed;
  const bool bounded = cf.escape_time <= g.horizon;
  const double numeric = run.verdict == GeodesicVerdict::ReachedHorizon ? kInf : run.escape_time_estimate.value_or(kInf);
  esc.details["verdict"] = to_string(run.verdict);
  esc.details["numeric_escape_time"] = std::isfinite(numeric) ? Json(numeric) : Json("none");
  if (bounded) {
    esc.residuals["relative_error"] = std::isfinite(numeric) ? std::abs(numeric - cf.escape_time) / cf.escape_time : kInf;
    esc.tolerances["relative_error"] = o.tol_override.value_or(0.01);
    judge(esc);
  } else {
    esc.details["expected"] = "no escape before the horizon";
    esc.status = std::isfinite(numeric) ? CheckStatus::Fail : CheckStatus::Pass;
  }
  recs.push_back(esc);

  CheckRecord drift;
  drift.name = "speed_drift";
  drift.op = "geodesic";
  drift.seed = o.default_seed;
  drift.residuals["speed_drift"] = run.speed_drift;
  drift.tolerances["speed_drift"] = o.tol_override.value_or(1e-6);
  judge(drift);
  recs.push_back(drift);

  if (!g.csv.empty()) {
    std::ofstream f(g.csv);
    if (!f) throw UsageError("cannot write " + g.csv);
    f << "t,r,x,y,v_r,v_x,v_y\n";
    f.precision(17);
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      f << run.times[i];
      for (Eigen::Index k = 0; k < 3; ++k) f << ',' << run.positions[i](k);
      for (Eigen::Index k = 0; k < 3; ++k) f << ',' << run.velocities[i](k);
      f << '\n';
    }
  }

  Json extra;
  extra["input"] = {{"r0", g.r0}, {"a", g.a}, {"c", g.c}, {"L", g.L}, {"epsilon", g.eps}, {"horizon", g.horizon}};
  extra["closed_form"] = {{"case", to_string(cf.case_tag)},
                          {"T", std::isfinite(cf.T) ? Json(cf.T) : Json("inf")},
                          {"escape_time", std::isfinite(cf.escape_time) ? Json(cf.escape_time) : Json("inf")}};
  extra["base"] = "-dx^2 + dy^2";
  if (!g.csv.empty()) extra["trajectory_csv"] = g.csv;
  return emit(make_report("geodesic", o, recs, extra), common.out);
}

// ---------------------------------------------------------------- holonomy

struct HolonomyArgs {
  std::string manifest;
  std::string stage = "final";
  std::vector<double> point;
  std::size_t loops = 200;
  std::size_t probes = 200;
  std::string expect;
};

int cmd_holonomy(const HolonomyArgs& h, const Common& common) {
  auto [manifest, model] = load(h.manifest);
  RunOptions o = common.options();
  if (manifest.seed) o.default_seed = *manifest.seed;
  if (h.stage != "base" && h.stage != "final") throw UsageError("--stage must be base or final");
  const MetricField& g = model.stage(h.stage == "base" ? StageRef::Base : StageRef::Final).metric;
  Point p(static_cast<Eigen::Index>(g.dim()));
  if (!h.point.empty()) {
    if (h.point.size() != g.dim()) throw UsageError("--point needs " + std::to_string(g.dim()) + " values");
    for (std::size_t i = 0; i < g.dim(); ++i) p(static_cast<Eigen::Index>(i)) = h.point[i];
  } else {
    for (std::size_t i = 0; i < g.dim(); ++i)
      p(static_cast<Eigen::Index>(i)) = 0.5 * (g.chart().sampling()[i].lo + g.chart().sampling()[i].hi);
  }

  CheckRecord rec;
  rec.name = "holonomy";
  rec.op = "holonomy";
  rec.seed = o.default_seed;
  try {
    const HolonomySample s = sample_holonomy(g, p, h.loops, h.probes, o.default_seed);
    const double tol = o.tol_override.value_or(1e-8);
    rec.residuals["group"] = group_residual(s);
    rec.residuals["algebra"] = algebra_residual(s);
    rec.tolerances["group"] = tol;
    rec.tolerances["algebra"] = tol;
    const SubspaceReport r = invariant_subspace_analysis(s);
    rec.residuals["held_out"] = r.held_out_residual;
    rec.tolerances["held_out"] = kInvarianceTol;
    judge(rec);
    Json subs = Json::array();
    for (const auto& sub : r.subspaces)
      subs.push_back({{"dim", sub.dim}, {"degeneracy", sub.degeneracy}, {"totally_null", sub.totally_null()},
                      {"invariance", sub.invariance_residual}});
    std::vector<double> bp(p.data(), p.data() + p.size());
    rec.details["basepoint"] = bp;
    rec.details["classification"] = to_string(r.classification);
    rec.details["subspaces"] = subs;
    rec.details["sample_size"] = r.sample_size;
    rec.details["held_out"] = r.held_out;
    rec.details["resampled_loops"] = s.resampled_loops;
    if (!h.expect.empty()) {
      rec.details["expected"] = h.expect;
      if (to_string(r.classification) != h.expect) rec.status = CheckStatus::Fail;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InconclusiveSample) throw;
    rec.status = CheckStatus::Undetermined;
    rec.error = e.what();
  }
  Json extra;
  extra["manifest"] = h.manifest;
  extra["stage"] = h.stage;
  return emit(make_report("holonomy", o, {rec}, extra), common.out);
}

// ---------------------------------------------------------------- split

struct SplitArgs {
  std::string manifest;
  std::string potential;
  int eps = -1;
  std::string branch;
  std::size_t level_points = 20;
  std::size_t flow_times = 10;
};

int cmd_split(const SplitArgs& a, const Common& common) {
  auto [manifest, model] = load(a.manifest);
  RunOptions o = common.options();
  if (manifest.seed) o.default_seed = *manifest.seed;
  if (!model.potentials.contains(a.potential)) throw UsageError("no potential named '" + a.potential + "' in the manifest");
  // Reuse the manifest check path with a synthetic check block.
  std::ostringstream text;
  text << "[[check]]\nop = \"split\"\nname = \"split\"\npotential = \"" << a.potential << "\"\nepsilon = " << a.eps
       << "\nbranch = \"" << a.branch << "\"\nlevel_points = " << a.level_points << "\nflow_times = " << a.flow_times
       << "\n";
  const Document d = parse_document(text.str());
  CheckDecl c;
  c.name = "split";
  c.op = "split";
  c.params = d.sections.front();
  Manifest one = manifest;
  one.checks = {c};
  const auto records = run_checks(one, model, o);
  Json extra;
  extra["manifest"] = a.manifest;
  extra["potential"] = a.potential;
  return emit(make_report("split", o, records, extra), common.out);
}

// ---------------------------------------------------------------- spin

int cmd_spin(const std::pair<int, int>& sig, std::size_t trials, const Common& common) {
  const RunOptions o = common.options();
  const CliffordRep rep = build_rep(sig.first, sig.second);
  std::vector<CheckRecord> recs;
  const double tol = o.tol_override.value_or(1e-12);

  CheckRecord rel;
  rel.name = "clifford_relations";
  rel.op = "spin";
  rel.seed = o.default_seed;
  rel.residuals["clifford"] = rep.clifford_residual();
  rel.residuals["adjoint"] = rep.adjoint_residual();
  rel.tolerances["clifford"] = tol;
  rel.tolerances["adjoint"] = tol;
  rel.details["spinor_dim"] = rep.N;
  const Signature fs = rep.form_signature();
  rel.details["form_signature"] = {fs.negative, fs.positive};
  judge(rel);
  recs.push_back(rel);

  if (sig.first == 1 && sig.second >= 1) {
    CheckRecord cau;
    cau.name = "dirac_current_causality";
    cau.op = "spin";
    cau.seed = o.default_seed;
    try {
      const CausalityReport r = causality_check(rep, trials, o.default_seed);
      cau.residuals["max_norm"] = r.max_norm;
      cau.residuals["identity"] = r.identity_residual;
      cau.residuals["orthogonality"] = r.orthogonality_residual;
      cau.tolerances["max_norm"] = o.tol_override.value_or(1e-10);
      cau.tolerances["identity"] = o.tol_override.value_or(1e-9);
      cau.tolerances["orthogonality"] = o.tol_override.value_or(1e-10);
      cau.details["trials"] = r.trials;
      cau.details["min_form_eigenvalue"] = r.min_form_eigenvalue;
      judge(cau);
    } catch (const Error& e) {
      cau.status = CheckStatus::Fail;
      cau.error = e.what();
    }
    recs.push_back(cau);
  }
  Json extra;
  extra["signature"] = {sig.first, sig.second};
  return emit(make_report("spin", o, recs, extra), common.out);
}

// ---------------------------------------------------------------- berger

int cmd_berger(const std::pair<int, int>& sig, const Common& common) {
  const RunOptions o = common.options();
  CheckRecord rec;
  rec.name = "berger_candidates";
  rec.op = "berger";
  rec.seed = o.default_seed;
  std::vector<std::string> rows;
  for (const auto& e : berger_candidates(sig.first, sig.second)) rows.push_back(e.row());
  rec.details["rows"] = rows;
  rec.status = rows.empty() ? CheckStatus::Undetermined : CheckStatus::Pass;
  Json extra;
  extra["signature"] = {sig.first, sig.second};
  const Json report = make_report("berger", o, {rec}, extra);
  if (common.out.empty()) {
    // human-readable table on stderr, report on stdout
    for (const auto& r : rows) std::cerr << r << "\n";
  }
  return emit(report, common.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conelab: checks for semi-Riemannian cones, warped products and their holonomy"};
  app.require_subcommand(1);
  Common common;

  std::string check_path;
  auto* check = app.add_subcommand("check", "run every check listed in a manifest");
  check->add_option("manifest", check_path, "manifest file")->required();
  common.attach(check);

  GeodesicArgs ga;
  auto* geo = app.add_subcommand("geodesic", "closed-form and integrated cone geodesic over -dx^2 + dy^2");
  geo->add_option("--r0", ga.r0, "initial radius")->capture_default_str();
  geo->add_option("--a", ga.a, "initial radial speed")->required();
  geo->add_option("--c", ga.c, "sign of g(X,X) of the base velocity (-1, 0, 1)")->required();
  geo->add_option("--L", ga.L, "length scale of the base velocity")->capture_default_str();
  geo->add_option("--eps", ga.eps, "cone sign")->capture_default_str();
  geo->add_option("--horizon", ga.horizon, "integration horizon")->capture_default_str();
  geo->add_option("--csv", ga.csv, "write the trajectory table here");
  geo->add_option("--rows", ga.rows, "number of trajectory rows")->capture_default_str();
  common.attach(geo);

  HolonomyArgs ha;
  auto* hol = app.add_subcommand("holonomy", "sample the holonomy at a point and report invariant subspaces");
  hol->add_option("manifest", ha.manifest, "manifest file")->required();
  hol->add_option("--stage", ha.stage, "base or final")->capture_default_str();
  hol->add_option("--point", ha.point, "basepoint (default: centre of the sampling box)")->delimiter(',');
  hol->add_option("--loops", ha.loops)->capture_default_str();
  hol->add_option("--probes", ha.probes)->capture_default_str();
  hol->add_option("--expect", ha.expect, "irreducible, decomposable or indecomposable-with-null-subspace");
  common.attach(hol);

  SplitArgs sa;
  auto* spl = app.add_subcommand("split", "reconstruct the warped splitting from a potential");
  spl->add_option("manifest", sa.manifest, "manifest file")->required();
  spl->add_option("--potential", sa.potential, "potential name")->required();
  spl->add_option("--epsilon", sa.eps, "cone sign")->required();
  spl->add_option("--branch", sa.branch, "cosh, exp+ or exp-")->required()->check(CLI::IsMember({"cosh", "exp+", "exp-"}));
  spl->add_option("--level-points", sa.level_points)->capture_default_str();
  spl->add_option("--flow-times", sa.flow_times)->capture_default_str();
  common.attach(spl);

  std::vector<int> spin_sig;
  std::size_t trials = 10000;
  auto* spin = app.add_subcommand("spin", "Clifford relations and Dirac current causality");
  spin->add_option("--signature", spin_sig, "r,s (time-like, space-like)")->required()->delimiter(',');
  spin->add_option("--trials", trials, "random spinors for the causality check")->capture_default_str();
  common.attach(spin);

  std::vector<int> berger_sig;
  auto* ber = app.add_subcommand("berger", "candidate irreducible cone holonomies for a signature");
  ber->add_option("--signature", berger_sig, "t,s")->required()->delimiter(',');
  common.attach(ber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*check) return cmd_check(check_path, common);
    if (*geo) return cmd_geodesic(ga, common);
    if (*hol) return cmd_holonomy(ha, common);
    if (*spl) return cmd_split(sa, common);
    if (*spin) return cmd_spin(signature_pair(spin_sig), trials, common);
    if (*ber) return cmd_berger(signature_pair(berger_sig), common);
  } catch (const UsageError& e) {
    std::cerr << "conelab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "conelab: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ParseError:
      case ErrorCode::UnknownIdentifier:
      case ErrorCode::AsymmetricMetric:
      case ErrorCode::InvalidArgument:
      case ErrorCode::DimensionTooLarge: return kExitUsage;
      default: return kExitFail;
    }
  }
  return kExitUsage;
}
