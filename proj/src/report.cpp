#include "conelab/report.hpp"

#include <chrono>
#include <cstdlib>
#include <future>

#include "conelab/errors.hpp"
#include "conelab/holonomy.hpp"
#include "conelab/clifford_spin.hpp"

namespace conelab {

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Undetermined: return "undetermined";
  }
  return "?";
}

Json CheckRecord::to_json() const {
  Json j;
  j["name"] = name;
  j["op"] = op;
  j["status"] = to_string(status);
  j["seed"] = seed;
  j["residuals"] = residuals;
  j["tolerances"] = tolerances;
  j["details"] = details;
  if (!error.empty()) j["error"] = error;
  if (wall_time) j["wall_time"] = *wall_time;
  return j;
}

std::uint64_t seed_from_env() {
  const char* s = std::getenv("CONELAB_SEED");
  if (!s || !*s) return kDefaultSeed;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0' || s[0] == '-') throw Error(ErrorCode::InvalidArgument, std::string("CONELAB_SEED is not a seed: ") + s);
  return static_cast<std::uint64_t>(v);
}

void judge(CheckRecord& rec) {
  bool ok = true;
  for (auto it = rec.tolerances.begin(); it != rec.tolerances.end(); ++it) {
    if (!rec.residuals.contains(it.key())) continue;
    const Json& r = rec.residuals[it.key()];
    // NaN residuals are stored as null and fail
    ok = ok && r.is_number() && r.get<double>() <= it.value().get<double>();
  }
  rec.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
}

bool all_passed(const std::vector<CheckRecord>& records) {
  for (const auto& r : records)
    if (r.status != CheckStatus::Pass) return false;
  return true;
}

Json make_report(const std::string& command, const RunOptions& opts, const std::vector<CheckRecord>& records,
                 Json header_extra) {
  Json j;
  j["tool"] = "conelab";
  j["report_format"] = 1;
  j["command"] = command;
  for (auto it = header_extra.begin(); it != header_extra.end(); ++it) j[it.key()] = it.value();
  j["seed"] = opts.default_seed;
  j["tol_override"] = opts.tol_override ? Json(*opts.tol_override) : Json(nullptr);
  Json checks = Json::array();
  std::size_t pass = 0, fail = 0, und = 0;
  for (const auto& r : records) {
    checks.push_back(r.to_json());
    if (r.status == CheckStatus::Pass) ++pass;
    else if (r.status == CheckStatus::Fail) ++fail;
    else ++und;
  }
  j["checks"] = checks;
  j["summary"] = {{"pass", pass}, {"fail", fail}, {"undetermined", und}};
  j["status"] = all_passed(records) ? "pass" : "fail";
  return j;
}

// ---------------------------------------------------------------- operations

namespace {

class Ctx {
 public:
  Ctx(const CheckDecl& c, const Model& model, const RunOptions& o, CheckRecord& rec)
      : c_(c), model_(model), o_(o), rec_(rec) {}

  const Model& model() const { return model_; }
  CheckRecord& rec() { return rec_; }

  // Manifest value, else the --tol override, else the built-in default.
  double tol(const std::string& param, double dflt) const {
    if (const Entry* e = c_.params.find(param)) return e->value.number();
    return o_.tol_override.value_or(dflt);
  }

  void bound(const std::string& residual, double value, double tolerance) {
    rec_.residuals[residual] = value;
    rec_.tolerances[residual] = tolerance;
  }

  std::size_t count(const std::string& key, std::size_t dflt) const {
    const Entry* e = c_.params.find(key);
    if (!e) return dflt;
    const long v = e->value.integer();
    if (v < 1) throw LocatedError(ErrorCode::InvalidArgument, e->value.pos, key + " must be positive");
    return static_cast<std::size_t>(v);
  }

  const Stage& stage(StageRef dflt = StageRef::Final) const {
    const Entry* e = c_.params.find("stage");
    if (!e) return model_.stage(dflt);
    return model_.stage(e->value.string() == "base" ? StageRef::Base : StageRef::Final);
  }

  const Value* param(const std::string& key) const {
    const Entry* e = c_.params.find(key);
    return e ? &e->value : nullptr;
  }
  const Value& require(const std::string& key) const { return c_.params.require(key); }

  [[noreturn]] void invalid(const std::string& what) const {
    throw LocatedError(ErrorCode::InvalidArgument, c_.pos, "check '" + c_.name + "': " + what);
  }

 private:
  const CheckDecl& c_;
  const Model& model_;
  const RunOptions& o_;
  CheckRecord& rec_;
};

double max_over(const std::vector<Point>& pts, auto f) {
  double m = 0.0;
  for (const auto& p : pts) m = std::max(m, f(p));
  return m;
}

void op_flatness(Ctx& x) {
  const MetricField& g = x.stage().metric;
  const auto pts = g.chart().samples(x.count("samples", 50), x.rec().seed);
  x.bound("max_abs_riemann", max_over(pts, [&](const Point& p) { return riemann(g, p).max_abs_up(); }),
          x.tol("tol", 1e-6));
  x.rec().details["samples"] = pts.size();
  judge(x.rec());
}

void op_curvature(Ctx& x) {
  const MetricField& g = x.stage().metric;
  const auto pts = g.chart().samples(x.count("samples", 50), x.rec().seed);
  const ConstantCurvatureFit fit = fit_constant_curvature(g, pts);
  const double tol = x.tol("tol", 1e-6);
  x.bound("model", fit.max_residual, tol);
  if (const Value* k = x.param("kappa")) x.bound("kappa_error", std::abs(fit.kappa - k->number()), tol);
  x.rec().details["kappa"] = fit.kappa;
  judge(x.rec());
}

void op_symmetries(Ctx& x) {
  const MetricField& g = x.stage().metric;
  const auto pts = g.chart().samples(x.count("samples", 30), x.rec().seed);
  double pair = 0.0, bianchi = 0.0;
  for (const auto& p : pts) {
    const Riemann R = riemann(g, p);
    pair = std::max(pair, R.pair_symmetry_residual());
    bianchi = std::max(bianchi, R.bianchi_residual());
  }
  const double tol = x.tol("tol", 1e-8);
  x.bound("pair_symmetry", pair, tol);
  x.bound("bianchi", bianchi, tol);
  judge(x.rec());
}

void op_cross_mode(Ctx& x) {
  const MetricField& g = x.stage().metric;
  const auto pts = g.chart().samples(x.count("samples", 100), x.rec().seed);
  x.bound("christoffel_difference", max_over(pts, [&](const Point& p) {
            return christoffel(g, p, DerivativeMode::Dual).max_abs_diff(christoffel(g, p, DerivativeMode::FiniteDifference));
          }),
          x.tol("tol", 1e-5));
  judge(x.rec());
}

const std::pair<StageRef, ChartFunction>& field_of(Ctx& x) {
  return x.model().fields.at(x.require("field").string());
}

void op_parallel(Ctx& x) {
  const auto& [ref, V] = field_of(x);
  const MetricField& g = x.model().stage(ref).metric;
  const std::size_t n = x.count("samples", 100);
  x.bound("nabla", verify_parallel(g, V, n, x.rec().seed), x.tol("tol", 1e-8));
  x.rec().details["samples"] = n;
  judge(x.rec());
}

void op_potential_identities(Ctx& x) {
  const auto& [ref, V] = field_of(x);
  const Stage& st = x.model().stage(ref);
  if (!st.cone) x.invalid("the field must live on a cone stage");
  const auto pts = st.metric.chart().samples(x.count("samples", 100), x.rec().seed);
  const PotentialResiduals r = potential_identities(*st.cone, V, pts);
  const double tol = x.tol("tol", 1e-5);
  x.bound("vus", r.vus, tol);
  x.bound("nabu", r.nabu, tol);
  x.bound("gvv", r.gvv, tol);
  x.rec().details["nu"] = r.nu;
  judge(x.rec());
}

void op_split(Ctx& x) {
  const auto& [ref, pot] = x.model().potentials.at(x.require("potential").string());
  const MetricField& g = x.model().stage(ref).metric;
  const int eps = static_cast<int>(x.require("epsilon").integer());
  const Value& bv = x.require("branch");
  SplitBranch branch;
  if (bv.string() == "cosh") branch = SplitBranch::Cosh;
  else if (bv.string() == "exp+") branch = SplitBranch::ExpPlus;
  else if (bv.string() == "exp-") branch = SplitBranch::ExpMinus;
  else throw ParseError(bv.pos, {"\"cosh\"", "\"exp+\"", "\"exp-\""}, "\"" + bv.string() + "\"");
  SplitOptions so;
  so.seed = x.rec().seed;
  so.level_points = x.count("level_points", so.level_points);
  so.flow_times = x.count("flow_times", so.flow_times);
  const SplitReport r = split_reconstruct(g, pot, eps, branch, so);
  const double tol = x.tol("tol", 1e-5);
  x.bound("unit", r.unit_residual, tol);
  x.bound("nabla", r.nabla_residual, tol);
  x.bound("geodesic", r.geodesic_residual, tol);
  x.bound("level", r.level_residual, tol);
  x.bound("pullback", r.pullback_residual, tol);
  x.bound("lie", r.lie_residual, tol);
  x.rec().details["branch"] = to_string(r.branch);
  x.rec().details["level_points"] = r.level_set.size();
  x.rec().details["flow_times"] = r.flow_times.size();
  if (r.M0) {
    x.rec().details["m0_points"] = r.M0->points.size();
    x.rec().residuals["m0_geodesy"] = r.M0->geodesy_residual;
  }
  judge(x.rec());
}

void op_holonomy(Ctx& x) {
  const MetricField& g = x.stage().metric;
  Point p(static_cast<Eigen::Index>(g.dim()));
  if (const Value* pv = x.param("point")) {
    if (pv->list().size() != g.dim()) x.invalid("point needs " + std::to_string(g.dim()) + " coordinates");
    for (std::size_t i = 0; i < g.dim(); ++i) p(static_cast<Eigen::Index>(i)) = pv->list()[i].number();
  } else {
    for (std::size_t i = 0; i < g.dim(); ++i) {
      const Interval w = g.chart().sampling()[i];
      p(static_cast<Eigen::Index>(i)) = 0.5 * (w.lo + w.hi);
    }
  }
  const std::string expect = x.require("expect").string();
  const HolonomySample s =
      sample_holonomy(g, p, x.count("loops", 200), x.count("probes", 200), x.rec().seed);
  x.rec().residuals["group"] = group_residual(s);
  x.rec().residuals["algebra"] = algebra_residual(s);
  x.rec().tolerances["gram_rank"] = kGramRankTol;
  x.rec().tolerances["invariance"] = kInvarianceTol;
  try {
    const SubspaceReport rep = invariant_subspace_analysis(s);
    x.rec().residuals["held_out"] = rep.held_out_residual;
    Json subs = Json::array();
    for (const auto& sub : rep.subspaces)
      subs.push_back({{"dim", sub.dim}, {"degeneracy", sub.degeneracy}, {"invariance", sub.invariance_residual}});
    x.rec().details["classification"] = to_string(rep.classification);
    x.rec().details["expected"] = expect;
    x.rec().details["subspaces"] = subs;
    x.rec().details["sample_size"] = rep.sample_size;
    x.rec().details["resampled_loops"] = s.resampled_loops;
    x.rec().status = to_string(rep.classification) == expect ? CheckStatus::Pass : CheckStatus::Fail;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InconclusiveSample) throw;
    x.rec().status = CheckStatus::Undetermined;
    x.rec().error = e.what();
  }
}

void op_completeness(Ctx& x) {
  const Stage& st = x.model().stages.back();
  if (!st.warped) x.invalid("completeness needs a warped construction as the last stage");
  const bool base_complete = x.param("base_complete") ? x.param("base_complete")->boolean() : true;
  const CompletenessVerdict v = completeness_verdict(*st.warped, base_complete, x.rec().seed);
  x.rec().details["verdict"] = to_string(v.verdict);
  x.rec().details["clause"] = to_string(v.reason);
  if (v.witness) {
    x.rec().details["witness_escape_time"] = v.witness->escape_time;
    x.rec().residuals["witness_affine"] = v.witness->affine_residual;
  }
  if (v.verdict == Completeness::Undetermined) {
    x.rec().status = CheckStatus::Undetermined;
    return;
  }
  const std::string expect = x.require("expect").string();
  x.rec().details["expected"] = expect;
  x.rec().status = to_string(v.verdict) == expect ? CheckStatus::Pass : CheckStatus::Fail;
}

void op_nullplane(Ctx& x) {
  const Stage* st = nullptr;
  for (const auto& s : x.model().stages)
    if (s.nullplane) st = &s;
  if (!st) x.invalid("no nullplane construction");
  const NullPlaneMetricSpec& spec = *st->nullplane;
  const double tol = x.tol("tol", 1e-6);
  const double tol_vz = x.tol("tol_vz", 1e-5);
  const std::size_t n = x.count("samples", 50);
  const EtaResiduals er = eta_system_residuals(spec, n, x.rec().seed);
  for (std::size_t k = 0; k < er.equations.size(); ++k) x.bound("eta_" + std::to_string(k + 1), er.equations[k], tol);
  x.bound("h_ode", h_ode_residual(spec), tol);
  const auto pts = st->metric.chart().samples(n, x.rec().seed);
  const VZResiduals vz = vz_residuals(st->metric, coordinate_pair(spec), pts);
  x.bound("vz_algebraic", vz.algebraic, tol_vz);
  x.bound("nabla_V", vz.nabla_V, tol_vz);
  x.bound("nabla_Z", vz.nabla_Z, tol_vz);
  judge(x.rec());
}

void op_killing_warp(Ctx& x) {
  const Stage& st = x.model().stages.back();
  if (!st.warped) x.invalid("killing_warp needs a warped construction as the last stage");
  const int eps = x.param("epsilon") ? static_cast<int>(x.param("epsilon")->integer()) : st.warped->epsilon;
  const Complex lambda(x.param("lambda") ? x.param("lambda")->number() : 0.0,
                       x.param("lambda_imag") ? x.param("lambda_imag")->number() : 0.0);
  const KillingWarpCheck k = killing_warp_check(st.warped->warp.f, eps, lambda);
  const double tol = x.tol("tol", 1e-10);
  x.bound("ode", k.ode_residual, tol);
  x.bound("lambda_sq_spread", k.spread, tol);
  x.rec().details["lambda_sq"] = k.lambda_sq.empty() ? 0.0 : k.lambda_sq.front();
  judge(x.rec());
}

using OpFn = void (*)(Ctx&);

OpFn op_table(const std::string& op) {
  static const std::map<std::string, OpFn> table = {
      {"flatness", op_flatness},       {"curvature", op_curvature},
      {"symmetries", op_symmetries},   {"cross_mode", op_cross_mode},
      {"parallel", op_parallel},       {"potential_identities", op_potential_identities},
      {"split", op_split},             {"holonomy", op_holonomy},
      {"completeness", op_completeness}, {"nullplane", op_nullplane},
      {"killing_warp", op_killing_warp}};
  return table.at(op);
}

CheckRecord run_one(const CheckDecl& c, const Model& model, const RunOptions& opts, std::uint64_t seed) {
  CheckRecord rec;
  rec.name = c.name;
  rec.op = c.op;
  rec.seed = seed;
  if (const Entry* e = c.params.find("seed")) rec.seed = static_cast<std::uint64_t>(e->value.integer());
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Ctx ctx(c, model, opts, rec);
    op_table(c.op)(ctx);
  } catch (const std::exception& e) {
    rec.status = CheckStatus::Fail;
    rec.error = e.what();
  }
  if (opts.timing)
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace

std::vector<CheckRecord> run_checks(const Manifest& manifest, const Model& model, const RunOptions& opts) {
  const std::uint64_t seed = manifest.seed.value_or(opts.default_seed);
  std::vector<CheckRecord> out;
  if (!opts.concurrent) {
    for (const auto& c : manifest.checks) out.push_back(run_one(c, model, opts, seed));
    return out;
  }
  std::vector<std::future<CheckRecord>> jobs;
  for (const auto& c : manifest.checks)
    jobs.push_back(std::async(std::launch::async, [&c, &model, &opts, seed] { return run_one(c, model, opts, seed); }));
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace conelab
