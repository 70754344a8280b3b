#include "fdlab/verify.hpp"

#include <algorithm>
#include <cmath>

#include "fdlab/diagnostics.hpp"
#include "fdlab/diffusion.hpp"
#include "fdlab/metrics.hpp"
#include "fdlab/serialize.hpp"
#include "fdlab/splitting.hpp"

namespace fdlab {

namespace {

json check(const std::string& name, bool pass, double slack) {
  return json{{"name", name}, {"pass", pass}, {"slack", number(slack)}};
}

std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::violation: return "violation";
    case CheckStatus::refused: return "refused";
  }
  return "?";
}

BatteryResult finish(const std::string& name, json checks, CheckStatus st, json extra = {}) {
  BatteryResult r;
  r.battery = name;
  r.status = st;
  r.report = json{{"battery", name}, {"status", status_name(st)}, {"checks", std::move(checks)}};
  if (!extra.is_null())
    for (auto it = extra.begin(); it != extra.end(); ++it) r.report[it.key()] = it.value();
  return r;
}

BatteryResult refuse(const std::string& name, const std::string& why) {
  return finish(name, json::array(), CheckStatus::refused, json{{"reason", why}});
}

std::vector<int> strides_for(const TrajectoryRecord& traj, const Scenario& sc) {
  return sc.verify.strides.empty() ? default_strides(traj.size()) : sc.verify.strides;
}

std::vector<TimeSample> series_of(const TrajectoryRecord& traj) {
  std::vector<TimeSample> s;
  for (const auto& f : traj.snapshots) s.push_back({f.time(), f.scalar()});
  return s;
}

// Homogeneous diffusion step: the per-step L^q identity residual divided by
// dt must shrink linearly, ratio <= 0.6 per halving over three halvings.
BatteryResult homogeneous_step(const TrajectoryRecord& traj, const Scenario& sc) {
  json checks = json::array();
  bool ok = true;
  const double dt0 = sc.verify.probe_dt > 0.0 ? sc.verify.probe_dt : sc.schedule.diffusion.dt;
  // Probe from the last snapshot: diffusion has smoothed it, so the step is
  // in its asymptotic regime sooner than from raw initial data.
  const DensityField& f = traj.snapshots.back();
  DiffusionStepper stepper(f.grid());
  std::vector<double> qs;
  for (double q : sc.q_list)
    if (q > 1.0) qs.push_back(q);
  if (qs.empty()) qs.push_back(2.0);
  for (double q : qs) {
    json levels = json::array();
    double prev = 0.0, worst_ratio = 0.0;
    for (int k = 0; k < 4; ++k) {
      DiffusionParams p;
      p.m = traj.m;
      p.epsilon = traj.epsilon;
      p.dt = dt0 / double(1 << k);
      const DensityField after = stepper.step(f, p).field;
      const IdentityResidual r = diffusion_energy_identity(f, after, p, q);
      const EntropyDissipation e = entropy_dissipation_report(f, after, p);
      json lv{{"dt", p.dt}, {"residual", r.residual}, {"residual_over_dt", r.residual_over_dt},
              {"entropy_slack", e.slack}, {"entropy_holds", e.holds}};
      if (k > 0) {
        const double ratio = prev > 0.0 ? r.residual_over_dt / prev : 0.0;
        lv["ratio"] = ratio;
        worst_ratio = std::max(worst_ratio, ratio);
      }
      ok = ok && e.holds;
      prev = r.residual_over_dt;
      levels.push_back(lv);
    }
    const bool pass = worst_ratio <= 0.6;
    ok = ok && pass;
    json c = check("lq-identity-q" + fmt(q), pass, 0.6 - worst_ratio);
    c["levels"] = levels;
    c["max_ratio"] = worst_ratio;
    checks.push_back(c);
  }
  return finish("lemma-A1", checks, ok ? CheckStatus::pass : CheckStatus::violation,
                json{{"first_dt", dt0}});
}

BatteryResult energy_divfree(const TrajectoryRecord& traj, const DriftSpec& V, const Scenario& sc) {
  if (!V.declared_divergence_free())
    return refuse("energy-divfree",
                  "drift '" + V.kind_name() +
                      "' is not declared divergence-free; the V-independent energy estimate needs "
                      "div V = 0 with V.n = 0 (class D, divergence-free case)");
  if (!V.declared_zero_normal_flux())
    return refuse("energy-divfree", "drift '" + V.kind_name() + "' has nonzero normal flux");
  json checks = json::array();
  bool ok = true;
  const int n = int(traj.subinterval_ends.size()) - 1;
  std::vector<double> qs{1.0};
  for (double q : sc.q_list)
    if (q > 1.0 && std::find(qs.begin(), qs.end(), q) == qs.end()) qs.push_back(q);
  for (double q : qs) {
    const SplittingEnergyReport r = splitting_energy_report(traj, V, traj.m, q, traj.epsilon);
    const double allowed = sc.verify.energy_constant / n;
    const bool pass = r.max_increment <= allowed;
    ok = ok && pass;
    json c = check("monotone-q" + fmt(q), pass, allowed - r.max_increment);
    c["max_increment"] = r.max_increment;
    c["c_fit"] = r.c_fit;
    c["max_balance"] = r.max_balance;
    c["subintervals"] = n;
    checks.push_back(c);
  }
  return finish("energy-divfree", checks, ok ? CheckStatus::pass : CheckStatus::violation);
}

BatteryResult speed(const TrajectoryRecord& traj, const DriftSpec& V, const Scenario& sc) {
  ClassifyContext ctx;
  ctx.domain = traj.grid();
  ctx.T = traj.horizon();
  json checks = json::array();
  bool ok = true;
  for (double q : sc.q_list) {
    const DriftClassReport cls = classify(V, traj.m, q, sc.verify.exponents, sc.verify.drift_class, ctx);
    EnergyBudget b;
    try {
      BudgetOptions opt;
      opt.epsilon = traj.epsilon;
      b = energy_budget(traj, V, traj.m, q, cls, opt);
    } catch (const BudgetRefused& e) {
      return refuse("speed", e.what());
    }
    json c = check("speed-q" + fmt(q), b.speed_ok, 2.0 * b.speed_rhs - b.speed_lhs);
    c["budget"] = to_json(b);
    c["class"] = to_json(cls);
    ok = ok && b.speed_ok;
    checks.push_back(c);
    json e = check("energy-q" + fmt(q), b.satisfied, b.rhs_constant + b.tolerance - b.lhs);
    ok = ok && b.satisfied;
    checks.push_back(e);
  }
  if (traj.grid().dim() == 1) {
    const MetricSpeedReport ms = metric_speed(traj, V, traj.m, traj.epsilon, strides_for(traj, sc));
    json c = check("metric-speed", ms.violations == 0, double(-ms.violations));
    c["pairs"] = ms.pairs.size();
    c["budget"] = ms.budget;
    ok = ok && ms.violations == 0;
    checks.push_back(c);
  }
  return finish("speed", checks, ok ? CheckStatus::pass : CheckStatus::violation);
}

BatteryResult holder(const TrajectoryRecord& traj, const Scenario& sc) {
  json checks = json::array();
  bool ok = true;
  const HolderFit w2 = holder_fit(traj, DistanceKind::w2, strides_for(traj, sc), sc.verify.delta_K);
  const double maj = w2.majorant(0.5);
  const bool w2_ok = w2.stationary || std::isfinite(maj);
  json c = check("w2-half-majorant", w2_ok, std::isfinite(maj) ? 0.0 : -kInf);
  c["fit"] = to_json(w2);
  c["majorant_C"] = number(maj);
  ok = ok && w2_ok;
  checks.push_back(c);

  const HolderFit dl = holder_fit(traj, DistanceKind::delta, strides_for(traj, sc), sc.verify.delta_K);
  const double q = sc.q_list.front();
  json d = check("delta-majorant", true, 0.0);
  if (sc.verify.drift_class == DriftClass::D_plus) {
    const double a = delta_exponent(traj.grid().dim(), traj.m, q, sc.verify.exponents);
    const double dm = dl.majorant(a);
    const bool pass = dl.stationary || (std::isfinite(dm) && dl.exponent >= a - 0.1);
    d = check("delta-exponent", pass, dl.stationary ? 0.0 : dl.exponent - (a - 0.1));
    d["a"] = a;
    d["majorant_C"] = number(dm);
    ok = ok && pass;
  } else {
    const double dm = dl.majorant(0.5);
    d = check("delta-majorant", dl.stationary || std::isfinite(dm), 0.0);
    d["majorant_C"] = number(dm);
    ok = ok && (dl.stationary || std::isfinite(dm));
  }
  d["fit"] = to_json(dl);
  checks.push_back(d);
  return finish("holder", checks, ok ? CheckStatus::pass : CheckStatus::violation);
}

BatteryResult weak(const TrajectoryRecord& traj, const DriftSpec& V, const Scenario& sc) {
  if (!V.declared_zero_normal_flux())
    return refuse("weak-residual", "drift '" + V.kind_name() +
                                       "' carries mass through the boundary; the weak form assumes zero flux");
  const auto tests = default_test_functions(traj.grid().dim(), false);
  const WeakResidual r = weak_residual(traj, V, traj.m, traj.epsilon, tests);
  const bool pass = r.max_abs <= sc.verify.weak_tolerance;
  json c = check("weak-residual", pass, sc.verify.weak_tolerance - r.max_abs);
  c["max_abs"] = r.max_abs;
  c["per_test"] = r.per_test;
  c["tests"] = tests.size();
  return finish("weak-residual", json::array({c}), pass ? CheckStatus::pass : CheckStatus::violation);
}

BatteryResult functional(const TrajectoryRecord& traj, const DriftSpec& V, const Scenario& sc) {
  json checks = json::array();
  bool ok = true;
  const auto series = series_of(traj);
  const int d = traj.grid().dim();
  if (d >= 2) {
    const SobolevReport s = verify_parabolic_sobolev(series, 1.0, 1.0);
    const bool pass = std::isfinite(s.constant);
    json c = check("parabolic-sobolev", pass, pass ? 0.0 : -kInf);
    c["report"] = to_json(s);
    ok = ok && pass;
    checks.push_back(c);
  } else {
    checks.push_back(json{{"name", "parabolic-sobolev"}, {"pass", true}, {"skipped", "needs d > p >= 1"}});
  }
  const double q = sc.q_list.front();
  const double r2 = 2.0;
  const double r1 = interpolation_r1(d, 1.0, q, traj.m, r2);
  if (std::isfinite(r1) && r1 >= 1.0) {
    try {
      const InterpolationReport ir = verify_interpolation(series, 1.0, q, traj.m, r1, r2);
      const bool pass = std::isfinite(ir.constant);
      json c = check("interpolation", pass, pass ? 0.0 : -kInf);
      c["report"] = to_json(ir);
      ok = ok && pass;
      checks.push_back(c);
    } catch (const std::invalid_argument& e) {
      checks.push_back(json{{"name", "interpolation"}, {"pass", true}, {"skipped", e.what()}});
    }
  } else {
    checks.push_back(json{{"name", "interpolation"}, {"pass", true}, {"skipped", "no admissible r1"}});
  }
  const VrhoReport vr = vrho_l1_bound(traj, V, sc.verify.exponents);
  json c = check("vrho-l1", vr.holds, vr.rhs - vr.lhs);
  c["report"] = to_json(vr);
  ok = ok && vr.holds;
  checks.push_back(c);
  return finish("functional", checks, ok ? CheckStatus::pass : CheckStatus::violation);
}

}  // namespace

const std::vector<std::string>& battery_names() {
  static const std::vector<std::string> names{"lemma-A1", "energy-divfree", "speed", "holder",
                                              "weak-residual", "functional", "all"};
  return names;
}

BatteryResult run_battery(const std::string& name, const TrajectoryRecord& traj, const DriftSpec& V,
                          const Scenario& sc) {
  if (traj.size() < 2) throw std::invalid_argument("trajectory has fewer than two snapshots");
  if (name == "lemma-A1") return homogeneous_step(traj, sc);
  if (name == "energy-divfree") return energy_divfree(traj, V, sc);
  if (name == "speed") return speed(traj, V, sc);
  if (name == "holder") return holder(traj, sc);
  if (name == "weak-residual") return weak(traj, V, sc);
  if (name == "functional") return functional(traj, V, sc);
  if (name == "all") {
    json parts = json::array();
    CheckStatus st = CheckStatus::pass;
    for (const auto& b : battery_names()) {
      if (b == "all") continue;
      BatteryResult r = run_battery(b, traj, V, sc);
      // A refused sub-battery is reported but does not fail the sweep.
      if (r.status == CheckStatus::violation) st = CheckStatus::violation;
      parts.push_back(r.report);
    }
    BatteryResult r;
    r.battery = "all";
    r.status = st;
    r.report = json{{"battery", "all"}, {"status", status_name(st)}, {"batteries", parts}};
    return r;
  }
  std::string known;
  for (const auto& b : battery_names()) known += (known.empty() ? "" : ", ") + b;
  throw std::invalid_argument("unknown battery '" + name + "' (known: " + known + ")");
}

BatteryResult run_battery(const std::string& name, const fs::path& dir) {
  if (std::find(battery_names().begin(), battery_names().end(), name) == battery_names().end())
    throw std::invalid_argument("unknown battery '" + name + "'");
  DriftSpec V;
  json man;
  const TrajectoryRecord traj = read_trajectory(dir, &V, &man);
  if (!man.contains("scenario"))
    throw std::invalid_argument(dir.string() + " has no scenario table in its manifest");
  const Scenario sc = scenario_from_json(man["scenario"]);
  BatteryResult r = run_battery(name, traj, V, sc);
  r.report["directory"] = dir.string();
  return r;
}

}  // namespace fdlab
