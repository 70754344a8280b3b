// Acceptance run: one line per criterion, exit 1 if any fails.
//   acceptance            all criteria
//   acceptance 3 5 13     a selection
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "fdlab/boussinesq.hpp"
#include "fdlab/diagnostics.hpp"
#include "fdlab/metrics.hpp"
#include "fdlab/scenario.hpp"
#include "fdlab/splitting.hpp"
#include "fdlab/transport.hpp"
#include "fdlab/verify.hpp"
#include "measures.hpp"

using namespace fdlab;

namespace {

constexpr double pi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string g(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

fs::path scenario_file(const std::string& name) {
  return fs::path(FDLAB_SOURCE_DIR) / "scenarios" / (name + ".ini");
}
Scenario load(const std::string& name) { return load_scenario(scenario_file(name)); }

TrajectoryRecord run(const Scenario& sc, int n = 0) {
  SplittingSchedule s = sc.schedule;
  if (n > 0) s.n = n;
  return run_splitting(sc.rho0, sc.drift, s);
}

// Least-squares slope and R^2 of log y against log x.
std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) lx[i] = std::log(x[i]), ly[i] = std::log(y[i]);
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
  return {slope, r2};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------------------

// The rotation's cutoff ring shears hard, so the central-difference error
// (second order) needs a small step; roundoff stays near 1e-9 at this size.
constexpr double kFdStep = 2e-6;

Outcome jacobian_formula() {
  double worst_exact = 0, worst_fd = 0;
  {
    const Grid dom = Grid::box({-1, 2}, {-1, 2}, 8, 8);
    const double alpha = 0.8, T = 0.3;
    const auto V = DriftSpec::potential_quadratic(2, alpha, {0.5, 0.5});
    for (Vec2 x : {Vec2{0.6, 0.45}, Vec2{0.1, 0.9}, Vec2{0.5, 0.5}, Vec2{0.8, 0.2}}) {
      const auto tr = flow_map(V, dom, 0.0, T, x, 200);
      worst_exact = std::max(worst_exact, rel(tr.jacobian(), std::exp(2 * alpha * T)));
      worst_fd = std::max(worst_fd, rel(tr.jacobian(), fd_jacobian_det(V, dom, 0.0, T, x, 200, kFdStep)));
    }
  }
  {
    const Grid dom = Grid::box({0, 1}, {0, 1}, 8, 8);
    const auto V = DriftSpec::rigid_rotation(2 * pi, {0.5, 0.5}, 0.42, 0.49);
    for (Vec2 x : {Vec2{0.7, 0.5}, Vec2{0.5, 0.95}, Vec2{0.2, 0.3}, Vec2{0.5, 0.04}}) {
      const auto tr = flow_map(V, dom, 0.0, 0.25, x, 200);
      worst_exact = std::max(worst_exact, rel(tr.jacobian(), 1.0));
      worst_fd = std::max(worst_fd, rel(tr.jacobian(), fd_jacobian_det(V, dom, 0.0, 0.25, x, 200, kFdStep)));
    }
  }
  return {worst_exact <= 1e-6 && worst_fd <= 1e-6,
          "max rel err vs analytic " + g(worst_exact) + ", vs finite-difference det " + g(worst_fd)};
}

DensityField gaussian_256(double background) {
  const Grid g256 = Grid::box({0, 1}, {0, 1}, 256, 256);
  std::vector<double> v(g256.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const Vec2 x = g256.center(k);
    const double r2 = (x[0] - 0.4) * (x[0] - 0.4) + (x[1] - 0.55) * (x[1] - 0.55);
    v[k] = background + std::exp(-r2 / 0.01);
  }
  return DensityField(g256, v).normalized();
}

Outcome pushforward_identities() {
  TransportOptions opt;
  opt.renormalize = false;
  opt.n_rk = 40;
  std::string detail;
  bool ok = true;
  auto probe = [&](const char* tag, const DensityField& f, const DriftSpec& V, double t) {
    const auto out = pushforward(f, V, 0.0, t, opt).field;
    const auto r = pushforward_relations_report(f, out, V, 0.0, t, 2.0, opt.n_rk);
    ok = ok && std::abs(r.entropy_residual) <= 1e-6 && r.lq_slack >= -1e-8;
    detail += std::string(tag) + ": entropy residual " + g(r.entropy_residual) + ", L2 slack " +
              g(r.lq_slack) + "; ";
  };
  probe("rotation", gaussian_256(0.1), DriftSpec::rigid_rotation(2 * pi, {0.5, 0.5}, 0.42, 0.49), 0.25);
  // The expansion crosses the walls, so its data must vanish there. The
  // interpolation bias grows like alpha dt (about 0.03 alpha dt at 256^2),
  // hence the short step alpha dt = 2e-5.
  probe("expansion", gaussian_256(0.0), DriftSpec::potential_quadratic(2, 0.2, {0.5, 0.5}), 1e-4);
  return {ok, detail};
}

Outcome homogeneous_step(const std::string& name) {
  const Scenario sc = load(name);
  const auto traj = run(sc);
  const BatteryResult r = run_battery("lemma-A1", traj, sc.drift, sc);
  std::string detail;
  for (const auto& c : r.report["checks"]) detail += c["name"].get<std::string>() + " max ratio " +
                                                     g(c["max_ratio"].get<double>()) + " ";
  return {r.status == CheckStatus::pass, detail};
}

Outcome splitting_residual() {
  const Scenario sc = load("sclass-1d");
  const auto tests = default_test_functions(1, false);
  std::vector<double> ns, es;
  std::string detail = "max|E_n|:";
  for (int n : {4, 8, 16, 32, 64}) {
    const auto traj = run(sc, n);
    const double e = weak_residual(traj, sc.drift, sc.m, sc.epsilon, tests).max_abs;
    ns.push_back(n);
    es.push_back(e);
    detail += " " + g(e);
  }
  const auto [slope, r2] = loglog_fit(ns, es);
  detail += "; slope " + g(slope) + ", R^2 " + g(r2);
  return {slope <= -0.8 && r2 >= 0.95, detail};
}

// sup-entropy / L^q monotone across subinterval ends up to C/n, C fitted at
// n and checked at 2n.
Outcome energy_monotone(const std::string& name) {
  const Scenario sc = load(name);
  const int n0 = sc.schedule.n;
  const auto t1 = run(sc, n0), t2 = run(sc, 2 * n0);
  std::vector<double> qs{1.0};
  for (double q : sc.q_list)
    if (q > 1.0) qs.push_back(q);
  bool ok = true;
  std::string detail;
  for (double q : qs) {
    const auto a = splitting_energy_report(t1, sc.drift, sc.m, q, sc.epsilon);
    const auto b = splitting_energy_report(t2, sc.drift, sc.m, q, sc.epsilon);
    // One C serves both runs; zero at both means the functional never rose.
    const double C = std::max(a.c_fit, b.c_fit);
    const bool stable = C == 0.0 || std::abs(a.c_fit - b.c_fit) <= 0.5 * C;
    ok = ok && std::isfinite(C) && stable;
    detail += "q=" + g(q) + ": C(n=" + std::to_string(n0) + ") " + g(a.c_fit) + ", C(2n) " + g(b.c_fit) +
              ", max increment " + g(a.max_increment) + "/" + g(b.max_increment) + "; ";
  }
  return {ok, detail};
}

Outcome speed_bound(const std::string& name) {
  const Scenario sc = load(name);
  const auto traj = run(sc);
  ClassifyContext ctx;
  ctx.domain = traj.grid();
  ctx.T = traj.horizon();
  bool ok = true;
  std::string detail;
  for (double q : sc.q_list) {
    const auto cls = classify(sc.drift, sc.m, q, sc.verify.exponents, sc.verify.drift_class, ctx);
    BudgetOptions opt;
    opt.epsilon = sc.epsilon;
    const EnergyBudget b = energy_budget(traj, sc.drift, sc.m, q, cls, opt);
    const bool finite = std::isfinite(b.speed_lhs) && std::isfinite(b.speed_rhs);
    ok = ok && finite && b.speed_ok;
    detail += "q=" + g(q) + ": speed " + g(b.speed_lhs) + " (fisher " + g(b.fisher_speed) + ", drift " +
              g(b.drift_speed) + ") vs assembled " + g(b.speed_rhs) + ", ratio " + g(b.speed_ratio) + "; ";
  }
  return {ok, detail};
}

Outcome w2_oracles() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto mu = oracle::random_measure(rng, 32, 1), nu = oracle::random_measure(rng, 32, 1);
    worst = std::max(worst, std::abs(w2_1d(mu, nu) - oracle::lp_w2(mu, nu)));
  }
  double tri = -kInf;
  for (int k = 0; k < 100; ++k) {
    const auto x = oracle::random_measure(rng, 24, 2), y = oracle::random_measure(rng, 24, 2),
               z = oracle::random_measure(rng, 24, 2);
    const double gap = wp_exact(x, z, 2.0).value - wp_exact(x, y, 2.0).value - wp_exact(y, z, 2.0).value;
    tri = std::max(tri, gap);
  }
  return {worst <= 1e-8 && tri <= 1e-9,
          "max |w2_1d - LP| " + g(worst) + " over 100 pairs; worst triangle excess " + g(tri) +
              " over 100 triples"};
}

std::vector<int> strides(const TrajectoryRecord& t, const Scenario& sc) {
  return sc.verify.strides.empty() ? default_strides(t.size()) : sc.verify.strides;
}

Outcome holder_in_time() {
  const Scenario rough = load("pure-diffusion-1d");
  const auto t1 = run(rough);
  const HolderFit f1 = holder_fit(t1, DistanceKind::w2, strides(t1, rough));
  const Scenario adm = load("sclass-1d");
  const auto t2 = run(adm);
  const HolderFit f2 = holder_fit(t2, DistanceKind::w2, strides(t2, adm));
  const double C = f2.majorant(0.5);
  bool majorizes = std::isfinite(C);
  for (const auto& p : f2.pairs) majorizes = majorizes && p.value <= C * std::sqrt(p.t - p.s) * (1 + 1e-12);
  const bool ok = f1.exponent >= 0.45 && f1.exponent <= 1.1 && majorizes && std::isfinite(f2.constant);
  return {ok, "rough data exponent " + g(f1.exponent) + " (R^2 " + g(f1.r_squared) + "); admissible drift C " +
                  g(C) + " over " + std::to_string(f2.pairs.size()) + " pairs, fitted C " + g(f2.constant)};
}

Outcome delta_bound() {
  const Scenario sc = load("dplus-2d");
  const auto traj = run(sc);
  const HolderFit f = holder_fit(traj, DistanceKind::delta, strides(traj, sc), sc.verify.delta_K);
  const double a = delta_exponent(traj.grid().dim(), sc.m, sc.q_list.front(), sc.verify.exponents);
  const double C = f.majorant(a);
  return {std::isfinite(C) && f.exponent >= a - 0.1,
          "a = " + g(a) + ", fitted exponent " + g(f.exponent) + ", majorant C " + g(C) + " over " +
              std::to_string(f.pairs.size()) + " pairs"};
}

Outcome weak_refinement() {
  bool ok = true, any = false;
  std::string detail;
  for (const auto& e : fs::directory_iterator(fs::path(FDLAB_SOURCE_DIR) / "scenarios")) {
    if (e.path().extension() != ".ini") continue;
    const Scenario sc = load_scenario(e.path());
    if (sc.verify.refine_n.size() < 2) continue;
    any = true;
    const auto tests = default_test_functions(sc.grid.dim(), false);
    std::vector<double> res;
    for (int n : sc.verify.refine_n) {
      SplittingSchedule s = sc.schedule;
      s.n = n;
      if (sc.verify.refine_substeps > 0) s.diffusion.dt = s.T / (double(n) * sc.verify.refine_substeps);
      res.push_back(weak_residual(run_splitting(sc.rho0, sc.drift, s), sc.drift, sc.m, sc.epsilon, tests).max_abs);
    }
    double worst = 0.0;
    for (std::size_t k = 1; k < res.size(); ++k) worst = std::max(worst, res[k] / res[k - 1]);
    bool here = worst <= 0.7;
    if (sc.m == 1.0) here = here && res.back() <= 1e-4;
    ok = ok && here;
    detail += sc.name + ": residuals";
    for (double r : res) detail += " " + g(r);
    detail += ", worst ratio " + g(worst) + "; ";
  }
  return {ok && any, any ? detail : "no scenario declares a refinement ladder"};
}

struct FunctionalConstants {
  double sobolev = 0, interp = 0, vrho_ratio = 0;
  bool direction = true;
};

FunctionalConstants functional_constants(const Scenario& sc) {
  const auto traj = run(sc);
  std::vector<TimeSample> series;
  for (const auto& f : traj.snapshots) series.push_back({f.time(), f.scalar()});
  FunctionalConstants c;
  const SobolevReport s = verify_parabolic_sobolev(series, 1.0, 1.0);
  const double q = sc.q_list.front();
  const double r1 = interpolation_r1(2, 1.0, q, sc.m, 2.0);
  const InterpolationReport ir = verify_interpolation(series, 1.0, q, sc.m, r1, 2.0);
  const VrhoReport vr = vrho_l1_bound(traj, sc.drift, {kInf, kInf});
  c.sobolev = s.constant;
  c.interp = ir.constant;
  c.vrho_ratio = vr.ratio;
  c.direction = std::isfinite(s.constant) && s.constant >= 0 && s.lhs <= s.constant * s.gradient_term + s.mass_term + 1e-12 * s.lhs &&
                std::isfinite(ir.constant) && ir.lhs <= ir.constant * ir.gradient_term + ir.mass_term + 1e-12 * ir.lhs &&
                vr.holds;
  return c;
}

Outcome functional_inequalities() {
  std::string text = read_text(scenario_file("divfree-rotation-2d"));
  const Scenario fine = parse_scenario(text);
  for (const char* key : {"nx = 64", "ny = 64"}) {
    const auto at = text.find(key);
    text.replace(at, std::string(key).size(), std::string(key).substr(0, 5) + "32");
  }
  const Scenario coarse = parse_scenario(text);
  const auto a = functional_constants(coarse), b = functional_constants(fine);
  const double ds = rel(b.sobolev, a.sobolev), di = rel(b.interp, a.interp);
  const bool ok = a.direction && b.direction && ds <= 0.1 && di <= 0.1;
  return {ok, "sobolev c " + g(a.sobolev) + " -> " + g(b.sobolev) + " (" + g(100 * ds) + "%), interpolation c " +
                  g(a.interp) + " -> " + g(b.interp) + " (" + g(100 * di) + "%), V rho ratio " + g(a.vrho_ratio) +
                  " / " + g(b.vrho_ratio)};
}

Outcome boussinesq_bound() {
  const Scenario sc = load("boussinesq-layered");
  const auto& c = sc.convection;
  const auto init = BoussinesqState::at_rest(sc.rho0);
  const BoussinesqRun r1 = run_boussinesq(init, sc.m, sc.epsilon, c.T, c.dt);
  const BoussinesqRun r2 = run_boussinesq(init, sc.m, sc.epsilon, c.T, c.dt / 2);
  const double change = rel(r2.energy.lhs_max, r1.energy.lhs_max);
  const Grid tg = Grid::box({0, 2 * pi}, {0, 2 * pi}, 64, 64, Boundary::periodic);
  const auto tg0 = taylor_green(tg, 1.0);
  const double T = 0.25;
  const BoussinesqRun tgr = run_boussinesq(tg0, 1.0, 0.0, T, 1e-3);
  auto kinetic = [](const BoussinesqState& s) { return s.velocity_l2() * s.velocity_l2(); };
  const double decay = kinetic(tgr.states.back()) / kinetic(tg0);
  const double expect = std::exp(-taylor_green_decay_rate(tg) * T);
  const double tg_err = rel(decay, expect);
  const bool ok = r1.energy.bounded && r2.energy.bounded && change <= 0.1 &&
                  r1.energy.max_mass_drift <= 1e-8 && r2.energy.max_mass_drift <= 1e-8 && tg_err <= 0.02;
  return {ok, "layered ratio " + g(r1.energy.ratio) + " (dt/2: " + g(r2.energy.ratio) + "), change under dt/2 " +
                  g(100 * change) + "%, max mass drift/step " +
                  g(std::max(r1.energy.max_mass_drift, r2.energy.max_mass_drift)) +
                  "; Taylor-Green decay " + g(decay) + " vs " + g(expect) + " (" + g(100 * tg_err) + "%)"};
}

Outcome pme_mode() {
  const Scenario sc = load("pme-rotation-2d");
  const Outcome a = homogeneous_step("pme-rotation-2d");
  const Outcome b = energy_monotone("pme-rotation-2d");
  const Outcome c = speed_bound("pme-rotation-2d");
  const auto traj = run(sc);
  double fisher = 0.0;
  for (const auto& f : traj.snapshots) fisher = std::max(fisher, fisher_speed(f, sc.m, sc.epsilon));
  const bool ok = sc.m == 2.0 && a.pass && b.pass && c.pass && std::isfinite(fisher);
  return {ok, std::string("[3] ") + (a.pass ? "pass " : "FAIL ") + a.detail + "| [5] " + (b.pass ? "pass " : "FAIL ") +
                  b.detail + "| [6] " + (c.pass ? "pass " : "FAIL ") + c.detail + "| sup Fisher " + g(fisher)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "Jacobian along traces", 1, jacobian_formula},
      {2, "push-forward identities", 10, pushforward_identities},
      {3, "homogeneous-step exactness", 30, [] { return homogeneous_step("divfree-rotation-2d"); }},
      {4, "splitting residual order", 300, splitting_residual},
      {5, "divergence-free energy monotonicity", 120, [] { return energy_monotone("divfree-rotation-2d"); }},
      {6, "speed bound", 60, [] { return speed_bound("divfree-rotation-2d"); }},
      {7, "W2 oracle agreement", 60, w2_oracles},
      {8, "Hoelder-in-time W2", 120, holder_in_time},
      {9, "delta-distance bound", 120, delta_bound},
      {10, "weak-solution residual", 180, weak_refinement},
      {11, "functional inequalities", 60, functional_inequalities},
      {12, "Boussinesq energy bound", 600, boussinesq_bound},
      {13, "porous-medium mode", 180, pme_mode},
  };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::stoi(argv[i]));
  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), c.id) == pick.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << "[" << (pass ? "PASS" : "FAIL") << "] " << c.id << ". " << c.title << ": " << o.detail
              << " (" << g(secs) << " s of " << g(c.budget_s) << " s" << (in_time ? "" : ", over budget") << ")"
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
