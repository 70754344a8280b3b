// fdlab: scenario-driven front end. Exit codes: 0 pass, 1 violation or
// compute failure, 2 usage or validation error.
#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <sstream>

#include "fdlab/boussinesq.hpp"
#include "fdlab/metrics.hpp"
#include "fdlab/scenario.hpp"
#include "fdlab/serialize.hpp"
#include "fdlab/splitting.hpp"
#include "fdlab/verify.hpp"

using namespace fdlab;

namespace {

constexpr int kPass = 0, kViolation = 1, kUsage = 2;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path output_dir(const Scenario& sc, const std::string& override_dir, const std::string& suffix = "") {
  if (!override_dir.empty()) return override_dir;
  return fs::path(sc.output + suffix);
}

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << j.dump(2) << "\n";
  else
    write_atomic(path, j.dump(2) + "\n");
}

int cmd_run(const std::string& file, const std::string& out) {
  const Scenario sc = load_scenario(file);
  TrajectoryRecord traj;
  try {
    traj = run_splitting(sc.rho0, sc.drift, sc.schedule);
  } catch (const SplittingFailure& e) {
    std::cerr << "splitting: subinterval " << e.subinterval << ": " << e.what() << "\n";
    return kViolation;
  }
  const fs::path dir = output_dir(sc, out);
  write_trajectory(dir, traj, sc.drift, json{{"scenario", sc.to_json()}, {"seed", sc.seed}});
  std::cout << dir.string() << ": " << traj.size() << " snapshots\n";
  return kPass;
}

int cmd_verify(const std::string& battery, const std::string& dir, const std::string& report) {
  const BatteryResult r = run_battery(battery, fs::path(dir));
  emit(r.report, report);
  return int(r.status);
}

int cmd_converge(const std::string& file, const std::string& n_list, const std::string& out) {
  const Scenario sc = load_scenario(file);
  std::vector<int> ns;
  for (double v : parse_list(n_list)) {
    if (v < 1 || v != std::floor(v)) throw Usage("--n-list entries must be positive integers");
    ns.push_back(int(v));
  }
  if (ns.size() < 2) throw Usage("--n-list needs at least two values");
  const ConvergenceStudy st = convergence_study(sc.rho0, sc.drift, sc.schedule, ns);
  const fs::path dir = output_dir(sc, out, "-converge");
  fs::create_directories(dir);
  std::ostringstream csv;
  csv << "n,epsilon,l1_error,w2_error\n";
  json rows = json::array(), erows = json::array();
  for (const auto& r : st.n_rows) {
    csv << r.n << "," << fmt(r.epsilon) << "," << fmt(r.l1_error) << "," << fmt(r.w2_error) << "\n";
    rows.push_back(json{{"n", r.n}, {"l1_error", number(r.l1_error)}, {"w2_error", number(r.w2_error)}});
  }
  for (const auto& r : st.epsilon_rows)
    erows.push_back(json{{"epsilon", r.epsilon}, {"l1_error", number(r.l1_error)}});
  write_atomic(dir / "study.csv", csv.str());
  write_atomic(dir / "study.json",
               json{{"scenario", sc.to_json()},
                    {"n_order", number(st.n_order)},
                    {"reference_n", st.reference_n},
                    {"reference_dt", st.reference_dt},
                    {"n_rows", rows},
                    {"epsilon_rows", erows}}
                       .dump(2));
  std::cout << dir.string() << ": order " << st.n_order << "\n";
  return kPass;
}

int cmd_distances(const std::string& dir, const std::string& strides_text, int K, const std::string& out) {
  const TrajectoryRecord traj = read_trajectory(dir);
  std::vector<int> strides = default_strides(traj.size());
  if (!strides_text.empty()) {
    strides.clear();
    for (double v : parse_list(strides_text)) strides.push_back(int(v));
  }
  const auto w2 = pair_distances(traj, DistanceKind::w2, strides, K);
  const auto dl = pair_distances(traj, DistanceKind::delta, strides, K);
  std::ostringstream csv;
  csv << "s,t,W2,delta\n";
  for (std::size_t i = 0; i < w2.size(); ++i)
    csv << fmt(w2[i].s) << "," << fmt(w2[i].t) << "," << fmt(w2[i].value) << "," << fmt(dl[i].value) << "\n";
  const fs::path o = out.empty() ? fs::path(dir) : fs::path(out);
  fs::create_directories(o);
  write_atomic(o / "distances.csv", csv.str());
  const HolderFit fw = holder_fit(w2), fd = holder_fit(dl);
  write_atomic(o / "holder_fit.json",
               json{{"W2", to_json(fw)}, {"delta", to_json(fd)}, {"W2_majorant_half", number(fw.majorant(0.5))}}
                   .dump(2));
  std::cout << (o / "distances.csv").string() << ": " << w2.size() << " pairs\n";
  return kPass;
}

double exponent_arg(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInf;
  return std::stod(s);
}

int cmd_classify(const std::string& file, const std::string& kind, const std::vector<std::string>& params,
                 int dim, double m, double q, const std::string& q1, const std::string& q2,
                 const std::string& cls, double T, const std::string& out) {
  DriftSpec V;
  ClassifyContext ctx;
  if (!file.empty()) {
    const Scenario sc = load_scenario(file);
    V = sc.drift;
    ctx.domain = sc.grid;
    ctx.T = sc.schedule.T;
    if (std::isnan(m)) m = sc.m;
  } else {
    if (kind.empty()) throw Usage("classify-drift needs --scenario or --drift");
    json section = json::object();
    section["kind"] = kind;
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos) throw Usage("--param expects key=value, got '" + p + "'");
      section[p.substr(0, eq)] = p.substr(eq + 1);
    }
    V = drift_from_config(section, dim);
    ctx.domain = dim == 1 ? Grid::line({0.0, 1.0}, 64) : Grid::box({0.0, 1.0}, {0.0, 1.0}, 64, 64);
    ctx.T = T;
  }
  if (std::isnan(m)) throw Usage("classify-drift needs --m");
  const MixedNormSpec e{exponent_arg(q1), exponent_arg(q2)};
  const DriftClassReport r = classify(V, m, q, e, class_from_name(cls), ctx);
  json j = to_json(r);
  j["drift"] = drift_to_json(V);
  emit(j, out);
  return kPass;
}

int cmd_boussinesq(const std::string& file, const std::string& out) {
  const Scenario sc = load_scenario(file);
  const ConvectionSettings& c = sc.convection;
  if (!c.present) throw ScenarioError({"[boussinesq] section is required"});
  const BoussinesqState init =
      c.mode == "taylor-green" ? taylor_green(sc.grid, c.amplitude) : BoussinesqState::at_rest(sc.rho0);
  BoussinesqRun run;
  try {
    run = run_boussinesq(init, sc.m, sc.epsilon, c.T, c.dt);
  } catch (const CflViolation& e) {
    std::cerr << "boussinesq: " << e.what() << "\n";
    return kViolation;
  }
  const fs::path dir = output_dir(sc, out);
  write_boussinesq(dir, run, sc.m, sc.epsilon, c.stride, json{{"scenario", sc.to_json()}});
  std::cout << dir.string() << ": ratio " << run.energy.ratio << (run.energy.bounded ? " bounded\n" : " UNBOUNDED\n");
  return run.energy.bounded ? kPass : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fdlab: operator-splitting lab for drift-diffusion with nonlinear diffusion"};
  app.require_subcommand(1);

  std::string scenario, out, battery, dir, report, n_list, strides, kind, q1 = "inf", q2 = "inf",
                                                                     cls = "D";
  std::vector<std::string> params;
  int K = 16, dim = 2;
  double m = std::nan(""), q = 1.0, T = 1.0;

  auto* run = app.add_subcommand("run", "run a scenario and write its trajectory directory");
  run->add_option("scenario", scenario, "scenario file")->required();
  run->add_option("--out", out, "output directory (default: [scenario] output)");

  auto* verify = app.add_subcommand("verify", "run a named check battery on a trajectory directory");
  verify->add_option("battery", battery, "lemma-A1 | energy-divfree | speed | holder | weak-residual | functional | all")
      ->required();
  verify->add_option("dir", dir, "trajectory directory")->required();
  verify->add_option("--report", report, "write the JSON report here (default stdout)");

  auto* converge = app.add_subcommand("converge", "splitting error against a fine reference");
  converge->add_option("scenario", scenario)->required();
  converge->add_option("--n-list", n_list, "comma separated subinterval counts")->required();
  converge->add_option("--out", out);

  auto* distances = app.add_subcommand("distances", "pairwise W2 and delta distances plus Hoelder fits");
  distances->add_option("dir", dir)->required();
  distances->add_option("--strides", strides, "comma separated snapshot strides");
  distances->add_option("--K", K, "number of test functions in delta");
  distances->add_option("--out", out, "output directory (default: the trajectory directory)");

  auto* classify_cmd = app.add_subcommand("classify-drift", "class membership report as JSON");
  classify_cmd->add_option("--scenario", scenario);
  classify_cmd->add_option("--drift", kind, "drift preset name");
  classify_cmd->add_option("--param", params, "preset parameter key=value (repeatable)");
  classify_cmd->add_option("--dim", dim)->check(CLI::IsMember({1, 2}));
  classify_cmd->add_option("--m", m);
  classify_cmd->add_option("--q", q);
  classify_cmd->add_option("--q1", q1, "space exponent (number or inf)");
  classify_cmd->add_option("--q2", q2, "time exponent (number or inf)");
  classify_cmd->add_option("--class", cls, "S | S_tilde | D | D_plus | D_s");
  classify_cmd->add_option("--T", T, "horizon for the time norm");
  classify_cmd->add_option("--out", out);

  auto* bq = app.add_subcommand("boussinesq", "convection run with the energy bound check");
  bq->add_option("scenario", scenario)->required();
  bq->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*run) return cmd_run(scenario, out);
    if (*verify) return cmd_verify(battery, dir, report);
    if (*converge) return cmd_converge(scenario, n_list, out);
    if (*distances) return cmd_distances(dir, strides, K, out);
    if (*classify_cmd) return cmd_classify(scenario, kind, params, dim, m, q, q1, q2, cls, T, out);
    if (*bq) return cmd_boussinesq(scenario, out);
  } catch (const ScenarioError& e) {
    std::cerr << "invalid scenario:\n";
    for (const auto& p : e.problems) std::cerr << "  " << p << "\n";
    return kUsage;
  } catch (const Usage& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kViolation;
  }
  return kUsage;
}
