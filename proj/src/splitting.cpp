#include "fdlab/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fdlab/metrics.hpp"
#include "fdlab/parallel.hpp"
#include "fdlab/serialize.hpp"

namespace fdlab {

int SplittingSchedule::steps_per_subinterval() const {
  const double sub = T / n;
  const double k = sub / diffusion.dt;
  const long K = std::lround(k);
  if (K < 1 || std::abs(K * diffusion.dt - sub) > 1e-9 * sub)
    throw std::invalid_argument("diffusion dt must divide T/n");
  return int(K);
}

void SplittingSchedule::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (rk_steps < 1) throw std::invalid_argument("rk_steps must be >= 1");
  diffusion.validate();
  const int K = steps_per_subinterval();
  const double dt = T / (double(n) * K);
  for (double t : output_times) {
    if (t < -1e-12 || t > T * (1.0 + 1e-12)) throw std::invalid_argument("output time outside [0, T]");
    const double s = t / dt;
    if (std::abs(s - std::round(s)) > 1e-6) throw std::invalid_argument("output times must be multiples of dt");
  }
  if (!(diagnostics_q >= 1.0)) throw std::invalid_argument("diagnostics q must be >= 1");
}

TrajectoryRecord run_splitting(const DensityField& rho0, const DriftSpec& V,
                               const SplittingSchedule& sc) {
  sc.validate();
  const int K = sc.steps_per_subinterval();
  const long total = long(sc.n) * K;
  auto time_of = [&](long step) { return sc.T * double(step) / double(total); };
  std::set<long> wanted;
  for (double t : sc.output_times) wanted.insert(std::lround(t / sc.T * total));

  TrajectoryRecord tr;
  tr.m = sc.diffusion.m;
  tr.epsilon = sc.diffusion.epsilon;
  tr.diagnostics_q = sc.diagnostics_q;
  for (int i = 0; i <= sc.n; ++i) tr.subinterval_ends.push_back(time_of(long(i) * K));

  auto record = [&](DensityField f) {
    tr.diagnostics.push_back(diagnostics_row(f, V, sc.diffusion.m, sc.diffusion.epsilon, sc.diagnostics_q));
    tr.snapshots.push_back(std::move(f));
  };
  DensityField rho = rho0;
  rho.set_time(0.0);
  record(rho);

  const DiffusionStepper stepper(rho0.grid());
  TransportOptions topt;
  topt.n_rk = sc.rk_steps;
  topt.renormalize = sc.renormalize;
  topt.on_exit = sc.on_exit;
  for (int i = 0; i < sc.n; ++i) {
    const double ti = time_of(long(i) * K);
    DensityField state = rho;
    try {
      for (int k = 1; k <= K; ++k) {
        const long step = long(i) * K + k;
        state = stepper.step(state, sc.diffusion).field;
        state.set_time(time_of(step));
        if (k == K || sc.output_every_step || wanted.count(step)) {
          auto pf = pushforward(state, V, ti, time_of(step), topt);
          if (k == K) rho = pf.field;
          record(std::move(pf.field));
        }
      }
    } catch (const std::exception& e) {
      throw SplittingFailure("subinterval " + std::to_string(i) + ": " + e.what(), i);
    }
  }
  std::ostringstream prov;
  prov << "T=" << fmt(sc.T) << ";n=" << sc.n << ";dt=" << fmt(sc.diffusion.dt) << ";m=" << fmt(sc.diffusion.m)
       << ";eps=" << fmt(sc.diffusion.epsilon) << ";rk=" << sc.rk_steps << ";drift=" << V.kind_name()
       << ";rho0=" << checksum_string(rho0.values());
  tr.provenance = prov.str();
  return tr;
}

WeakResidual weak_residual(const TrajectoryRecord& traj, const DriftSpec& V, double m, double eps,
                           const std::vector<TestFunction>& tests) {
  WeakResidual r;
  for (const auto& phi : tests) {
    const double e = weak_form_defect(traj, V, m, eps, phi);
    r.per_test.push_back(e);
    r.max_abs = std::max(r.max_abs, std::abs(e));
  }
  return r;
}

namespace {

double l1_distance(const DensityField& a, const DensityField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s * a.grid().cell_volume();
}

double fit_order(const std::vector<StudyRow>& rows) {
  std::vector<double> X, Y;
  for (const auto& r : rows)
    if (r.l1_error > 0.0) {
      X.push_back(std::log(double(r.n)));
      Y.push_back(std::log(r.l1_error));
    }
  if (X.size() < 2) return 0.0;
  const double n = double(X.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    mx += X[k] / n;
    my += Y[k] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    sxx += (X[k] - mx) * (X[k] - mx);
    sxy += (X[k] - mx) * (Y[k] - my);
  }
  return -sxy / sxx;
}

}  // namespace

ConvergenceStudy convergence_study(const DensityField& rho0, const DriftSpec& V,
                                   const SplittingSchedule& base, const std::vector<int>& n_list) {
  if (n_list.empty()) throw std::invalid_argument("convergence study needs an n list");
  const int nmax = *std::max_element(n_list.begin(), n_list.end());
  auto final_state = [&](int n, double dt, double eps) {
    SplittingSchedule s = base;
    s.n = n;
    s.diffusion.dt = dt;
    s.diffusion.epsilon = eps;
    s.output_times.clear();
    s.output_every_step = false;
    return run_splitting(rho0, V, s).snapshots.back();
  };
  ConvergenceStudy st;
  st.reference_n = 4 * nmax;
  st.reference_dt = base.diffusion.dt / 4.0;

  // Reference and every n run are independent jobs.
  std::vector<int> ns(n_list);
  std::vector<DensityField> finals(ns.size() + 1);
  parallel_for(ns.size() + 1, [&](std::size_t k) {
    if (k == ns.size())
      finals[k] = final_state(st.reference_n, st.reference_dt, base.diffusion.epsilon);
    else
      finals[k] = final_state(ns[k], base.diffusion.dt, base.diffusion.epsilon);
  });
  const DensityField& ref = finals.back();
  for (std::size_t k = 0; k < ns.size(); ++k) {
    StudyRow r;
    r.n = ns[k];
    r.epsilon = base.diffusion.epsilon;
    r.l1_error = l1_distance(finals[k], ref);
    r.w2_error = rho0.grid().dim() == 1 ? w2_1d_density(finals[k], ref) : std::nan("");
    st.n_rows.push_back(r);
  }
  st.n_order = fit_order(st.n_rows);

  const auto& eps = base.epsilon_sequence;
  if (eps.size() >= 2) {
    std::vector<DensityField> ef(eps.size());
    parallel_for(eps.size(), [&](std::size_t k) { ef[k] = final_state(nmax, base.diffusion.dt, eps[k]); });
    for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
      StudyRow r;
      r.n = nmax;
      r.epsilon = eps[k];
      r.l1_error = l1_distance(ef[k], ef[k + 1]);
      r.w2_error = rho0.grid().dim() == 1 ? w2_1d_density(ef[k], ef[k + 1]) : std::nan("");
      st.epsilon_rows.push_back(r);
    }
  }
  return st;
}

SplittingEnergyReport splitting_energy_report(const TrajectoryRecord& traj, const DriftSpec& V,
                                              double m, double q, double eps) {
  if (!(q >= 1.0)) throw std::invalid_argument("energy report needs q >= 1");
  SplittingEnergyReport rep;
  rep.q = q;
  const Grid& g = traj.grid();
  const double h = g.cell_volume();
  const double Kq = q == 1.0 ? 4.0 / m : 4.0 * m * q * (q - 1.0) / ((q + m - 1.0) * (q + m - 1.0));
  auto value = [&](const DensityField& f) {
    double s = 0.0;
    for (double v : f.values()) {
      const double b = eps + v;
      if (q == 1.0) s += b > 0.0 ? b * std::log(b) : 0.0;
      else s += std::pow(b, q);
    }
    return s * h;
  };
  std::vector<double> dis(traj.size()), val(traj.size()), src(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& f = traj.snapshots[k];
    dis[k] = face_gradient(g, power_floor(f.values(), 0.5 * (q + m - 1.0), 0.0, eps)).squared_integral();
    val[k] = value(f);
    double dv = 0.0;
    if (!V.declared_divergence_free())
      for (std::size_t c = 0; c < g.size(); ++c) dv = std::max(dv, std::abs(V.divergence(g.center(c), f.time())));
    src[k] = q == 1.0 ? dv * f.mass() : (q - 1.0) * dv * val[k];
  }
  const int n = int(traj.subinterval_ends.size()) - 1;
  rep.max_increment = -kInf;
  rep.max_balance = -kInf;
  for (int i = 0; i < n; ++i) {
    const std::size_t a = traj.find(traj.subinterval_ends[i]);
    const std::size_t b = traj.find(traj.subinterval_ends[i + 1]);
    if (a == TrajectoryRecord::npos || b == TrajectoryRecord::npos)
      throw std::invalid_argument("trajectory lacks a subinterval endpoint");
    SubintervalEnergy e;
    e.t0 = traj.snapshots[a].time();
    e.t1 = traj.snapshots[b].time();
    e.value0 = val[a];
    e.value1 = val[b];
    for (std::size_t k = a + 1; k <= b; ++k) {
      const double dt = traj.snapshots[k].time() - traj.snapshots[k - 1].time();
      // Right-endpoint rule: the implicit diffusion step dissipates at the new level.
      e.dissipation += dt * dis[k];
      e.source += 0.5 * dt * (src[k] + src[k - 1]);
    }
    e.dissipation *= Kq;
    e.increment = e.value1 - e.value0;
    e.balance = e.value1 + e.dissipation - e.value0 - e.source;
    rep.max_increment = std::max(rep.max_increment, e.increment);
    rep.max_balance = std::max(rep.max_balance, e.balance);
    rep.intervals.push_back(e);
  }
  rep.c_fit = n * std::max(0.0, rep.max_increment);
  return rep;
}

std::string diagnostics_csv(const TrajectoryRecord& traj) {
  std::ostringstream os;
  os << "time,mass,entropy,lq_norm(q),grad_energy,speed_fisher,speed_drift\n";
  for (const auto& r : traj.diagnostics)
    os << fmt(r.time) << ',' << fmt(r.mass) << ',' << fmt(r.entropy) << ',' << fmt(r.lq_norm) << ','
       << fmt(r.grad_energy) << ',' << fmt(r.speed_fisher) << ',' << fmt(r.speed_drift) << '\n';
  return os.str();
}

void write_trajectory(const fs::path& dir, const TrajectoryRecord& traj, const DriftSpec& V,
                      const json& extra) {
  fs::create_directories(dir);
  json man;
  man["format"] = "fdlab-trajectory";
  man["version"] = 1;
  man["grid"] = grid_to_json(traj.grid());
  man["m"] = traj.m;
  man["epsilon"] = traj.epsilon;
  man["diagnostics_q"] = traj.diagnostics_q;
  man["drift"] = drift_to_json(V);
  man["subinterval_ends"] = traj.subinterval_ends;
  man["provenance"] = traj.provenance;
  man["diagnostics_file"] = "diagnostics.csv";
  json snaps = json::array();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "snapshot_%05zu", k);
    write_snapshot(dir, stem, traj.snapshots[k]);
    snaps.push_back({{"time", traj.snapshots[k].time()}, {"manifest", std::string(stem) + ".json"}});
  }
  man["snapshots"] = snaps;
  for (auto it = extra.begin(); it != extra.end(); ++it) man[it.key()] = it.value();
  write_atomic(dir / "diagnostics.csv", diagnostics_csv(traj));
  write_atomic(dir / "manifest.json", man.dump(2) + "\n");
}

TrajectoryRecord read_trajectory(const fs::path& dir, DriftSpec* drift, json* manifest) {
  const json man = json::parse(read_text(dir / "manifest.json"));
  if (man.value("format", "") != "fdlab-trajectory")
    throw std::invalid_argument(dir.string() + " is not a trajectory directory");
  TrajectoryRecord tr;
  tr.m = man.at("m").get<double>();
  tr.epsilon = man.at("epsilon").get<double>();
  tr.diagnostics_q = man.at("diagnostics_q").get<double>();
  tr.subinterval_ends = man.at("subinterval_ends").get<std::vector<double>>();
  tr.provenance = man.value("provenance", "");
  const DriftSpec V = drift_from_json(man.at("drift"));
  for (const auto& s : man.at("snapshots")) {
    DensityField f = read_snapshot(dir / s.at("manifest").get<std::string>());
    tr.diagnostics.push_back(diagnostics_row(f, V, tr.m, tr.epsilon, tr.diagnostics_q));
    tr.snapshots.push_back(std::move(f));
  }
  if (drift) *drift = V;
  if (manifest) *manifest = man;
  return tr;
}

}  // namespace fdlab
