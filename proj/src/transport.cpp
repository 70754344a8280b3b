#include "fdlab/transport.hpp"

#include <algorithm>
#include <cmath>

#include "fdlab/diagnostics.hpp"

namespace fdlab {

double FlowTrace::jacobian() const { return std::exp(divergence_integral); }

namespace {

double outside_distance(const Grid& g, const Vec2& x) {
  double d2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const double lo = g.extent(a).lo, hi = g.extent(a).hi;
    const double e = x[a] < lo ? lo - x[a] : (x[a] > hi ? x[a] - hi : 0.0);
    d2 += e * e;
  }
  return std::sqrt(d2);
}

}  // namespace

FlowTrace flow_map(const DriftSpec& V, const Grid& domain, double s, double t, const Vec2& x,
                   int n_rk, double exit_tol_rel, bool allow_exit) {
  if (n_rk < 1) throw std::invalid_argument("flow_map needs n_rk >= 1");
  FlowTrace tr;
  tr.s = s;
  tr.t = t;
  tr.start = x;
  tr.end = x;
  tr.steps = 0;
  if (t == s) return tr;
  const double tol = exit_tol_rel * domain.diameter();
  const double h = (t - s) / n_rk;
  const int d = domain.dim();
  Vec2 X = x;
  double L = 0.0;
  auto f = [&](const Vec2& p, double tau, Vec2& v, double& div) {
    v = V.evaluate(p, tau);
    if (d == 1) v[1] = 0.0;
    div = V.divergence(p, tau);
  };
  for (int k = 0; k < n_rk; ++k) {
    const double tau = s + k * h;
    Vec2 k1, k2, k3, k4;
    double d1, d2, d3, d4;
    f(X, tau, k1, d1);
    f({X[0] + 0.5 * h * k1[0], X[1] + 0.5 * h * k1[1]}, tau + 0.5 * h, k2, d2);
    f({X[0] + 0.5 * h * k2[0], X[1] + 0.5 * h * k2[1]}, tau + 0.5 * h, k3, d3);
    f({X[0] + h * k3[0], X[1] + h * k3[1]}, tau + h, k4, d4);
    X[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    X[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    L += h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    tr.steps = k + 1;
    const double out = outside_distance(domain, X);
    if (out > tol) {
      if (allow_exit) {
        // Keep integrating: callers may still want the divergence integral.
        tr.exited = true;
        continue;
      }
      throw TraceExitError("trajectory of drift '" + V.kind_name() +
                           "' left the domain (V.n = 0 violated); distance " +
                           std::to_string(out));
    }
  }
  const Vec2 c = domain.clamp(X);
  tr.clamp_distance = std::hypot(c[0] - X[0], c[1] - X[1]);
  tr.end = tr.exited ? X : c;
  tr.divergence_integral = L;
  return tr;
}

double fd_jacobian_det(const DriftSpec& V, const Grid& domain, double s, double t, const Vec2& x,
                       int n_rk, double step) {
  const int d = domain.dim();
  double J[2][2] = {{0, 0}, {0, 0}};
  for (int k = 0; k < d; ++k) {
    Vec2 xp = x, xm = x;
    xp[k] += step;
    xm[k] -= step;
    const Vec2 ep = flow_map(V, domain, s, t, xp, n_rk).end;
    const Vec2 em = flow_map(V, domain, s, t, xm, n_rk).end;
    for (int i = 0; i < d; ++i) J[i][k] = (ep[i] - em[i]) / (2.0 * step);
  }
  return d == 2 ? J[0][0] * J[1][1] - J[0][1] * J[1][0] : J[0][0];
}

double interpolate(const ScalarField& f, const Vec2& x) {
  const Grid& g = f.grid;
  auto axis = [&](int a, int& i0, double& w) {
    const int n = g.cells(a);
    double s = (x[a] - g.extent(a).lo) / g.spacing(a) - 0.5;
    s = std::clamp(s, 0.0, double(n - 1));
    const double r = std::round(s);
    if (std::abs(s - r) < 1e-10) s = r;  // land exactly on nodes
    i0 = std::min(int(std::floor(s)), n - 2);
    w = s - i0;
  };
  int i0, j0 = 0;
  double wx, wy = 0.0;
  axis(0, i0, wx);
  if (g.dim() == 1) return (1.0 - wx) * f.values[i0] + wx * f.values[i0 + 1];
  axis(1, j0, wy);
  const double f00 = f.values[g.index(i0, j0)], f10 = f.values[g.index(i0 + 1, j0)];
  const double f01 = f.values[g.index(i0, j0 + 1)], f11 = f.values[g.index(i0 + 1, j0 + 1)];
  return (1.0 - wx) * (1.0 - wy) * f00 + wx * (1.0 - wy) * f10 + (1.0 - wx) * wy * f01 +
         wx * wy * f11;
}

Pushforward pushforward(const DensityField& source, const DriftSpec& V, double s, double t,
                        const TransportOptions& opt) {
  const Grid& g = source.grid();
  Pushforward out;
  if (V.kind() == DriftSpec::Kind::zero) {
    out.field = source;
    out.field.set_time(t);
    return out;
  }
  std::vector<double> vals(g.size(), 0.0);
  const bool allow = opt.on_exit == ExitPolicy::zero_inflow;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const FlowTrace tr = flow_map(V, g, t, s, g.center(k), opt.n_rk, opt.exit_tol_rel, allow);
    if (tr.exited) {
      ++out.exited_traces;
      continue;
    }
    out.max_clamp = std::max(out.max_clamp, tr.clamp_distance);
    // tr.divergence_integral runs from t back to s, i.e. -log J_{s,t}(foot).
    vals[k] = std::max(0.0, interpolate(source.scalar(), tr.end)) * std::exp(tr.divergence_integral);
  }
  const double m0 = source.mass();
  DensityField f(g, std::move(vals), t);
  const double m1 = f.mass();
  out.mass_defect = m0 > 0.0 ? (m1 - m0) / m0 : 0.0;
  if (opt.renormalize && m1 > 0.0 && m0 > 0.0) f = f.scaled(m0 / m1);
  out.field = std::move(f);
  return out;
}

PushforwardRelations pushforward_relations_report(const DensityField& source,
                                                  const DensityField& output, const DriftSpec& V,
                                                  double s, double t, double q, int n_rk) {
  if (!(q >= 1.0)) throw std::invalid_argument("relations report needs q >= 1");
  const Grid& g = source.grid();
  PushforwardRelations r;
  r.entropy_output = entropy(output, 0.0);
  double src_logJ = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double v = source[k];
    if (v <= 0.0) continue;
    // Forward traces may leave the box (expanding fields); only the
    // divergence integral along them is needed here.
    src_logJ += v * flow_map(V, g, s, t, g.center(k), n_rk, 1e-9, true).divergence_integral;
  }
  src_logJ *= g.cell_volume();
  r.entropy_predicted = entropy(source, 0.0) - src_logJ;
  r.entropy_residual = std::abs(r.entropy_output - r.entropy_predicted);

  // int_s^t sup_x |div V| by the trapezoid rule on n_rk + 1 times.
  const int nt = std::max(1, n_rk);
  std::vector<double> times(nt + 1), sups(nt + 1);
  for (int k = 0; k <= nt; ++k) {
    const double tau = s + (t - s) * k / nt;
    double m = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) m = std::max(m, std::abs(V.divergence(g.center(c), tau)));
    times[k] = tau;
    sups[k] = m;
  }
  double A = 0.0;
  for (int k = 1; k <= nt; ++k) A += 0.5 * (sups[k] + sups[k - 1]) * std::abs(times[k] - times[k - 1]);
  r.divergence_sup_integral = A;
  r.lq_output = lq_norm(output, q);
  r.lq_bound = lq_norm(source, q) * std::exp((q - 1.0) / q * A);
  r.lq_slack = r.lq_bound - r.lq_output;
  return r;
}

}  // namespace fdlab
