#include "fdlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace fdlab {

void DiscreteMeasure::validate() const {
  if (support.size() != weights.size()) throw std::invalid_argument("support and weights differ in size");
  if (weights.empty()) throw std::invalid_argument("empty measure");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("measure weights must be >= 0");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("measure weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::from_density(const DensityField& f) {
  DiscreteMeasure mu;
  mu.dim = f.grid().dim();
  const double M = f.mass();
  if (!(M > 0.0)) throw std::invalid_argument("density has zero mass");
  const double h = f.grid().cell_volume();
  for (std::size_t k = 0; k < f.size(); ++k) {
    mu.support.push_back(f.grid().center(k));
    mu.weights.push_back(f[k] * h / M);
  }
  // Absorb the rounding of the normalisation into the largest atom.
  const double s = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
  auto it = std::max_element(mu.weights.begin(), mu.weights.end());
  *it += 1.0 - s;
  return mu;
}

namespace {

double dist_p(const Vec2& a, const Vec2& b, int dim, double p) {
  const double dx = a[0] - b[0], dy = dim == 2 ? a[1] - b[1] : 0.0;
  const double d2 = dx * dx + dy * dy;
  if (p == 2.0) return d2;
  if (p == 1.0) return std::sqrt(d2);
  return std::pow(d2, 0.5 * p);
}

}  // namespace

double TransportPlan::marginal_error(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
  std::vector<double> r(mu.size(), 0.0), c(nu.size(), 0.0);
  for (const auto& e : entries) {
    r[e.i] += e.mass;
    c[e.j] += e.mass;
  }
  double err = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) err = std::max(err, std::abs(r[i] - mu.weights[i]));
  for (std::size_t j = 0; j < c.size(); ++j) err = std::max(err, std::abs(c[j] - nu.weights[j]));
  return err;
}

double w2_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  mu.validate();
  nu.validate();
  auto sorted = [](const DiscreteMeasure& m) {
    std::vector<std::pair<double, double>> a;
    for (std::size_t k = 0; k < m.size(); ++k)
      if (m.weights[k] > 0.0) a.emplace_back(m.support[k][0], m.weights[k]);
    std::sort(a.begin(), a.end());
    return a;
  };
  const auto a = sorted(mu), b = sorted(nu);
  std::size_t i = 0, j = 0;
  double ra = a[0].second, rb = b[0].second, s = 0.0;
  while (i < a.size() && j < b.size()) {
    const double d = a[i].first - b[j].first;
    if (ra <= rb) {
      s += ra * d * d;
      rb -= ra;
      if (++i < a.size()) ra = a[i].second;
    } else {
      s += rb * d * d;
      ra -= rb;
      if (++j < b.size()) rb = b[j].second;
    }
  }
  return std::sqrt(std::max(0.0, s));
}

double w2_1d_density(const DensityField& fa, const DensityField& fb) {
  if (fa.grid().dim() != 1 || fb.grid().dim() != 1)
    throw std::invalid_argument("w2_1d_density needs 1D fields");
  struct Seg {
    double u0, u1, x0, x1;
  };
  auto segments = [](const DensityField& f) {
    const Grid& g = f.grid();
    const double M = f.mass();
    if (!(M > 0.0)) throw std::invalid_argument("density has zero mass");
    std::vector<Seg> s;
    double u = 0.0;
    for (int k = 0; k < g.cells(0); ++k) {
      const double w = f[k] * g.spacing(0) / M;
      if (w <= 0.0) continue;
      const double x0 = g.extent(0).lo + k * g.spacing(0);
      s.push_back({u, u + w, x0, x0 + g.spacing(0)});
      u += w;
    }
    s.back().u1 = 1.0;
    return s;
  };
  const auto A = segments(fa), B = segments(fb);
  auto X = [](const Seg& s, double u) {
    return s.x0 + (s.x1 - s.x0) * std::clamp((u - s.u0) / (s.u1 - s.u0), 0.0, 1.0);
  };
  std::size_t i = 0, j = 0;
  double u = 0.0, sum = 0.0;
  while (i < A.size() && j < B.size()) {
    const double u1 = std::min(A[i].u1, B[j].u1);
    if (u1 > u) {
      // Both quantile functions are linear here, so Simpson's rule is exact.
      const double um = 0.5 * (u + u1);
      const double d0 = X(A[i], u) - X(B[j], u);
      const double dm = X(A[i], um) - X(B[j], um);
      const double d1 = X(A[i], u1) - X(B[j], u1);
      sum += (u1 - u) / 6.0 * (d0 * d0 + 4.0 * dm * dm + d1 * d1);
      u = u1;
    }
    if (A[i].u1 <= u) ++i;
    if (j < B.size() && B[j].u1 <= u) ++j;
  }
  return std::sqrt(std::max(0.0, sum));
}

ExactTransport wp_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p,
                        std::size_t cap) {
  mu.validate();
  nu.validate();
  if (!(p >= 1.0)) throw std::invalid_argument("wp_exact needs p >= 1");
  if (mu.size() > cap || nu.size() > cap)
    throw TooManyAtoms("measure has more than " + std::to_string(cap) +
                       " atoms; coarsen it or use the entropic solver");
  // Work on atoms of positive mass only.
  std::vector<int> si, sj;
  for (std::size_t k = 0; k < mu.size(); ++k)
    if (mu.weights[k] > 0.0) si.push_back(int(k));
  for (std::size_t k = 0; k < nu.size(); ++k)
    if (nu.weights[k] > 0.0) sj.push_back(int(k));
  const int N = int(si.size()), M = int(sj.size());
  const int dim = std::max(mu.dim, nu.dim);
  std::vector<double> C(std::size_t(N) * M);
  double cmax = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < M; ++j) {
      const double c = dist_p(mu.support[si[i]], nu.support[sj[j]], dim, p);
      C[std::size_t(i) * M + j] = c;
      cmax = std::max(cmax, c);
    }
  std::vector<double> a(N), b(M);
  for (int i = 0; i < N; ++i) a[i] = mu.weights[si[i]];
  for (int j = 0; j < M; ++j) b[j] = nu.weights[sj[j]];

  // Perturbed supplies keep every basis nondegenerate, so pivots strictly
  // decrease the cost and the method cannot cycle.
  double wmin = 1.0;
  for (double w : a) wmin = std::min(wmin, w);
  for (double w : b) wmin = std::min(wmin, w);
  const double delta = 1e-7 * wmin / (N + 1);
  std::vector<double> ap(a), bp(b);
  for (double& w : ap) w += delta;
  bp[M - 1] += N * delta;

  struct Arc {
    int i, j;
    double flow;
  };
  std::vector<Arc> basis;
  basis.reserve(N + M - 1);
  {
    int i = 0, j = 0;
    double ra = ap[0], rb = bp[0];
    while (true) {
      const double f = std::min(ra, rb);
      basis.push_back({i, j, f});
      if (i == N - 1 && j == M - 1) break;
      if ((ra < rb && i < N - 1) || j == M - 1) {
        rb -= ra;
        ra = ap[++i];
      } else {
        ra -= rb;
        rb = bp[++j];
      }
    }
  }

  const int V = N + M;
  std::vector<int> head(V + 1), adj(2 * (V - 1)), parent(V), parc(V), depth(V), order(V);
  std::vector<double> pot(V);
  auto build_tree = [&] {
    std::fill(head.begin(), head.end(), 0);
    for (const auto& e : basis) {
      ++head[e.i + 1];
      ++head[N + e.j + 1];
    }
    for (int v = 0; v < V; ++v) head[v + 1] += head[v];
    std::vector<int> fill(head.begin(), head.end() - 1);
    for (int k = 0; k < int(basis.size()); ++k) {
      adj[fill[basis[k].i]++] = k;
      adj[fill[N + basis[k].j]++] = k;
    }
    std::fill(parent.begin(), parent.end(), -2);
    parent[0] = -1;
    parc[0] = -1;
    depth[0] = 0;
    pot[0] = 0.0;
    int qh = 0, qt = 0;
    order[qt++] = 0;
    while (qh < qt) {
      const int v = order[qh++];
      for (int e = head[v]; e < head[v + 1]; ++e) {
        const Arc& arc = basis[adj[e]];
        const int w = v < N ? N + arc.j : arc.i;
        if (parent[w] != -2) continue;
        parent[w] = v;
        parc[w] = adj[e];
        depth[w] = depth[v] + 1;
        // u_i + v_j = c_ij on basic arcs
        pot[w] = C[std::size_t(arc.i) * M + arc.j] - pot[v];
        order[qt++] = w;
      }
    }
    if (qt != V) throw std::logic_error("transport basis is not a spanning tree");
  };

  const std::size_t total = std::size_t(N) * M;
  const std::size_t block = std::max<std::size_t>(64, std::size_t(std::sqrt(double(total))));
  const double tol = 1e-12 * std::max(1.0, cmax);
  std::size_t cursor = 0;
  ExactTransport out;
  const long max_pivots = 200L * (N + M) + 10000L;
  for (;; ++out.pivots) {
    if (out.pivots > max_pivots) throw std::runtime_error("network simplex exceeded its pivot cap");
    build_tree();
    // Block pricing: the most negative reduced cost within the first block
    // that has one.
    double best = -tol;
    std::size_t enter = total;
    std::size_t scanned = 0;
    while (scanned < total) {
      const std::size_t stop = std::min(total, scanned + block);
      for (; scanned < stop; ++scanned) {
        const std::size_t k = cursor;
        cursor = cursor + 1 == total ? 0 : cursor + 1;
        const int i = int(k / M), j = int(k % M);
        const double rc = C[k] - pot[i] - pot[N + j];
        if (rc < best) {
          best = rc;
          enter = k;
        }
      }
      if (enter != total) break;
    }
    if (enter == total) break;
    const int ei = int(enter / M), ej = int(enter % M);

    // Cycle: entering arc ei -> ej, then the tree path from ej back to ei.
    std::vector<std::pair<int, bool>> path;  // (basis index, increases)
    int x = N + ej, y = ei;
    std::vector<std::pair<int, bool>> tail;
    while (x != y) {
      if (depth[x] >= depth[y]) {
        // step x -> parent(x) on the ej side
        path.emplace_back(parc[x], x < N);
        x = parent[x];
      } else {
        // parent(y) -> y on the ei side, stored in reverse
        tail.emplace_back(parc[y], y >= N);
        y = parent[y];
      }
    }
    path.insert(path.end(), tail.rbegin(), tail.rend());
    double theta = kInf;
    int leave = -1;
    for (const auto& [k, inc] : path)
      if (!inc && basis[k].flow < theta) {
        theta = basis[k].flow;
        leave = k;
      }
    for (const auto& [k, inc] : path) basis[k].flow += inc ? theta : -theta;
    basis[leave] = {ei, ej, theta};
  }

  // Flows of the optimal basis for the unperturbed supplies, by peeling leaves.
  {
    std::vector<int> deg(V, 0);
    for (const auto& e : basis) {
      ++deg[e.i];
      ++deg[N + e.j];
    }
    std::vector<double> rem(V);
    for (int i = 0; i < N; ++i) rem[i] = a[i];
    for (int j = 0; j < M; ++j) rem[N + j] = b[j];
    build_tree();
    std::vector<char> done(basis.size(), 0);
    std::vector<int> stack;
    for (int v = 0; v < V; ++v)
      if (deg[v] == 1) stack.push_back(v);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      if (deg[v] != 1) continue;
      int k = -1;
      for (int e = head[v]; e < head[v + 1]; ++e)
        if (!done[adj[e]]) k = adj[e];
      if (k < 0) continue;
      done[k] = 1;
      basis[k].flow = rem[v];
      const int w = v < N ? N + basis[k].j : basis[k].i;
      rem[w] -= rem[v];
      rem[v] = 0.0;
      --deg[v];
      if (--deg[w] == 1) stack.push_back(w);
    }
  }
  out.plan.rows = int(mu.size());
  out.plan.cols = int(nu.size());
  double cost = 0.0;
  for (const auto& e : basis) {
    const double f = std::max(0.0, e.flow);
    if (f <= 0.0) continue;
    out.plan.entries.push_back({si[e.i], sj[e.j], f});
    cost += f * C[std::size_t(e.i) * M + e.j];
  }
  out.plan.cost = cost;
  out.value = std::pow(std::max(0.0, cost), 1.0 / p);
  return out;
}

namespace {

double logsumexp(const double* v, std::size_t n) {
  double mx = -kInf;
  for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, v[k]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::exp(v[k] - mx);
  return mx + std::log(s);
}

// Regularised cost sum a f + sum b g at the Sinkhorn fixed point.
double sinkhorn_value(const std::vector<double>& a, const std::vector<Vec2>& xa,
                      const std::vector<double>& b, const std::vector<Vec2>& xb, int dim, double p,
                      double reg, int iters, double tol, bool symmetric) {
  const std::size_t N = a.size(), M = b.size();
  std::vector<double> C(N * M);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < M; ++j) C[i * M + j] = dist_p(xa[i], xb[j], dim, p);
  std::vector<double> la(N), lb(M);
  for (std::size_t i = 0; i < N; ++i) la[i] = a[i] > 0.0 ? std::log(a[i]) : -kInf;
  for (std::size_t j = 0; j < M; ++j) lb[j] = b[j] > 0.0 ? std::log(b[j]) : -kInf;
  std::vector<double> f(N, 0.0), g(M, 0.0), tmp(std::max(N, M));
  double err = kInf;
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < M; ++j) tmp[j] = lb[j] + (g[j] - C[i * M + j]) / reg;
      const double fi = -reg * logsumexp(tmp.data(), M);
      f[i] = symmetric ? 0.5 * (f[i] + fi) : fi;
    }
    if (symmetric) {
      g = f;
    } else {
      for (std::size_t j = 0; j < M; ++j) {
        for (std::size_t i = 0; i < N; ++i) tmp[i] = la[i] + (f[i] - C[i * M + j]) / reg;
        g[j] = -reg * logsumexp(tmp.data(), N);
      }
    }
    if (it % 10 == 9 || it == iters - 1) {
      err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        if (a[i] <= 0.0) continue;
        double r = 0.0;
        for (std::size_t j = 0; j < M; ++j)
          if (b[j] > 0.0) r += std::exp((f[i] + g[j] - C[i * M + j]) / reg + la[i] + lb[j]);
        err += std::abs(r - a[i]);
      }
      if (err <= tol) break;
    }
  }
  if (!(err <= tol))
    throw std::runtime_error("Sinkhorn did not converge; marginal error " + std::to_string(err));
  double v = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    if (a[i] > 0.0) v += a[i] * f[i];
  for (std::size_t j = 0; j < M; ++j)
    if (b[j] > 0.0) v += b[j] * g[j];
  return v;
}

}  // namespace

double wp_entropic(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, double reg,
                   int iters, double tol) {
  mu.validate();
  nu.validate();
  if (!(reg > 0.0)) throw std::invalid_argument("entropic regularisation must be positive");
  const int dim = std::max(mu.dim, nu.dim);
  const double ab = sinkhorn_value(mu.weights, mu.support, nu.weights, nu.support, dim, p, reg, iters,
                                   tol, false);
  const double aa = sinkhorn_value(mu.weights, mu.support, mu.weights, mu.support, dim, p, reg, iters,
                                   tol, true);
  const double bb = sinkhorn_value(nu.weights, nu.support, nu.weights, nu.support, dim, p, reg, iters,
                                   tol, true);
  const double S = ab - 0.5 * (aa + bb);
  return std::pow(std::max(0.0, S), 1.0 / p);
}

DensityField coarsen(const DensityField& f, int max_cells) {
  const Grid& g = f.grid();
  auto factor = [&](int n) {
    for (int b = 1; b <= n; ++b)
      if (n % b == 0 && n / b <= max_cells) return b;
    return n;
  };
  const int bx = factor(g.cells(0));
  const int by = g.dim() == 2 ? factor(g.cells(1)) : 1;
  if (bx == 1 && by == 1) return f;
  const int nx = g.cells(0) / bx, ny = g.cells(1) / by;
  const Grid c = g.dim() == 2 ? Grid::box(g.extent(0), g.extent(1), nx, ny, g.boundary())
                              : Grid::line(g.extent(0), nx);
  std::vector<double> v(c.size(), 0.0);
  for (int j = 0; j < g.cells(1); ++j)
    for (int i = 0; i < g.cells(0); ++i) v[c.index(i / bx, j / by)] += f[g.index(i, j)];
  for (double& x : v) x /= double(bx * by);
  return DensityField(c, std::move(v), f.time());
}

double w2_density(const DensityField& a, const DensityField& b) {
  if (a.grid().dim() == 1) return w2_1d_density(a, b);
  const auto ca = coarsen(a), cb = coarsen(b);
  return wp_exact(DiscreteMeasure::from_density(ca), DiscreteMeasure::from_density(cb), 2.0).value;
}

namespace {

constexpr double kPi = std::numbers::pi;

// (a, b) of the k-th pair in the diagonal enumeration, k >= 1.
std::pair<int, int> diagonal_pair(int k) {
  int s = 2;
  while (k > s - 1) {
    k -= s - 1;
    ++s;
  }
  return {k, s - k};
}

struct Mode {
  double ax, ay, c;  // angular wavenumbers and normalisation
};

Mode mode(const Grid& dom, int k) {
  if (dom.dim() == 1) {
    const double ax = k * kPi / dom.extent(0).length();
    return {ax, 0.0, std::min(1.0, 1.0 / ax)};
  }
  const auto [a, b] = diagonal_pair(k);
  const double ax = a * kPi / dom.extent(0).length(), ay = b * kPi / dom.extent(1).length();
  return {ax, ay, std::min(1.0, 1.0 / std::hypot(ax, ay))};
}

// Exact integral of sin(w (x - lo)) over [x0, x1].
double sin_cell(double w, double lo, double x0, double x1) {
  return (std::cos(w * (x0 - lo)) - std::cos(w * (x1 - lo))) / w;
}

}  // namespace

double delta_test_function(const Grid& dom, int k, const Vec2& x) {
  const Mode md = mode(dom, k);
  double v = md.c * std::sin(md.ax * (x[0] - dom.extent(0).lo));
  if (dom.dim() == 2) v *= std::sin(md.ay * (x[1] - dom.extent(1).lo));
  return v;
}

DeltaDistance delta_distance(const DensityField& fa, const DensityField& fb, int K) {
  if (K < 8) throw std::invalid_argument("delta_distance needs K >= 8");
  if (!(fa.grid() == fb.grid())) throw std::invalid_argument("delta_distance needs one grid");
  const Grid& g = fa.grid();
  const double Ma = fa.mass(), Mb = fb.mass();
  if (!(Ma > 0.0) || !(Mb > 0.0)) throw std::invalid_argument("density has zero mass");
  DeltaDistance d;
  d.K = K;
  std::vector<double> diff(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) diff[k] = fa[k] / Ma - fb[k] / Mb;
  double weight = 1.0;
  for (int k = 1; k <= K; ++k) {
    weight *= 0.5;
    const Mode md = mode(g, k);
    std::vector<double> ix(g.cells(0)), iy(g.cells(1), 1.0);
    for (int i = 0; i < g.cells(0); ++i) {
      const double x0 = g.extent(0).lo + i * g.spacing(0);
      ix[i] = sin_cell(md.ax, g.extent(0).lo, x0, x0 + g.spacing(0));
    }
    if (g.dim() == 2)
      for (int j = 0; j < g.cells(1); ++j) {
        const double y0 = g.extent(1).lo + j * g.spacing(1);
        iy[j] = sin_cell(md.ay, g.extent(1).lo, y0, y0 + g.spacing(1));
      }
    double s = 0.0;
    for (int j = 0; j < g.cells(1); ++j)
      for (int i = 0; i < g.cells(0); ++i) s += diff[g.index(i, j)] * ix[i] * iy[j];
    d.value += weight * md.c * std::abs(s);
  }
  d.tail_bound = 2.0 * std::ldexp(1.0, -K);
  return d;
}

DeltaDistance delta_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Grid& dom,
                             int K) {
  if (K < 8) throw std::invalid_argument("delta_distance needs K >= 8");
  mu.validate();
  nu.validate();
  DeltaDistance d;
  d.K = K;
  double weight = 1.0;
  for (int k = 1; k <= K; ++k) {
    weight *= 0.5;
    double s = 0.0;
    for (std::size_t a = 0; a < mu.size(); ++a) s += mu.weights[a] * delta_test_function(dom, k, mu.support[a]);
    for (std::size_t b = 0; b < nu.size(); ++b) s -= nu.weights[b] * delta_test_function(dom, k, nu.support[b]);
    d.value += weight * std::abs(s);
  }
  d.tail_bound = 2.0 * std::ldexp(1.0, -K);
  return d;
}

std::vector<PairDistance> pair_distances(const TrajectoryRecord& traj, DistanceKind kind,
                                         const std::vector<int>& strides, int delta_K) {
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (int s : strides)
    for (std::size_t i = 0; i + s < traj.size(); ++i) idx.emplace_back(i, i + s);
  std::vector<PairDistance> out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& a = traj.snapshots[idx[k].first];
    const auto& b = traj.snapshots[idx[k].second];
    out[k].s = a.time();
    out[k].t = b.time();
    out[k].value = kind == DistanceKind::w2 ? w2_density(a, b) : delta_distance(a, b, delta_K).value;
  }
  return out;
}

std::vector<int> default_strides(std::size_t snapshots) {
  std::vector<int> s;
  for (int k = 1; k <= 8 && std::size_t(k) < snapshots; ++k) s.push_back(k);
  for (int k = 16; std::size_t(k) < snapshots; k *= 2) s.push_back(k);
  return s;
}

double HolderFit::majorant(double a) const {
  double c = 0.0;
  for (const auto& p : pairs)
    if (p.t > p.s) c = std::max(c, p.value / std::pow(p.t - p.s, a));
  return c;
}

HolderFit holder_fit(std::vector<PairDistance> pairs) {
  HolderFit fit;
  std::map<long long, std::pair<double, double>> env;  // key -> (gap, max)
  double scale = 0.0;
  for (const auto& p : pairs) scale = std::max(scale, p.t - p.s);
  for (const auto& p : pairs) {
    const double gap = p.t - p.s;
    if (!(gap > 0.0)) continue;
    const long long key = std::llround(gap / scale * 1e9);
    auto& e = env[key];
    e.first = gap;
    e.second = std::max(e.second, p.value);
  }
  fit.gaps = int(env.size());
  fit.pairs = std::move(pairs);
  double vmax = 0.0;
  for (const auto& [k, e] : env) {
    fit.envelope.push_back(e);
    vmax = std::max(vmax, e.second);
  }
  if (fit.gaps > 0 && vmax <= 1e-14) {
    fit.stationary = true;
    return fit;
  }
  if (fit.gaps < 6) throw std::invalid_argument("Hoelder fit needs at least 6 distinct gaps");
  std::vector<double> X, Y;
  for (const auto& [gap, d] : fit.envelope)
    if (d > 0.0) {
      X.push_back(std::log(gap));
      Y.push_back(std::log(d));
    }
  const double n = double(X.size());
  if (n < 2) {
    fit.stationary = true;
    return fit;
  }
  const double mx = std::accumulate(X.begin(), X.end(), 0.0) / n;
  const double my = std::accumulate(Y.begin(), Y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    sxx += (X[k] - mx) * (X[k] - mx);
    sxy += (X[k] - mx) * (Y[k] - my);
    syy += (Y[k] - my) * (Y[k] - my);
  }
  fit.exponent = sxy / sxx;
  const double b = my - fit.exponent * mx;
  fit.constant = std::exp(b);
  double rss = 0.0;
  for (std::size_t k = 0; k < X.size(); ++k) {
    const double e = Y[k] - (b + fit.exponent * X[k]);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / n);
  fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  return fit;
}

HolderFit holder_fit(const TrajectoryRecord& traj, DistanceKind kind, const std::vector<int>& strides,
                     int delta_K) {
  return holder_fit(pair_distances(traj, kind, strides, delta_K));
}

double metric_speed_at(const DensityField& f, const DriftSpec& V, double m, double eps) {
  const Grid& g = f.grid();
  std::vector<double> p(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double b = eps + f[k];
    p[k] = m == 1.0 ? b : (b > 0.0 ? std::pow(b, m) : 0.0);
  }
  const int nx = g.cells(0), ny = g.cells(1);
  double s = 0.0;
  auto add = [&](std::size_t a, std::size_t b, double h, int axis, const Vec2& face) {
    const double rho = 0.5 * (f[a] + f[b]);
    const double flux = -(p[b] - p[a]) / h + V.evaluate(face, f.time())[axis] * rho;
    if (flux == 0.0) return;
    s += rho > 0.0 ? flux * flux / rho : kInf;
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      add(g.index(i - 1, j), g.index(i, j), g.spacing(0), 0,
          {g.extent(0).lo + i * g.spacing(0), g.dim() == 2 ? g.center(1, j) : 0.0});
  if (g.dim() == 2)
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        add(g.index(i, j - 1), g.index(i, j), g.spacing(1), 1,
            {g.center(0, i), g.extent(1).lo + j * g.spacing(1)});
  return std::sqrt(s * g.cell_volume());
}

MetricSpeedReport metric_speed(const TrajectoryRecord& traj, const DriftSpec& V, double m, double eps,
                               const std::vector<int>& strides) {
  MetricSpeedReport r;
  const auto times = traj.times();
  for (const auto& f : traj.snapshots) r.speed.push_back(metric_speed_at(f, V, m, eps));
  double hmax = traj.grid().spacing(0);
  if (traj.grid().dim() == 2) hmax = std::max(hmax, traj.grid().spacing(1));
  r.budget = 2.0 * hmax;
  std::vector<double> cum(times.size(), 0.0);
  for (std::size_t k = 1; k < times.size(); ++k)
    cum[k] = cum[k - 1] + 0.5 * (r.speed[k] + r.speed[k - 1]) * (times[k] - times[k - 1]);
  for (int s : strides)
    for (std::size_t i = 0; i + s < traj.size(); ++i) {
      SpeedPair p;
      p.s = times[i];
      p.t = times[i + s];
      p.distance = w2_density(traj.snapshots[i], traj.snapshots[i + s]);
      p.bound = cum[i + s] - cum[i];
      p.slack = p.bound - p.distance;
      p.violated = p.slack < -r.budget;
      r.violations += p.violated ? 1 : 0;
      r.pairs.push_back(p);
    }
  return r;
}

}  // namespace fdlab
