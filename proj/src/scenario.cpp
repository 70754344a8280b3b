#include "fdlab/scenario.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace fdlab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? sep : "") + v[k];
  return out;
}

// Typed access to the section/key/string table with error collection.
class Reader {
 public:
  Reader(const json& cfg, std::vector<std::string>& errors) : cfg_(cfg), errors_(errors) {}

  std::optional<std::string> raw(const std::string& sec, const std::string& key) const {
    if (!cfg_.contains(sec) || !cfg_[sec].contains(key)) return std::nullopt;
    return cfg_[sec][key].get<std::string>();
  }
  bool has(const std::string& sec, const std::string& key) const { return raw(sec, key).has_value(); }

  double number(const std::string& sec, const std::string& key, std::optional<double> fallback = {}) {
    const auto r = raw(sec, key);
    if (!r) {
      if (fallback) return *fallback;
      fail("[" + sec + "] " + key + " is required");
      return std::nan("");
    }
    return to_number(sec, key, *r);
  }
  int integer(const std::string& sec, const std::string& key, std::optional<int> fallback = {}) {
    const double v = number(sec, key, fallback ? std::optional<double>(*fallback) : std::nullopt);
    if (std::isnan(v)) return 0;
    if (v != std::floor(v)) fail("[" + sec + "] " + key + " must be an integer");
    return int(v);
  }
  std::string text(const std::string& sec, const std::string& key,
                   std::optional<std::string> fallback = {}) {
    const auto r = raw(sec, key);
    if (r) return *r;
    if (!fallback) fail("[" + sec + "] " + key + " is required");
    return fallback.value_or("");
  }
  bool flag(const std::string& sec, const std::string& key, bool fallback) {
    const auto r = raw(sec, key);
    if (!r) return fallback;
    if (*r == "true" || *r == "1" || *r == "yes") return true;
    if (*r == "false" || *r == "0" || *r == "no") return false;
    fail("[" + sec + "] " + key + " must be true or false");
    return fallback;
  }
  std::vector<double> list(const std::string& sec, const std::string& key,
                           std::vector<double> fallback = {}) {
    const auto r = raw(sec, key);
    if (!r) return fallback;
    try {
      return parse_list(*r);
    } catch (const std::exception&) {
      fail("[" + sec + "] " + key + " is not a list of numbers: '" + *r + "'");
      return fallback;
    }
  }
  Vec2 point(const std::string& sec, const std::string& key, Vec2 fallback) {
    const auto v = list(sec, key, {fallback[0], fallback[1]});
    if (v.size() == 1) return {v[0], fallback[1]};
    if (v.size() != 2) {
      fail("[" + sec + "] " + key + " needs one or two numbers");
      return fallback;
    }
    return {v[0], v[1]};
  }
  void fail(const std::string& msg) { errors_.push_back(msg); }

 private:
  double to_number(const std::string& sec, const std::string& key, const std::string& r) {
    if (r == "inf") return kInf;
    try {
      std::size_t pos = 0;
      const double v = std::stod(r, &pos);
      if (trim(r.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    fail("[" + sec + "] " + key + " is not a number: '" + r + "'");
    return std::nan("");
  }

  const json& cfg_;
  std::vector<std::string>& errors_;
};

json parse_ini(const std::string& text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ScenarioError({origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")"});
  }
  json cfg = json::object();
  for (const auto& [sec, body] : tree) {
    if (body.empty()) throw ScenarioError({origin + ": key '" + sec + "' outside any section"});
    json s = json::object();
    for (const auto& [key, val] : body) s[key] = trim(val.data());
    cfg[sec] = s;
  }
  return cfg;
}

Interval interval_from(Reader& r, const std::string& sec, const std::string& key, Interval fb) {
  const auto v = r.list(sec, key, {fb.lo, fb.hi});
  if (v.size() != 2 || !(v[1] > v[0])) {
    r.fail("[" + sec + "] " + key + " must be 'lo,hi' with lo < hi");
    return fb;
  }
  return {v[0], v[1]};
}

DriftSpec build_drift(Reader& r, const std::string& sec, const std::string& kind, int dim,
                      const Grid* grid) {
  const Interval bx = grid ? grid->extent(0) : Interval{0, 1};
  const Interval by = grid && grid->dim() == 2 ? grid->extent(1) : Interval{0, 1};
  const Vec2 mid{0.5 * (bx.lo + bx.hi), 0.5 * (by.lo + by.hi)};
  if (kind == "zero") return DriftSpec::zero(dim);
  if (kind == "constant") return DriftSpec::constant(dim, r.point(sec, "velocity", {0.0, 0.0}));
  if (kind == "shear") {
    if (dim != 2) r.fail("[" + sec + "] shear drift needs a 2D grid");
    return DriftSpec::shear(r.number(sec, "rate"), r.number(sec, "y0", mid[1]),
                            r.flag(sec, "windowed", false), interval_from(r, sec, "window", bx));
  }
  if (kind == "rigid_rotation") {
    if (dim != 2) r.fail("[" + sec + "] rotation needs a 2D grid");
    return DriftSpec::rigid_rotation(r.number(sec, "omega"), r.point(sec, "center", mid),
                                     r.number(sec, "r0", kInf), r.number(sec, "r1", kInf));
  }
  if (kind == "potential_quadratic")
    return DriftSpec::potential_quadratic(dim, r.number(sec, "alpha"), r.point(sec, "center", mid));
  if (kind == "potential_cosine")
    return DriftSpec::potential_cosine(dim, r.number(sec, "amplitude"), r.integer(sec, "k", 1), bx, by);
  if (kind == "stream_function") {
    if (dim != 2) r.fail("[" + sec + "] stream function drift needs a 2D grid");
    return DriftSpec::stream_function(r.number(sec, "amplitude"), r.integer(sec, "kx", 1),
                                      r.integer(sec, "ky", 1), bx, by);
  }
  if (kind == "time_modulated") {
    const std::string inner = r.text(sec, "inner");
    if (inner == "time_modulated" || inner == "staggered") {
      r.fail("[" + sec + "] inner drift cannot be " + inner);
      return DriftSpec::zero(dim);
    }
    const DriftSpec in = build_drift(r, sec, inner, dim, grid);
    return DriftSpec::time_modulated(in, r.number(sec, "offset", 1.0), r.number(sec, "amp", 0.0),
                                     r.number(sec, "freq", 1.0));
  }
  r.fail("[" + sec + "] unknown drift kind '" + kind +
         "' (zero, constant, shear, rigid_rotation, potential_quadratic, potential_cosine, "
         "stream_function, time_modulated)");
  return DriftSpec::zero(dim);
}

DensityField build_initial(Reader& r, const std::string& sec, const Grid& g) {
  const std::string preset = r.text(sec, "preset", "uniform");
  const Interval bx = g.extent(0);
  const Interval by = g.dim() == 2 ? g.extent(1) : Interval{0, 1};
  const Vec2 mid{0.5 * (bx.lo + bx.hi), 0.5 * (by.lo + by.hi)};
  std::vector<double> v(g.size(), 0.0);
  bool normalize = true;
  if (preset == "uniform") {
    const double c = r.number(sec, "value", 1.0);
    for (double& x : v) x = c;
  } else if (preset == "two-block") {
    const double split = r.number(sec, "split", mid[0]);
    const double lo = r.number(sec, "low", 0.2), hi = r.number(sec, "high", 1.8);
    for (std::size_t k = 0; k < g.size(); ++k) v[k] = g.center(k)[0] < split ? lo : hi;
  } else if (preset == "truncated-gaussian") {
    const Vec2 c = r.point(sec, "center", mid);
    const double sigma = r.number(sec, "sigma", 0.1);
    const double radius = r.number(sec, "radius", 3.0 * sigma);
    const double bg = r.number(sec, "background", 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 x = g.center(k);
      const double d2 = (x[0] - c[0]) * (x[0] - c[0]) + (g.dim() == 2 ? (x[1] - c[1]) * (x[1] - c[1]) : 0.0);
      v[k] = bg + (d2 <= radius * radius ? std::exp(-0.5 * d2 / (sigma * sigma)) : 0.0);
    }
  } else if (preset == "layered") {
    normalize = false;
    const double bottom = r.number(sec, "bottom", 0.1), top = r.number(sec, "top", 1.0);
    const double iface = r.number(sec, "interface", g.dim() == 2 ? mid[1] : mid[0]);
    const double width = r.number(sec, "width", 0.05);
    const double amp = r.number(sec, "perturbation", 0.0);
    const double kw = r.number(sec, "wavenumber", 1.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 x = g.center(k);
      const double h = g.dim() == 2 ? x[1] : x[0];
      const double shift =
          g.dim() == 2 ? amp * std::cos(kw * std::numbers::pi * (x[0] - bx.lo) / bx.length()) : 0.0;
      v[k] = bottom + (top - bottom) / (1.0 + std::exp(-(h + shift - iface) / width));
    }
  } else if (preset == "cosine") {
    const double mean = r.number(sec, "mean", 1.0), amp = r.number(sec, "amplitude", 0.5);
    const int kk = r.integer(sec, "k", 1);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 x = g.center(k);
      double c = std::cos(kk * std::numbers::pi * (x[0] - bx.lo) / bx.length());
      if (g.dim() == 2) c *= std::cos(kk * std::numbers::pi * (x[1] - by.lo) / by.length());
      v[k] = mean + amp * c;
    }
  } else if (preset == "bump") {
    const Vec2 c = r.point(sec, "center", mid);
    const double radius = r.number(sec, "radius", 0.2);
    const double power = r.number(sec, "power", 4.0);
    const double bg = r.number(sec, "background", 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 x = g.center(k);
      const double d2 = (x[0] - c[0]) * (x[0] - c[0]) + (g.dim() == 2 ? (x[1] - c[1]) * (x[1] - c[1]) : 0.0);
      const double s = 1.0 - d2 / (radius * radius);
      v[k] = bg + (s > 0.0 ? std::pow(s, power) : 0.0);
    }
  } else {
    r.fail("[" + sec + "] unknown preset '" + preset +
           "' (uniform, two-block, truncated-gaussian, layered, cosine, bump)");
    return DensityField::constant(g, 1.0);
  }
  for (double x : v)
    if (!(x >= 0.0) || !std::isfinite(x)) {
      r.fail("[" + sec + "] initial data must be finite and nonnegative");
      return DensityField::constant(g, 1.0);
    }
  DensityField f(g, std::move(v));
  normalize = r.flag(sec, "normalize", normalize);
  if (normalize) {
    if (!(f.mass() > 0.0)) {
      r.fail("[" + sec + "] initial data has zero mass");
      return DensityField::constant(g, 1.0);
    }
    f = f.normalized();
  }
  return f;
}

Scenario build(const json& cfg, const std::string& origin) {
  std::vector<std::string> errors;
  Reader r(cfg, errors);
  Scenario sc;
  sc.name = r.text("scenario", "name", origin);
  sc.output = r.text("scenario", "output", "runs/" + sc.name);
  sc.seed = std::uint64_t(r.number("scenario", "seed", 1.0));

  // grid
  const int dim = r.integer("grid", "dim", 1);
  if (dim != 1 && dim != 2) r.fail("[grid] dim must be 1 or 2");
  const Interval x = interval_from(r, "grid", "x", {0, 1});
  const int nx = r.integer("grid", "nx");
  if (r.has("grid", "nx") && nx < 4) r.fail("[grid] nx must be at least 4");
  bool grid_ok = r.has("grid", "nx") && nx >= 4;
  const std::string bnd = r.text("grid", "boundary", "neumann");
  if (bnd != "neumann" && bnd != "periodic") r.fail("[grid] boundary must be neumann or periodic");
  if (dim == 2) {
    const Interval y = interval_from(r, "grid", "y", {0, 1});
    const int ny = r.integer("grid", "ny", nx);
    if (ny < 4) {
      r.fail("[grid] ny must be at least 4");
      grid_ok = false;
    }
    if (grid_ok)
      sc.grid = Grid::box(x, y, nx, ny, bnd == "periodic" ? Boundary::periodic : Boundary::neumann);
  } else if (grid_ok) {
    sc.grid = Grid::line(x, nx);
  }

  // model
  sc.m = r.number("model", "m");
  if (!(sc.m > 0.0)) r.fail("[model] m must be positive");
  sc.epsilon = r.number("model", "epsilon", 0.0);
  if (!(sc.epsilon >= 0.0)) r.fail("[model] epsilon must be nonnegative");
  if (sc.m < 1.0 && !(sc.epsilon > 0.0))
    r.fail("[model] epsilon must be positive when m < 1 (the implicit step needs it)");
  sc.q_list = r.list("model", "q", {2.0});
  if (sc.q_list.empty()) r.fail("[model] q list is empty");
  for (double q : sc.q_list)
    if (!(q >= 1.0)) r.fail("[model] every q must be >= 1");

  // drift and initial data
  if (cfg.contains("drift")) sc.drift_config = cfg["drift"];
  if (cfg.contains("initial")) sc.initial_config = cfg["initial"];
  const std::string kind = r.text("drift", "kind", "zero");
  sc.drift = build_drift(r, "drift", kind, dim, grid_ok ? &sc.grid : nullptr);
  if (r.has("drift", "divergence_free") || r.has("drift", "zero_flux"))
    sc.drift.declare(r.flag("drift", "divergence_free", sc.drift.declared_divergence_free()),
                     r.flag("drift", "zero_flux", sc.drift.declared_zero_normal_flux()));
  if (grid_ok) sc.rho0 = build_initial(r, "initial", sc.grid);

  // schedule
  SplittingSchedule& s = sc.schedule;
  s.T = r.number("schedule", "T");
  s.n = r.integer("schedule", "n");
  s.diffusion.m = sc.m;
  s.diffusion.epsilon = sc.epsilon;
  s.diffusion.dt = r.number("schedule", "dt");
  s.rk_steps = r.integer("schedule", "rk_steps", 8);
  s.output_times = r.list("schedule", "output_times");
  s.output_every_step = r.flag("schedule", "output_every_step", false);
  s.renormalize = r.flag("schedule", "renormalize", true);
  const std::string exit_policy = r.text("schedule", "on_exit", "fail");
  if (exit_policy == "fail") s.on_exit = ExitPolicy::fail;
  else if (exit_policy == "zero_inflow") s.on_exit = ExitPolicy::zero_inflow;
  else r.fail("[schedule] on_exit must be fail or zero_inflow");
  s.epsilon_sequence = r.list("schedule", "epsilon_sequence");
  s.diagnostics_q = sc.q_list.empty() ? 2.0 : sc.q_list.front();
  if (cfg.contains("schedule") && errors.empty()) {
    try {
      s.validate();
    } catch (const std::exception& e) {
      r.fail(std::string("[schedule] ") + e.what());
    }
  }
  if (!sc.drift.declared_zero_normal_flux() && s.on_exit == ExitPolicy::fail &&
      sc.drift.kind() != DriftSpec::Kind::zero)
    r.fail("[schedule] drift '" + kind +
           "' has boundary inflow/outflow; set on_exit = zero_inflow to run it");

  // verification settings
  VerifySettings& v = sc.verify;
  const std::string batteries = r.text("verify", "batteries", "");
  std::stringstream bs(batteries);
  for (std::string item; std::getline(bs, item, ',');)
    if (!trim(item).empty()) v.batteries.push_back(trim(item));
  try {
    v.drift_class = class_from_name(r.text("verify", "class", "D"));
  } catch (const std::exception& e) {
    r.fail(std::string("[verify] class: ") + e.what());
  }
  v.exponents.q1 = r.number("verify", "q1", kInf);
  v.exponents.q2 = r.number("verify", "q2", kInf);
  v.energy_constant = r.number("verify", "energy_C", 1.0);
  v.probe_dt = r.number("verify", "probe_dt", 0.0);
  v.delta_K = r.integer("verify", "delta_K", 16);
  v.weak_tolerance = r.number("verify", "weak_tol", 0.05);
  v.refine_substeps = r.integer("verify", "refine_substeps", 0);
  v.strides.clear();
  for (double d : r.list("verify", "strides", {})) v.strides.push_back(int(d));
  for (double d : r.list("verify", "refine_n")) v.refine_n.push_back(int(d));

  // convection model
  if (cfg.contains("boussinesq")) {
    ConvectionSettings& c = sc.convection;
    c.present = true;
    c.mode = r.text("boussinesq", "mode", "walls");
    if (c.mode != "walls" && c.mode != "taylor-green")
      r.fail("[boussinesq] mode must be walls or taylor-green");
    c.T = r.number("boussinesq", "T");
    c.dt = r.number("boussinesq", "dt");
    c.amplitude = r.number("boussinesq", "amplitude", 1.0);
    c.stride = r.integer("boussinesq", "stride", 10);
    if (dim != 2) r.fail("[boussinesq] needs dim = 2");
    if (c.mode == "taylor-green" && bnd != "periodic")
      r.fail("[boussinesq] taylor-green mode needs boundary = periodic");
  }

  if (!errors.empty()) throw ScenarioError(errors);
  return sc;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> p)
    : std::runtime_error("invalid scenario: " + join(p, "; ")), problems(std::move(p)) {}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "inf") {
      out.push_back(kInf);
      continue;
    }
    std::size_t pos = 0;
    out.push_back(std::stod(item, &pos));
    if (!trim(item.substr(pos)).empty()) throw std::invalid_argument("bad number '" + item + "'");
  }
  return out;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  const json cfg = parse_ini(text, origin);
  Scenario sc = build(cfg, origin);
  sc.drift_config = cfg.value("drift", json::object());
  sc.initial_config = cfg.value("initial", json::object());
  sc.raw = cfg;
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  if (!fs::exists(path)) throw ScenarioError({"scenario file not found: " + path.string()});
  Scenario sc = parse_scenario(read_text(path), path.stem().string());
  return sc;
}

json Scenario::to_json() const {
  // The raw section table is the canonical form: rebuilding from it gives
  // back the same scenario.
  return raw;
}

Scenario scenario_from_json(const json& j) {
  Scenario sc = build(j, j.contains("scenario") ? j["scenario"].value("name", "scenario") : "scenario");
  sc.raw = j;
  return sc;
}

DriftSpec drift_from_config(const json& section, int dim) {
  std::vector<std::string> errors;
  json cfg{{"drift", section}};
  Reader r(cfg, errors);
  DriftSpec V = build_drift(r, "drift", r.text("drift", "kind", "zero"), dim, nullptr);
  if (!errors.empty()) throw ScenarioError(errors);
  return V;
}

DensityField initial_from_config(const json& section, const Grid& grid) {
  std::vector<std::string> errors;
  json cfg{{"initial", section}};
  Reader r(cfg, errors);
  DensityField f = build_initial(r, "initial", grid);
  if (!errors.empty()) throw ScenarioError(errors);
  return f;
}

}  // namespace fdlab
