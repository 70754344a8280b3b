#include "fdlab/serialize.hpp"

#include <cmath>
#include <stdexcept>

namespace fdlab {

json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

double number_from(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
    throw std::invalid_argument("not a number: " + s);
  }
  return j.get<double>();
}

namespace {

json interval(const Interval& i) { return json::array({i.lo, i.hi}); }
Interval interval_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

DriftSpec::Kind kind_from(const std::string& s) {
  using K = DriftSpec::Kind;
  if (s == "zero") return K::zero;
  if (s == "constant") return K::constant;
  if (s == "shear") return K::shear;
  if (s == "rigid_rotation") return K::rigid_rotation;
  if (s == "potential_quadratic") return K::potential_quadratic;
  if (s == "potential_cosine") return K::potential_cosine;
  if (s == "stream_function") return K::stream_function;
  if (s == "time_modulated") return K::time_modulated;
  if (s == "staggered") return K::staggered;
  throw std::invalid_argument("unknown drift kind '" + s + "'");
}

}  // namespace

json drift_to_json(const DriftSpec& V) {
  json j;
  j["kind"] = V.kind_name();
  j["dim"] = V.dim();
  j["declared_divergence_free"] = V.declared_divergence_free();
  j["declared_zero_normal_flux"] = V.declared_zero_normal_flux();
  using K = DriftSpec::Kind;
  switch (V.kind()) {
    case K::zero: break;
    case K::constant: j["value"] = V.vec; break;
    case K::shear:
      j["rate"] = V.a;
      j["y0"] = V.b;
      j["windowed"] = V.windowed;
      j["x_window"] = interval(V.box_x);
      break;
    case K::rigid_rotation:
      j["omega"] = V.a;
      j["center"] = V.vec;
      j["r0"] = number(V.r0);
      j["r1"] = number(V.r1);
      break;
    case K::potential_quadratic:
      j["alpha"] = V.a;
      j["center"] = V.vec;
      break;
    case K::potential_cosine:
      j["amplitude"] = V.a;
      j["k"] = V.k1;
      j["x"] = interval(V.box_x);
      j["y"] = interval(V.box_y);
      break;
    case K::stream_function:
      j["amplitude"] = V.a;
      j["kx"] = V.k1;
      j["ky"] = V.k2;
      j["x"] = interval(V.box_x);
      j["y"] = interval(V.box_y);
      break;
    case K::time_modulated:
      j["inner"] = drift_to_json(*V.inner);
      j["offset"] = V.mod_offset;
      j["amplitude"] = V.mod_amp;
      j["frequency"] = V.mod_freq;
      break;
    case K::staggered:
      j["grid"] = grid_to_json(V.field->grid);
      j["u"] = V.field->u;
      j["v"] = V.field->v;
      break;
  }
  return j;
}

DriftSpec drift_from_json(const json& j) {
  using K = DriftSpec::Kind;
  const int dim = j.value("dim", 2);
  DriftSpec V;
  auto vec = [&](const char* key) {
    const auto v = j.at(key);
    return Vec2{v.at(0).get<double>(), v.size() > 1 ? v.at(1).get<double>() : 0.0};
  };
  switch (kind_from(j.at("kind").get<std::string>())) {
    case K::zero: V = DriftSpec::zero(dim); break;
    case K::constant: V = DriftSpec::constant(dim, vec("value")); break;
    case K::shear:
      V = DriftSpec::shear(j.at("rate").get<double>(), j.at("y0").get<double>(), j.value("windowed", false),
                           j.contains("x_window") ? interval_from(j["x_window"]) : Interval{0, 1});
      break;
    case K::rigid_rotation:
      V = DriftSpec::rigid_rotation(j.at("omega").get<double>(), vec("center"),
                                    j.contains("r0") ? number_from(j["r0"]) : kInf,
                                    j.contains("r1") ? number_from(j["r1"]) : kInf);
      break;
    case K::potential_quadratic:
      V = DriftSpec::potential_quadratic(dim, j.at("alpha").get<double>(), vec("center"));
      break;
    case K::potential_cosine:
      V = DriftSpec::potential_cosine(dim, j.at("amplitude").get<double>(), j.at("k").get<int>(),
                                      interval_from(j.at("x")),
                                      j.contains("y") ? interval_from(j["y"]) : Interval{0, 1});
      break;
    case K::stream_function:
      V = DriftSpec::stream_function(j.at("amplitude").get<double>(), j.at("kx").get<int>(),
                                     j.at("ky").get<int>(), interval_from(j.at("x")),
                                     interval_from(j.at("y")));
      break;
    case K::time_modulated:
      V = DriftSpec::time_modulated(drift_from_json(j.at("inner")), j.value("offset", 1.0),
                                    j.value("amplitude", 0.0), j.value("frequency", 0.0));
      break;
    case K::staggered: {
      auto f = std::make_shared<StaggeredVelocity>();
      f->grid = grid_from_json(j.at("grid"));
      f->u = j.at("u").get<std::vector<double>>();
      f->v = j.at("v").get<std::vector<double>>();
      V = DriftSpec::staggered(f);
      break;
    }
  }
  if (j.contains("declared_divergence_free"))
    V.declare(j["declared_divergence_free"].get<bool>(), j.value("declared_zero_normal_flux", true));
  return V;
}

json to_json(const DriftClassReport& r) {
  return {{"class", class_name(r.class_tag)},
          {"dim", r.dim},
          {"m", r.m},
          {"q", r.q},
          {"exponents", {{"q1", number(r.exponents.q1)}, {"q2", number(r.exponents.q2)}}},
          {"lhs", number(r.lhs)},
          {"rhs", number(r.rhs)},
          {"norm", number(r.norm)},
          {"member", r.member},
          {"critical", r.critical},
          {"m_in_range", r.m_in_range},
          {"note", r.note}};
}

json to_json(const EnergyBudget& b) {
  return {{"q", b.q},
          {"sup_value", number(b.sup_value)},
          {"dissipation", number(b.dissipation)},
          {"fisher_speed", number(b.fisher_speed)},
          {"drift_speed", number(b.drift_speed)},
          {"divergence_integral", number(b.divergence_integral)},
          {"initial_value", number(b.initial_value)},
          {"lhs", number(b.lhs)},
          {"rhs_constant", number(b.rhs_constant)},
          {"tolerance", number(b.tolerance)},
          {"satisfied", b.satisfied},
          {"speed_lhs", number(b.speed_lhs)},
          {"speed_rhs", number(b.speed_rhs)},
          {"speed_ratio", number(b.speed_ratio)},
          {"speed_ok", b.speed_ok},
          {"dependence", b.dependence}};
}

json to_json(const SobolevReport& r) {
  return {{"p", r.p},
          {"q", r.q},
          {"lhs", number(r.lhs)},
          {"gradient_term", number(r.gradient_term)},
          {"mass_term", number(r.mass_term)},
          {"constant", number(r.constant)},
          {"holds_without_c", r.holds_without_c}};
}

json to_json(const InterpolationReport& r) {
  return {{"p", r.p},           {"q", r.q},
          {"m", r.m},           {"r1", number(r.r1)},
          {"r2", number(r.r2)}, {"gamma", r.gamma},
          {"relation_residual", r.relation_residual},
          {"lhs", number(r.lhs)},
          {"gradient_term", number(r.gradient_term)},
          {"mass_term", number(r.mass_term)},
          {"constant", number(r.constant)},
          {"homogeneity_exponent", r.homogeneity_exponent}};
}

json to_json(const VrhoReport& r) {
  return {{"lhs", number(r.lhs)},         {"v_norm", number(r.v_norm)},
          {"rho_norm", number(r.rho_norm)}, {"rhs", number(r.rhs)},
          {"ratio", number(r.ratio)},     {"holds", r.holds}};
}

json to_json(const HolderFit& f) {
  json env = json::array();
  for (const auto& [g, d] : f.envelope) env.push_back({g, d});
  return {{"stationary", f.stationary},
          {"exponent", f.exponent},
          {"constant", number(f.constant)},
          {"residual", f.residual},
          {"r_squared", f.r_squared},
          {"gaps", f.gaps},
          {"majorant_half", number(f.majorant(0.5))},
          {"envelope", env}};
}

}  // namespace fdlab
