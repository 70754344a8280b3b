#pragma once

#include <string>
#include <vector>

#include "fdlab/drift.hpp"
#include "fdlab/fields.hpp"
#include "fdlab/trajectory.hpp"

namespace fdlab {

// int rho log max(rho, floor), with 0 log 0 = 0.
double entropy(const DensityField& f, double floor = 0.0);
// int rho |log rho|
double abs_entropy(const DensityField& f, double floor = 0.0);

// int |grad rho^m / rho|^2 rho. For m > 1/2 through the power form
// (m/(m-1/2))^2 int |grad max(rho,eps)^(m-1/2)|^2, else by the direct ratio.
double fisher_speed(const DensityField& f, double m, double eps);
// Always the face ratio |grad rho^m|^2 / max(rho_face, eps).
double fisher_speed_direct(const DensityField& f, double m, double eps);
// int |V(., t)|^2 rho at the field's time tag.
double drift_speed(const DensityField& f, const DriftSpec& V);

struct BudgetOptions {
  double epsilon = 0.0;
  double tolerance = 0.0;  // added to the bound before comparing
  double c_interp = 1.0;   // smallness constant for critical classes
};

struct EnergyBudget {
  double q = 1.0;
  double sup_value = 0.0;         // sup int (eps+rho)|log(eps+rho)| or sup int (eps+rho)^q
  double dissipation = 0.0;       // int int |grad (eps+rho)^((q+m-1)/2)|^2
  double fisher_speed = 0.0;      // int int |grad (eps+rho)^m|^2/(eps+rho)
  double drift_speed = 0.0;       // int int |V|^2 rho
  double divergence_integral = 0.0;  // int ||div V||_inf dt
  double initial_value = 0.0;     // int (eps+rho0) log(eps+rho0) or int (eps+rho0)^q
  double lhs = 0.0;               // sup_value + dissipation
  double rhs_constant = 0.0;
  double tolerance = 0.0;
  bool satisfied = false;
  // Speed bound: fisher + drift against the assembled right side.
  double speed_lhs = 0.0;
  double speed_rhs = 0.0;
  double speed_ratio = 0.0;  // speed_lhs / speed_rhs
  bool speed_ok = false;     // speed_lhs <= 2 speed_rhs
  std::string dependence;    // the data the constant was assembled from
};

class BudgetRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

EnergyBudget energy_budget(const TrajectoryRecord& traj, const DriftSpec& V, double m, double q,
                           const DriftClassReport& class_report, const BudgetOptions& opt = {});

// Sobolev-type space-time embedding for v >= 0 sampled on a series.
struct SobolevReport {
  double p = 1.0, q = 1.0;
  double lhs = 0.0;         // int int |v|^(p(d+q)/d)
  double gradient_term = 0.0;  // (sup int |v|^q)^(p/d) int int |grad v|^p
  double mass_term = 0.0;   // |Omega|^(1 - p(d+q)/d) int ||v||_1^(p(d+q)/d)
  double constant = 0.0;    // smallest c with lhs <= c gradient_term + mass_term
  bool holds_without_c = false;
};
SobolevReport verify_parabolic_sobolev(std::span<const TimeSample> series, double p, double q);

struct InterpolationReport {
  double p = 1.0, q = 1.0, m = 1.0, r1 = 1.0, r2 = 1.0;
  double gamma = 0.0;
  double relation_residual = 0.0;
  double lhs = 0.0;            // ||rho||_{L^{r1,r2}}
  double gradient_term = 0.0;  // (sup int rho^p)^gamma ||grad rho^((q+m-1)/2)||_{L^2}^(2/r2)
  double mass_term = 0.0;      // |Omega|^(1/r1 - 1) || ||rho(t)||_1 ||_{L^{r2}_t}
  double constant = 0.0;
  double homogeneity_exponent = 0.0;  // c(lambda rho) = lambda^e c(rho)
};
// Exponent relation and window are checked; violations throw invalid_argument.
InterpolationReport verify_interpolation(std::span<const TimeSample> series, double p, double q,
                                         double m, double r1, double r2);
// r1 on the admissible line for the given r2.
double interpolation_r1(int d, double p, double q, double m, double r2);

struct VrhoReport {
  double lhs = 0.0;       // int int |V| rho
  double v_norm = 0.0;    // ||V||_{L^{q1,q2}}
  double rho_norm = 0.0;  // ||rho||_{L^{r1,r2}}, conjugate exponents
  double rhs = 0.0;
  double ratio = 0.0;
  bool holds = true;
};
VrhoReport vrho_l1_bound(const TrajectoryRecord& traj, const DriftSpec& V, const MixedNormSpec& spec);

// Smooth test function phi(x, t) = cos(kx pi X) cos(ky pi Y) tau(t), X, Y the
// unit coordinates of the domain; tau(t) = (t/T)^j, or (1 - t/T)^j when
// vanish_at_end (so the terminal term drops out).
struct TestFunction {
  int kx = 0, ky = 0, j = 0;
  bool vanish_at_end = false;
  double value(const Grid& g, const Vec2& x, double t, double T) const;
  double time_derivative(const Grid& g, const Vec2& x, double t, double T) const;
  Vec2 gradient(const Grid& g, const Vec2& x, double t, double T) const;
};
std::vector<TestFunction> default_test_functions(int dim, bool vanish_at_end);

// int phi(T) rho(T) - int phi(0) rho(0)
//   - int int [rho phi_t + (eps+rho)^m Lap_h phi + rho V.grad phi]
// with the discrete Neumann Laplacian of phi (summation by parts against the
// solver's flux form) and the trapezoid rule over the snapshot times.
double weak_form_defect(const TrajectoryRecord& traj, const DriftSpec& V, double m, double eps,
                        const TestFunction& phi);
std::vector<double> weak_solution_residual(const TrajectoryRecord& traj, const DriftSpec& V,
                                           double m, const std::vector<TestFunction>& tests);

}  // namespace fdlab
