#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "fdlab/fields.hpp"

namespace fdlab {

using Mat2 = std::array<std::array<double, 2>, 2>;  // J[i][k] = dV_i/dx_k

// Velocity sampled on a MAC grid (x-faces for u, y-faces for v) and
// interpolated bilinearly on each staggered lattice. Used for the
// computed fluid velocity of the convection module.
struct StaggeredVelocity {
  Grid grid;
  std::vector<double> u;  // (nx+1)*ny, face i left of cell i
  std::vector<double> v;  // nx*(ny+1), face j below cell j
  Vec2 eval(const Vec2& x) const;
  double divergence(const Vec2& x) const;
};

// Closed-form drift V(x, t). One struct covers every kind; each kind reads
// only its own parameters.
class DriftSpec {
 public:
  enum class Kind {
    zero,
    constant,
    shear,
    rigid_rotation,
    potential_quadratic,
    potential_cosine,
    stream_function,
    time_modulated,
    staggered
  };

  static DriftSpec zero(int dim);
  static DriftSpec constant(int dim, Vec2 c);
  // V = (s (y - y0) w(x), 0), w = 1 or sin(pi (x - a)/L) when windowed.
  static DriftSpec shear(double s, double y0, bool windowed = false, Interval xwin = {0, 1});
  // V = omega S(|x - c|) (-(y - cy), x - cx); S = 1 inside r0, smooth cutoff to 0
  // at r1 (r1 = kInf gives a rigid rotation of the whole plane).
  static DriftSpec rigid_rotation(double omega, Vec2 center, double r0 = kInf, double r1 = kInf);
  // V = alpha (x - c), the gradient of alpha |x - c|^2 / 2.
  static DriftSpec potential_quadratic(int dim, double alpha, Vec2 center);
  // V = grad of A * sum_i cos(k pi (x_i - a_i)/L_i) on the given box.
  static DriftSpec potential_cosine(int dim, double amplitude, int k, Interval x,
                                    Interval y = {0, 1});
  // V = (d psi/dy, -d psi/dx), psi = A sin(kx pi (x-a)/Lx) sin(ky pi (y-b)/Ly).
  static DriftSpec stream_function(double amplitude, int kx, int ky, Interval x, Interval y);
  // V(x, t) = a(t) inner(x, t), a(t) = offset + amp sin(2 pi freq t).
  static DriftSpec time_modulated(const DriftSpec& inner, double offset, double amp,
                                  double freq);
  static DriftSpec staggered(std::shared_ptr<const StaggeredVelocity> field);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  std::string kind_name() const;
  bool declared_divergence_free() const { return div_free_; }
  bool declared_zero_normal_flux() const { return zero_flux_; }
  DriftSpec& declare(bool divergence_free, bool zero_normal_flux) {
    div_free_ = divergence_free;
    zero_flux_ = zero_normal_flux;
    return *this;
  }
  bool has_analytic_jacobian() const { return kind_ != Kind::staggered; }

  Vec2 evaluate(const Vec2& x, double t) const;
  double divergence(const Vec2& x, double t) const;
  Mat2 jacobian(const Vec2& x, double t) const;
  // Jacobian by central differences with the given step.
  Mat2 jacobian_fd(const Vec2& x, double t, double step) const;

  // Parameters (public for serialisation and the bindings).
  Vec2 vec{0.0, 0.0};      // constant value or centre
  double a = 0.0;          // omega, alpha, shear rate or amplitude
  double b = 0.0;          // shear offset y0
  double r0 = kInf, r1 = kInf;
  int k1 = 1, k2 = 1;
  bool windowed = false;
  Interval box_x{0, 1}, box_y{0, 1};
  double mod_offset = 1.0, mod_amp = 0.0, mod_freq = 0.0;
  std::shared_ptr<const DriftSpec> inner;
  std::shared_ptr<const StaggeredVelocity> field;

 private:
  Kind kind_ = Kind::zero;
  int dim_ = 1;
  bool div_free_ = true;
  bool zero_flux_ = true;
};

// Samples the declared flags on a probe grid: |div V| and |V.n| on the
// boundary, at the given times.
struct DeclarationCheck {
  double max_divergence = 0.0;
  double max_gradient = 0.0;
  double max_normal_flux = 0.0;
  double max_speed = 0.0;
  bool divergence_free_ok = true;
  bool zero_flux_ok = true;
};
DeclarationCheck check_declarations(const DriftSpec& V, const Grid& domain, double T,
                                    int probe_cells = 32, int time_samples = 5);

enum class DriftClass { S, S_tilde, D, D_plus, D_s };
std::string class_name(DriftClass c);
DriftClass class_from_name(const std::string& s);

// Where and over which horizon the norms of V are sampled.
struct ClassifyContext {
  Grid domain;
  double T = 1.0;
  int probe_cells = 32;
  int time_samples = 33;
};

struct DriftClassReport {
  DriftClass class_tag = DriftClass::S;
  int dim = 2;
  double m = 0.0, q = 1.0;
  MixedNormSpec exponents;
  double lhs = 0.0;
  double rhs = 0.0;
  double norm = 0.0;
  bool member = false;
  bool critical = false;
  bool m_in_range = true;
  std::string note;
};

// Scaling expression and bound for a class, without sampling V.
struct ClassLine {
  double lhs, rhs, m_lo, m_hi;
  bool m_lo_inclusive, allows_pme;
};
ClassLine class_line(DriftClass c, int d, double m, double q, const MixedNormSpec& e);

DriftClassReport classify(const DriftSpec& V, double m, double q, const MixedNormSpec& spec,
                          DriftClass class_tag, const ClassifyContext& ctx);

// Mixed norm of |V| (or of the Frobenius norm of its Jacobian) sampled at cell
// centres of ctx.domain refined to probe_cells and at uniform times on [0,T].
double drift_mixed_norm(const DriftSpec& V, const MixedNormSpec& spec, const ClassifyContext& ctx,
                        bool gradient);

// Exponent a of the narrow-distance Hoelder bound for a D_plus drift.
double delta_exponent(int d, double m, double q, const MixedNormSpec& e);

}  // namespace fdlab
