#ifndef POLYDG_MODEL_HPP
#define POLYDG_MODEL_HPP

/// Coupled two-species reaction-diffusion model with a shared anisotropic
/// diffusion tensor: one healthy species consumed by, and converting
/// into, a spreading pathological species.

#include <polydg/types.hpp>

#include <atomic>
#include <cmath>
#include <iostream>
#include <optional>
#include <utility>

namespace polydg
{
  /// Diffusion D(x) = d_ext I + d_axn a(x) a(x)^T with unit axonal
  /// direction a. Eigenvalues are d_ext (across fibers) and
  /// d_ext + d_axn (along them).
  struct DiffusionSpec
  {
    Real       d_ext = 1.0;
    Real       d_axn = 0.0;
    VecFieldFn axon; ///< unused when d_axn == 0

    bool isotropic() const { return d_axn == 0.0 || !axon; }
  };

  /// Scalar model coefficient: an arbitrary field, remembering the value
  /// when constructed from a constant so diagnostics can use it.
  struct CoefficientField
  {
    FieldFn             fn;
    std::optional<Real> constant;

    CoefficientField() = default;
    CoefficientField(Real value)
      : fn([value](const Vec2 &, Real) { return value; })
      , constant(value)
    {}
    CoefficientField(FieldFn f)
      : fn(std::move(f))
    {}

    Real operator()(const Vec2 &x, Real t) const { return fn(x, t); }
  };

  /// Full problem data for the coupled system
  ///   dc/dt = div(D grad c) - k1 c - k12 c q + f_c
  ///   dq/dt = div(D grad q) - k1_tilde q + k12 q c + f_q
  /// with production k0 entering through f_c = k0 + ... in applications.
  struct HeterodimerParams
  {
    DiffusionSpec    diffusion;
    CoefficientField k0  = 0.0; ///< healthy production rate
    CoefficientField k1  = 1.0; ///< healthy clearance rate
    CoefficientField k1_tilde = 1.0; ///< pathological clearance rate
    CoefficientField k12 = 1.0; ///< conversion rate

    FieldFn f_c; ///< forcing of c; empty means zero (physical runs set k0)
    FieldFn f_q; ///< forcing of q; empty means zero

    FieldFn c_dirichlet; ///< Dirichlet trace of c, zero when empty
    FieldFn q_dirichlet; ///< Dirichlet trace of q, zero when empty

    FieldFn c0; ///< initial value of c
    FieldFn q0; ///< initial value of q
  };

  /// Homogeneous equilibria and wave indicators of the reaction part.
  struct ModelDiagnostics
  {
    Vec2 unstable_equilibrium = Vec2::Zero(); ///< (k0/k1, 0)
    Vec2 stable_equilibrium   = Vec2::Zero();
    bool wave_condition       = false; ///< k0 k12 - k1_tilde k1 > 0
    Real alpha                = 0.0;   ///< k12 k0 / k1 - k1_tilde
    Real min_wave_speed       = 0.0;   ///< 2 sqrt(d_ext alpha), 0 if no wave
  };

  /// Diffusion tensor at a point. A non-unit axonal direction is
  /// normalized (warned once per process); a vanishing direction
  /// contributes no anisotropy.
  inline Mat2
  diffusion_tensor(const DiffusionSpec &spec, const Vec2 &x, Real t = 0.0)
  {
    Mat2 d = spec.d_ext * Mat2::Identity();
    if (spec.isotropic())
      return d;
    Vec2       a    = spec.axon(x, t);
    const Real norm = a.norm();
    if (std::abs(norm - 1.0) > 1e-12)
      {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true))
          std::cerr << "warning: axonal direction field is not unit length; "
                       "normalizing\n";
        if (norm < 1e-14)
          return d;
        a /= norm;
      }
    d += spec.d_axn * a * a.transpose();
    return d;
  }

  namespace detail
  {
    inline Real constant_of(const CoefficientField &c, const char *name)
    {
      if (!c.constant)
        throw std::invalid_argument(std::string("model diagnostics need a "
                                                "constant coefficient ") +
                                    name);
      return *c.constant;
    }
  } // namespace detail

  /// Unstable and stable homogeneous equilibria (c, q). Requires constant
  /// coefficients and k1, k1_tilde, k12 > 0.
  inline std::pair<Vec2, Vec2> equilibria(const HeterodimerParams &p)
  {
    const Real k0  = detail::constant_of(p.k0, "k0");
    const Real k1  = detail::constant_of(p.k1, "k1");
    const Real kt1 = detail::constant_of(p.k1_tilde, "k1_tilde");
    const Real k12 = detail::constant_of(p.k12, "k12");
    if (k1 <= 0.0 || kt1 <= 0.0 || k12 <= 0.0)
      throw std::invalid_argument("equilibria need k1, k1_tilde, k12 > 0");
    const Vec2 unstable(k0 / k1, 0.0);
    const Vec2 stable(kt1 / k12, k0 / kt1 - k1 / k12);
    return {unstable, stable};
  }

  /// Whether a travelling wave invading the healthy state exists:
  /// k0 k12 - k1_tilde k1 > 0.
  inline bool wave_condition(const HeterodimerParams &p)
  {
    const Real k0  = detail::constant_of(p.k0, "k0");
    const Real k1  = detail::constant_of(p.k1, "k1");
    const Real kt1 = detail::constant_of(p.k1_tilde, "k1_tilde");
    const Real k12 = detail::constant_of(p.k12, "k12");
    return k0 * k12 - kt1 * k1 > 0.0;
  }

  /// Effective logistic growth rate alpha = k12 k0 / k1 - k1_tilde of the
  /// scalar reduction of the q equation near the unstable state.
  inline Real fk_alpha(const HeterodimerParams &p)
  {
    const Real k0  = detail::constant_of(p.k0, "k0");
    const Real k1  = detail::constant_of(p.k1, "k1");
    const Real kt1 = detail::constant_of(p.k1_tilde, "k1_tilde");
    const Real k12 = detail::constant_of(p.k12, "k12");
    if (k1 <= 0.0)
      throw std::invalid_argument("fk_alpha needs k1 > 0");
    return k12 * k0 / k1 - kt1;
  }

  /// Minimal front speed 2 sqrt(d_ext alpha) of the scalar reduction.
  /// Requires the wave condition (alpha > 0).
  inline Real min_wave_speed(const HeterodimerParams &p)
  {
    const Real alpha = fk_alpha(p);
    if (alpha <= 0.0)
      throw std::domain_error("min_wave_speed: wave condition violated");
    return 2.0 * std::sqrt(p.diffusion.d_ext * alpha);
  }

  /// All homogeneous diagnostics in one record.
  inline ModelDiagnostics diagnostics(const HeterodimerParams &p)
  {
    ModelDiagnostics d;
    const auto [unstable, stable] = equilibria(p);
    d.unstable_equilibrium        = unstable;
    d.stable_equilibrium          = stable;
    d.wave_condition              = wave_condition(p);
    d.alpha                       = fk_alpha(p);
    d.min_wave_speed = d.wave_condition ? min_wave_speed(p) : 0.0;
    return d;
  }
} // namespace polydg

#endif // POLYDG_MODEL_HPP
