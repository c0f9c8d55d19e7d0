#ifndef POLYDG_MANUFACTURED_HPP
#define POLYDG_MANUFACTURED_HPP

/// Manufactured exact solutions of the coupled system with analytically
/// derived forcings, plus a finite-difference residual check validating
/// that derivation.

#include <polydg/mesh_generate.hpp>
#include <polydg/model.hpp>

#include <cmath>
#include <random>
#include <string>

namespace polydg
{
  /// Exact fields, their derivatives, and the forcings that make them
  /// solve the coupled system for given reaction coefficients.
  struct ManufacturedSolution
  {
    std::string name;
    Rect        domain{{0.0, 0.0}, {1.0, 1.0}};
    FieldFn     c, q;
    VecFieldFn  grad_c, grad_q;
    FieldFn     dc_dt, dq_dt;
    FieldFn     lap_c, lap_q;
    FieldFn     f_c, f_q; ///< derived forcings
  };

  namespace detail
  {
    /// Assembles f_c, f_q from the exact fields so that (c, q) satisfies
    ///   dc/dt = div(D grad c) - k1 c - k12 c q + f_c
    ///   dq/dt = div(D grad q) - k1_tilde q + k12 q c + f_q.
    /// Restricted to isotropic diffusion, where div(D grad u) =
    /// d_ext * lap u.
    inline void derive_forcings(ManufacturedSolution    &sol,
                                const HeterodimerParams &params)
    {
      if (!params.diffusion.isotropic())
        throw std::invalid_argument(
          "manufactured solutions require isotropic diffusion");
      const Real d_ext = params.diffusion.d_ext;
      const auto k1    = params.k1;
      const auto kt1   = params.k1_tilde;
      const auto k12   = params.k12;
      sol.f_c = [=, c = sol.c, q = sol.q, ct = sol.dc_dt,
                 lc = sol.lap_c](const Vec2 &x, Real t) {
        return ct(x, t) - d_ext * lc(x, t) + k1(x, t) * c(x, t) +
               k12(x, t) * c(x, t) * q(x, t);
      };
      sol.f_q = [=, c = sol.c, q = sol.q, qt = sol.dq_dt,
                 lq = sol.lap_q](const Vec2 &x, Real t) {
        return qt(x, t) - d_ext * lq(x, t) + kt1(x, t) * q(x, t) -
               k12(x, t) * q(x, t) * c(x, t);
      };
    }
  } // namespace detail

  /// Smooth oscillatory solution on the unit square:
  ///   c = (cos(pi x) + cos(pi y)) cos(t)
  ///   q = (cos(4 pi x) cos(4 pi y) + 2) exp(-t)
  inline ManufacturedSolution
  make_oscillatory_solution(const HeterodimerParams &params)
  {
    const Real           pi = M_PI;
    ManufacturedSolution s;
    s.name   = "test1";
    s.domain = {{0.0, 0.0}, {1.0, 1.0}};

    s.c = [pi](const Vec2 &x, Real t) {
      return (std::cos(pi * x.x()) + std::cos(pi * x.y())) * std::cos(t);
    };
    s.dc_dt = [pi](const Vec2 &x, Real t) {
      return -(std::cos(pi * x.x()) + std::cos(pi * x.y())) * std::sin(t);
    };
    s.grad_c = [pi](const Vec2 &x, Real t) {
      return Vec2(-pi * std::sin(pi * x.x()) * std::cos(t),
                  -pi * std::sin(pi * x.y()) * std::cos(t));
    };
    s.lap_c = [pi](const Vec2 &x, Real t) {
      return -pi * pi * (std::cos(pi * x.x()) + std::cos(pi * x.y())) *
             std::cos(t);
    };

    s.q = [pi](const Vec2 &x, Real t) {
      return (std::cos(4 * pi * x.x()) * std::cos(4 * pi * x.y()) + 2.0) *
             std::exp(-t);
    };
    s.dq_dt = [q = s.q](const Vec2 &x, Real t) { return -q(x, t); };
    s.grad_q = [pi](const Vec2 &x, Real t) {
      const Real e = std::exp(-t);
      return Vec2(-4 * pi * std::sin(4 * pi * x.x()) *
                    std::cos(4 * pi * x.y()) * e,
                  -4 * pi * std::cos(4 * pi * x.x()) *
                    std::sin(4 * pi * x.y()) * e);
    };
    s.lap_q = [pi](const Vec2 &x, Real t) {
      return -32.0 * pi * pi * std::cos(4 * pi * x.x()) *
             std::cos(4 * pi * x.y()) * std::exp(-t);
    };

    detail::derive_forcings(s, params);
    return s;
  }

  /// Travelling arctangent front on the strip (0,5) x (0,1), moving in x
  /// at the given speed, with q = 1 - c:
  ///   c = arctan(3 pi (x - speed t - 1)) / pi + 1/2
  inline ManufacturedSolution
  make_front_solution(const HeterodimerParams &params, Real speed = 0.1)
  {
    const Real           pi = M_PI;
    ManufacturedSolution s;
    s.name   = "test2";
    s.domain = {{0.0, 0.0}, {5.0, 1.0}};

    auto u = [pi, speed](const Vec2 &x, Real t) {
      return 3.0 * pi * (x.x() - speed * t - 1.0);
    };
    s.c = [pi, u](const Vec2 &x, Real t) {
      return std::atan(u(x, t)) / pi + 0.5;
    };
    s.dc_dt = [pi, speed, u](const Vec2 &x, Real t) {
      const Real v = u(x, t);
      return -3.0 * speed / (1.0 + v * v);
    };
    s.grad_c = [pi, u](const Vec2 &x, Real t) {
      const Real v = u(x, t);
      return Vec2(3.0 / (1.0 + v * v), 0.0);
    };
    s.lap_c = [pi, u](const Vec2 &x, Real t) {
      const Real v  = u(x, t);
      const Real d2 = (1.0 + v * v);
      return -18.0 * pi * v / (d2 * d2);
    };

    s.q      = [c = s.c](const Vec2 &x, Real t) { return 1.0 - c(x, t); };
    s.dq_dt  = [ct = s.dc_dt](const Vec2 &x, Real t) { return -ct(x, t); };
    s.grad_q = [gc = s.grad_c](const Vec2 &x, Real t) {
      return Vec2(-gc(x, t));
    };
    s.lap_q = [lc = s.lap_c](const Vec2 &x, Real t) { return -lc(x, t); };

    detail::derive_forcings(s, params);
    return s;
  }

  /// Installs forcings, Dirichlet traces and initial values of a
  /// manufactured solution into a parameter set.
  inline void apply_manufactured(HeterodimerParams          &params,
                                 const ManufacturedSolution &sol)
  {
    params.f_c         = sol.f_c;
    params.f_q         = sol.f_q;
    params.c_dirichlet = sol.c;
    params.q_dirichlet = sol.q;
    params.c0          = sol.c;
    params.q0          = sol.q;
  }

  namespace detail
  {
    /// Fourth-order central differences.
    template <class F>
    Real d1(const F &f, Real x, Real h)
    {
      return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) /
             (12 * h);
    }
  } // namespace detail

  /// Pointwise residuals of the two strong-form equations at (x, t),
  /// computed with finite-difference derivatives of the exact fields and
  /// the derived forcings; independent of the analytic derivative
  /// closures. Supports anisotropic diffusion through nested differences
  /// of the flux.
  inline std::pair<Real, Real>
  fd_strong_residual(const ManufacturedSolution &sol,
                     const HeterodimerParams    &params,
                     const Vec2                 &x,
                     Real                        t,
                     Real                        h = 1e-3)
  {
    auto div_flux = [&](const FieldFn &u) {
      auto flux = [&](const Vec2 &p) {
        const Vec2 grad(
          detail::d1([&](Real s) { return u(Vec2(s, p.y()), t); }, p.x(), h),
          detail::d1([&](Real s) { return u(Vec2(p.x(), s), t); }, p.y(), h));
        return Vec2(diffusion_tensor(params.diffusion, p, t) * grad);
      };
      const Real dfx = detail::d1(
        [&](Real s) { return flux(Vec2(s, x.y())).x(); }, x.x(), h);
      const Real dfy = detail::d1(
        [&](Real s) { return flux(Vec2(x.x(), s)).y(); }, x.y(), h);
      return dfx + dfy;
    };

    const Real c  = sol.c(x, t);
    const Real q  = sol.q(x, t);
    const Real ct = detail::d1([&](Real s) { return sol.c(x, s); }, t, h);
    const Real qt = detail::d1([&](Real s) { return sol.q(x, s); }, t, h);

    const Real res_c = ct - div_flux(sol.c) + params.k1(x, t) * c +
                       params.k12(x, t) * c * q - sol.f_c(x, t);
    const Real res_q = qt - div_flux(sol.q) + params.k1_tilde(x, t) * q -
                       params.k12(x, t) * q * c - sol.f_q(x, t);
    return {res_c, res_q};
  }

  /// Largest finite-difference strong-form residual over random interior
  /// samples in space-time.
  inline Real max_fd_residual(const ManufacturedSolution &sol,
                              const HeterodimerParams    &params,
                              int                         n_samples = 100,
                              uint64_t                    seed      = 7)
  {
    std::mt19937_64 rng(seed);
    auto            u01 = [&rng]() {
      return static_cast<Real>(rng() >> 11) * 0x1.0p-53;
    };
    const Rect &d   = sol.domain;
    Real        max = 0.0;
    for (int i = 0; i < n_samples; ++i)
      {
        // Keep FD stencils inside the domain of definition.
        const Vec2 x(d.lo.x() + d.width() * (0.05 + 0.9 * u01()),
                     d.lo.y() + d.height() * (0.05 + 0.9 * u01()));
        const Real t = 0.05 + u01();
        const auto [rc, rq] = fd_strong_residual(sol, params, x, t);
        max = std::max({max, std::abs(rc), std::abs(rq)});
      }
    return max;
  }
} // namespace polydg

#endif // POLYDG_MANUFACTURED_HPP
