#ifndef POLYDG_ANALYSIS_HPP
#define POLYDG_ANALYSIS_HPP

/// Error measurement in DG and energy norms, convergence-rate fitting,
/// wavefront tracking and CSV reporting.

#include <polydg/dgspace.hpp>
#include <polydg/forms.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace polydg
{
  /// One row of an error report.
  struct ErrorRecord
  {
    std::string test;
    int         p     = 0;
    int         n_el  = 0;
    Real        h     = 0.0;
    Real        dt    = 0.0;
    Real        t_end = 0.0;
    std::string field;
    Real        l2     = 0.0;
    Real        dg     = 0.0;
    Real        energy = 0.0;
  };

  /// Front positions over time with a least-squares speed fit.
  struct WaveTrace
  {
    std::vector<Real> times;
    std::vector<Real> positions;
    Real              speed        = 0.0;
    Real              speed_halfwidth = 0.0; ///< 95% confidence half-width
  };

  /// Convergence rates: slope between consecutive refinements and the
  /// least-squares slope over all points of log(err) vs log(h).
  struct RateFit
  {
    VectorX pairwise;
    Real    slope = 0.0;
  };

  /// DG norm of a discrete function: || sqrt(D) grad u ||^2 plus the
  /// penalty-weighted jumps over interior and Dirichlet faces, with zero
  /// Dirichlet datum.
  inline Real dg_norm(const DgSpace       &space,
                      const VectorX       &u,
                      const DiffusionSpec &diffusion,
                      const PenaltyParams &penalty)
  {
    const PolyMesh &mesh  = space.mesh();
    const int       n_loc = space.n_local();
    Real            acc   = 0.0;

    for (int e = 0; e < mesh.n_elements(); ++e)
      {
        const QuadratureRule &rule  = space.volume_quadrature(e);
        const BasisGrad       g     = space.eval_grad_basis(e, rule.points);
        const VectorX         coeff = u.segment(space.offset(e), n_loc);
        const VectorX         ux    = g.dx * coeff;
        const VectorX         uy    = g.dy * coeff;
        for (Eigen::Index q = 0; q < rule.size(); ++q)
          {
            const Mat2 d = diffusion_tensor(
              diffusion, Vec2(rule.points(q, 0), rule.points(q, 1)));
            const Vec2 grad(ux[q], uy[q]);
            acc += rule.weights[q] * grad.dot(d * grad);
          }
      }

    for (int f = 0; f < mesh.n_faces(); ++f)
      {
        const Face &face = mesh.faces[static_cast<std::size_t>(f)];
        if (face.is_boundary() && face.boundary_tag != 'D')
          continue;
        const QuadratureRule &rule = space.face_quadrature(f);
        VectorX               jump =
          space.basis_at_face(f, 0) * u.segment(space.offset(face.owner), n_loc);
        if (!face.is_boundary())
          jump -= space.basis_at_face(f, 1) *
                  u.segment(space.offset(face.neighbor), n_loc);
        acc += penalty.face_penalty(f) *
               (rule.weights.array() * jump.array().square()).sum();
      }
    return std::sqrt(acc);
  }

  /// L2 and DG errors of a discrete field against an exact solution with
  /// analytic gradient at time t. The DG error uses the jumps of u_h:
  /// the exact solution is continuous, and Dirichlet faces compare the
  /// trace of u_h against the exact values.
  struct FieldError
  {
    Real l2 = 0.0;
    Real dg = 0.0;
  };

  inline FieldError error_norms(const DgSpace       &space,
                                const VectorX       &u,
                                const FieldFn       &exact,
                                const VecFieldFn    &exact_grad,
                                Real                 t,
                                const DiffusionSpec &diffusion,
                                const PenaltyParams &penalty)
  {
    const PolyMesh &mesh  = space.mesh();
    const int       n_loc = space.n_local();
    Real            l2_sq = 0.0;
    Real            dg_sq = 0.0;

    for (int e = 0; e < mesh.n_elements(); ++e)
      {
        const QuadratureRule &rule  = space.volume_quadrature(e);
        const VectorX         coeff = u.segment(space.offset(e), n_loc);
        const VectorX         uh    = space.basis_at_volume(e) * coeff;
        const BasisGrad       g     = space.eval_grad_basis(e, rule.points);
        const VectorX         ux    = g.dx * coeff;
        const VectorX         uy    = g.dy * coeff;
        for (Eigen::Index q = 0; q < rule.size(); ++q)
          {
            const Vec2 x(rule.points(q, 0), rule.points(q, 1));
            const Real diff = exact(x, t) - uh[q];
            l2_sq += rule.weights[q] * diff * diff;
            const Vec2 grad_err = exact_grad(x, t) - Vec2(ux[q], uy[q]);
            const Mat2 d        = diffusion_tensor(diffusion, x);
            dg_sq += rule.weights[q] * grad_err.dot(d * grad_err);
          }
      }

    for (int f = 0; f < mesh.n_faces(); ++f)
      {
        const Face &face = mesh.faces[static_cast<std::size_t>(f)];
        if (face.is_boundary() && face.boundary_tag != 'D')
          continue;
        const QuadratureRule &rule = space.face_quadrature(f);
        VectorX               jump =
          space.basis_at_face(f, 0) * u.segment(space.offset(face.owner), n_loc);
        if (!face.is_boundary())
          jump -= space.basis_at_face(f, 1) *
                  u.segment(space.offset(face.neighbor), n_loc);
        else
          for (Eigen::Index q = 0; q < rule.size(); ++q)
            jump[q] -= exact(Vec2(rule.points(q, 0), rule.points(q, 1)), t);
        dg_sq += penalty.face_penalty(f) *
                 (rule.weights.array() * jump.array().square()).sum();
      }
    return {std::sqrt(l2_sq), std::sqrt(dg_sq)};
  }

  /// Accumulates the time-dependent energy norm
  ///   E(T)^2 = ||e(T)||^2 + int_0^T (||e||_DG^2 + ||e||^2) ds
  /// with trapezoidal integration over the visited time levels.
  class EnergyAccumulator
  {
  public:
    void add(Real t, Real l2, Real dg)
    {
      const Real f = dg * dg + l2 * l2;
      if (has_prev)
        integral += 0.5 * (f + f_prev) * (t - t_prev);
      t_prev   = t;
      f_prev   = f;
      l2_last  = l2;
      has_prev = true;
    }

    Real energy() const
    {
      return std::sqrt(l2_last * l2_last + integral);
    }

  private:
    Real t_prev   = 0.0;
    Real f_prev   = 0.0;
    Real l2_last  = 0.0;
    Real integral = 0.0;
    bool has_prev = false;
  };

  /// Least-squares and pairwise slopes of log(error) against log(h).
  inline RateFit fit_rates(const VectorX &h, const VectorX &err)
  {
    if (h.size() != err.size() || h.size() < 2)
      throw std::invalid_argument("fit_rates: need matching arrays, n >= 2");
    const Eigen::Index n = h.size();
    RateFit            fit;
    fit.pairwise.resize(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i)
      fit.pairwise[i] =
        std::log(err[i] / err[i + 1]) / std::log(h[i] / h[i + 1]);
    const VectorX x    = h.array().log();
    const VectorX y    = err.array().log();
    const Real    xm   = x.mean();
    const Real    ym   = y.mean();
    const Real    sxx  = (x.array() - xm).square().sum();
    fit.slope = (x.array() - xm).cwiseProduct(y.array() - ym).sum() / sxx;
    return fit;
  }

  /// Point-to-element lookup through a coarse bounding-box grid.
  class ElementLocator
  {
  public:
    explicit ElementLocator(const PolyMesh &mesh_)
      : mesh(&mesh_)
    {
      lo = mesh->vertices.front();
      Vec2 hi = lo;
      for (const Vec2 &p : mesh->vertices)
        {
          lo = lo.cwiseMin(p);
          hi = hi.cwiseMax(p);
        }
      nx = std::max(1, static_cast<int>(std::sqrt(mesh->n_elements())));
      ny = nx;
      cell = Vec2((hi.x() - lo.x()) / nx, (hi.y() - lo.y()) / ny);
      cell.x() = std::max(cell.x(), 1e-300);
      cell.y() = std::max(cell.y(), 1e-300);
      bins.resize(static_cast<std::size_t>(nx * ny));
      for (int e = 0; e < mesh->n_elements(); ++e)
        {
          const auto box = polygon_bbox(mesh->element_polygon(e));
          const int  i0  = clamp_x(box[0].x()), i1 = clamp_x(box[1].x());
          const int  j0  = clamp_y(box[0].y()), j1 = clamp_y(box[1].y());
          for (int i = i0; i <= i1; ++i)
            for (int j = j0; j <= j1; ++j)
              bins[static_cast<std::size_t>(j * nx + i)].push_back(e);
        }
      tol = 1e-10 * (hi - lo).norm();
    }

    /// Element containing x, or -1. Points within a small tolerance of an
    /// element boundary resolve to the first matching element.
    int locate(const Vec2 &x) const
    {
      const auto &bin = bins[static_cast<std::size_t>(
        clamp_y(x.y()) * nx + clamp_x(x.x()))];
      for (int e : bin)
        if (point_in_polygon(mesh->element_polygon(e), x, tol))
          return e;
      return -1;
    }

  private:
    int clamp_x(Real x) const
    {
      return std::clamp(static_cast<int>((x - lo.x()) / cell.x()), 0, nx - 1);
    }
    int clamp_y(Real y) const
    {
      return std::clamp(static_cast<int>((y - lo.y()) / cell.y()), 0, ny - 1);
    }

    const PolyMesh *mesh;
    Vec2            lo   = Vec2::Zero();
    Vec2            cell = Vec2::Zero();
    int             nx = 1, ny = 1;
    Real            tol = 0.0;
    std::vector<std::vector<int>> bins;
  };

  /// Values of a discrete field along the horizontal line y = y0.
  inline VectorX sample_along_line(const DgSpace        &space,
                                   const ElementLocator &locator,
                                   const VectorX        &u,
                                   Real                  y0,
                                   const VectorX        &xs)
  {
    VectorX vals(xs.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i)
      {
        const Vec2 p(xs[i], y0);
        const int  e = locator.locate(p);
        if (e < 0)
          {
            vals[i] = std::numeric_limits<Real>::quiet_NaN();
            continue;
          }
        Points pt(1, 2);
        pt << p.x(), p.y();
        vals[i] = space.evaluate_at(e, u, pt)[0];
      }
    return vals;
  }

  /// Tracks the position where a field crosses the given level along the
  /// probe line y = y0, one position per snapshot, and fits the front
  /// speed by least squares with a 95% confidence half-width.
  ///
  /// The crossing is bracketed on a uniform sampling of the probe and
  /// refined by bisection on the discrete field.
  inline WaveTrace
  estimate_wave_speed(const DgSpace                               &space,
                      const std::vector<std::pair<Real, VectorX>> &snapshots,
                      Real                                         level,
                      Real                                         y0,
                      Real                                         x_min,
                      Real                                         x_max,
                      int                                          n_samples = 1024)
  {
    if (snapshots.size() < 2)
      throw std::invalid_argument("estimate_wave_speed: need >= 2 snapshots");
    const ElementLocator locator(space.mesh());
    VectorX              xs(n_samples);
    for (int i = 0; i < n_samples; ++i)
      xs[i] = x_min + (x_max - x_min) * (i + 0.5) / n_samples;

    WaveTrace trace;
    for (const auto &[t, u] : snapshots)
      {
        const VectorX vals = sample_along_line(space, locator, u, y0, xs);
        // First sign change of (value - level), scanning left to right.
        std::optional<std::pair<Real, Real>> bracket;
        for (int i = 0; i + 1 < n_samples; ++i)
          {
            const Real a = vals[i] - level;
            const Real b = vals[i + 1] - level;
            if (std::isnan(a) || std::isnan(b))
              continue;
            if (a == 0.0)
              {
                bracket = {xs[i], xs[i]};
                break;
              }
            if (a * b < 0.0)
              {
                bracket = {xs[i], xs[i + 1]};
                break;
              }
          }
        if (!bracket)
          continue;
        Real a = bracket->first, b = bracket->second;
        auto eval_one = [&](Real x) {
          const Vec2 p(x, y0);
          const int  e = locator.locate(p);
          Points     pt(1, 2);
          pt << x, y0;
          return e < 0 ? std::numeric_limits<Real>::quiet_NaN()
                       : space.evaluate_at(e, u, pt)[0] - level;
        };
        Real fa = eval_one(a);
        for (int it = 0; it < 60 && b - a > 1e-12 * (x_max - x_min); ++it)
          {
            const Real m  = 0.5 * (a + b);
            const Real fm = eval_one(m);
            if (std::isnan(fm))
              break;
            if ((fa <= 0.0) == (fm <= 0.0))
              {
                a  = m;
                fa = fm;
              }
            else
              b = m;
          }
        trace.times.push_back(t);
        trace.positions.push_back(0.5 * (a + b));
      }

    const int n = static_cast<int>(trace.times.size());
    if (n < 2)
      throw std::runtime_error(
        "estimate_wave_speed: level crossing found in fewer than 2 snapshots");
    Real tm = 0.0, xm = 0.0;
    for (int i = 0; i < n; ++i)
      {
        tm += trace.times[static_cast<std::size_t>(i)];
        xm += trace.positions[static_cast<std::size_t>(i)];
      }
    tm /= n;
    xm /= n;
    Real stt = 0.0, stx = 0.0;
    for (int i = 0; i < n; ++i)
      {
        const Real dt = trace.times[static_cast<std::size_t>(i)] - tm;
        stt += dt * dt;
        stx += dt * (trace.positions[static_cast<std::size_t>(i)] - xm);
      }
    trace.speed = stx / stt;
    Real ss_res = 0.0;
    for (int i = 0; i < n; ++i)
      {
        const Real pred = xm + trace.speed *
                                 (trace.times[static_cast<std::size_t>(i)] - tm);
        const Real r = trace.positions[static_cast<std::size_t>(i)] - pred;
        ss_res += r * r;
      }
    if (n > 2)
      trace.speed_halfwidth =
        1.96 * std::sqrt(ss_res / (n - 2) / stt);
    return trace;
  }

  /// Writes error records as CSV with a fixed header and formatting, so
  /// equal inputs produce byte-identical files.
  inline void write_error_csv(const std::string              &path,
                              const std::vector<ErrorRecord> &records)
  {
    std::ofstream out(path);
    if (!out)
      throw std::runtime_error("cannot write CSV file '" + path + "'");
    out << "test,p,n_el,h,dt,T,field,l2,dg,energy\n";
    char buf[256];
    for (const ErrorRecord &r : records)
      {
        std::snprintf(buf, sizeof(buf),
                      "%s,%d,%d,%.15g,%.15g,%.15g,%s,%.12e,%.12e,%.12e\n",
                      r.test.c_str(), r.p, r.n_el, r.h, r.dt, r.t_end,
                      r.field.c_str(), r.l2, r.dg, r.energy);
        out << buf;
      }
  }
} // namespace polydg

#endif // POLYDG_ANALYSIS_HPP
