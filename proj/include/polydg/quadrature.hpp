#ifndef POLYDG_QUADRATURE_HPP
#define POLYDG_QUADRATURE_HPP

/// Gauss-Legendre rules on segments and collapsed-coordinate rules on
/// triangles. Triangle rules of order q integrate all bivariate
/// polynomials of total degree <= q exactly.

#include <polydg/geometry.hpp>
#include <polydg/types.hpp>

#include <cmath>
#include <vector>

namespace polydg
{
  /// Quadrature nodes (one point per row) with matching weights.
  struct QuadratureRule
  {
    Points  points;
    VectorX weights;

    Eigen::Index size() const { return weights.size(); }
  };

  /// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
  /// iteration on the Legendre polynomial P_n. Exact for degree 2n-1.
  inline void gauss_legendre(int n, VectorX &nodes, VectorX &weights)
  {
    nodes.resize(n);
    weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i)
      {
        // Chebyshev-based initial guess for the i-th positive root.
        Real x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        Real dp = 0.0;
        for (int it = 0; it < 100; ++it)
          {
            // Evaluate P_n and P_n' by the three-term recurrence.
            Real p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k)
              {
                const Real p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
              }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const Real dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
              break;
          }
        nodes[i]           = -x;
        nodes[n - 1 - i]   = x;
        const Real w       = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i]         = w;
        weights[n - 1 - i] = w;
      }
    if (n % 2 == 1)
      nodes[n / 2] = 0.0;
  }

  /// Gauss-Legendre rule on the segment [a, b] with n points.
  inline QuadratureRule segment_rule(const Vec2 &a, const Vec2 &b, int n)
  {
    VectorX x, w;
    gauss_legendre(n, x, w);
    QuadratureRule rule;
    rule.points.resize(n, 2);
    rule.weights.resize(n);
    const Vec2 mid  = 0.5 * (a + b);
    const Vec2 half = 0.5 * (b - a);
    const Real jac  = 0.5 * (b - a).norm();
    for (int i = 0; i < n; ++i)
      {
        rule.points.row(i) = (mid + x[i] * half).transpose();
        rule.weights[i]    = jac * w[i];
      }
    return rule;
  }

  /// Tensor rule on the reference triangle {(u,v): u,v >= 0, u+v <= 1}
  /// through the collapsed-square map u = s, v = t(1-s). A rule of order
  /// q needs ceil((q+2)/2) x ceil((q+1)/2) points to be exact for total
  /// degree q, because the map raises the s-degree by one and the
  /// Jacobian (1-s) adds another.
  inline QuadratureRule reference_triangle_rule(int order)
  {
    const int ns = (order + 3) / 2;
    const int nt = (order + 2) / 2;
    VectorX   xs, ws, xt, wt;
    gauss_legendre(ns, xs, ws);
    gauss_legendre(nt, xt, wt);
    QuadratureRule rule;
    rule.points.resize(ns * nt, 2);
    rule.weights.resize(ns * nt);
    int k = 0;
    for (int i = 0; i < ns; ++i)
      {
        const Real s  = 0.5 * (xs[i] + 1.0);
        const Real dws = 0.5 * ws[i];
        for (int j = 0; j < nt; ++j, ++k)
          {
            const Real t   = 0.5 * (xt[j] + 1.0);
            const Real dwt = 0.5 * wt[j];
            rule.points(k, 0) = s;
            rule.points(k, 1) = t * (1.0 - s);
            rule.weights[k]   = dws * dwt * (1.0 - s);
          }
      }
    return rule;
  }

  /// Maps the reference-triangle rule of the given order onto the
  /// physical triangle (a, b, c).
  inline QuadratureRule
  triangle_rule(const Vec2 &a, const Vec2 &b, const Vec2 &c, int order)
  {
    const QuadratureRule ref = reference_triangle_rule(order);
    QuadratureRule       rule;
    const Eigen::Index   n = ref.size();
    rule.points.resize(n, 2);
    rule.weights.resize(n);
    const Real jac = cross2(a, b, c); // twice the signed area
    for (Eigen::Index i = 0; i < n; ++i)
      {
        const Real u = ref.points(i, 0);
        const Real v = ref.points(i, 1);
        rule.points.row(i) = (a + u * (b - a) + v * (c - a)).transpose();
        rule.weights[i]    = jac * ref.weights[i];
      }
    return rule;
  }
} // namespace polydg

#endif // POLYDG_QUADRATURE_HPP
