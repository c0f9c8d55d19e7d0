#ifndef POLYDG_GEOMETRY_HPP
#define POLYDG_GEOMETRY_HPP

/// Free functions on simple planar polygons, given as CCW vertex lists.

#include <polydg/types.hpp>

#include <array>
#include <cmath>
#include <vector>

namespace polydg
{
  /// Twice the signed area of the triangle (a, b, c); positive when CCW.
  inline Real cross2(const Vec2 &a, const Vec2 &b, const Vec2 &c)
  {
    return (b.x() - a.x()) * (c.y() - a.y()) -
           (b.y() - a.y()) * (c.x() - a.x());
  }

  /// Signed area of a polygon by the shoelace formula; positive when CCW.
  inline Real polygon_signed_area(const std::vector<Vec2> &v)
  {
    Real twice = 0.0;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i)
      {
        const Vec2 &a = v[i];
        const Vec2 &b = v[(i + 1) % n];
        twice += a.x() * b.y() - b.x() * a.y();
      }
    return 0.5 * twice;
  }

  /// Area centroid of a simple polygon.
  inline Vec2 polygon_centroid(const std::vector<Vec2> &v)
  {
    Real        twice = 0.0;
    Vec2        c     = Vec2::Zero();
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i)
      {
        const Vec2 &a = v[i];
        const Vec2 &b = v[(i + 1) % n];
        const Real  w = a.x() * b.y() - b.x() * a.y();
        twice += w;
        c += w * (a + b);
      }
    if (std::abs(twice) < 1e-300)
      {
        // Degenerate polygon: fall back to the vertex average.
        c = Vec2::Zero();
        for (const Vec2 &p : v)
          c += p;
        return c / static_cast<Real>(n);
      }
    return c / (3.0 * twice);
  }

  /// Diameter of a vertex set: the largest pairwise distance.
  inline Real polygon_diameter(const std::vector<Vec2> &v)
  {
    Real d2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j)
        d2 = std::max(d2, (v[i] - v[j]).squaredNorm());
    return std::sqrt(d2);
  }

  /// Axis-aligned bounding box as (lower corner, upper corner).
  inline std::array<Vec2, 2> polygon_bbox(const std::vector<Vec2> &v)
  {
    Vec2 lo = v.front();
    Vec2 hi = v.front();
    for (const Vec2 &p : v)
      {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    return {lo, hi};
  }

  /// Whether p lies inside or on the boundary of a simple CCW polygon,
  /// with an absolute slack tol on the edge half-plane tests of convex
  /// traversal; for non-convex polygons uses the crossing rule.
  inline bool point_in_polygon(const std::vector<Vec2> &v,
                               const Vec2              &p,
                               Real                     tol = 0.0)
  {
    const std::size_t n = v.size();
    // Boundary proximity test first so points within tol of an edge count
    // as inside regardless of the crossing parity.
    if (tol > 0.0)
      for (std::size_t i = 0; i < n; ++i)
        {
          const Vec2 &a = v[i];
          const Vec2 &b = v[(i + 1) % n];
          const Vec2  d = b - a;
          const Real  len2 = d.squaredNorm();
          if (len2 == 0.0)
            continue;
          const Real t = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
          if ((a + t * d - p).squaredNorm() <= tol * tol)
            return true;
        }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
      {
        const Vec2 &a = v[i];
        const Vec2 &b = v[j];
        if ((a.y() > p.y()) != (b.y() > p.y()))
          {
            const Real x_cross =
              a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < x_cross)
              inside = !inside;
          }
      }
    return inside;
  }

  /// Whether the polygon is convex (strictly, up to a relative slack).
  inline bool polygon_is_convex(const std::vector<Vec2> &v)
  {
    const std::size_t n = v.size();
    if (n < 4)
      return true;
    const Real scale = polygon_diameter(v);
    const Real tol   = -1e-12 * scale * scale;
    for (std::size_t i = 0; i < n; ++i)
      if (cross2(v[i], v[(i + 1) % n], v[(i + 2) % n]) < tol)
        return false;
    return true;
  }

  /// Whether a closed polygon is simple: no two non-adjacent edges
  /// intersect and no vertex repeats.
  inline bool polygon_is_simple(const std::vector<Vec2> &v)
  {
    const std::size_t n = v.size();
    if (n < 3)
      return false;
    const Real scale = polygon_diameter(v);
    const Real tol   = 1e-12 * scale;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if ((v[i] - v[j]).norm() <= tol)
          return false;
    auto segments_cross = [&](const Vec2 &a, const Vec2 &b, const Vec2 &c,
                              const Vec2 &d) {
      const Real d1 = cross2(c, d, a);
      const Real d2 = cross2(c, d, b);
      const Real d3 = cross2(a, b, c);
      const Real d4 = cross2(a, b, d);
      if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
          ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
      return false;
    };
    for (std::size_t i = 0; i < n; ++i)
      {
        const Vec2 &a = v[i];
        const Vec2 &b = v[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j)
          {
            // Skip edge pairs sharing a vertex.
            if (j == i || (j + 1) % n == i || (i + 1) % n == j)
              continue;
            if (segments_cross(a, b, v[j], v[(j + 1) % n]))
              return false;
          }
      }
    return true;
  }

  /// Triangulates a simple CCW polygon by ear clipping and returns vertex
  /// index triples. Convex polygons reduce to a fan. Collinear vertices
  /// are kept; zero-area ears are emitted only when unavoidable.
  inline std::vector<std::array<int, 3>>
  ear_clip(const std::vector<Vec2> &poly)
  {
    const int n = static_cast<int>(poly.size());
    std::vector<std::array<int, 3>> tris;
    if (n < 3)
      return tris;
    tris.reserve(static_cast<std::size_t>(n - 2));

    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      idx[static_cast<std::size_t>(i)] = i;

    const Real diam = polygon_diameter(poly);
    const Real area_tol = 1e-14 * diam * diam;

    auto is_ear = [&](int m, int prev, int cur, int next) {
      const Vec2 &a = poly[static_cast<std::size_t>(idx[static_cast<std::size_t>(prev)])];
      const Vec2 &b = poly[static_cast<std::size_t>(idx[static_cast<std::size_t>(cur)])];
      const Vec2 &c = poly[static_cast<std::size_t>(idx[static_cast<std::size_t>(next)])];
      const Real  a2 = cross2(a, b, c);
      if (a2 <= area_tol)
        return false;
      // No other remaining vertex may lie inside the candidate ear.
      for (int k = 0; k < m; ++k)
        {
          if (k == prev || k == cur || k == next)
            continue;
          const Vec2 &p = poly[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
          if (cross2(a, b, p) >= -area_tol && cross2(b, c, p) >= -area_tol &&
              cross2(c, a, p) >= -area_tol)
            return false;
        }
      return true;
    };

    int m = n;
    int guard = 0;
    while (m > 3)
      {
        bool clipped = false;
        for (int cur = 0; cur < m; ++cur)
          {
            const int prev = (cur + m - 1) % m;
            const int next = (cur + 1) % m;
            if (is_ear(m, prev, cur, next))
              {
                tris.push_back({idx[static_cast<std::size_t>(prev)],
                                idx[static_cast<std::size_t>(cur)],
                                idx[static_cast<std::size_t>(next)]});
                idx.erase(idx.begin() + cur);
                --m;
                clipped = true;
                break;
              }
          }
        if (!clipped)
          {
            // Degenerate remainder (collinear chain): clip the vertex with
            // the largest absolute ear area to make progress.
            int  best   = 0;
            Real best_a = -1.0;
            for (int cur = 0; cur < m; ++cur)
              {
                const int  prev = (cur + m - 1) % m;
                const int  next = (cur + 1) % m;
                const Real a2   = std::abs(
                  cross2(poly[static_cast<std::size_t>(idx[static_cast<std::size_t>(prev)])],
                         poly[static_cast<std::size_t>(idx[static_cast<std::size_t>(cur)])],
                         poly[static_cast<std::size_t>(idx[static_cast<std::size_t>(next)])]));
                if (a2 > best_a)
                  {
                    best_a = a2;
                    best   = cur;
                  }
              }
            const int prev = (best + m - 1) % m;
            const int next = (best + 1) % m;
            tris.push_back({idx[static_cast<std::size_t>(prev)],
                            idx[static_cast<std::size_t>(best)],
                            idx[static_cast<std::size_t>(next)]});
            idx.erase(idx.begin() + best);
            --m;
          }
        if (++guard > 4 * n)
          throw topology_error("ear clipping failed to terminate");
      }
    tris.push_back({idx[0], idx[1], idx[2]});
    return tris;
  }
} // namespace polydg

#endif // POLYDG_GEOMETRY_HPP
