#ifndef POLYDG_MESH_GENERATE_HPP
#define POLYDG_MESH_GENERATE_HPP

/// Synthetic mesh generators: Lloyd-relaxed Voronoi tessellations of a
/// rectangle and structured triangulations of a disk.

#include <polydg/mesh.hpp>

#include <cstdint>
#include <random>

namespace polydg
{
  /// Axis-aligned rectangle given by its lower and upper corners.
  struct Rect
  {
    Vec2 lo;
    Vec2 hi;

    Real width() const { return hi.x() - lo.x(); }
    Real height() const { return hi.y() - lo.y(); }
    Real area() const { return width() * height(); }
  };

  namespace detail
  {
    /// Uniform draw in [0, 1) from the top 53 bits of the engine output,
    /// identical across platforms for a given seed.
    inline Real uniform01(std::mt19937_64 &rng)
    {
      return static_cast<Real>(rng() >> 11) * 0x1.0p-53;
    }

    /// Keeps the part of a convex CCW polygon on the side of the plane
    /// where (x - mid) . dir <= 0.
    inline std::vector<Vec2> clip_half_plane(const std::vector<Vec2> &poly,
                                             const Vec2              &mid,
                                             const Vec2              &dir)
    {
      std::vector<Vec2> out;
      out.reserve(poly.size() + 1);
      const std::size_t n = poly.size();
      for (std::size_t i = 0; i < n; ++i)
        {
          const Vec2 &a  = poly[i];
          const Vec2 &b  = poly[(i + 1) % n];
          const Real  fa = (a - mid).dot(dir);
          const Real  fb = (b - mid).dot(dir);
          if (fa <= 0.0)
            {
              out.push_back(a);
              if (fb > 0.0)
                out.push_back(a + (b - a) * (fa / (fa - fb)));
            }
          else if (fb <= 0.0)
            out.push_back(a + (b - a) * (fa / (fa - fb)));
        }
      return out;
    }

    /// Voronoi cell of generator i clipped to the rectangle: the domain
    /// polygon cut by the perpendicular bisector against every generator
    /// close enough to matter. Generators beyond twice the current cell
    /// radius cannot cut and are skipped.
    inline std::vector<Vec2> voronoi_cell(const std::vector<Vec2> &gen,
                                          int                      i,
                                          const Rect              &domain,
                                          Real                     spacing)
    {
      const Vec2 &p = gen[static_cast<std::size_t>(i)];
      std::vector<Vec2> cell = {domain.lo,
                                Vec2(domain.hi.x(), domain.lo.y()),
                                domain.hi,
                                Vec2(domain.lo.x(), domain.hi.y())};

      Real radius = 5.0 * spacing;
      const Real domain_diam = (domain.hi - domain.lo).norm();
      for (;;)
        {
          std::vector<std::pair<Real, int>> cand;
          for (int j = 0; j < static_cast<int>(gen.size()); ++j)
            {
              if (j == i)
                continue;
              const Real d2 = (gen[static_cast<std::size_t>(j)] - p).squaredNorm();
              if (d2 <= radius * radius)
                cand.emplace_back(d2, j);
            }
          std::sort(cand.begin(), cand.end());

          std::vector<Vec2> clipped = cell;
          Real r_max = 0.0;
          for (const Vec2 &v : clipped)
            r_max = std::max(r_max, (v - p).norm());
          bool done = true;
          for (const auto &[d2, j] : cand)
            {
              if (std::sqrt(d2) >= 2.0 * r_max)
                break;
              const Vec2 &q = gen[static_cast<std::size_t>(j)];
              clipped = clip_half_plane(clipped, 0.5 * (p + q), q - p);
              if (clipped.size() < 3)
                return clipped;
              r_max = 0.0;
              for (const Vec2 &v : clipped)
                r_max = std::max(r_max, (v - p).norm());
            }
          // A generator just beyond the candidate radius may still cut.
          if (radius < 2.0 * r_max && radius < domain_diam)
            {
              radius *= 2.0;
              done = false;
            }
          if (done)
            return clipped;
        }
    }
  } // namespace detail

  /// Voronoi tessellation of a rectangle from n seeded random generators,
  /// relaxed by the given number of Lloyd centroid iterations. The result
  /// is deterministic for a given seed: exactly n simple convex CCW
  /// elements partitioning the rectangle.
  inline PolyMesh generate_voronoi_mesh(const Rect &domain,
                                        int         n_elements,
                                        uint64_t    seed,
                                        int         lloyd_iterations = 100)
  {
    if (n_elements < 1)
      throw std::invalid_argument("generate_voronoi_mesh: n_elements < 1");
    if (domain.width() <= 0.0 || domain.height() <= 0.0)
      throw std::invalid_argument("generate_voronoi_mesh: empty rectangle");

    std::mt19937_64   rng(seed);
    std::vector<Vec2> gen(static_cast<std::size_t>(n_elements));
    for (Vec2 &g : gen)
      g = Vec2(domain.lo.x() + domain.width() * detail::uniform01(rng),
               domain.lo.y() + domain.height() * detail::uniform01(rng));

    const Real spacing =
      std::sqrt(domain.area() / static_cast<Real>(n_elements));

    for (int it = 0; it < lloyd_iterations; ++it)
      for (int i = 0; i < n_elements; ++i)
        {
          const std::vector<Vec2> cell =
            detail::voronoi_cell(gen, i, domain, spacing);
          if (cell.size() >= 3)
            gen[static_cast<std::size_t>(i)] = polygon_centroid(cell);
        }

    std::vector<std::vector<Vec2>> cells(static_cast<std::size_t>(n_elements));
    for (int i = 0; i < n_elements; ++i)
      {
        cells[static_cast<std::size_t>(i)] =
          detail::voronoi_cell(gen, i, domain, spacing);
        if (cells[static_cast<std::size_t>(i)].size() < 3)
          throw topology_error("empty Voronoi cell for generator " +
                               std::to_string(i));
      }

    // Merge coincident cell corners into shared mesh vertices so
    // neighbouring cells reference identical coordinates. Vertices within
    // the merge tolerance are clustered through a hash grid.
    const Real merge_tol = 1e-7 * spacing;
    PolyMesh   mesh;
    std::map<std::pair<long, long>, std::vector<int>> buckets;
    auto bucket_key = [&](const Vec2 &p) -> std::pair<long, long> {
      return {static_cast<long>(std::floor(p.x() / merge_tol / 4.0)),
              static_cast<long>(std::floor(p.y() / merge_tol / 4.0))};
    };
    auto snap = [&](Vec2 p) {
      if (std::abs(p.x() - domain.lo.x()) <= merge_tol)
        p.x() = domain.lo.x();
      if (std::abs(p.x() - domain.hi.x()) <= merge_tol)
        p.x() = domain.hi.x();
      if (std::abs(p.y() - domain.lo.y()) <= merge_tol)
        p.y() = domain.lo.y();
      if (std::abs(p.y() - domain.hi.y()) <= merge_tol)
        p.y() = domain.hi.y();
      return p;
    };
    auto vertex_index = [&](const Vec2 &p_raw) {
      const Vec2 p   = snap(p_raw);
      const auto key = bucket_key(p);
      for (long dx = -1; dx <= 1; ++dx)
        for (long dy = -1; dy <= 1; ++dy)
          {
            const auto it = buckets.find({key.first + dx, key.second + dy});
            if (it == buckets.end())
              continue;
            for (int v : it->second)
              if ((mesh.vertices[static_cast<std::size_t>(v)] - p).norm() <=
                  merge_tol)
                return v;
          }
      const int v = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(p);
      buckets[key].push_back(v);
      return v;
    };

    for (const auto &cell : cells)
      {
        std::vector<int> el;
        for (const Vec2 &p : cell)
          {
            const int v = vertex_index(p);
            if (el.empty() || el.back() != v)
              el.push_back(v);
          }
        while (el.size() > 2 && el.front() == el.back())
          el.pop_back();
        if (el.size() < 3)
          throw topology_error("Voronoi cell degenerated during merge");
        mesh.elements.push_back(std::move(el));
      }

    validate_mesh(mesh);
    build_face_topology(mesh);
    return mesh;
  }

  /// Structured triangulation of a disk: `rings` concentric rings with
  /// `sectors * k` vertices on ring k, giving sectors * rings^2 triangles
  /// of near-uniform size.
  inline PolyMesh triangulated_disk(const Vec2 &center,
                                    Real        radius,
                                    int         rings,
                                    int         sectors = 6)
  {
    if (rings < 1 || sectors < 3)
      throw std::invalid_argument("triangulated_disk: need rings >= 1, sectors >= 3");

    PolyMesh mesh;
    mesh.vertices.push_back(center);
    // ring_start[k] = index of the first vertex on ring k (1-based rings).
    std::vector<int> ring_start(static_cast<std::size_t>(rings) + 1, 0);
    for (int k = 1; k <= rings; ++k)
      {
        ring_start[static_cast<std::size_t>(k)] =
          static_cast<int>(mesh.vertices.size());
        const int n_k = sectors * k;
        const Real r_k = radius * static_cast<Real>(k) / rings;
        for (int j = 0; j < n_k; ++j)
          {
            const Real th = 2.0 * M_PI * j / n_k;
            mesh.vertices.push_back(
              center + r_k * Vec2(std::cos(th), std::sin(th)));
          }
      }

    auto push_tri = [&](int a, int b, int c) {
      const Vec2 &pa = mesh.vertices[static_cast<std::size_t>(a)];
      const Vec2 &pb = mesh.vertices[static_cast<std::size_t>(b)];
      const Vec2 &pc = mesh.vertices[static_cast<std::size_t>(c)];
      if (cross2(pa, pb, pc) > 0.0)
        mesh.elements.push_back({a, b, c});
      else
        mesh.elements.push_back({a, c, b});
    };

    for (int j = 0; j < sectors; ++j)
      push_tri(0, ring_start[1] + j, ring_start[1] + (j + 1) % sectors);

    for (int k = 2; k <= rings; ++k)
      {
        const int n_out = sectors * k;
        const int n_in  = sectors * (k - 1);
        const int out0  = ring_start[static_cast<std::size_t>(k)];
        const int in0   = ring_start[static_cast<std::size_t>(k - 1)];
        // Merge walk around both rings by increasing vertex angle.
        int a = 0, b = 0;
        while (a < n_out || b < n_in)
          {
            const Real ang_out = (a < n_out)
                                   ? 2.0 * M_PI * (a + 1) / n_out
                                   : std::numeric_limits<Real>::infinity();
            const Real ang_in = (b < n_in)
                                  ? 2.0 * M_PI * (b + 1) / n_in
                                  : std::numeric_limits<Real>::infinity();
            if (ang_out <= ang_in)
              {
                push_tri(in0 + b % n_in, out0 + a % n_out,
                         out0 + (a + 1) % n_out);
                ++a;
              }
            else
              {
                push_tri(in0 + b % n_in, out0 + a % n_out,
                         in0 + (b + 1) % n_in);
                ++b;
              }
          }
      }

    validate_mesh(mesh);
    build_face_topology(mesh);
    return mesh;
  }
} // namespace polydg

#endif // POLYDG_MESH_GENERATE_HPP
