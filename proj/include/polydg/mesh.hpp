#ifndef POLYDG_MESH_HPP
#define POLYDG_MESH_HPP

/// Polytopal surface meshes: elements are simple CCW polygons with an
/// arbitrary number of vertices. Face topology, sub-triangulation for
/// quadrature, shape-regularity reporting and a plain-text file format.

#include <polydg/geometry.hpp>
#include <polydg/types.hpp>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace polydg
{
  /// A straight mesh face: either shared by exactly two elements or lying
  /// on the domain boundary. Edges with hanging nodes are split so that
  /// faces always match 1:1 across neighbours.
  struct Face
  {
    int  v0       = -1; ///< endpoint vertex index
    int  v1       = -1; ///< endpoint vertex index
    int  owner    = -1; ///< element from whose CCW traversal the face came
    int  neighbor = -1; ///< second element, -1 on the boundary
    Vec2 normal   = Vec2::Zero(); ///< unit normal pointing out of owner
    Real length   = 0.0;
    char boundary_tag = 0; ///< 'D' or 'N' on boundary faces, 0 inside

    bool is_boundary() const { return neighbor < 0; }
  };

  /// Mesh of simple CCW polygons. Faces are derived data; call
  /// build_face_topology after editing vertices or elements.
  struct PolyMesh
  {
    std::vector<Vec2>             vertices;
    std::vector<std::vector<int>> elements;
    std::vector<Face>             faces;

    /// Boundary condition tags keyed by (min, max) endpoint indices.
    /// Untagged boundary edges default to 'N'.
    std::map<std::pair<int, int>, char> boundary_tags;

    int n_elements() const { return static_cast<int>(elements.size()); }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_faces() const { return static_cast<int>(faces.size()); }

    std::vector<Vec2> element_polygon(int e) const
    {
      std::vector<Vec2> poly;
      poly.reserve(elements[static_cast<std::size_t>(e)].size());
      for (int v : elements[static_cast<std::size_t>(e)])
        poly.push_back(vertices[static_cast<std::size_t>(v)]);
      return poly;
    }

    Real element_area(int e) const
    {
      return polygon_signed_area(element_polygon(e));
    }
  };

  /// Triangles covering each element exactly, used to build quadrature
  /// rules. Triangle vertices are stored by coordinate because convex
  /// elements may be fanned from a point that is not a mesh vertex.
  struct SubTriangulation
  {
    std::vector<std::vector<std::array<Vec2, 3>>> element_triangles;

    int n_triangles(int e) const
    {
      return static_cast<int>(element_triangles[static_cast<std::size_t>(e)].size());
    }
  };

  /// Shape-regularity measures of a mesh.
  struct RegularityReport
  {
    VectorX element_ratios; ///< |K| / h_K^2 per element
    VectorX face_ratios;    ///< |F| / h_K per face, min over adjacent elements
    Real    min_element_ratio = 0.0;
    Real    min_face_ratio    = 0.0;
    std::vector<int> elements_below_floor;
    Real             floor = 0.0;
  };

  /// Diameter of one element: largest vertex pairwise distance.
  inline Real element_diameter(const PolyMesh &mesh, int e)
  {
    return polygon_diameter(mesh.element_polygon(e));
  }

  /// Mesh size h: the largest element diameter.
  inline Real mesh_size(const PolyMesh &mesh)
  {
    Real h = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e)
      h = std::max(h, element_diameter(mesh, e));
    return h;
  }

  /// Total mesh area as the sum of element areas.
  inline Real total_area(const PolyMesh &mesh)
  {
    Real a = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e)
      a += mesh.element_area(e);
    return a;
  }

  namespace detail
  {
    /// Uniform hash grid over vertex positions for on-segment queries.
    class VertexGrid
    {
    public:
      explicit VertexGrid(const std::vector<Vec2> &vertices, Real cell)
        : verts(vertices)
        , cell_size(cell)
      {
        for (int i = 0; i < static_cast<int>(verts.size()); ++i)
          cells[key(verts[static_cast<std::size_t>(i)])].push_back(i);
      }

      /// Vertex indices whose position falls in the padded bbox of (a, b).
      std::vector<int> query_bbox(const Vec2 &a, const Vec2 &b, Real pad) const
      {
        const Vec2 lo = a.cwiseMin(b) - Vec2(pad, pad);
        const Vec2 hi = a.cwiseMax(b) + Vec2(pad, pad);
        std::vector<int> out;
        const long ix0 = index(lo.x()), ix1 = index(hi.x());
        const long iy0 = index(lo.y()), iy1 = index(hi.y());
        for (long ix = ix0; ix <= ix1; ++ix)
          for (long iy = iy0; iy <= iy1; ++iy)
            {
              const auto it = cells.find({ix, iy});
              if (it == cells.end())
                continue;
              for (int v : it->second)
                {
                  const Vec2 &p = verts[static_cast<std::size_t>(v)];
                  if (p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() &&
                      p.y() <= hi.y())
                    out.push_back(v);
                }
            }
        return out;
      }

    private:
      long index(Real x) const
      {
        return static_cast<long>(std::floor(x / cell_size));
      }
      std::pair<long, long> key(const Vec2 &p) const
      {
        return {index(p.x()), index(p.y())};
      }

      const std::vector<Vec2> &verts;
      Real                     cell_size;
      std::map<std::pair<long, long>, std::vector<int>> cells;
    };
  } // namespace detail

  /// Rebuilds mesh.faces from the element polygons. Element edges
  /// containing hanging vertices are split at them so faces match 1:1
  /// across neighbours. Throws topology_error if any face would be shared
  /// by more than two elements or a boundary tag names an interior face.
  inline void build_face_topology(PolyMesh &mesh)
  {
    mesh.faces.clear();

    Real diam = 0.0;
    {
      Vec2 lo = mesh.vertices.empty() ? Vec2::Zero() : mesh.vertices.front();
      Vec2 hi = lo;
      for (const Vec2 &p : mesh.vertices)
        {
          lo = lo.cwiseMin(p);
          hi = hi.cwiseMax(p);
        }
      diam = (hi - lo).norm();
    }
    const Real on_seg_tol = 1e-9 * diam;

    Real typical_h = diam;
    if (mesh.n_elements() > 0)
      typical_h =
        std::max(diam / std::sqrt(static_cast<Real>(mesh.n_elements())),
                 1e-12 * diam);
    const detail::VertexGrid grid(mesh.vertices, typical_h);

    // Split every element edge at hanging vertices, then key sub-edges by
    // their endpoint pair.
    std::map<std::pair<int, int>, int> face_of_pair;
    for (int e = 0; e < mesh.n_elements(); ++e)
      {
        const std::vector<int> &el = mesh.elements[static_cast<std::size_t>(e)];
        const int               nv = static_cast<int>(el.size());
        for (int i = 0; i < nv; ++i)
          {
            const int   a  = el[static_cast<std::size_t>(i)];
            const int   b  = el[static_cast<std::size_t>((i + 1) % nv)];
            const Vec2 &pa = mesh.vertices[static_cast<std::size_t>(a)];
            const Vec2 &pb = mesh.vertices[static_cast<std::size_t>(b)];
            const Vec2  dir = pb - pa;
            const Real  len = dir.norm();
            if (len <= on_seg_tol)
              throw topology_error("degenerate zero-length edge in element " +
                                   std::to_string(e));

            // Hanging vertices strictly inside the edge, ordered along it.
            std::vector<std::pair<Real, int>> on_edge;
            for (int v : grid.query_bbox(pa, pb, on_seg_tol))
              {
                if (v == a || v == b)
                  continue;
                const Vec2 &p = mesh.vertices[static_cast<std::size_t>(v)];
                const Real  t = (p - pa).dot(dir) / (len * len);
                if (t <= 0.0 || t >= 1.0)
                  continue;
                const Vec2 proj = pa + t * dir;
                if ((p - proj).norm() <= on_seg_tol)
                  on_edge.emplace_back(t, v);
              }
            std::sort(on_edge.begin(), on_edge.end());

            std::vector<int> chain;
            chain.push_back(a);
            for (const auto &[t, v] : on_edge)
              chain.push_back(v);
            chain.push_back(b);

            for (std::size_t s = 0; s + 1 < chain.size(); ++s)
              {
                const int u = chain[s];
                const int w = chain[s + 1];
                const std::pair<int, int> key{std::min(u, w), std::max(u, w)};
                const auto                it = face_of_pair.find(key);
                if (it == face_of_pair.end())
                  {
                    Face f;
                    f.v0    = u;
                    f.v1    = w;
                    f.owner = e;
                    const Vec2 pu = mesh.vertices[static_cast<std::size_t>(u)];
                    const Vec2 pw = mesh.vertices[static_cast<std::size_t>(w)];
                    const Vec2 t_dir = (pw - pu).normalized();
                    f.normal         = Vec2(t_dir.y(), -t_dir.x());
                    f.length         = (pw - pu).norm();
                    face_of_pair[key] = static_cast<int>(mesh.faces.size());
                    mesh.faces.push_back(f);
                  }
                else
                  {
                    Face &f = mesh.faces[static_cast<std::size_t>(it->second)];
                    if (f.neighbor >= 0)
                      throw topology_error(
                        "face shared by more than two elements near vertex " +
                        std::to_string(u));
                    if (f.owner == e)
                      throw topology_error(
                        "element " + std::to_string(e) +
                        " traverses the same edge twice");
                    f.neighbor = e;
                  }
              }
          }
      }

    for (Face &f : mesh.faces)
      if (f.is_boundary())
        {
          const std::pair<int, int> key{std::min(f.v0, f.v1),
                                        std::max(f.v0, f.v1)};
          const auto                it = mesh.boundary_tags.find(key);
          f.boundary_tag = (it == mesh.boundary_tags.end()) ? 'N' : it->second;
        }

    for (const auto &[key, tag] : mesh.boundary_tags)
      {
        const auto it = face_of_pair.find(key);
        if (it != face_of_pair.end() &&
            !mesh.faces[static_cast<std::size_t>(it->second)].is_boundary())
          throw topology_error("boundary tag on interior face (" +
                               std::to_string(key.first) + ", " +
                               std::to_string(key.second) + ")");
      }
  }

  /// Sets the tag of every boundary face. Requires face topology.
  inline void tag_boundary(PolyMesh &mesh, char tag)
  {
    for (Face &f : mesh.faces)
      if (f.is_boundary())
        {
          f.boundary_tag = tag;
          mesh.boundary_tags[{std::min(f.v0, f.v1), std::max(f.v0, f.v1)}] =
            tag;
        }
  }

  /// Sets boundary tags from a predicate evaluated at face midpoints.
  template <class TagFn>
  inline void tag_boundary_where(PolyMesh &mesh, TagFn &&tag_of_midpoint)
  {
    for (Face &f : mesh.faces)
      if (f.is_boundary())
        {
          const Vec2 mid = 0.5 * (mesh.vertices[static_cast<std::size_t>(f.v0)] +
                                  mesh.vertices[static_cast<std::size_t>(f.v1)]);
          const char tag = tag_of_midpoint(mid);
          f.boundary_tag = tag;
          mesh.boundary_tags[{std::min(f.v0, f.v1), std::max(f.v0, f.v1)}] =
            tag;
        }
  }

  /// Covers every element with positively oriented triangles: convex
  /// elements are fanned from a strictly convex corner, non-convex ones
  /// are ear-clipped. Degenerate slivers from collinear vertex chains are
  /// dropped; the remaining areas still sum to the element area.
  inline SubTriangulation subtriangulate(const PolyMesh &mesh)
  {
    SubTriangulation sub;
    sub.element_triangles.resize(static_cast<std::size_t>(mesh.n_elements()));
    for (int e = 0; e < mesh.n_elements(); ++e)
      {
        const std::vector<Vec2> poly = mesh.element_polygon(e);
        const int               n    = static_cast<int>(poly.size());
        const Real              h    = polygon_diameter(poly);
        const Real              area_tol = 1e-14 * h * h;
        auto &tris = sub.element_triangles[static_cast<std::size_t>(e)];

        if (polygon_is_convex(poly))
          {
            // Fan from the most convex corner so collinear chains never
            // contain the apex.
            int  apex     = 0;
            Real best_turn = -1.0;
            for (int i = 0; i < n; ++i)
              {
                const Real turn = cross2(poly[static_cast<std::size_t>((i + n - 1) % n)],
                                         poly[static_cast<std::size_t>(i)],
                                         poly[static_cast<std::size_t>((i + 1) % n)]);
                if (turn > best_turn)
                  {
                    best_turn = turn;
                    apex      = i;
                  }
              }
            for (int i = 1; i + 1 < n; ++i)
              {
                const Vec2 &a = poly[static_cast<std::size_t>(apex)];
                const Vec2 &b = poly[static_cast<std::size_t>((apex + i) % n)];
                const Vec2 &c = poly[static_cast<std::size_t>((apex + i + 1) % n)];
                if (0.5 * cross2(a, b, c) > area_tol)
                  tris.push_back({a, b, c});
              }
          }
        else
          {
            for (const auto &t : ear_clip(poly))
              {
                const Vec2 &a = poly[static_cast<std::size_t>(t[0])];
                const Vec2 &b = poly[static_cast<std::size_t>(t[1])];
                const Vec2 &c = poly[static_cast<std::size_t>(t[2])];
                if (0.5 * cross2(a, b, c) > area_tol)
                  tris.push_back({a, b, c});
              }
          }
        if (tris.empty())
          throw topology_error("element " + std::to_string(e) +
                               " could not be subtriangulated");
      }
    return sub;
  }

  /// Shape-regularity report. Elements whose |K|/h_K^2 falls below the
  /// floor are listed as failing. Requires face topology.
  inline RegularityReport check_regularity(const PolyMesh &mesh,
                                           Real            floor = 0.01)
  {
    RegularityReport rep;
    rep.floor = floor;
    rep.element_ratios.resize(mesh.n_elements());
    rep.face_ratios.resize(mesh.n_faces());

    VectorX h(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e)
      {
        h[e] = element_diameter(mesh, e);
        rep.element_ratios[e] = mesh.element_area(e) / (h[e] * h[e]);
        if (rep.element_ratios[e] < floor)
          rep.elements_below_floor.push_back(e);
      }
    for (int i = 0; i < mesh.n_faces(); ++i)
      {
        const Face &f     = mesh.faces[static_cast<std::size_t>(i)];
        Real        ratio = f.length / h[f.owner];
        if (f.neighbor >= 0)
          ratio = std::min(ratio, f.length / h[f.neighbor]);
        rep.face_ratios[i] = ratio;
      }
    rep.min_element_ratio =
      mesh.n_elements() > 0 ? rep.element_ratios.minCoeff() : 0.0;
    rep.min_face_ratio = mesh.n_faces() > 0 ? rep.face_ratios.minCoeff() : 0.0;
    return rep;
  }

  /// Validates element polygons: in-range indices, simple shapes, CCW
  /// orientation, strictly positive area. Throws topology_error.
  inline void validate_mesh(const PolyMesh &mesh)
  {
    for (int e = 0; e < mesh.n_elements(); ++e)
      {
        const std::vector<int> &el = mesh.elements[static_cast<std::size_t>(e)];
        if (el.size() < 3)
          throw topology_error("element " + std::to_string(e) +
                               " has fewer than 3 vertices");
        for (int v : el)
          if (v < 0 || v >= mesh.n_vertices())
            throw topology_error("element " + std::to_string(e) +
                                 " references missing vertex " +
                                 std::to_string(v));
        const std::vector<Vec2> poly = mesh.element_polygon(e);
        if (polygon_signed_area(poly) <= 0.0)
          throw topology_error("element " + std::to_string(e) +
                               " is not counter-clockwise");
        if (!polygon_is_simple(poly))
          throw topology_error("element " + std::to_string(e) +
                               " is not a simple polygon");
      }
  }

  /// Reads a mesh in the plain-text polymesh format:
  ///
  ///   polymesh 2d
  ///   vertices N          followed by N lines "x y"
  ///   elements M          followed by M lines of CCW vertex indices
  ///   boundary K          optional, K lines "v0 v1 TAG" with TAG in {D, N}
  ///
  /// Throws parse_error with the offending line number on malformed text;
  /// semantic defects surface as topology_error from validate_mesh.
  inline PolyMesh load_mesh(const std::string &path)
  {
    std::ifstream in(path);
    if (!in)
      throw parse_error("cannot open mesh file '" + path + "'", 0);

    PolyMesh    mesh;
    std::string line;
    int         line_no = 0;

    auto next_line = [&](const char *what) {
      while (std::getline(in, line))
        {
          ++line_no;
          const auto pos = line.find_first_not_of(" \t\r");
          if (pos == std::string::npos || line[pos] == '#')
            continue;
          return;
        }
      throw parse_error(std::string("unexpected end of file, expected ") +
                          what,
                        line_no);
    };

    next_line("header 'polymesh 2d'");
    {
      std::istringstream ss(line);
      std::string        word, dim;
      ss >> word >> dim;
      if (word != "polymesh" || dim != "2d")
        throw parse_error("expected header 'polymesh 2d'", line_no);
    }

    next_line("'vertices N'");
    int n_vertices = 0;
    {
      std::istringstream ss(line);
      std::string        word;
      ss >> word >> n_vertices;
      if (word != "vertices" || ss.fail() || n_vertices < 0)
        throw parse_error("expected 'vertices N'", line_no);
    }
    mesh.vertices.reserve(static_cast<std::size_t>(n_vertices));
    for (int i = 0; i < n_vertices; ++i)
      {
        next_line("vertex coordinates");
        std::istringstream ss(line);
        Real               x = 0.0, y = 0.0;
        ss >> x >> y;
        if (ss.fail())
          throw parse_error("expected vertex coordinates 'x y'", line_no);
        mesh.vertices.emplace_back(x, y);
      }

    next_line("'elements M'");
    int n_elements = 0;
    {
      std::istringstream ss(line);
      std::string        word;
      ss >> word >> n_elements;
      if (word != "elements" || ss.fail() || n_elements < 0)
        throw parse_error("expected 'elements M'", line_no);
    }
    mesh.elements.reserve(static_cast<std::size_t>(n_elements));
    for (int i = 0; i < n_elements; ++i)
      {
        next_line("element vertex indices");
        std::istringstream ss(line);
        std::vector<int>   el;
        int                v = 0;
        while (ss >> v)
          el.push_back(v);
        if (el.size() < 3)
          throw parse_error("element needs at least 3 vertex indices",
                            line_no);
        mesh.elements.push_back(std::move(el));
      }

    // Optional boundary section.
    while (std::getline(in, line))
      {
        ++line_no;
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#')
          continue;
        std::istringstream ss(line);
        std::string        word;
        int                n_tags = 0;
        ss >> word >> n_tags;
        if (word != "boundary" || ss.fail() || n_tags < 0)
          throw parse_error("expected 'boundary K' or end of file", line_no);
        for (int i = 0; i < n_tags; ++i)
          {
            next_line("boundary tag 'v0 v1 TAG'");
            std::istringstream ts(line);
            int                v0 = 0, v1 = 0;
            std::string        tag;
            ts >> v0 >> v1 >> tag;
            if (ts.fail() || (tag != "D" && tag != "N"))
              throw parse_error("expected 'v0 v1 TAG' with TAG D or N",
                                line_no);
            if (v0 < 0 || v0 >= n_vertices || v1 < 0 || v1 >= n_vertices)
              throw parse_error("boundary tag references missing vertex",
                                line_no);
            mesh.boundary_tags[{std::min(v0, v1), std::max(v0, v1)}] = tag[0];
          }
      }

    validate_mesh(mesh);
    build_face_topology(mesh);
    return mesh;
  }

  /// Writes a mesh in the polymesh format with full double precision.
  /// Boundary tags are emitted for every tagged edge.
  inline void save_mesh(const PolyMesh &mesh, const std::string &path)
  {
    std::ofstream out(path);
    if (!out)
      throw std::runtime_error("cannot write mesh file '" + path + "'");
    out << "polymesh 2d\n";
    out << "vertices " << mesh.n_vertices() << "\n";
    char buf[80];
    for (const Vec2 &p : mesh.vertices)
      {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x(), p.y());
        out << buf;
      }
    out << "elements " << mesh.n_elements() << "\n";
    for (const auto &el : mesh.elements)
      {
        for (std::size_t i = 0; i < el.size(); ++i)
          out << (i ? " " : "") << el[i];
        out << "\n";
      }
    if (!mesh.boundary_tags.empty())
      {
        out << "boundary " << mesh.boundary_tags.size() << "\n";
        for (const auto &[key, tag] : mesh.boundary_tags)
          out << key.first << " " << key.second << " " << tag << "\n";
      }
  }
} // namespace polydg

#endif // POLYDG_MESH_HPP
