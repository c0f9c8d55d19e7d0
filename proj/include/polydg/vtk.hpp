#ifndef POLYDG_VTK_HPP
#define POLYDG_VTK_HPP

/// Legacy ASCII VTK output of discrete fields on the element
/// sub-triangulations, with duplicated points so interelement jumps
/// remain visible.

#include <polydg/dgspace.hpp>

#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace polydg
{
  /// Writes the named scalar fields to a VTK unstructured grid file.
  inline void
  emit_vtk(const DgSpace                                            &space,
           const std::vector<std::pair<std::string, const VectorX *>> &fields,
           const std::string                                         &path)
  {
    const SubTriangulation &sub = space.subtriangulation();
    int n_tris = 0;
    for (int e = 0; e < space.mesh().n_elements(); ++e)
      n_tris += sub.n_triangles(e);

    std::ofstream out(path);
    if (!out)
      throw std::runtime_error("cannot write VTK file '" + path + "'");
    char buf[256];

    out << "# vtk DataFile Version 3.0\n";
    out << "polydg fields\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << 3 * n_tris << " double\n";
    for (int e = 0; e < space.mesh().n_elements(); ++e)
      for (const auto &tri : sub.element_triangles[static_cast<std::size_t>(e)])
        for (const Vec2 &p : tri)
          {
            std::snprintf(buf, sizeof(buf), "%.12g %.12g 0\n", p.x(), p.y());
            out << buf;
          }

    out << "CELLS " << n_tris << " " << 4 * n_tris << "\n";
    for (int i = 0; i < n_tris; ++i)
      out << "3 " << 3 * i << " " << 3 * i + 1 << " " << 3 * i + 2 << "\n";
    out << "CELL_TYPES " << n_tris << "\n";
    for (int i = 0; i < n_tris; ++i)
      out << "5\n";

    out << "POINT_DATA " << 3 * n_tris << "\n";
    for (const auto &[name, coeffs] : fields)
      {
        out << "SCALARS " << name << " double 1\n";
        out << "LOOKUP_TABLE default\n";
        for (int e = 0; e < space.mesh().n_elements(); ++e)
          for (const auto &tri :
               sub.element_triangles[static_cast<std::size_t>(e)])
            {
              Points pts(3, 2);
              for (int k = 0; k < 3; ++k)
                pts.row(k) = tri[static_cast<std::size_t>(k)].transpose();
              const VectorX vals = space.evaluate_at(e, *coeffs, pts);
              for (int k = 0; k < 3; ++k)
                {
                  std::snprintf(buf, sizeof(buf), "%.9g\n", vals[k]);
                  out << buf;
                }
            }
      }
  }
} // namespace polydg

#endif // POLYDG_VTK_HPP
