#ifndef POLYDG_DGSPACE_HPP
#define POLYDG_DGSPACE_HPP

/// Discontinuous modal finite element space on a polytopal mesh: per
/// element, scaled monomials on the bounding box, optionally
/// orthonormalized against the element mass inner product. Quadrature
/// rules and basis traces are cached for assembly and per-step work.

#include <polydg/mesh.hpp>
#include <polydg/quadrature.hpp>
#include <polydg/types.hpp>

#include <Eigen/Dense>

#include <utility>

namespace polydg
{
  /// Basis gradients at a set of points, one basis function per column.
  struct BasisGrad
  {
    MatrixX dx;
    MatrixX dy;
  };

  class DgSpace
  {
  public:
    /// Builds the space of piecewise polynomials of total degree
    /// <= degree. volume_order < 0 selects the default 2 * degree + 2,
    /// exact for mass matrices; face_points < 0 selects degree + 2
    /// Gauss points per face.
    DgSpace(PolyMesh mesh_,
            int      degree_,
            bool     orthonormalize = true,
            int      volume_order   = -1,
            int      face_points    = -1)
      : msh(std::move(mesh_))
      , deg(degree_)
      , ortho(orthonormalize)
      , vol_order(volume_order < 0 ? 2 * degree_ + 2 : volume_order)
      , face_pts(face_points < 0 ? degree_ + 2 : face_points)
    {
      if (deg < 0)
        throw std::invalid_argument("DgSpace: negative degree");
      if (msh.faces.empty())
        build_face_topology(msh);
      n_loc = (deg + 1) * (deg + 2) / 2;

      // Graded lexicographic exponents: 1, x, y, x^2, xy, y^2, ...
      exps.resize(n_loc, 2);
      {
        int k = 0;
        for (int total = 0; total <= deg; ++total)
          for (int ax = total; ax >= 0; --ax, ++k)
            {
              exps(k, 0) = ax;
              exps(k, 1) = total - ax;
            }
      }

      sub = subtriangulate(msh);
      const int n_el = msh.n_elements();
      centers.resize(static_cast<std::size_t>(n_el));
      halfwidths.resize(static_cast<std::size_t>(n_el));
      transforms.resize(static_cast<std::size_t>(n_el));
      vol_rules.resize(static_cast<std::size_t>(n_el));
      vol_basis_cache.resize(static_cast<std::size_t>(n_el));

      for (int e = 0; e < n_el; ++e)
        {
          const auto box = polygon_bbox(msh.element_polygon(e));
          centers[static_cast<std::size_t>(e)]    = 0.5 * (box[0] + box[1]);
          Vec2 hw = 0.5 * (box[1] - box[0]);
          hw.x()  = std::max(hw.x(), 1e-300);
          hw.y()  = std::max(hw.y(), 1e-300);
          halfwidths[static_cast<std::size_t>(e)] = hw;

          QuadratureRule &rule = vol_rules[static_cast<std::size_t>(e)];
          {
            std::vector<QuadratureRule> parts;
            Eigen::Index                total = 0;
            for (const auto &tri :
                 sub.element_triangles[static_cast<std::size_t>(e)])
              {
                parts.push_back(
                  triangle_rule(tri[0], tri[1], tri[2], vol_order));
                total += parts.back().size();
              }
            rule.points.resize(total, 2);
            rule.weights.resize(total);
            Eigen::Index at = 0;
            for (const auto &part : parts)
              {
                rule.points.middleRows(at, part.size())   = part.points;
                rule.weights.segment(at, part.size())     = part.weights;
                at += part.size();
              }
          }

          const MatrixX mono = monomials(e, rule.points);
          if (ortho)
            {
              if (rule.size() < n_loc)
                throw std::invalid_argument(
                  "DgSpace: volume rule too small to orthonormalize");
              const MatrixX scaled =
                rule.weights.array().sqrt().matrix().asDiagonal() * mono;
              Eigen::HouseholderQR<MatrixX> qr(scaled);
              MatrixX r = qr.matrixQR()
                            .topRows(n_loc)
                            .template triangularView<Eigen::Upper>();
              MatrixX t = r.template triangularView<Eigen::Upper>().solve(
                MatrixX::Identity(n_loc, n_loc));
              for (int j = 0; j < n_loc; ++j)
                if (r(j, j) < 0.0)
                  t.col(j) = -t.col(j);
              transforms[static_cast<std::size_t>(e)] = std::move(t);
            }
          else
            transforms[static_cast<std::size_t>(e)] =
              MatrixX::Identity(n_loc, n_loc);

          vol_basis_cache[static_cast<std::size_t>(e)] =
            mono * transforms[static_cast<std::size_t>(e)];
        }

      const int n_f = msh.n_faces();
      face_rules.resize(static_cast<std::size_t>(n_f));
      face_owner_cache.resize(static_cast<std::size_t>(n_f));
      face_neighbor_cache.resize(static_cast<std::size_t>(n_f));
      for (int f = 0; f < n_f; ++f)
        {
          const Face &face = msh.faces[static_cast<std::size_t>(f)];
          face_rules[static_cast<std::size_t>(f)] =
            segment_rule(msh.vertices[static_cast<std::size_t>(face.v0)],
                         msh.vertices[static_cast<std::size_t>(face.v1)],
                         face_pts);
          face_owner_cache[static_cast<std::size_t>(f)] =
            eval_basis(face.owner, face_rules[static_cast<std::size_t>(f)].points);
          if (face.neighbor >= 0)
            face_neighbor_cache[static_cast<std::size_t>(f)] = eval_basis(
              face.neighbor, face_rules[static_cast<std::size_t>(f)].points);
        }
    }

    const PolyMesh &mesh() const { return msh; }
    const SubTriangulation &subtriangulation() const { return sub; }
    int degree() const { return deg; }
    int n_local() const { return n_loc; }
    int n_dofs() const { return n_loc * msh.n_elements(); }
    int offset(int e) const { return n_loc * e; }
    bool orthonormalized() const { return ortho; }
    int volume_order() const { return vol_order; }
    int face_point_count() const { return face_pts; }

    /// Monomial-to-basis coefficients of element e, one basis function
    /// per column.
    const MatrixX &transform(int e) const
    {
      return transforms[static_cast<std::size_t>(e)];
    }

    /// Basis values at arbitrary points of element e, one function per
    /// column.
    MatrixX eval_basis(int e, const Points &pts) const
    {
      return monomials(e, pts) * transforms[static_cast<std::size_t>(e)];
    }

    /// Basis gradients at arbitrary points of element e.
    BasisGrad eval_grad_basis(int e, const Points &pts) const
    {
      const Eigen::Index n  = pts.rows();
      const Vec2        &c  = centers[static_cast<std::size_t>(e)];
      const Vec2        &hw = halfwidths[static_cast<std::size_t>(e)];
      const Eigen::ArrayXd xi  = (pts.col(0).array() - c.x()) / hw.x();
      const Eigen::ArrayXd eta = (pts.col(1).array() - c.y()) / hw.y();

      MatrixX dx(n, n_loc), dy(n, n_loc);
      for (int j = 0; j < n_loc; ++j)
        {
          const int ax = exps(j, 0);
          const int ay = exps(j, 1);
          if (ax == 0)
            dx.col(j).setZero();
          else
            dx.col(j) = (ax / hw.x() * xi.pow(ax - 1) * eta.pow(ay)).matrix();
          if (ay == 0)
            dy.col(j).setZero();
          else
            dy.col(j) = (ay / hw.y() * xi.pow(ax) * eta.pow(ay - 1)).matrix();
        }
      return {dx * transforms[static_cast<std::size_t>(e)],
              dy * transforms[static_cast<std::size_t>(e)]};
    }

    /// Volume quadrature of element e, composite over its triangles.
    const QuadratureRule &volume_quadrature(int e) const
    {
      return vol_rules[static_cast<std::size_t>(e)];
    }

    /// Face quadrature of face f.
    const QuadratureRule &face_quadrature(int f) const
    {
      return face_rules[static_cast<std::size_t>(f)];
    }

    /// Cached basis values at the volume quadrature points of element e.
    const MatrixX &basis_at_volume(int e) const
    {
      return vol_basis_cache[static_cast<std::size_t>(e)];
    }

    /// Cached basis traces at the quadrature points of face f from its
    /// owner (side 0) or neighbor (side 1).
    const MatrixX &basis_at_face(int f, int side) const
    {
      return side == 0 ? face_owner_cache[static_cast<std::size_t>(f)]
                       : face_neighbor_cache[static_cast<std::size_t>(f)];
    }

    /// Element-wise L2 projection of a field at time t.
    VectorX l2_project(const FieldFn &f, Real t = 0.0) const
    {
      VectorX u(n_dofs());
      for (int e = 0; e < msh.n_elements(); ++e)
        {
          const QuadratureRule &rule = vol_rules[static_cast<std::size_t>(e)];
          const MatrixX &phi = vol_basis_cache[static_cast<std::size_t>(e)];
          VectorX        fw(rule.size());
          for (Eigen::Index q = 0; q < rule.size(); ++q)
            fw[q] = rule.weights[q] *
                    f(Vec2(rule.points(q, 0), rule.points(q, 1)), t);
          const VectorX rhs  = phi.transpose() * fw;
          const MatrixX mass = phi.transpose() *
                               rule.weights.asDiagonal() * phi;
          u.segment(offset(e), n_loc) = mass.ldlt().solve(rhs);
        }
      return u;
    }

    /// Values of the discrete field with the given coefficients at
    /// arbitrary points of element e.
    VectorX evaluate_at(int e, const VectorX &coeffs, const Points &pts) const
    {
      return eval_basis(e, pts) * coeffs.segment(offset(e), n_loc);
    }

  private:
    MatrixX monomials(int e, const Points &pts) const
    {
      const Eigen::Index n  = pts.rows();
      const Vec2        &c  = centers[static_cast<std::size_t>(e)];
      const Vec2        &hw = halfwidths[static_cast<std::size_t>(e)];
      const Eigen::ArrayXd xi  = (pts.col(0).array() - c.x()) / hw.x();
      const Eigen::ArrayXd eta = (pts.col(1).array() - c.y()) / hw.y();
      MatrixX              m(n, n_loc);
      for (int j = 0; j < n_loc; ++j)
        m.col(j) = (xi.pow(exps(j, 0)) * eta.pow(exps(j, 1))).matrix();
      return m;
    }

    PolyMesh         msh;
    int              deg;
    bool             ortho;
    int              vol_order;
    int              face_pts;
    int              n_loc = 0;
    SubTriangulation sub;
    Eigen::Matrix<int, Eigen::Dynamic, 2> exps;
    std::vector<Vec2>           centers;
    std::vector<Vec2>           halfwidths;
    std::vector<MatrixX>        transforms;
    std::vector<QuadratureRule> vol_rules;
    std::vector<MatrixX>        vol_basis_cache;
    std::vector<QuadratureRule> face_rules;
    std::vector<MatrixX>        face_owner_cache;
    std::vector<MatrixX>        face_neighbor_cache;
  };
} // namespace polydg

#endif // POLYDG_DGSPACE_HPP
