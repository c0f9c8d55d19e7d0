#include <polydg/dgspace.hpp>
#include <polydg/mesh_generate.hpp>

#include "test_meshes.hpp"

#include <doctest.h>

#include <random>

using namespace polydg;

namespace
{
  // Weighted Gram matrix of one element from the space's own quadrature.
  MatrixX element_gram(const DgSpace &space, int e)
  {
    const QuadratureRule &rule = space.volume_quadrature(e);
    const MatrixX        &phi  = space.basis_at_volume(e);
    return phi.transpose() * rule.weights.asDiagonal() * phi;
  }
} // namespace

TEST_CASE("local dimension and dof layout")
{
  const DgSpace space(testmesh::grid_2x2(), 3);
  CHECK(space.n_local() == 10);
  CHECK(space.n_dofs() == 40);
  CHECK(space.offset(0) == 0);
  CHECK(space.offset(3) == 30);
  CHECK(space.volume_order() == 8);
  CHECK(space.face_point_count() == 5);
}

TEST_CASE("orthonormalized bases have identity Gram matrices")
{
  for (int degree : {1, 2, 4})
    {
      const DgSpace space(testmesh::l_shape_pair(), degree);
      for (int e = 0; e < space.mesh().n_elements(); ++e)
        {
          const MatrixX gram = element_gram(space, e);
          const MatrixX eye  = MatrixX::Identity(space.n_local(),
                                                 space.n_local());
          CHECK((gram - eye).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("orthonormalization survives high degree on stretched cells")
{
  PolyMesh mesh;
  mesh.vertices = {{0.0, 0.0}, {4.0, 0.0}, {4.0, 0.1}, {0.0, 0.1}};
  mesh.elements = {{0, 1, 2, 3}};
  validate_mesh(mesh);
  build_face_topology(mesh);

  const DgSpace space(mesh, 8);
  const MatrixX gram = element_gram(space, 0);
  const MatrixX eye  = MatrixX::Identity(space.n_local(), space.n_local());
  CHECK((gram - eye).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("raw monomial basis is centered and scaled")
{
  const DgSpace space(testmesh::unit_square(), 2, /*orthonormalize=*/false);
  Points        center(1, 2);
  center << 0.5, 0.5; // bbox center of the unit square
  const MatrixX phi = space.eval_basis(0, center);
  CHECK(phi(0, 0) == doctest::Approx(1.0));
  for (int j = 1; j < space.n_local(); ++j)
    CHECK(phi(0, j) == doctest::Approx(0.0));

  Points corner(1, 2);
  corner << 1.0, 1.0; // scaled coordinates (1, 1)
  const MatrixX psi = space.eval_basis(0, corner);
  for (int j = 0; j < space.n_local(); ++j)
    CHECK(psi(0, j) == doctest::Approx(1.0)); // every monomial is 1 there
}

TEST_CASE("projection reproduces polynomials up to the space degree")
{
  const auto poly = [](const Vec2 &x, Real) {
    return 3.0 - 2.0 * x.x() + 0.5 * x.y() + x.x() * x.x() -
           4.0 * x.x() * x.y() + 0.25 * x.y() * x.y();
  };
  for (bool ortho : {true, false})
    {
      const DgSpace space(testmesh::hanging_node(), 2, ortho);
      const VectorX u = space.l2_project(poly);

      std::mt19937                           rng(5);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (int e = 0; e < space.mesh().n_elements(); ++e)
        {
          Points pts(5, 2);
          const auto poly_pts = space.mesh().element_polygon(e);
          for (int i = 0; i < 5; ++i)
            {
              // Random convex combination of the vertices stays inside.
              VectorX w(static_cast<Eigen::Index>(poly_pts.size()));
              for (Eigen::Index k = 0; k < w.size(); ++k)
                w[k] = unif(rng);
              w /= w.sum();
              Vec2 p = Vec2::Zero();
              for (std::size_t k = 0; k < poly_pts.size(); ++k)
                p += w[static_cast<Eigen::Index>(k)] * poly_pts[k];
              pts.row(static_cast<Eigen::Index>(i)) = p.transpose();
            }
          const VectorX vals = space.evaluate_at(e, u, pts);
          for (Eigen::Index i = 0; i < vals.size(); ++i)
            CHECK(vals[i] ==
                  doctest::Approx(poly(pts.row(i).transpose(), 0.0))
                    .epsilon(1e-12));
        }
    }
}

TEST_CASE("basis gradients match finite differences of basis values")
{
  const DgSpace space(testmesh::two_triangles(), 3);
  const Real    h = 1e-6;
  Points        pts(3, 2);
  pts << 0.3, 0.2, 0.6, 0.55, 0.25, 0.7;

  const BasisGrad grad = space.eval_grad_basis(0, pts);
  Points xp = pts, xm = pts, yp = pts, ym = pts;
  xp.col(0).array() += h;
  xm.col(0).array() -= h;
  yp.col(1).array() += h;
  ym.col(1).array() -= h;
  const MatrixX fd_x = (space.eval_basis(0, xp) - space.eval_basis(0, xm)) /
                       (2.0 * h);
  const MatrixX fd_y = (space.eval_basis(0, yp) - space.eval_basis(0, ym)) /
                       (2.0 * h);
  CHECK((grad.dx - fd_x).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((grad.dy - fd_y).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("face trace caches agree with direct evaluation")
{
  const DgSpace   space(testmesh::grid_2x2(), 2);
  const PolyMesh &mesh = space.mesh();
  for (int f = 0; f < mesh.n_faces(); ++f)
    {
      const Face           &face = mesh.faces[static_cast<std::size_t>(f)];
      const QuadratureRule &rule = space.face_quadrature(f);
      const MatrixX direct = space.eval_basis(face.owner, rule.points);
      CHECK((space.basis_at_face(f, 0) - direct).cwiseAbs().maxCoeff() <
            1e-13);
      if (!face.is_boundary())
        {
          const MatrixX other = space.eval_basis(face.neighbor, rule.points);
          CHECK((space.basis_at_face(f, 1) - other).cwiseAbs().maxCoeff() <
                1e-13);
        }
    }
}

TEST_CASE("volume quadrature integrates high-degree polynomials exactly")
{
  const DgSpace space(testmesh::l_shape_pair(), 3); // order 8 rules
  // integral of x^4 y^4 over [0,2]^2 assembled from both elements
  Real integral = 0.0;
  for (int e = 0; e < space.mesh().n_elements(); ++e)
    {
      const QuadratureRule &rule = space.volume_quadrature(e);
      for (Eigen::Index q = 0; q < rule.size(); ++q)
        integral += rule.weights[q] * std::pow(rule.points(q, 0), 4) *
                    std::pow(rule.points(q, 1), 4);
    }
  const Real exact = (std::pow(2.0, 5) / 5.0) * (std::pow(2.0, 5) / 5.0);
  CHECK(integral == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("space rejects invalid construction")
{
  CHECK_THROWS_AS(DgSpace(testmesh::unit_square(), -1),
                  std::invalid_argument);
}
