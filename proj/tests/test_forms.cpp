#include <polydg/forms.hpp>
#include <polydg/mesh_generate.hpp>

#include "oracle.hpp"
#include "test_meshes.hpp"

#include <doctest.h>

#include <random>

using namespace polydg;

namespace
{
  // Constant anisotropic coefficients exercised against the oracle.
  HeterodimerParams reference_params()
  {
    HeterodimerParams p;
    p.diffusion.d_ext = 1.5;
    p.diffusion.d_axn = 2.0;
    p.diffusion.axon  = [](const Vec2 &, Real) { return Vec2(0.6, 0.8); };
    p.k1              = 0.7;
    p.k1_tilde        = 0.3;
    p.k12             = 2.0;
    return p;
  }

  Mat2 reference_tensor()
  {
    const Vec2 a(0.6, 0.8);
    return 1.5 * Mat2::Identity() + 2.0 * a * a.transpose();
  }

  PolyMesh mixed_tags(PolyMesh mesh)
  {
    tag_boundary_where(mesh, [](const Vec2 &mid) {
      return mid.y() < 0.4 ? 'D' : 'N';
    });
    return mesh;
  }

  void check_against_oracle(const PolyMesh &mesh, int degree, bool ortho)
  {
    const HeterodimerParams params = reference_params();
    const DgSpace           space(mesh, degree, ortho);
    const PenaltyParams     pen = penalty_coefficient(space, params, 10.0);

    const MatrixX m = MatrixX(assemble_mass(space));
    CHECK(oracle::rel_max_norm(m, oracle::mass(space)) < 1e-11);

    const MatrixX a = MatrixX(assemble_stiffness(space, params.diffusion, pen));
    const MatrixX a_ref =
      oracle::stiffness(space, reference_tensor(), /*k_max=*/3.0, degree,
                        /*gamma0=*/10.0);
    CHECK(oracle::rel_max_norm(a, a_ref) < 1e-11);

    const MatrixX r_l = MatrixX(assemble_reaction(space, params.k1));
    CHECK(oracle::rel_max_norm(r_l, oracle::mass(space, params.k1.fn)) <
          1e-11);

    std::mt19937                           rng(99);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    VectorX state(space.n_dofs());
    for (Eigen::Index i = 0; i < state.size(); ++i)
      state[i] = unif(rng);
    const MatrixX r_n =
      MatrixX(assemble_nonlinear_reaction(space, params.k12, state));
    CHECK(oracle::rel_max_norm(r_n,
                               oracle::nonlinear_reaction(space, 2.0, state)) <
          1e-11);
  }
} // namespace

TEST_CASE("assembly matches dense-quadrature oracle on small meshes")
{
  const std::vector<PolyMesh> meshes = {
    mixed_tags(testmesh::unit_square()), mixed_tags(testmesh::two_triangles()),
    mixed_tags(testmesh::hanging_node()), mixed_tags(testmesh::grid_2x2()),
    mixed_tags(testmesh::l_shape_pair())};
  for (const PolyMesh &mesh : meshes)
    for (int degree : {1, 2})
      for (bool ortho : {true, false})
        check_against_oracle(mesh, degree, ortho);
}

TEST_CASE("penalty coefficient reproduces the worked example")
{
  // Two triangles of diameter 0.2 with unit diffusion and unit rates:
  // d = 1, k = (1+1)(1+1) = 4, p = 2, gamma0 = 10 give
  // gamma_F = 10 * 4 * 4 / 0.2 = 800 on every face.
  const Real s = 0.2 / std::sqrt(2.0);
  PolyMesh   mesh;
  mesh.vertices = {{0.0, 0.0}, {s, 0.0}, {s, s}, {0.0, s}};
  mesh.elements = {{0, 1, 2}, {0, 2, 3}};
  validate_mesh(mesh);
  build_face_topology(mesh);
  tag_boundary(mesh, 'D');

  HeterodimerParams params; // unit rates, d_ext = 1
  const DgSpace     space(mesh, 2);
  const PenaltyParams pen = penalty_coefficient(space, params, 10.0);

  for (int e = 0; e < 2; ++e)
    {
      CHECK(pen.d_K[e] == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(pen.k_K[e] == doctest::Approx(4.0).epsilon(1e-14));
    }
  for (int f = 0; f < mesh.n_faces(); ++f)
    {
      CHECK(pen.face_penalty(f) == doctest::Approx(800.0).epsilon(1e-12));
      CHECK(pen.face_penalty(f) ==
            doctest::Approx(oracle::face_penalty(
                              mesh, mesh.faces[static_cast<std::size_t>(f)],
                              1.0, 4.0, 2, 10.0))
              .epsilon(1e-13));
    }
}

TEST_CASE("penalty is undefined on zero-flux faces")
{
  PolyMesh mesh = testmesh::unit_square();
  tag_boundary_where(mesh, [](const Vec2 &mid) {
    return mid.x() < 0.5 ? 'D' : 'N';
  });
  HeterodimerParams   params;
  const DgSpace       space(mesh, 1);
  const PenaltyParams pen = penalty_coefficient(space, params, 10.0);
  bool saw_neumann = false, saw_dirichlet = false;
  for (int f = 0; f < mesh.n_faces(); ++f)
    {
      const Face &face = mesh.faces[static_cast<std::size_t>(f)];
      if (face.boundary_tag == 'N')
        {
          saw_neumann = true;
          CHECK_THROWS_AS(pen.face_penalty(f), std::invalid_argument);
        }
      else
        {
          saw_dirichlet = true;
          CHECK(pen.face_penalty(f) > 0.0);
        }
    }
  CHECK(saw_neumann);
  CHECK(saw_dirichlet);
}

TEST_CASE("stiffness is symmetric")
{
  PolyMesh mesh = generate_voronoi_mesh(Rect{{0.0, 0.0}, {1.0, 1.0}}, 30, 42);
  tag_boundary_where(mesh, [](const Vec2 &mid) {
    return mid.x() < 0.5 ? 'D' : 'N';
  });
  const HeterodimerParams params = reference_params();
  const DgSpace           space(mesh, 3);
  const PenaltyParams     pen = penalty_coefficient(space, params, 10.0);
  const SparseMat a = assemble_stiffness(space, params.diffusion, pen);
  const MatrixX   dense = MatrixX(a);
  const Real      scale = dense.cwiseAbs().maxCoeff();
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("stiffness is positive semidefinite at the default penalty")
{
  PolyMesh mesh = generate_voronoi_mesh(Rect{{0.0, 0.0}, {1.0, 1.0}}, 16, 7);
  tag_boundary(mesh, 'D');
  HeterodimerParams params; // unit coefficients
  const DgSpace     space(mesh, 2);
  const PenaltyParams pen = penalty_coefficient(space, params, 10.0);
  const MatrixX a = MatrixX(assemble_stiffness(space, params.diffusion, pen));

  Eigen::SelfAdjointEigenSolver<MatrixX> eig(0.5 * (a + a.transpose()));
  const Real norm = a.cwiseAbs().maxCoeff();
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * norm);
}

TEST_CASE("constants lie in the kernel under zero-flux conditions")
{
  PolyMesh mesh = generate_voronoi_mesh(Rect{{0.0, 0.0}, {1.0, 1.0}}, 12, 3);
  tag_boundary(mesh, 'N');
  HeterodimerParams params;
  const DgSpace     space(mesh, 3);
  const PenaltyParams pen = penalty_coefficient(space, params, 10.0);
  const SparseMat   a = assemble_stiffness(space, params.diffusion, pen);

  const VectorX ones = space.l2_project([](const Vec2 &, Real) { return 1.0; });
  const VectorX r    = a * ones;
  const Real    scale =
    MatrixX(a).cwiseAbs().maxCoeff() * ones.cwiseAbs().maxCoeff();
  CHECK(r.cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("discrete operator is exact on global polynomials")
{
  // For u in the global space, jumps vanish and SIPG consistency gives
  // A u = F exactly, including the Dirichlet lifting in F.
  SUBCASE("isotropic quadratic on a structured grid")
  {
    PolyMesh mesh = testmesh::grid_2x2();
    tag_boundary(mesh, 'D');
    HeterodimerParams params; // D = I
    const auto u = [](const Vec2 &x, Real) {
      return x.x() * x.x() + x.x() * x.y() - 2.0 * x.y() * x.y() +
             3.0 * x.x() - x.y() + 1.0;
    };
    const FieldFn f = [](const Vec2 &, Real) { return 2.0; }; // -lap u
    const DgSpace space(mesh, 2);
    const PenaltyParams pen = penalty_coefficient(space, params, 10.0);
    const SparseMat a = assemble_stiffness(space, params.diffusion, pen);
    const VectorX   coeffs = space.l2_project(u);
    const VectorX   load =
      assemble_load(space, f, 0.0, params.diffusion, pen, u);
    const Real scale = MatrixX(a).cwiseAbs().maxCoeff() *
                       coeffs.cwiseAbs().maxCoeff();
    CHECK((a * coeffs - load).cwiseAbs().maxCoeff() <= 1e-11 * scale);
  }

  SUBCASE("anisotropic cubic on a polygonal mesh")
  {
    PolyMesh mesh =
      generate_voronoi_mesh(Rect{{0.0, 0.0}, {1.0, 1.0}}, 9, 11);
    tag_boundary(mesh, 'D');
    HeterodimerParams params = reference_params();
    const Mat2        d      = reference_tensor();
    const auto u = [](const Vec2 &p, Real) {
      const Real x = p.x(), y = p.y();
      return x * x * x - 2.0 * x * y * y + y * y * y + x * x - y + 2.0;
    };
    const FieldFn f = [d](const Vec2 &p, Real) {
      const Real x = p.x(), y = p.y();
      const Real uxx = 6.0 * x + 2.0;
      const Real uyy = -4.0 * x + 6.0 * y;
      const Real uxy = -4.0 * y;
      return -(d(0, 0) * uxx + 2.0 * d(0, 1) * uxy + d(1, 1) * uyy);
    };
    const DgSpace       space(mesh, 3);
    const PenaltyParams pen = penalty_coefficient(space, params, 10.0);
    const SparseMat a = assemble_stiffness(space, params.diffusion, pen);
    const VectorX   coeffs = space.l2_project(u);
    const VectorX   load =
      assemble_load(space, f, 0.0, params.diffusion, pen, u);
    const Real scale = MatrixX(a).cwiseAbs().maxCoeff() *
                       coeffs.cwiseAbs().maxCoeff();
    CHECK((a * coeffs - load).cwiseAbs().maxCoeff() <= 1e-11 * scale);
  }
}

TEST_CASE("nonlinear reaction is linear in the frozen state")
{
  PolyMesh mesh = mixed_tags(testmesh::grid_2x2());
  const DgSpace          space(mesh, 2);
  const CoefficientField k12 = 2.0;

  std::mt19937                           rng(4);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  VectorX s1(space.n_dofs()), s2(space.n_dofs());
  for (Eigen::Index i = 0; i < s1.size(); ++i)
    {
      s1[i] = unif(rng);
      s2[i] = unif(rng);
    }
  const Real a = 1.7, b = -0.4;

  const auto blocks1  = nonlinear_reaction_blocks(space, k12, s1);
  const auto blocks2  = nonlinear_reaction_blocks(space, k12, s2);
  const auto combined =
    nonlinear_reaction_blocks(space, k12, a * s1 + b * s2);
  Real scale = 0.0, err = 0.0;
  for (std::size_t e = 0; e < blocks1.size(); ++e)
    {
      const MatrixX want = a * blocks1[e] + b * blocks2[e];
      scale = std::max(scale, want.cwiseAbs().maxCoeff());
      err = std::max(err, (combined[e] - want).cwiseAbs().maxCoeff());
    }
  CHECK(err <= 1e-12 * scale);
}

TEST_CASE("frozen state and argument commute in the coupling term")
{
  // r(w, u, v) integrates k12 w u v, so R_N(C) Q = R_N(Q) C.
  PolyMesh mesh = mixed_tags(testmesh::hanging_node());
  const DgSpace          space(mesh, 2);
  const CoefficientField k12 = 1.3;

  std::mt19937                           rng(8);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  VectorX c(space.n_dofs()), q(space.n_dofs());
  for (Eigen::Index i = 0; i < c.size(); ++i)
    {
      c[i] = unif(rng);
      q[i] = unif(rng);
    }
  VectorX rc = VectorX::Zero(space.n_dofs());
  VectorX rq = VectorX::Zero(space.n_dofs());
  apply_blocks(nonlinear_reaction_blocks(space, k12, c), space, q, rc);
  apply_blocks(nonlinear_reaction_blocks(space, k12, q), space, c, rq);
  CHECK((rc - rq).cwiseAbs().maxCoeff() <=
        1e-12 * rc.cwiseAbs().maxCoeff());
}

TEST_CASE("sparse nonlinear reaction equals its block form")
{
  PolyMesh mesh = mixed_tags(testmesh::two_triangles());
  const DgSpace          space(mesh, 2);
  const CoefficientField k12 = 0.9;
  VectorX                state(space.n_dofs());
  for (Eigen::Index i = 0; i < state.size(); ++i)
    state[i] = std::sin(0.7 * static_cast<Real>(i));

  const SparseMat sparse = assemble_nonlinear_reaction(space, k12, state);
  const auto      blocks = nonlinear_reaction_blocks(space, k12, state);
  VectorX         x(space.n_dofs());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x[i] = std::cos(0.3 * static_cast<Real>(i));
  VectorX via_blocks = VectorX::Zero(space.n_dofs());
  apply_blocks(blocks, space, x, via_blocks);
  CHECK(((sparse * x) - via_blocks).cwiseAbs().maxCoeff() <=
        1e-13 * via_blocks.cwiseAbs().maxCoeff());
}

TEST_CASE("weighted mass handles spatially varying weights")
{
  // Raise the volume order so both sides integrate the weight exactly.
  PolyMesh mesh = mixed_tags(testmesh::grid_2x2());
  const DgSpace space(mesh, 2, true, /*volume_order=*/12);
  const FieldFn w = [](const Vec2 &x, Real) {
    return 0.7 + x.x() * x.x() * x.y();
  };
  const MatrixX m = MatrixX(assemble_mass(space, w));
  CHECK(oracle::rel_max_norm(m, oracle::mass(space, w)) < 1e-12);
}
