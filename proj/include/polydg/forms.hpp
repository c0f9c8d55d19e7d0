#ifndef POLYDG_FORMS_HPP
#define POLYDG_FORMS_HPP

/// Symmetric interior penalty (SIPG) bilinear forms for the coupled
/// reaction-diffusion system and the per-step assembled objects.

#include <polydg/dgspace.hpp>
#include <polydg/model.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace polydg
{
  /// Stabilization data: per-element diffusion and reaction bounds and
  /// the resulting per-face penalty coefficients.
  struct PenaltyParams
  {
    Real    gamma0 = 10.0;
    VectorX d_K;     ///< max over element quad points of lambda_max(D)
    VectorX k_K;     ///< sup over element of (1 + k12)(k1 + k1_tilde)
    VectorX gamma_F; ///< per face; NaN on Neumann faces

    Real face_penalty(int f) const
    {
      const Real g = gamma_F[f];
      if (std::isnan(g))
        throw std::invalid_argument(
          "penalty requested on a Neumann face " + std::to_string(f));
      return g;
    }
  };

  namespace detail
  {
    inline Real lambda_max_2x2(const Mat2 &d)
    {
      const Real tr  = d(0, 0) + d(1, 1);
      const Real det = d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0);
      const Real disc = std::max(tr * tr - 4.0 * det, 0.0);
      return 0.5 * (tr + std::sqrt(disc));
    }

    inline Real harmonic(Real a, Real b)
    {
      return 2.0 * a * b / (a + b);
    }
  } // namespace detail

  /// Penalty coefficients gamma_F = gamma0 * max{d, k} * p^2 / h with
  /// harmonic averages of the per-element bounds across interior faces
  /// and one-sided values on Dirichlet faces. Neumann faces carry NaN.
  inline PenaltyParams penalty_coefficient(const DgSpace           &space,
                                           const HeterodimerParams &params,
                                           Real                     gamma0 = 10.0)
  {
    const PolyMesh &mesh = space.mesh();
    PenaltyParams   pen;
    pen.gamma0 = gamma0;
    pen.d_K.resize(mesh.n_elements());
    pen.k_K.resize(mesh.n_elements());
    pen.gamma_F.resize(mesh.n_faces());

    VectorX h(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e)
      {
        h[e] = element_diameter(mesh, e);
        const QuadratureRule &rule = space.volume_quadrature(e);
        Real d_max = 0.0, k_max = 0.0;
        for (Eigen::Index q = 0; q < rule.size(); ++q)
          {
            const Vec2 x(rule.points(q, 0), rule.points(q, 1));
            d_max = std::max(
              d_max,
              detail::lambda_max_2x2(diffusion_tensor(params.diffusion, x)));
            k_max = std::max(k_max,
                             std::abs((1.0 + params.k12(x, 0.0)) *
                                      (params.k1(x, 0.0) +
                                       params.k1_tilde(x, 0.0))));
          }
        pen.d_K[e] = d_max;
        pen.k_K[e] = k_max;
      }

    const Real p2 = static_cast<Real>(space.degree()) * space.degree();
    for (int f = 0; f < mesh.n_faces(); ++f)
      {
        const Face &face = mesh.faces[static_cast<std::size_t>(f)];
        if (face.neighbor >= 0)
          {
            const Real d_h = detail::harmonic(pen.d_K[face.owner],
                                              pen.d_K[face.neighbor]);
            const Real k_h = detail::harmonic(pen.k_K[face.owner],
                                              pen.k_K[face.neighbor]);
            const Real h_h = detail::harmonic(h[face.owner], h[face.neighbor]);
            pen.gamma_F[f] = gamma0 * std::max(d_h, k_h) * p2 / h_h;
          }
        else if (face.boundary_tag == 'D')
          pen.gamma_F[f] = gamma0 *
                           std::max(pen.d_K[face.owner], pen.k_K[face.owner]) *
                           p2 / h[face.owner];
        else
          pen.gamma_F[f] = std::numeric_limits<Real>::quiet_NaN();
      }
    return pen;
  }

  /// Mass-type matrix int_Omega w phi_j phi_i with an optional spatial
  /// weight (unit weight when empty). Block diagonal per element.
  inline SparseMat assemble_mass(const DgSpace &space,
                                 const FieldFn &weight = FieldFn())
  {
    const int             n_loc = space.n_local();
    std::vector<Triplet>  trip;
    trip.reserve(static_cast<std::size_t>(space.mesh().n_elements()) *
                 static_cast<std::size_t>(n_loc * n_loc));
    for (int e = 0; e < space.mesh().n_elements(); ++e)
      {
        const QuadratureRule &rule = space.volume_quadrature(e);
        const MatrixX        &phi  = space.basis_at_volume(e);
        VectorX               w    = rule.weights;
        if (weight)
          for (Eigen::Index q = 0; q < rule.size(); ++q)
            w[q] *= weight(Vec2(rule.points(q, 0), rule.points(q, 1)), 0.0);
        const MatrixX local = phi.transpose() * w.asDiagonal() * phi;
        const int     off   = space.offset(e);
        for (int i = 0; i < n_loc; ++i)
          for (int j = 0; j < n_loc; ++j)
            trip.emplace_back(off + i, off + j, local(i, j));
      }
    SparseMat m(space.n_dofs(), space.n_dofs());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  }

  /// Linear reaction matrix int_Omega k phi_j phi_i.
  inline SparseMat assemble_reaction(const DgSpace          &space,
                                     const CoefficientField &k)
  {
    return assemble_mass(space, k.fn);
  }

  /// SIPG stiffness matrix of the diffusion operator: volume gradients
  /// plus penalty and consistency terms on interior and Dirichlet faces.
  inline SparseMat assemble_stiffness(const DgSpace       &space,
                                      const DiffusionSpec &diffusion,
                                      const PenaltyParams &penalty)
  {
    const PolyMesh &mesh  = space.mesh();
    const int       n_loc = space.n_local();
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(mesh.n_elements() + 4 * mesh.n_faces()) *
                 static_cast<std::size_t>(n_loc * n_loc));

    auto add_block = [&](int row_off, int col_off, const MatrixX &block) {
      for (int i = 0; i < n_loc; ++i)
        for (int j = 0; j < n_loc; ++j)
          trip.emplace_back(row_off + i, col_off + j, block(i, j));
    };

    for (int e = 0; e < mesh.n_elements(); ++e)
      {
        const QuadratureRule &rule = space.volume_quadrature(e);
        const BasisGrad       g    = space.eval_grad_basis(e, rule.points);
        MatrixX               flux_x(rule.size(), n_loc);
        MatrixX               flux_y(rule.size(), n_loc);
        for (Eigen::Index q = 0; q < rule.size(); ++q)
          {
            const Mat2 d = diffusion_tensor(
              diffusion, Vec2(rule.points(q, 0), rule.points(q, 1)));
            flux_x.row(q) = d(0, 0) * g.dx.row(q) + d(0, 1) * g.dy.row(q);
            flux_y.row(q) = d(1, 0) * g.dx.row(q) + d(1, 1) * g.dy.row(q);
          }
        const MatrixX local =
          g.dx.transpose() * rule.weights.asDiagonal() * flux_x +
          g.dy.transpose() * rule.weights.asDiagonal() * flux_y;
        add_block(space.offset(e), space.offset(e), local);
      }

    for (int f = 0; f < mesh.n_faces(); ++f)
      {
        const Face &face = mesh.faces[static_cast<std::size_t>(f)];
        if (face.is_boundary() && face.boundary_tag != 'D')
          continue;
        const QuadratureRule &rule  = space.face_quadrature(f);
        const Real            gamma = penalty.face_penalty(f);
        const VectorX        &w     = rule.weights;

        // (D grad phi) . n traces per side.
        auto normal_flux = [&](int element) {
          const BasisGrad g = space.eval_grad_basis(element, rule.points);
          MatrixX         fn(rule.size(), n_loc);
          for (Eigen::Index q = 0; q < rule.size(); ++q)
            {
              const Mat2 d = diffusion_tensor(
                diffusion, Vec2(rule.points(q, 0), rule.points(q, 1)));
              const Vec2 dn = d * face.normal;
              fn.row(q) = dn.x() * g.dx.row(q) + dn.y() * g.dy.row(q);
            }
          return fn;
        };

        const MatrixX &vo = space.basis_at_face(f, 0);
        const MatrixX  fo = normal_flux(face.owner);
        const int      oo = space.offset(face.owner);

        if (face.is_boundary())
          {
            add_block(oo, oo,
                      gamma * vo.transpose() * w.asDiagonal() * vo -
                        vo.transpose() * w.asDiagonal() * fo -
                        fo.transpose() * w.asDiagonal() * vo);
            continue;
          }

        const MatrixX &vn = space.basis_at_face(f, 1);
        const MatrixX  fn = normal_flux(face.neighbor);
        const int      on = space.offset(face.neighbor);

        add_block(oo, oo,
                  gamma * vo.transpose() * w.asDiagonal() * vo -
                    0.5 * vo.transpose() * w.asDiagonal() * fo -
                    0.5 * fo.transpose() * w.asDiagonal() * vo);
        add_block(oo, on,
                  -gamma * vo.transpose() * w.asDiagonal() * vn -
                    0.5 * vo.transpose() * w.asDiagonal() * fn +
                    0.5 * fo.transpose() * w.asDiagonal() * vn);
        add_block(on, oo,
                  -gamma * vn.transpose() * w.asDiagonal() * vo +
                    0.5 * vn.transpose() * w.asDiagonal() * fo -
                    0.5 * fn.transpose() * w.asDiagonal() * vo);
        add_block(on, on,
                  gamma * vn.transpose() * w.asDiagonal() * vn +
                    0.5 * vn.transpose() * w.asDiagonal() * fn +
                    0.5 * fn.transpose() * w.asDiagonal() * vn);
      }

    SparseMat a(space.n_dofs(), space.n_dofs());
    a.setFromTriplets(trip.begin(), trip.end());
    return a;
  }

  /// Per-element blocks of the trilinear coupling r(w, u, v) =
  /// int_Omega k12 w u v evaluated at the discrete state w = Phi_h:
  /// block(i, j) = int k12 Phi_h phi_j phi_i. Linear in the state.
  inline std::vector<MatrixX>
  nonlinear_reaction_blocks(const DgSpace          &space,
                            const CoefficientField &k12,
                            const VectorX          &state)
  {
    const int            n_loc = space.n_local();
    std::vector<MatrixX> blocks(
      static_cast<std::size_t>(space.mesh().n_elements()));
    for (int e = 0; e < space.mesh().n_elements(); ++e)
      {
        const QuadratureRule &rule = space.volume_quadrature(e);
        const MatrixX        &phi  = space.basis_at_volume(e);
        VectorX vals = phi * state.segment(space.offset(e), n_loc);
        for (Eigen::Index q = 0; q < rule.size(); ++q)
          vals[q] *= rule.weights[q] *
                     k12(Vec2(rule.points(q, 0), rule.points(q, 1)), 0.0);
        blocks[static_cast<std::size_t>(e)] =
          phi.transpose() * vals.asDiagonal() * phi;
      }
    return blocks;
  }

  /// Nonlinear reaction matrix R_N(Phi) as a sparse block-diagonal
  /// matrix; see nonlinear_reaction_blocks.
  inline SparseMat assemble_nonlinear_reaction(const DgSpace          &space,
                                               const CoefficientField &k12,
                                               const VectorX          &state)
  {
    const auto           blocks = nonlinear_reaction_blocks(space, k12, state);
    const int            n_loc  = space.n_local();
    std::vector<Triplet> trip;
    trip.reserve(blocks.size() * static_cast<std::size_t>(n_loc * n_loc));
    for (int e = 0; e < static_cast<int>(blocks.size()); ++e)
      for (int i = 0; i < n_loc; ++i)
        for (int j = 0; j < n_loc; ++j)
          trip.emplace_back(space.offset(e) + i, space.offset(e) + j,
                            blocks[static_cast<std::size_t>(e)](i, j));
    SparseMat r(space.n_dofs(), space.n_dofs());
    r.setFromTriplets(trip.begin(), trip.end());
    return r;
  }

  /// y += blockdiag(blocks) * x without forming the sparse matrix.
  inline void apply_blocks(const std::vector<MatrixX> &blocks,
                           const DgSpace              &space,
                           const VectorX              &x,
                           VectorX                    &y,
                           Real                        scale = 1.0)
  {
    const int n_loc = space.n_local();
    for (int e = 0; e < static_cast<int>(blocks.size()); ++e)
      y.segment(space.offset(e), n_loc).noalias() +=
        scale * (blocks[static_cast<std::size_t>(e)] *
                 x.segment(space.offset(e), n_loc));
  }

  /// Load vector int_Omega f(., t) phi_i plus the Dirichlet lifting
  /// int_{F_D} g (gamma phi_i - (D grad phi_i) . n).
  inline VectorX assemble_load(const DgSpace       &space,
                               const FieldFn       &f,
                               Real                 t,
                               const DiffusionSpec &diffusion,
                               const PenaltyParams &penalty,
                               const FieldFn       &g_dirichlet = FieldFn())
  {
    const PolyMesh &mesh  = space.mesh();
    const int       n_loc = space.n_local();
    VectorX         load  = VectorX::Zero(space.n_dofs());

    if (f)
      for (int e = 0; e < mesh.n_elements(); ++e)
        {
          const QuadratureRule &rule = space.volume_quadrature(e);
          const MatrixX        &phi  = space.basis_at_volume(e);
          VectorX               fw(rule.size());
          for (Eigen::Index q = 0; q < rule.size(); ++q)
            fw[q] = rule.weights[q] *
                    f(Vec2(rule.points(q, 0), rule.points(q, 1)), t);
          load.segment(space.offset(e), n_loc).noalias() =
            phi.transpose() * fw;
        }

    for (int fc = 0; fc < mesh.n_faces(); ++fc)
      {
        const Face &face = mesh.faces[static_cast<std::size_t>(fc)];
        if (!face.is_boundary() || face.boundary_tag != 'D')
          continue;
        const QuadratureRule &rule  = space.face_quadrature(fc);
        const Real            gamma = penalty.face_penalty(fc);
        const MatrixX        &vo    = space.basis_at_face(fc, 0);
        const BasisGrad       g = space.eval_grad_basis(face.owner, rule.points);
        VectorX               gw(rule.size());
        MatrixX               fo(rule.size(), n_loc);
        for (Eigen::Index q = 0; q < rule.size(); ++q)
          {
            const Vec2 x(rule.points(q, 0), rule.points(q, 1));
            const Vec2 dn = diffusion_tensor(diffusion, x) * face.normal;
            fo.row(q) = dn.x() * g.dx.row(q) + dn.y() * g.dy.row(q);
            gw[q]     = rule.weights[q] *
                    (g_dirichlet ? g_dirichlet(x, t) : 0.0);
          }
        load.segment(space.offset(face.owner), n_loc).noalias() +=
          (gamma * vo - fo).transpose() * gw;
      }
    return load;
  }

  /// Everything assembled once per (space, params, penalty) needed to
  /// advance the coupled system: mass, stiffness, both linear reaction
  /// matrices, and per-step builders of the state-dependent pieces.
  class AlgebraicSystem
  {
  public:
    AlgebraicSystem(const DgSpace           &space_,
                    const HeterodimerParams &params_,
                    Real                     gamma0 = 10.0)
      : spc(&space_)
      , params(params_)
      , penalty(penalty_coefficient(space_, params_, gamma0))
      , mass(assemble_mass(space_))
      , stiffness(assemble_stiffness(space_, params_.diffusion, penalty))
      , reaction_c(assemble_reaction(space_, params_.k1))
      , reaction_q(assemble_reaction(space_, params_.k1_tilde))
    {}

    const DgSpace           &space() const { return *spc; }
    const HeterodimerParams &model() const { return params; }
    const PenaltyParams     &penalty_params() const { return penalty; }
    const SparseMat         &M() const { return mass; }
    const SparseMat         &A() const { return stiffness; }
    const SparseMat         &R_c() const { return reaction_c; }
    const SparseMat         &R_q() const { return reaction_q; }

    std::vector<MatrixX> nonlinear_blocks(const VectorX &state) const
    {
      return nonlinear_reaction_blocks(*spc, params.k12, state);
    }

    VectorX load_c(Real t) const
    {
      return assemble_load(*spc, params.f_c, t, params.diffusion, penalty,
                           params.c_dirichlet);
    }

    VectorX load_q(Real t) const
    {
      return assemble_load(*spc, params.f_q, t, params.diffusion, penalty,
                           params.q_dirichlet);
    }

  private:
    const DgSpace    *spc;
    HeterodimerParams params;
    PenaltyParams     penalty;
    SparseMat         mass;
    SparseMat         stiffness;
    SparseMat         reaction_c;
    SparseMat         reaction_q;
  };
} // namespace polydg

#endif // POLYDG_FORMS_HPP
