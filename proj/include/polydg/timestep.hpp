#ifndef POLYDG_TIMESTEP_HPP
#define POLYDG_TIMESTEP_HPP

/// Theta-method time integration of the coupled semi-discrete system
///   M dC/dt + (A + R_L) C + R_N(C) Q = F_c
///   M dQ/dt + (A + R_Lt) Q - R_N(Q) C = F_q
/// with the nonlinear coupling linearized around lagged (backward Euler)
/// or extrapolated (Crank-Nicolson) states.

#include <polydg/forms.hpp>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <functional>
#include <memory>

namespace polydg
{
  /// How the nonlinear factor is frozen over a step: lagged uses the
  /// previous state, extrapolated uses 3/2 previous - 1/2 the one before.
  enum class Linearization
  {
    lagged,
    extrapolated
  };

  /// How the coupled linear system of a step is solved. block_factored
  /// factorizes the two fixed diagonal blocks once and iterates on the
  /// coupling to the residual tolerance; the others assemble the full
  /// two-field matrix each step.
  enum class SolverMode
  {
    block_factored,
    monolithic_lu,
    bicgstab
  };

  /// Time discretization parameters.
  struct ThetaScheme
  {
    Real          theta = 1.0;
    Real          dt    = 0.0;
    Linearization linearization = Linearization::lagged;
    SolverMode    mode          = SolverMode::block_factored;
    Real          rtol          = 1e-10;
    int           max_sweeps    = 200;
  };

  inline ThetaScheme backward_euler(Real dt)
  {
    return {1.0, dt, Linearization::lagged, SolverMode::block_factored,
            1e-10, 200};
  }

  inline ThetaScheme crank_nicolson(Real dt)
  {
    return {0.5, dt, Linearization::extrapolated, SolverMode::block_factored,
            1e-10, 200};
  }

  /// Coupled discrete state at one time level, carrying the previous
  /// level for extrapolated linearizations.
  struct StatePair
  {
    VectorX c;
    VectorX q;
    VectorX c_prev; ///< empty before the second level
    VectorX q_prev;
    Real    t             = 0.0;
    int     step_index    = 0;
    Real    last_residual = 0.0; ///< relative residual of the last solve

    bool has_history() const { return c_prev.size() > 0; }
  };

  /// Advances states of one AlgebraicSystem with fixed scheme and step
  /// size, reusing the factorized diagonal blocks across steps.
  class ThetaStepper
  {
  public:
    ThetaStepper(const AlgebraicSystem &system_, const ThetaScheme &scheme_)
      : sys(&system_)
      , sch(scheme_)
    {
      if (sch.dt <= 0.0)
        throw std::invalid_argument("ThetaStepper: dt must be positive");
      if (sch.theta < 0.0 || sch.theta > 1.0)
        throw std::invalid_argument("ThetaStepper: theta outside [0, 1]");
      k_c = sys->M() / sch.dt + sch.theta * (sys->A() + sys->R_c());
      k_q = sys->M() / sch.dt + sch.theta * (sys->A() + sys->R_q());
      if (sch.mode == SolverMode::block_factored)
        {
          factor_c = factorize(k_c);
          factor_q = factorize(k_q);
        }
    }

    const ThetaScheme &scheme() const { return sch; }

    /// One step from state.t to state.t + dt. A scheme with extrapolated
    /// linearization but no history yet takes a lagged first step with
    /// the same theta weights.
    StatePair step(const StatePair &state) const
    {
      const Real theta = sch.theta;
      const Real t_new = state.t + sch.dt;

      const bool extrapolate =
        sch.linearization == Linearization::extrapolated &&
        state.has_history();
      const VectorX c_star =
        extrapolate ? VectorX(1.5 * state.c - 0.5 * state.c_prev) : state.c;
      const VectorX q_star =
        extrapolate ? VectorX(1.5 * state.q - 0.5 * state.q_prev) : state.q;

      const std::vector<MatrixX> n_c = sys->nonlinear_blocks(c_star);
      const std::vector<MatrixX> n_q = sys->nonlinear_blocks(q_star);

      VectorX rhs_c = sys->M() * (state.c / sch.dt);
      VectorX rhs_q = sys->M() * (state.q / sch.dt);
      rhs_c += theta * sys->load_c(t_new);
      rhs_q += theta * sys->load_q(t_new);
      if (theta < 1.0)
        {
          rhs_c += (1.0 - theta) * sys->load_c(state.t);
          rhs_q += (1.0 - theta) * sys->load_q(state.t);
          rhs_c -= (1.0 - theta) * ((sys->A() + sys->R_c()) * state.c);
          rhs_q -= (1.0 - theta) * ((sys->A() + sys->R_q()) * state.q);
          apply_blocks(n_c, sys->space(), state.q, rhs_c, -(1.0 - theta));
          apply_blocks(n_q, sys->space(), state.c, rhs_q, +(1.0 - theta));
        }

      StatePair next;
      next.c_prev     = state.c;
      next.q_prev     = state.q;
      next.t          = t_new;
      next.step_index = state.step_index + 1;
      solve_coupled(n_c, n_q, rhs_c, rhs_q, state, next);
      return next;
    }

  private:
    struct Factorization
    {
      Eigen::SimplicialLDLT<SparseMat> ldlt;
      Eigen::SparseLU<SparseMat>       lu;
      bool                             use_lu = false;

      VectorX solve(const VectorX &b) const
      {
        return use_lu ? VectorX(lu.solve(b)) : VectorX(ldlt.solve(b));
      }
    };

    static std::shared_ptr<Factorization> factorize(const SparseMat &k)
    {
      auto f = std::make_shared<Factorization>();
      f->ldlt.compute(k);
      if (f->ldlt.info() != Eigen::Success)
        {
          f->use_lu = true;
          f->lu.compute(k);
          if (f->lu.info() != Eigen::Success)
            throw solver_error("factorization of a diagonal block failed");
        }
      return f;
    }

    /// Relative residual of the coupled system at (c, q).
    Real residual(const std::vector<MatrixX> &n_c,
                  const std::vector<MatrixX> &n_q,
                  const VectorX              &rhs_c,
                  const VectorX              &rhs_q,
                  const VectorX              &c,
                  const VectorX              &q) const
    {
      VectorX res_c = rhs_c - k_c * c;
      VectorX res_q = rhs_q - k_q * q;
      apply_blocks(n_c, sys->space(), q, res_c, -sch.theta);
      apply_blocks(n_q, sys->space(), c, res_q, +sch.theta);
      const Real rhs_norm =
        std::sqrt(rhs_c.squaredNorm() + rhs_q.squaredNorm());
      return std::sqrt(res_c.squaredNorm() + res_q.squaredNorm()) /
             std::max(rhs_norm, 1e-300);
    }

    void solve_coupled(const std::vector<MatrixX> &n_c,
                       const std::vector<MatrixX> &n_q,
                       const VectorX              &rhs_c,
                       const VectorX              &rhs_q,
                       const StatePair            &state,
                       StatePair                  &next) const
    {
      if (sch.mode == SolverMode::block_factored)
        {
          VectorX c = state.c;
          VectorX q = state.q;
          for (int sweep = 0; sweep < sch.max_sweeps; ++sweep)
            {
              VectorX b_c = rhs_c;
              apply_blocks(n_c, sys->space(), q, b_c, -sch.theta);
              c           = factor_c->solve(b_c);
              VectorX b_q = rhs_q;
              apply_blocks(n_q, sys->space(), c, b_q, +sch.theta);
              q = factor_q->solve(b_q);

              const Real rel = residual(n_c, n_q, rhs_c, rhs_q, c, q);
              if (rel <= sch.rtol)
                {
                  next.c             = std::move(c);
                  next.q             = std::move(q);
                  next.last_residual = rel;
                  return;
                }
            }
          // Coupling iteration stalled; fall through to a direct solve.
        }
      solve_monolithic(n_c, n_q, rhs_c, rhs_q, next);
    }

    void solve_monolithic(const std::vector<MatrixX> &n_c,
                          const std::vector<MatrixX> &n_q,
                          const VectorX              &rhs_c,
                          const VectorX              &rhs_q,
                          StatePair                  &next) const
    {
      const int n = static_cast<int>(k_c.rows());
      std::vector<Triplet> trip;
      trip.reserve(static_cast<std::size_t>(2 * k_c.nonZeros()) +
                   2 * n_c.size() * static_cast<std::size_t>(
                                      sys->space().n_local() *
                                      sys->space().n_local()));
      auto add_sparse = [&](const SparseMat &m, int ro, int co, Real s) {
        for (int k = 0; k < m.outerSize(); ++k)
          for (SparseMat::InnerIterator it(m, k); it; ++it)
            trip.emplace_back(ro + static_cast<int>(it.row()),
                              co + static_cast<int>(it.col()),
                              s * it.value());
      };
      auto add_blocks = [&](const std::vector<MatrixX> &blocks, int ro,
                            int co, Real s) {
        const int n_loc = sys->space().n_local();
        for (int e = 0; e < static_cast<int>(blocks.size()); ++e)
          {
            const int off = sys->space().offset(e);
            for (int i = 0; i < n_loc; ++i)
              for (int j = 0; j < n_loc; ++j)
                trip.emplace_back(ro + off + i, co + off + j,
                                  s * blocks[static_cast<std::size_t>(e)](i, j));
          }
      };
      add_sparse(k_c, 0, 0, 1.0);
      add_sparse(k_q, n, n, 1.0);
      add_blocks(n_c, 0, n, sch.theta);
      add_blocks(n_q, n, 0, -sch.theta);
      SparseMat s(2 * n, 2 * n);
      s.setFromTriplets(trip.begin(), trip.end());

      VectorX rhs(2 * n);
      rhs << rhs_c, rhs_q;
      VectorX x;
      if (sch.mode == SolverMode::bicgstab)
        {
          Eigen::BiCGSTAB<SparseMat> solver(s);
          solver.setTolerance(sch.rtol);
          x = solver.solve(rhs);
        }
      if (sch.mode != SolverMode::bicgstab ||
          (s * x - rhs).norm() > sch.rtol * rhs.norm())
        {
          Eigen::SparseLU<SparseMat> solver(s);
          if (solver.info() != Eigen::Success)
            throw solver_error("monolithic factorization failed");
          x = solver.solve(rhs);
        }
      const Real rel = (s * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
      if (rel > sch.rtol)
        throw solver_error("coupled solve missed the residual tolerance: " +
                           std::to_string(rel));
      next.c             = x.head(n);
      next.q             = x.tail(n);
      next.last_residual = rel;
    }

    const AlgebraicSystem         *sys;
    ThetaScheme                    sch;
    SparseMat                      k_c;
    SparseMat                      k_q;
    std::shared_ptr<Factorization> factor_c;
    std::shared_ptr<Factorization> factor_q;
  };

  /// One theta step; convenience wrapper over ThetaStepper for callers
  /// that step occasionally rather than in a tight loop.
  inline StatePair step(const AlgebraicSystem &system,
                        const ThetaScheme     &scheme,
                        const StatePair       &state)
  {
    return ThetaStepper(system, scheme).step(state);
  }

  /// First step of a Crank-Nicolson run: theta = 1/2 weights with lagged
  /// linearization, since no extrapolation history exists yet.
  inline StatePair bootstrap_cn(const AlgebraicSystem &system,
                                const ThetaScheme     &scheme,
                                const StatePair       &initial)
  {
    StatePair plain = initial;
    plain.c_prev.resize(0);
    plain.q_prev.resize(0);
    return ThetaStepper(system, scheme).step(plain);
  }

  /// Integrates from the initial state to t_end, which must be an
  /// integer multiple of dt (1e-9 relative). The callback, when given,
  /// sees the initial state and every accepted step.
  inline StatePair
  solve_transient(const AlgebraicSystem                  &system,
                  const ThetaScheme                      &scheme,
                  const StatePair                        &initial,
                  Real                                    t_end,
                  const std::function<void(const StatePair &)> &callback = {})
  {
    const Real span = t_end - initial.t;
    const int  n_steps = static_cast<int>(std::llround(span / scheme.dt));
    if (n_steps < 1 ||
        std::abs(n_steps * scheme.dt - span) > 1e-9 * std::abs(span))
      throw std::invalid_argument(
        "solve_transient: t_end - t0 is not an integer multiple of dt");

    ThetaStepper stepper(system, scheme);
    StatePair    state = initial;
    if (callback)
      callback(state);
    for (int k = 0; k < n_steps; ++k)
      {
        state = stepper.step(state);
        if (callback)
          callback(state);
      }
    return state;
  }

  /// Discrete initial state: elementwise projections of the model's
  /// initial fields.
  inline StatePair initial_state(const AlgebraicSystem &system, Real t0 = 0.0)
  {
    const HeterodimerParams &p = system.model();
    StatePair                s;
    s.t = t0;
    s.c = p.c0 ? system.space().l2_project(p.c0, t0)
               : VectorX::Zero(system.space().n_dofs());
    s.q = p.q0 ? system.space().l2_project(p.q0, t0)
               : VectorX::Zero(system.space().n_dofs());
    return s;
  }
} // namespace polydg

#endif // POLYDG_TIMESTEP_HPP
