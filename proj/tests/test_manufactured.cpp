#include <polydg/manufactured.hpp>

#include <doctest.h>

#include <random>

using namespace polydg;

namespace
{
  HeterodimerParams unit_params()
  {
    HeterodimerParams p;
    p.diffusion.d_ext = 1.0;
    p.k1              = 1.0;
    p.k1_tilde        = 1.0;
    p.k12             = 1.0;
    return p;
  }

  // Fourth-order central difference along one coordinate.
  template <class F>
  Real fd1(F &&f, Real x, Real h = 1e-4)
  {
    return (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) +
            f(x - 2.0 * h)) /
           (12.0 * h);
  }

  void check_closures(const ManufacturedSolution &sol, uint64_t seed)
  {
    std::mt19937                           rng(seed);
    std::uniform_real_distribution<double> unif(0.1, 0.9);
    for (int i = 0; i < 40; ++i)
      {
        const Vec2 x(sol.domain.lo.x() + sol.domain.width() * unif(rng),
                     sol.domain.lo.y() + sol.domain.height() * unif(rng));
        const Real t = unif(rng);

        for (const bool second : {false, true})
          {
            const FieldFn    &u  = second ? sol.q : sol.c;
            const VecFieldFn &gu = second ? sol.grad_q : sol.grad_c;
            const FieldFn    &ut = second ? sol.dq_dt : sol.dc_dt;
            const FieldFn    &lu = second ? sol.lap_q : sol.lap_c;

            const Vec2 g = gu(x, t);
            CHECK(g.x() ==
                  doctest::Approx(fd1([&](Real s) {
                    return u(Vec2(s, x.y()), t);
                  }, x.x())).epsilon(1e-7));
            CHECK(g.y() ==
                  doctest::Approx(fd1([&](Real s) {
                    return u(Vec2(x.x(), s), t);
                  }, x.y())).epsilon(1e-7));
            CHECK(ut(x, t) ==
                  doctest::Approx(fd1([&](Real s) { return u(x, s); }, t))
                    .epsilon(1e-7));
            const Real lap_fd =
              fd1([&](Real s) { return gu(Vec2(s, x.y()), t).x(); }, x.x()) +
              fd1([&](Real s) { return gu(Vec2(x.x(), s), t).y(); }, x.y());
            CHECK(lu(x, t) == doctest::Approx(lap_fd).epsilon(1e-6));
          }
      }
  }
} // namespace

TEST_CASE("oscillatory solution satisfies the strong equations")
{
  const HeterodimerParams    params = unit_params();
  const ManufacturedSolution sol    = make_oscillatory_solution(params);
  CHECK(sol.name == "test1");
  CHECK(max_fd_residual(sol, params) < 1e-6);
}

TEST_CASE("front solution satisfies the strong equations")
{
  HeterodimerParams params = unit_params();
  params.diffusion.d_ext   = 0.01;
  const ManufacturedSolution sol = make_front_solution(params, 0.1);
  CHECK(sol.name == "test2");
  CHECK(sol.domain.hi.x() == 5.0);
  CHECK(max_fd_residual(sol, params) < 1e-6);
}

TEST_CASE("analytic derivative closures match finite differences")
{
  const HeterodimerParams params = unit_params();
  check_closures(make_oscillatory_solution(params), 11);
  check_closures(make_front_solution(params, 0.25), 13);
}

TEST_CASE("front solution fields are complementary")
{
  const ManufacturedSolution sol = make_front_solution(unit_params(), 0.1);
  std::mt19937                           rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 50; ++i)
    {
      const Vec2 x(5.0 * unif(rng), unif(rng));
      const Real t = 2.0 * unif(rng);
      CHECK(sol.c(x, t) + sol.q(x, t) == doctest::Approx(1.0).epsilon(1e-14));
      // The front midpoint sits at x = 1 + speed t.
    }
  const Real t = 3.7;
  CHECK(sol.c(Vec2(1.0 + 0.1 * t, 0.4), t) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("forcing derivation requires isotropic diffusion")
{
  HeterodimerParams params = unit_params();
  params.diffusion.d_axn   = 1.0;
  params.diffusion.axon = [](const Vec2 &, Real) { return Vec2(1.0, 0.0); };
  CHECK_THROWS_AS(make_oscillatory_solution(params), std::invalid_argument);
}

TEST_CASE("residual check flags a corrupted forcing")
{
  const HeterodimerParams params = unit_params();
  ManufacturedSolution    sol    = make_oscillatory_solution(params);
  const FieldFn           good   = sol.f_c;
  sol.f_c = [good](const Vec2 &x, Real t) { return good(x, t) + 1e-3; };
  CHECK(max_fd_residual(sol, params) > 5e-4);
}

TEST_CASE("applying a solution installs data and initial fields")
{
  HeterodimerParams          params = unit_params();
  const ManufacturedSolution sol    = make_oscillatory_solution(params);
  apply_manufactured(params, sol);

  const Vec2 x(0.3, 0.8);
  CHECK(params.c0(x, 0.0) == sol.c(x, 0.0));
  CHECK(params.q0(x, 0.0) == sol.q(x, 0.0));
  CHECK(params.c_dirichlet(x, 0.7) == sol.c(x, 0.7));
  CHECK(params.q_dirichlet(x, 0.7) == sol.q(x, 0.7));
  CHECK(params.f_c(x, 0.2) == sol.f_c(x, 0.2));
  CHECK(params.f_q(x, 0.2) == sol.f_q(x, 0.2));
}
