#include <polydg/model.hpp>

#include <Eigen/Eigenvalues>

#include <doctest.h>

using namespace polydg;

namespace
{
  HeterodimerParams low_diffusion_params()
  {
    HeterodimerParams p;
    p.diffusion.d_ext = 1e-6;
    p.k0              = 0.75;
    p.k1              = 1.0;
    p.k1_tilde        = 0.6;
    p.k12             = 1.0;
    return p;
  }

  HeterodimerParams anisotropic_params()
  {
    HeterodimerParams p;
    p.diffusion.d_ext = 8.0;
    p.diffusion.d_axn = 80.0;
    p.diffusion.axon  = [](const Vec2 &, Real) { return Vec2(1.0, 0.0); };
    p.k0              = 0.6;
    p.k1              = 0.5;
    p.k1_tilde        = 0.3;
    p.k12             = 1.0;
    return p;
  }
} // namespace

TEST_CASE("equilibria of the low-diffusion parameter set")
{
  const auto [unstable, stable] = equilibria(low_diffusion_params());
  CHECK(unstable.x() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(unstable.y() == 0.0);
  CHECK(stable.x() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(stable.y() == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("wave diagnostics of the low-diffusion parameter set")
{
  const ModelDiagnostics d = diagnostics(low_diffusion_params());
  CHECK(d.wave_condition);
  CHECK(d.alpha == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(d.min_wave_speed ==
        doctest::Approx(2.0 * std::sqrt(1e-6 * 0.15)).epsilon(1e-15));
}

TEST_CASE("diagnostics of the anisotropic parameter set")
{
  const ModelDiagnostics d = diagnostics(anisotropic_params());
  CHECK(d.alpha == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(d.stable_equilibrium.x() == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(d.stable_equilibrium.y() == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(d.wave_condition);
  // Squared minimal speed identity v^2 = 4 d_ext alpha.
  CHECK(d.min_wave_speed * d.min_wave_speed ==
        doctest::Approx(4.0 * 8.0 * d.alpha).epsilon(1e-14));
}

TEST_CASE("wave condition fails when clearance dominates production")
{
  HeterodimerParams p;
  p.k0       = 0.0;
  p.k1       = 1.0;
  p.k1_tilde = 1.0;
  p.k12      = 1.0;
  CHECK_FALSE(wave_condition(p));
  CHECK(fk_alpha(p) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(min_wave_speed(p), std::domain_error);
  const ModelDiagnostics d = diagnostics(p);
  CHECK(d.min_wave_speed == 0.0);
  CHECK(d.stable_equilibrium.x() == doctest::Approx(1.0));
  CHECK(d.stable_equilibrium.y() == doctest::Approx(-1.0));
}

TEST_CASE("isotropic diffusion tensor is a scaled identity")
{
  DiffusionSpec spec;
  spec.d_ext = 3.5;
  CHECK(spec.isotropic());
  const Mat2 d = diffusion_tensor(spec, Vec2(0.2, 0.7));
  CHECK((d - 3.5 * Mat2::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("anisotropic diffusion tensor has the expected eigenvalues")
{
  DiffusionSpec spec;
  spec.d_ext = 8.0;
  spec.d_axn = 80.0;
  spec.axon  = [](const Vec2 &, Real) {
    return Vec2(std::sqrt(0.5), std::sqrt(0.5));
  };
  const Mat2 d = diffusion_tensor(spec, Vec2::Zero());
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat2> eig(d);
  CHECK(eig.eigenvalues()[0] == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(eig.eigenvalues()[1] == doctest::Approx(88.0).epsilon(1e-14));
  // Principal direction along the axon.
  const Vec2 a = eig.eigenvectors().col(1);
  CHECK(std::abs(a.dot(Vec2(std::sqrt(0.5), std::sqrt(0.5)))) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("non-unit axonal directions are normalized")
{
  DiffusionSpec spec;
  spec.d_ext = 1.0;
  spec.d_axn = 2.0;
  spec.axon  = [](const Vec2 &, Real) { return Vec2(5.0, 0.0); };
  const Mat2 d = diffusion_tensor(spec, Vec2::Zero());
  CHECK(d(0, 0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(d(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d(0, 1) == doctest::Approx(0.0));

  // A vanishing direction degrades to isotropic diffusion.
  spec.axon = [](const Vec2 &, Real) { return Vec2(0.0, 0.0); };
  const Mat2 d0 = diffusion_tensor(spec, Vec2::Zero());
  CHECK((d0 - Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("coefficient fields remember constants and wrap functions")
{
  const CoefficientField c = 2.5;
  REQUIRE(c.constant.has_value());
  CHECK(*c.constant == 2.5);
  CHECK(c(Vec2(0.1, 0.9), 3.0) == 2.5);

  const CoefficientField f =
    FieldFn([](const Vec2 &x, Real) { return x.x(); });
  CHECK_FALSE(f.constant.has_value());
  CHECK(f(Vec2(0.25, 0.0), 0.0) == 0.25);
}

TEST_CASE("equilibria reject field coefficients and bad rates")
{
  HeterodimerParams field_params;
  field_params.k1 = FieldFn([](const Vec2 &x, Real) { return 1.0 + x.x(); });
  CHECK_THROWS_AS(equilibria(field_params), std::invalid_argument);

  HeterodimerParams zero_rate;
  zero_rate.k12 = 0.0;
  CHECK_THROWS_AS(equilibria(zero_rate), std::invalid_argument);
}

TEST_CASE("forcings default to empty, meaning zero")
{
  const HeterodimerParams p = low_diffusion_params();
  CHECK_FALSE(static_cast<bool>(p.f_c));
  CHECK_FALSE(static_cast<bool>(p.f_q));
}
