#include <polydg/harness.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace polydg;

namespace
{
  Config parse(const std::string &text)
  {
    std::istringstream in(text);
    return Config::from_stream(in);
  }

  std::string read_all(const std::filesystem::path &path)
  {
    std::ifstream     in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::filesystem::path fresh_dir(const std::string &name)
  {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
  }
} // namespace

TEST_CASE("experiment configuration defaults")
{
  const ExperimentConfig cfg = ExperimentConfig::from_config(parse(""));
  CHECK(cfg.scenario == "convergence");
  CHECK(cfg.test_case == "test1");
  CHECK(cfg.n_elements == std::vector<int>{30, 100, 300, 1000});
  CHECK(cfg.degrees == std::vector<int>{1, 2, 3, 4});
  CHECK(cfg.seed == 42);
  CHECK(cfg.lloyd == 100);
  CHECK(cfg.theta == 0.5);
  CHECK(cfg.rtol == 1e-10);
  CHECK(cfg.gamma0 == 10.0);
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.boundary == "dirichlet");
  CHECK(cfg.schemes == std::vector<std::string>{"be", "cn"});
}

TEST_CASE("unknown configuration keys are rejected")
{
  CHECK_THROWS_WITH_AS(
    ExperimentConfig::from_config(parse("[mesh]\nn_elments = 30\n")),
    doctest::Contains("mesh.n_elments"), std::invalid_argument);
}

TEST_CASE("scheme names map to time integrators")
{
  ExperimentConfig cfg = ExperimentConfig::from_config(parse(""));

  const ThetaScheme be = cfg.scheme_for("be", 0.1);
  CHECK(be.theta == 1.0);
  CHECK(be.linearization == Linearization::lagged);

  const ThetaScheme cn = cfg.scheme_for("cn", 0.1);
  CHECK(cn.theta == 0.5);
  CHECK(cn.linearization == Linearization::extrapolated);

  const ThetaScheme th = cfg.scheme_for("theta", 0.05);
  CHECK(th.theta == 0.5);
  CHECK(th.dt == 0.05);

  CHECK_THROWS_AS(cfg.scheme_for("rk4", 0.1), std::invalid_argument);

  cfg.linearization = "lagged";
  CHECK(cfg.scheme_for("cn", 0.1).linearization == Linearization::lagged);
  cfg.linearization = "trapezoid";
  CHECK_THROWS_AS(cfg.scheme_for("cn", 0.1), std::invalid_argument);

  cfg.linearization = "auto";
  cfg.solver        = "bicgstab";
  cfg.rtol          = 1e-8;
  const ThetaScheme tuned = cfg.scheme_for("be", 0.2);
  CHECK(tuned.mode == SolverMode::bicgstab);
  CHECK(tuned.rtol == 1e-8);
}

TEST_CASE("tiny convergence study writes deterministic outputs")
{
  const auto        dir = fresh_dir("polydg_harness_conv");
  const std::string base = "[experiment]\n"
                           "scenario = convergence\n"
                           "test_case = test1\n"
                           "[mesh]\n"
                           "n_elements = 6 10\n"
                           "seed = 4\n"
                           "lloyd = 20\n"
                           "[space]\n"
                           "degree = 1\n"
                           "[time]\n"
                           "dt = 0.001\n"
                           "t_end = 0.002\n"
                           "schemes = cn\n"
                           "[output]\n"
                           "dir = ";

  std::ostringstream quiet;
  const ScenarioResult first =
    run_experiment(parse(base + (dir / "a").string() + "\n"), quiet);
  const ScenarioResult second =
    run_experiment(parse(base + (dir / "b").string() + "\n"), quiet);

  // 2 meshes x 1 degree x 2 fields.
  CHECK(first.records.size() == 4);
  for (const ErrorRecord &r : first.records)
    {
      CHECK(r.l2 > 0.0);
      CHECK(r.energy > 0.0);
      CHECK(r.dt == 0.001);
      CHECK(r.t_end == 0.002);
    }
  CHECK(std::filesystem::exists(dir / "a" / "errors.csv"));
  CHECK(std::filesystem::exists(dir / "a" / "config_effective.txt"));
  CHECK(read_all(dir / "a" / "errors.csv") ==
        read_all(dir / "b" / "errors.csv"));
  (void)second;
  std::filesystem::remove_all(dir);
}

TEST_CASE("equilibrium scenario reports distances and diagnostics")
{
  const auto        dir = fresh_dir("polydg_harness_eq");
  const std::string cfg_text = "[experiment]\n"
                               "scenario = equilibrium_wavefront\n"
                               "[mesh]\n"
                               "source = agglomerate\n"
                               "n_elements = 12\n"
                               "disk_rings = 6\n"
                               "seed = 3\n"
                               "[space]\n"
                               "degree = 1\n"
                               "[model]\n"
                               "d_ext = 1e-6\n"
                               "k0 = 0.75\n"
                               "k1 = 1\n"
                               "k1_tilde = 0.6\n"
                               "k12 = 1\n"
                               "boundary = neumann\n"
                               "c0 = 0.6\n"
                               "q0_amplitude = 0.0\n"
                               "[time]\n"
                               "dt = 0.01\n"
                               "t_end = 0.05\n"
                               "[output]\n"
                               "dir = " +
                               (dir).string() + "\n";

  std::ostringstream   banner;
  const ScenarioResult res = run_experiment(parse(cfg_text), banner);

  // Starting on the q = 0 axis with q0 = 0 the state slides toward the
  // unstable equilibrium; distances stay finite and are reported.
  CHECK(std::isfinite(res.final_sup_distance));
  CHECK(std::isfinite(res.min_q));
  CHECK(res.diagnostics.wave_condition);
  CHECK(res.diagnostics.alpha == doctest::Approx(0.15).epsilon(1e-14));
  const std::string text = banner.str();
  CHECK(text.find("wave_condition = true") != std::string::npos);
  CHECK(text.find("alpha = 0.15") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "equilibrium_distance.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("travelling wave scenario forces the front test case")
{
  const auto        dir = fresh_dir("polydg_harness_wave");
  const std::string cfg_text = "[experiment]\n"
                               "scenario = travelling_wave\n"
                               "test_case = test1\n" // overridden inside
                               "[mesh]\n"
                               "n_elements = 40\n"
                               "seed = 6\n"
                               "lloyd = 30\n"
                               "[space]\n"
                               "degree = 2\n"
                               "[model]\n"
                               "d_ext = 0.0001\n"
                               "[time]\n"
                               "dt = 0.25\n"
                               "t_end = 1\n"
                               "[wave]\n"
                               "pairs = 2:40\n"
                               "[output]\n"
                               "snapshots = 2\n"
                               "dir = " +
                               dir.string() + "\n";

  std::ostringstream   log;
  const ScenarioResult res = run_experiment(parse(cfg_text), log);
  REQUIRE(res.wave.has_value());
  CHECK(res.wave->positions.size() >= 2);
  for (const ErrorRecord &r : res.records)
    CHECK(r.test == "test2");
  CHECK(std::filesystem::exists(dir / "wavefront.csv"));
  CHECK(std::filesystem::exists(dir / "errors.csv"));
  // 4 steps, 2 snapshots requested: stride 2 hits steps 0, 2, 4.
  CHECK(std::filesystem::exists(dir / "snapshot_00000.vtk"));
  CHECK(std::filesystem::exists(dir / "snapshot_00004.vtk"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("loading a mesh collapses the element-count sweep")
{
  const auto     dir  = fresh_dir("polydg_harness_load");
  std::filesystem::create_directories(dir);
  const PolyMesh mesh = generate_voronoi_mesh({{0, 0}, {1, 1}}, 6, 11, 20);
  const auto     mesh_path = dir / "m.txt";
  save_mesh(mesh, mesh_path.string());

  const std::string cfg_text = "[experiment]\n"
                               "scenario = convergence\n"
                               "[mesh]\n"
                               "source = load\n"
                               "path = " +
                               mesh_path.string() +
                               "\n"
                               "n_elements = 6 10 30\n"
                               "[space]\n"
                               "degree = 1\n"
                               "[time]\n"
                               "dt = 0.001\n"
                               "t_end = 0.002\n"
                               "[output]\n"
                               "dir = " +
                               (dir / "out").string() + "\n";

  std::ostringstream   quiet;
  const ScenarioResult res = run_experiment(parse(cfg_text), quiet);
  // One mesh on disk: one run per degree, two fields.
  CHECK(res.records.size() == 2);
  for (const ErrorRecord &r : res.records)
    CHECK(r.n_el == mesh.n_elements());
  std::filesystem::remove_all(dir);
}

TEST_CASE("wavefront scenario refuses to run without the wave condition")
{
  // Default rates give alpha = k12*k0/k1 - k1_tilde = -1.
  std::ostringstream log;
  CHECK_THROWS_AS(
    run_experiment(parse("[experiment]\nscenario = equilibrium_wavefront\n"
                         "[mesh]\nn_elements = 4\ndisk_rings = 3\n"
                         "source = agglomerate\n"),
                   log),
    std::invalid_argument);
}

TEST_CASE("unknown scenarios are rejected")
{
  CHECK_THROWS_AS(
    run_experiment(parse("[experiment]\nscenario = nonsense\n")),
    std::invalid_argument);
}
