#ifndef POLYDG_HARNESS_HPP
#define POLYDG_HARNESS_HPP

/// Experiment harness: reads a configuration, builds meshes, spaces and
/// systems, runs the requested scenario and writes CSV/VTK artifacts.

#include <polydg/agglomerate.hpp>
#include <polydg/analysis.hpp>
#include <polydg/config.hpp>
#include <polydg/manufactured.hpp>
#include <polydg/mesh_generate.hpp>
#include <polydg/timestep.hpp>
#include <polydg/vtk.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

namespace polydg
{
  /// Typed view of a configuration file; see README for the key list.
  struct ExperimentConfig
  {
    Config raw;

    std::string scenario  = "convergence";
    std::string test_case = "test1";

    // mesh
    std::string      mesh_source = "generate";
    Rect             domain{{0.0, 0.0}, {1.0, 1.0}};
    bool             domain_given = false;
    std::vector<int> n_elements{30, 100, 300, 1000};
    uint64_t         seed  = 42;
    int              lloyd = 100;
    std::string      mesh_path;
    Vec2             disk_center{0.02, 0.0};
    Real             disk_radius  = 0.1;
    int              disk_rings   = 36;
    int              disk_sectors = 6;

    // space
    std::vector<int> degrees{1, 2, 3, 4};
    bool             orthonormalize = true;
    int              volume_order   = -1;
    int              face_points    = -1;

    // model
    Real        d_ext = 1.0;
    Real        d_axn = 0.0;
    std::string axon_kind = "none"; // none | uniform | radial | file
    Vec2        axon_dir{1.0, 0.0};
    std::string axon_path;
    Real        k0 = 0.0, k1 = 1.0, k1_tilde = 1.0, k12 = 1.0;
    std::string boundary = "dirichlet";

    // initial data (equilibrium and custom scenarios)
    Real c0_const = 0.0;
    Real q0_amp = 0.0, q0_width = 50.0;
    Vec2 q0_center{0.02, 0.0};

    // time
    Real              theta = 0.5;
    std::string       linearization = "auto"; // auto | lagged | extrapolated
    std::vector<Real> dts{1e-5};
    Real              t_end = 1e-3;
    std::string       solver = "block"; // block | monolithic | bicgstab
    Real              rtol   = 1e-10;
    std::vector<std::string> schemes{"be", "cn"};

    Real gamma0 = 10.0;

    // travelling-wave specifics
    Real                             wave_speed = 0.1;
    Real                             probe_y    = 0.5;
    Real                             level      = 0.5;
    std::vector<std::pair<int, int>> pairs; ///< (degree, n_el) overrides

    // output
    std::string out_dir   = "out";
    int         snapshots = 0;

    static ExperimentConfig from_config(Config cfg)
    {
      ExperimentConfig c;
      c.scenario  = cfg.get_string("experiment.scenario", c.scenario);
      c.test_case = cfg.get_string("experiment.test_case", c.test_case);

      c.mesh_source = cfg.get_string("mesh.source", c.mesh_source);
      {
        const std::vector<Real> d =
          cfg.get_reals("mesh.domain", {0.0, 0.0, 1.0, 1.0});
        if (d.size() != 4)
          throw std::invalid_argument("mesh.domain needs 'x0 y0 x1 y1'");
        c.domain       = {{d[0], d[1]}, {d[2], d[3]}};
        c.domain_given = cfg.has("mesh.domain");
      }
      c.n_elements = cfg.get_ints("mesh.n_elements", c.n_elements);
      c.seed = static_cast<uint64_t>(cfg.get_int64("mesh.seed", 42));
      c.lloyd        = cfg.get_int("mesh.lloyd", c.lloyd);
      c.mesh_path    = cfg.get_string("mesh.path", "");
      c.disk_rings   = cfg.get_int("mesh.disk_rings", c.disk_rings);
      c.disk_sectors = cfg.get_int("mesh.disk_sectors", c.disk_sectors);
      c.disk_radius  = cfg.get_real("mesh.disk_radius", c.disk_radius);
      {
        const std::vector<Real> dc = cfg.get_reals(
          "mesh.disk_center", {c.disk_center.x(), c.disk_center.y()});
        if (dc.size() != 2)
          throw std::invalid_argument("mesh.disk_center needs 'x y'");
        c.disk_center = {dc[0], dc[1]};
      }

      c.degrees        = cfg.get_ints("space.degree", c.degrees);
      c.orthonormalize = cfg.get_bool("space.orthonormalize", true);
      c.volume_order   = cfg.get_int("space.volume_order", -1);
      c.face_points    = cfg.get_int("space.face_points", -1);

      c.d_ext     = cfg.get_real("model.d_ext", c.d_ext);
      c.d_axn     = cfg.get_real("model.d_axn", c.d_axn);
      c.axon_kind = cfg.get_string("model.axon", c.axon_kind);
      {
        const std::vector<Real> a =
          cfg.get_reals("model.axon_dir", {c.axon_dir.x(), c.axon_dir.y()});
        if (a.size() != 2)
          throw std::invalid_argument("model.axon_dir needs 'ax ay'");
        c.axon_dir = {a[0], a[1]};
      }
      c.axon_path = cfg.get_string("model.axon_path", "");
      c.k0        = cfg.get_real("model.k0", c.k0);
      c.k1        = cfg.get_real("model.k1", c.k1);
      c.k1_tilde  = cfg.get_real("model.k1_tilde", c.k1_tilde);
      c.k12       = cfg.get_real("model.k12", c.k12);
      c.boundary  = cfg.get_string("model.boundary", c.boundary);

      c.c0_const = cfg.get_real("model.c0", c.c0_const);
      c.q0_amp   = cfg.get_real("model.q0_amplitude", c.q0_amp);
      c.q0_width = cfg.get_real("model.q0_width", c.q0_width);
      {
        const std::vector<Real> qc = cfg.get_reals(
          "model.q0_center", {c.q0_center.x(), c.q0_center.y()});
        if (qc.size() != 2)
          throw std::invalid_argument("model.q0_center needs 'x y'");
        c.q0_center = {qc[0], qc[1]};
      }

      c.theta         = cfg.get_real("time.theta", c.theta);
      c.linearization = cfg.get_string("time.linearization", c.linearization);
      c.dts           = cfg.get_reals("time.dt", c.dts);
      c.t_end         = cfg.get_real("time.t_end", c.t_end);
      c.solver        = cfg.get_string("time.solver", c.solver);
      c.rtol          = cfg.get_real("time.rtol", c.rtol);
      {
        std::istringstream ss(
          cfg.get_string("time.schemes", "be cn"));
        c.schemes.clear();
        std::string tok;
        while (ss >> tok)
          c.schemes.push_back(tok);
      }

      c.gamma0 = cfg.get_real("penalty.gamma0", c.gamma0);

      c.wave_speed = cfg.get_real("wave.speed", c.wave_speed);
      c.probe_y    = cfg.get_real("wave.probe_y", c.probe_y);
      c.level      = cfg.get_real("wave.level", c.level);
      {
        std::istringstream ss(cfg.get_string("wave.pairs", ""));
        std::string        tok;
        while (ss >> tok)
          {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
              throw std::invalid_argument(
                "wave.pairs entries look like 'p:n_elements'");
            c.pairs.emplace_back(std::stoi(tok.substr(0, colon)),
                                 std::stoi(tok.substr(colon + 1)));
          }
      }

      c.out_dir   = cfg.get_string("output.dir", c.out_dir);
      c.snapshots = cfg.get_int("output.snapshots", c.snapshots);

      cfg.reject_unused();
      c.raw = std::move(cfg);
      return c;
    }

    ThetaScheme scheme_for(const std::string &name, Real dt) const
    {
      ThetaScheme s;
      if (name == "be")
        s = backward_euler(dt);
      else if (name == "cn")
        s = crank_nicolson(dt);
      else if (name == "theta")
        {
          s.theta = theta;
          s.dt    = dt;
          s.linearization = theta == 0.5 ? Linearization::extrapolated
                                         : Linearization::lagged;
        }
      else
        throw std::invalid_argument("unknown scheme '" + name + "'");
      if (linearization == "lagged")
        s.linearization = Linearization::lagged;
      else if (linearization == "extrapolated")
        s.linearization = Linearization::extrapolated;
      else if (linearization != "auto")
        throw std::invalid_argument("unknown linearization '" +
                                    linearization + "'");
      s.rtol = rtol;
      if (solver == "block")
        s.mode = SolverMode::block_factored;
      else if (solver == "monolithic")
        s.mode = SolverMode::monolithic_lu;
      else if (solver == "bicgstab")
        s.mode = SolverMode::bicgstab;
      else
        throw std::invalid_argument("unknown solver '" + solver + "'");
      return s;
    }
  };

  /// Aggregate outcome of one scenario run.
  struct ScenarioResult
  {
    std::vector<ErrorRecord> records;
    ModelDiagnostics         diagnostics;
    std::optional<WaveTrace> wave;
    Real final_sup_distance = std::numeric_limits<Real>::quiet_NaN();
    Real min_q              = std::numeric_limits<Real>::quiet_NaN();
    bool undershoot         = false;
    std::vector<std::string> outputs;
  };

  namespace harness_detail
  {
    inline HeterodimerParams model_params(const ExperimentConfig &cfg)
    {
      HeterodimerParams p;
      p.diffusion.d_ext = cfg.d_ext;
      p.diffusion.d_axn = cfg.d_axn;
      if (cfg.axon_kind == "uniform")
        {
          const Vec2 a = cfg.axon_dir.normalized();
          p.diffusion.axon = [a](const Vec2 &, Real) { return a; };
        }
      else if (cfg.axon_kind == "radial")
        {
          const Vec2 c = cfg.disk_center;
          p.diffusion.axon = [c](const Vec2 &x, Real) {
            const Vec2 r = x - c;
            const Real n = r.norm();
            return n < 1e-12 ? Vec2(1.0, 0.0) : Vec2(r / n);
          };
        }
      else if (cfg.axon_kind == "file")
        {
          // Wired once the mesh exists; see wire_axon.
        }
      else if (cfg.axon_kind != "none")
        throw std::invalid_argument("unknown axon field '" + cfg.axon_kind +
                                    "'");
      p.k0       = cfg.k0;
      p.k1       = cfg.k1;
      p.k1_tilde = cfg.k1_tilde;
      p.k12      = cfg.k12;
      return p;
    }

    /// Reads one unit direction per mesh element ("ax ay" lines) and
    /// wraps them as a piecewise-constant spatial field.
    inline VecFieldFn load_axon_field(const std::string &path,
                                      const PolyMesh    &mesh)
    {
      std::ifstream in(path);
      if (!in)
        throw parse_error("cannot open axon field file '" + path + "'", 0);
      auto dirs = std::make_shared<std::vector<Vec2>>();
      std::string line;
      int         line_no = 0;
      while (std::getline(in, line))
        {
          ++line_no;
          const auto pos = line.find_first_not_of(" \t\r");
          if (pos == std::string::npos || line[pos] == '#')
            continue;
          std::istringstream ss(line);
          Real               ax = 0.0, ay = 0.0;
          ss >> ax >> ay;
          if (ss.fail())
            throw parse_error("expected 'ax ay'", line_no);
          dirs->emplace_back(ax, ay);
        }
      if (static_cast<int>(dirs->size()) != mesh.n_elements())
        throw parse_error("axon field has " + std::to_string(dirs->size()) +
                            " directions for " +
                            std::to_string(mesh.n_elements()) + " elements",
                          line_no);
      auto locator = std::make_shared<ElementLocator>(mesh);
      return [dirs, locator](const Vec2 &x, Real) {
        const int e = locator->locate(x);
        return (*dirs)[static_cast<std::size_t>(std::max(e, 0))];
      };
    }

    /// Attaches a per-element axonal field to params. Only single-mesh
    /// scenarios support model.axon = file; the mesh must outlive params.
    inline void wire_axon(HeterodimerParams      &params,
                          const ExperimentConfig &cfg,
                          const PolyMesh         &mesh)
    {
      if (cfg.axon_kind == "file")
        params.diffusion.axon = load_axon_field(cfg.axon_path, mesh);
    }

    inline void require_analytic_axon(const ExperimentConfig &cfg)
    {
      if (cfg.axon_kind == "file")
        throw std::invalid_argument(
          "model.axon = file is only supported by single-mesh scenarios");
    }

    inline PolyMesh build_mesh(const ExperimentConfig &cfg,
                               const Rect             &domain,
                               int                     n_el)
    {
      PolyMesh mesh;
      if (cfg.mesh_source == "generate")
        mesh = generate_voronoi_mesh(domain, n_el, cfg.seed, cfg.lloyd);
      else if (cfg.mesh_source == "load")
        mesh = load_mesh(cfg.mesh_path);
      else if (cfg.mesh_source == "agglomerate")
        {
          const PolyMesh fine =
            cfg.mesh_path.empty()
              ? triangulated_disk(cfg.disk_center, cfg.disk_radius,
                                  cfg.disk_rings, cfg.disk_sectors)
              : load_mesh(cfg.mesh_path);
          mesh = agglomerate(fine, n_el, cfg.seed);
        }
      else
        throw std::invalid_argument("unknown mesh source '" +
                                    cfg.mesh_source + "'");
      if (cfg.boundary == "dirichlet")
        tag_boundary(mesh, 'D');
      else if (cfg.boundary == "neumann")
        tag_boundary(mesh, 'N');
      else
        throw std::invalid_argument("unknown boundary '" + cfg.boundary +
                                    "'");
      return mesh;
    }

    inline ManufacturedSolution make_solution(const ExperimentConfig  &cfg,
                                              const HeterodimerParams &params)
    {
      if (cfg.test_case == "test1")
        return make_oscillatory_solution(params);
      if (cfg.test_case == "test2")
        return make_front_solution(params, cfg.wave_speed);
      throw std::invalid_argument("unknown test case '" + cfg.test_case +
                                  "'");
    }

    inline void ensure_out_dir(const ExperimentConfig &cfg)
    {
      std::filesystem::create_directories(cfg.out_dir);
    }

    inline std::string out_path(const ExperimentConfig &cfg,
                                const std::string      &name)
    {
      return (std::filesystem::path(cfg.out_dir) / name).string();
    }

    inline void echo_config(const ExperimentConfig &cfg,
                            ScenarioResult         &result)
    {
      const std::string path = out_path(cfg, "config_effective.txt");
      std::ofstream     out(path);
      cfg.raw.echo(out);
      result.outputs.push_back(path);
    }

    /// Manufactured scenarios integrate with Crank-Nicolson unless the
    /// configuration names a scheme explicitly.
    inline std::string default_scheme(const ExperimentConfig &cfg)
    {
      return cfg.raw.has("time.schemes") ? cfg.schemes.front() : "cn";
    }

    inline void print_banner(const ExperimentConfig  &cfg,
                             const HeterodimerParams &params,
                             ScenarioResult          &result,
                             std::ostream            &log)
    {
      result.diagnostics = diagnostics(params);
      const ModelDiagnostics &d = result.diagnostics;
      log << "scenario = " << cfg.scenario << ", test_case = "
          << cfg.test_case << "\n";
      log << "alpha = " << d.alpha
          << ", wave_condition = " << (d.wave_condition ? "true" : "false")
          << ", min_wave_speed = " << d.min_wave_speed << "\n";
      log << "unstable_equilibrium = (" << d.unstable_equilibrium.x() << ", "
          << d.unstable_equilibrium.y() << "), stable_equilibrium = ("
          << d.stable_equilibrium.x() << ", " << d.stable_equilibrium.y()
          << ")\n";
    }

    /// Errors of one transient run of a manufactured problem, with
    /// energy accumulation over every time level.
    struct MeasuredErrors
    {
      FieldError c_final, q_final;
      Real       c_energy = 0.0, q_energy = 0.0;
    };

    inline MeasuredErrors run_measured(const DgSpace              &space,
                                       const AlgebraicSystem      &system,
                                       const ThetaScheme          &scheme,
                                       const ManufacturedSolution &sol,
                                       Real                        t_end)
    {
      EnergyAccumulator acc_c, acc_q;
      MeasuredErrors    m;
      const auto        measure = [&](const StatePair &s) {
        m.c_final = error_norms(space, s.c, sol.c, sol.grad_c, s.t,
                                system.model().diffusion,
                                system.penalty_params());
        m.q_final = error_norms(space, s.q, sol.q, sol.grad_q, s.t,
                                system.model().diffusion,
                                system.penalty_params());
        acc_c.add(s.t, m.c_final.l2, m.c_final.dg);
        acc_q.add(s.t, m.q_final.l2, m.q_final.dg);
      };
      solve_transient(system, scheme, initial_state(system), t_end, measure);
      m.c_energy = acc_c.energy();
      m.q_energy = acc_q.energy();
      return m;
    }

    inline void push_records(std::vector<ErrorRecord> &records,
                             const std::string &test, int p, int n_el,
                             Real h, Real dt, Real t_end,
                             const MeasuredErrors &m)
    {
      records.push_back({test, p, n_el, h, dt, t_end, "c", m.c_final.l2,
                         m.c_final.dg, m.c_energy});
      records.push_back({test, p, n_el, h, dt, t_end, "q", m.q_final.l2,
                         m.q_final.dg, m.q_energy});
    }
  } // namespace harness_detail

  /// Spatial h-convergence sweep of a manufactured test over the
  /// configured mesh sizes and degrees.
  inline ScenarioResult run_convergence(const ExperimentConfig &cfg,
                                        std::ostream           &log = std::cout)
  {
    using namespace harness_detail;
    ScenarioResult    result;
    HeterodimerParams params = model_params(cfg);
    require_analytic_axon(cfg);
    const ManufacturedSolution sol = make_solution(cfg, params);
    apply_manufactured(params, sol);
    ensure_out_dir(cfg);
    print_banner(cfg, params, result, log);

    const Real       dt    = cfg.dts.front();
    std::vector<int> sweep = cfg.n_elements;
    if (cfg.mesh_source == "load")
      sweep.resize(1); // one mesh on disk, one run
    for (int n_el : sweep)
      {
        const PolyMesh mesh = build_mesh(cfg, sol.domain, n_el);
        const Real     h    = mesh_size(mesh);
        for (int p : cfg.degrees)
          {
            const DgSpace space(mesh, p, cfg.orthonormalize,
                                cfg.volume_order, cfg.face_points);
            const AlgebraicSystem system(space, params, cfg.gamma0);
            const ThetaScheme scheme = cfg.scheme_for(default_scheme(cfg), dt);
            const MeasuredErrors m =
              run_measured(space, system, scheme, sol, cfg.t_end);
            push_records(result.records, sol.name, p, mesh.n_elements(), h,
                         dt, cfg.t_end, m);
            log << "n_el = " << mesh.n_elements() << ", p = " << p
                << ", h = " << h << ": c_energy = " << m.c_energy
                << ", q_energy = " << m.q_energy << "\n";
          }
      }
    const std::string csv = out_path(cfg, "errors.csv");
    write_error_csv(csv, result.records);
    result.outputs.push_back(csv);
    echo_config(cfg, result);
    return result;
  }

  /// p-refinement sweep on a single mesh.
  inline ScenarioResult
  run_p_convergence(const ExperimentConfig &cfg, std::ostream &log = std::cout)
  {
    using namespace harness_detail;
    ScenarioResult    result;
    HeterodimerParams params = model_params(cfg);
    require_analytic_axon(cfg);
    const ManufacturedSolution sol = make_solution(cfg, params);
    apply_manufactured(params, sol);
    ensure_out_dir(cfg);
    print_banner(cfg, params, result, log);

    const Real     dt   = cfg.dts.front();
    const PolyMesh mesh = build_mesh(cfg, sol.domain, cfg.n_elements.front());
    const Real     h    = mesh_size(mesh);
    for (int p : cfg.degrees)
      {
        const DgSpace space(mesh, p, cfg.orthonormalize, cfg.volume_order,
                            cfg.face_points);
        const AlgebraicSystem system(space, params, cfg.gamma0);
        const MeasuredErrors  m = run_measured(
          space, system, cfg.scheme_for(default_scheme(cfg), dt), sol,
          cfg.t_end);
        push_records(result.records, sol.name, p, mesh.n_elements(), h, dt,
                     cfg.t_end, m);
        log << "p = " << p << ": c_energy = " << m.c_energy
            << ", q_energy = " << m.q_energy << "\n";
      }
    const std::string csv = out_path(cfg, "errors.csv");
    write_error_csv(csv, result.records);
    result.outputs.push_back(csv);
    echo_config(cfg, result);
    return result;
  }

  /// Time-step refinement on a fixed mesh and degree, one CSV per
  /// scheme.
  inline ScenarioResult
  run_timestep_convergence(const ExperimentConfig &cfg,
                           std::ostream           &log = std::cout)
  {
    using namespace harness_detail;
    ScenarioResult    result;
    HeterodimerParams params = model_params(cfg);
    require_analytic_axon(cfg);
    const ManufacturedSolution sol = make_solution(cfg, params);
    apply_manufactured(params, sol);
    ensure_out_dir(cfg);
    print_banner(cfg, params, result, log);

    const PolyMesh mesh = build_mesh(cfg, sol.domain, cfg.n_elements.front());
    const Real     h    = mesh_size(mesh);
    const int      p    = cfg.degrees.front();
    const DgSpace  space(mesh, p, cfg.orthonormalize, cfg.volume_order,
                         cfg.face_points);
    const AlgebraicSystem system(space, params, cfg.gamma0);

    for (const std::string &scheme_name : cfg.schemes)
      {
        std::vector<ErrorRecord> rows;
        for (Real dt : cfg.dts)
          {
            const MeasuredErrors m = run_measured(
              space, system, cfg.scheme_for(scheme_name, dt), sol, cfg.t_end);
            push_records(rows, sol.name, p, mesh.n_elements(), h, dt,
                         cfg.t_end, m);
            log << scheme_name << ", dt = " << dt
                << ": c_energy = " << m.c_energy
                << ", q_energy = " << m.q_energy << "\n";
          }
        const std::string csv = out_path(cfg, "errors_" + scheme_name +
                                                ".csv");
        write_error_csv(csv, rows);
        result.outputs.push_back(csv);
        result.records.insert(result.records.end(), rows.begin(), rows.end());
      }
    echo_config(cfg, result);
    return result;
  }

  /// Travelling front: manufactured test2 over (degree, mesh) pairs,
  /// recording errors at half and full horizon and tracking the front.
  inline ScenarioResult
  run_travelling_wave(const ExperimentConfig &cfg, std::ostream &log = std::cout)
  {
    using namespace harness_detail;
    ScenarioResult    result;
    HeterodimerParams params = model_params(cfg);
    require_analytic_axon(cfg);
    ExperimentConfig cfg2 = cfg;
    cfg2.test_case        = "test2";
    const ManufacturedSolution sol = make_solution(cfg2, params);
    apply_manufactured(params, sol);
    ensure_out_dir(cfg);
    print_banner(cfg, params, result, log);

    std::vector<std::pair<int, int>> pairs = cfg.pairs;
    if (pairs.empty())
      for (int p : cfg.degrees)
        for (int n : cfg.n_elements)
          pairs.emplace_back(p, n);

    const Real dt      = cfg.dts.front();
    const int  n_steps = static_cast<int>(std::llround(cfg.t_end / dt));
    const int  half    = n_steps / 2;

    // Track the front on the highest-resolution pair with p >= 2.
    int   track_idx = -1;
    int64_t best_dofs = -1;
    for (int i = 0; i < static_cast<int>(pairs.size()); ++i)
      if (pairs[static_cast<std::size_t>(i)].first >= 2)
        {
          const auto [p, n] = pairs[static_cast<std::size_t>(i)];
          const int64_t dofs = static_cast<int64_t>(n) * (p + 1) * (p + 2) / 2;
          if (dofs > best_dofs)
            {
              best_dofs = dofs;
              track_idx = i;
            }
        }

    std::map<int, PolyMesh> meshes;
    for (const auto &[p, n] : pairs)
      if (!meshes.count(n))
        meshes.emplace(n, build_mesh(cfg, sol.domain, n));

    for (int i = 0; i < static_cast<int>(pairs.size()); ++i)
      {
        const auto [p, n]   = pairs[static_cast<std::size_t>(i)];
        const PolyMesh &mesh = meshes.at(n);
        const Real      h    = mesh_size(mesh);
        const DgSpace   space(mesh, p, cfg.orthonormalize, cfg.volume_order,
                              cfg.face_points);
        const AlgebraicSystem system(space, params, cfg.gamma0);

        std::vector<std::pair<Real, VectorX>> snapshots;
        const int snap_stride = std::max(1, n_steps / 20);
        const int vtk_stride =
          cfg.snapshots > 0 ? std::max(1, n_steps / cfg.snapshots) : 0;
        FieldError c_half, q_half, c_full, q_full;
        const auto observe = [&](const StatePair &s) {
          if (i == track_idx &&
              (s.step_index % snap_stride == 0 || s.step_index == n_steps))
            snapshots.emplace_back(s.t, s.q);
          if (i == track_idx && vtk_stride > 0 &&
              (s.step_index % vtk_stride == 0 || s.step_index == n_steps))
            {
              char vbuf[48];
              std::snprintf(vbuf, sizeof(vbuf), "snapshot_%05d.vtk",
                            s.step_index);
              const std::string vpath = out_path(cfg, vbuf);
              emit_vtk(space, {{"c", &s.c}, {"q", &s.q}}, vpath);
              result.outputs.push_back(vpath);
            }
          if (s.step_index == half || s.step_index == n_steps)
            {
              const FieldError ec =
                error_norms(space, s.c, sol.c, sol.grad_c, s.t,
                            params.diffusion, system.penalty_params());
              const FieldError eq =
                error_norms(space, s.q, sol.q, sol.grad_q, s.t,
                            params.diffusion, system.penalty_params());
              if (s.step_index == half)
                {
                  c_half = ec;
                  q_half = eq;
                }
              else
                {
                  c_full = ec;
                  q_full = eq;
                }
            }
        };
        solve_transient(system, cfg.scheme_for(default_scheme(cfg), dt),
                        initial_state(system), cfg.t_end, observe);

        const Real t_half = half * dt;
        result.records.push_back({sol.name, p, mesh.n_elements(), h, dt,
                                  t_half, "c", c_half.l2, c_half.dg, 0.0});
        result.records.push_back({sol.name, p, mesh.n_elements(), h, dt,
                                  t_half, "q", q_half.l2, q_half.dg, 0.0});
        result.records.push_back({sol.name, p, mesh.n_elements(), h, dt,
                                  cfg.t_end, "c", c_full.l2, c_full.dg, 0.0});
        result.records.push_back({sol.name, p, mesh.n_elements(), h, dt,
                                  cfg.t_end, "q", q_full.l2, q_full.dg, 0.0});
        log << "p = " << p << ", n_el = " << mesh.n_elements()
            << ": q_l2(T/2) = " << q_half.l2 << ", q_l2(T) = " << q_full.l2
            << "\n";

        if (i == track_idx)
          {
            result.wave = estimate_wave_speed(
              space, snapshots, cfg.level, cfg.probe_y, sol.domain.lo.x(),
              sol.domain.hi.x());
            const std::string wpath = out_path(cfg, "wavefront.csv");
            std::ofstream     wout(wpath);
            wout << "t,x_front\n";
            char buf[80];
            for (std::size_t k = 0; k < result.wave->times.size(); ++k)
              {
                std::snprintf(buf, sizeof(buf), "%.12e,%.12e\n",
                              result.wave->times[k],
                              result.wave->positions[k]);
                wout << buf;
              }
            result.outputs.push_back(wpath);
            log << "front speed = " << result.wave->speed << " +- "
                << result.wave->speed_halfwidth << " (level " << cfg.level
                << " on y = " << cfg.probe_y << ")\n";
          }
      }

    const std::string csv = out_path(cfg, "errors.csv");
    write_error_csv(csv, result.records);
    result.outputs.push_back(csv);
    echo_config(cfg, result);
    return result;
  }

  /// Physical wavefront run towards the stable equilibrium on a
  /// synthetic domain, reporting the sup-distance from equilibrium and
  /// any negative undershoot of q.
  inline ScenarioResult
  run_equilibrium_wavefront(const ExperimentConfig &cfg,
                            std::ostream           &log = std::cout)
  {
    using namespace harness_detail;
    ScenarioResult    result;
    HeterodimerParams params = model_params(cfg);
    params.f_c = params.k0.fn; // production enters as the c source
    {
      const Real amp = cfg.q0_amp, width = cfg.q0_width;
      const Vec2 ctr = cfg.q0_center;
      const Real c0  = cfg.c0_const;
      params.c0 = [c0](const Vec2 &, Real) { return c0; };
      params.q0 = [amp, width, ctr](const Vec2 &x, Real) {
        return amp * std::exp(-width * (x - ctr).squaredNorm());
      };
    }
    ensure_out_dir(cfg);
    print_banner(cfg, params, result, log);
    if (!result.diagnostics.wave_condition)
      throw std::invalid_argument(
        "wavefront scenario needs k12*k0/k1 - k1_tilde > 0");
    const Vec2 stable = result.diagnostics.stable_equilibrium;

    const PolyMesh mesh =
      build_mesh(cfg, cfg.domain, cfg.n_elements.front());
    wire_axon(params, cfg, mesh);
    const int     p = cfg.degrees.front();
    const DgSpace space(mesh, p, cfg.orthonormalize, cfg.volume_order,
                        cfg.face_points);
    const AlgebraicSystem system(space, params, cfg.gamma0);
    log << "mesh: " << mesh.n_elements() << " elements, h = "
        << mesh_size(mesh) << ", p = " << p << "\n";

    const auto sup_distance = [&](const StatePair &s) {
      Real d = 0.0;
      for (int e = 0; e < mesh.n_elements(); ++e)
        {
          const MatrixX &phi = space.basis_at_volume(e);
          const VectorX  cv =
            phi * s.c.segment(space.offset(e), space.n_local());
          const VectorX qv =
            phi * s.q.segment(space.offset(e), space.n_local());
          d = std::max(d, (cv.array() - stable.x()).abs().maxCoeff());
          d = std::max(d, (qv.array() - stable.y()).abs().maxCoeff());
        }
      return d;
    };
    const auto min_q = [&](const StatePair &s) {
      Real m = std::numeric_limits<Real>::infinity();
      for (int e = 0; e < mesh.n_elements(); ++e)
        m = std::min(m, (space.basis_at_volume(e) *
                         s.q.segment(space.offset(e), space.n_local()))
                          .minCoeff());
      return m;
    };

    const Real dt      = cfg.dts.front();
    const int  n_steps = static_cast<int>(std::llround(cfg.t_end / dt));
    const int  stride  = std::max(1, n_steps / 100);
    const int  snap_stride =
      cfg.snapshots > 0 ? std::max(1, n_steps / cfg.snapshots) : 0;

    const std::string dpath = out_path(cfg, "equilibrium_distance.csv");
    std::ofstream     dout(dpath);
    dout << "t,sup_distance,min_q\n";
    result.min_q = std::numeric_limits<Real>::infinity();
    char buf[120];

    const auto observe = [&](const StatePair &s) {
      const Real mq = min_q(s);
      result.min_q  = std::min(result.min_q, mq);
      if (s.step_index % stride == 0 || s.step_index == n_steps)
        {
          const Real d = sup_distance(s);
          std::snprintf(buf, sizeof(buf), "%.12e,%.12e,%.12e\n", s.t, d, mq);
          dout << buf;
          if (s.step_index == n_steps)
            result.final_sup_distance = d;
        }
      if (snap_stride > 0 &&
          (s.step_index % snap_stride == 0 || s.step_index == n_steps))
        {
          std::snprintf(buf, sizeof(buf), "snapshot_%05d.vtk", s.step_index);
          const std::string vpath = out_path(cfg, buf);
          emit_vtk(space, {{"c", &s.c}, {"q", &s.q}}, vpath);
          result.outputs.push_back(vpath);
        }
    };
    solve_transient(system, cfg.scheme_for("theta", dt),
                    initial_state(system), cfg.t_end, observe);
    result.outputs.push_back(dpath);

    result.undershoot = result.min_q < 0.0;
    log << "final sup-distance from stable equilibrium = "
        << result.final_sup_distance << "\n";
    log << "min q over run = " << result.min_q
        << (result.undershoot ? " (negative undershoot detected)" : "")
        << "\n";
    echo_config(cfg, result);
    return result;
  }

  /// Dispatches on config [experiment] scenario.
  inline ScenarioResult run_experiment(const Config &raw,
                                       std::ostream &log = std::cout)
  {
    const ExperimentConfig cfg = ExperimentConfig::from_config(raw);
    if (cfg.scenario == "convergence")
      return run_convergence(cfg, log);
    if (cfg.scenario == "p_convergence")
      return run_p_convergence(cfg, log);
    if (cfg.scenario == "timestep_convergence")
      return run_timestep_convergence(cfg, log);
    if (cfg.scenario == "travelling_wave")
      return run_travelling_wave(cfg, log);
    if (cfg.scenario == "equilibrium_wavefront")
      return run_equilibrium_wavefront(cfg, log);
    throw std::invalid_argument("unknown scenario '" + cfg.scenario + "'");
  }
} // namespace polydg

#endif // POLYDG_HARNESS_HPP
