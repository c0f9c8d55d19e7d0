// Command-line front end: runs experiment scenarios from a config file,
// generates and checks meshes, and fits convergence rates from CSVs.

#include <polydg/polydg.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <tuple>

namespace
{
  using namespace polydg;

  int cmd_run(const std::string &config_path, const std::string &out_dir,
              int64_t seed, int snapshots)
  {
    Config cfg = Config::from_file(config_path);
    if (!out_dir.empty())
      cfg.set("output.dir", out_dir);
    if (seed >= 0)
      cfg.set("mesh.seed", std::to_string(seed));
    if (snapshots >= 0)
      cfg.set("output.snapshots", std::to_string(snapshots));
    const ScenarioResult result = run_experiment(cfg, std::cout);
    for (const std::string &path : result.outputs)
      std::cout << "wrote " << path << "\n";
    return 0;
  }

  int cmd_mesh_gen(const std::vector<Real> &domain, int n, int64_t seed,
                   int lloyd, const std::string &out)
  {
    const Rect rect{{domain[0], domain[1]}, {domain[2], domain[3]}};
    const PolyMesh mesh =
      generate_voronoi_mesh(rect, n, static_cast<uint64_t>(seed), lloyd);
    save_mesh(mesh, out);
    std::cout << "wrote " << out << ": " << mesh.n_elements()
              << " elements, h = " << mesh_size(mesh) << "\n";
    return 0;
  }

  int cmd_mesh_agglomerate(const std::string &input, int target,
                           int64_t seed, const std::vector<Real> &disk,
                           int rings, int sectors, const std::string &out)
  {
    const PolyMesh fine =
      input.empty()
        ? triangulated_disk({disk[0], disk[1]}, disk[2], rings, sectors)
        : load_mesh(input);
    const PolyMesh coarse =
      agglomerate(fine, target, static_cast<uint64_t>(seed));
    save_mesh(coarse, out);
    std::cout << "wrote " << out << ": " << fine.n_elements() << " -> "
              << coarse.n_elements()
              << " elements, h = " << mesh_size(coarse) << "\n";
    return 0;
  }

  int cmd_mesh_check(const std::string &path)
  {
    const PolyMesh mesh = load_mesh(path);
    std::cout << path << ": " << mesh.n_elements() << " elements, "
              << mesh.n_vertices() << " vertices, " << mesh.n_faces()
              << " faces\n";
    std::cout << "h = " << mesh_size(mesh)
              << ", total area = " << total_area(mesh) << "\n";
    const RegularityReport report = check_regularity(mesh);
    std::cout << "min element inscribed/diameter ratio = "
              << report.min_element_ratio << "\n";
    std::cout << "min face/element-diameter ratio = "
              << report.min_face_ratio << "\n";
    if (!report.elements_below_floor.empty())
      {
        std::cout << report.elements_below_floor.size()
                  << " elements below the regularity floor " << report.floor
                  << ":";
        for (int e : report.elements_below_floor)
          std::cout << " " << e;
        std::cout << "\n";
      }
    return 0;
  }

  int cmd_rates(const std::string &csv_path)
  {
    std::ifstream in(csv_path);
    if (!in)
      throw std::runtime_error("cannot open '" + csv_path + "'");
    std::string header;
    std::getline(in, header);
    if (header != "test,p,n_el,h,dt,T,field,l2,dg,energy")
      throw parse_error("unexpected CSV header '" + header + "'", 1);

    struct Row
    {
      Real h, dt, l2, dg, energy;
    };
    std::map<std::tuple<std::string, std::string, int>, std::vector<Row>>
                groups;
    std::string line;
    int         line_no = 1;
    while (std::getline(in, line))
      {
        ++line_no;
        if (line.empty())
          continue;
        std::vector<std::string> cells;
        std::string              cell;
        std::istringstream       ss(line);
        while (std::getline(ss, cell, ','))
          cells.push_back(cell);
        if (cells.size() != 10)
          throw parse_error("expected 10 CSV fields", line_no);
        Row row{std::stod(cells[3]), std::stod(cells[4]),
                std::stod(cells[7]), std::stod(cells[8]),
                std::stod(cells[9])};
        groups[{cells[0], cells[6], std::stoi(cells[1])}].push_back(row);
      }

    for (const auto &[key, rows] : groups)
      {
        if (rows.size() < 2)
          continue;
        // Rate against h unless the sweep varied dt instead; skip
        // groups where neither moved (a repeated single run).
        const bool vs_h = std::abs(rows.front().h - rows.back().h) >
                          1e-12 * rows.front().h;
        if (!vs_h && std::abs(rows.front().dt - rows.back().dt) <=
                       1e-12 * std::abs(rows.front().dt))
          continue;
        VectorX x(static_cast<Eigen::Index>(rows.size()));
        VectorX l2(x.size()), dg(x.size()), en(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
          {
            const Row &r = rows[static_cast<std::size_t>(i)];
            x[i]  = vs_h ? r.h : r.dt;
            l2[i] = r.l2;
            dg[i] = r.dg;
            en[i] = r.energy;
          }
        std::cout << std::get<0>(key) << ", field " << std::get<1>(key)
                  << ", p = " << std::get<2>(key) << " (vs "
                  << (vs_h ? "h" : "dt") << "):\n";
        std::cout << "  l2 rate     = " << fit_rates(x, l2).slope << "\n";
        std::cout << "  dg rate     = " << fit_rates(x, dg).slope << "\n";
        if (en.maxCoeff() > 0.0)
          std::cout << "  energy rate = " << fit_rates(x, en).slope << "\n";
      }
    return 0;
  }
} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Polytopal DG solver for a coupled two-species "
               "reaction-diffusion model"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int64_t     seed      = -1;
  int         snapshots = -1;
  CLI::App   *run = app.add_subcommand("run", "run a scenario from a config");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--seed", seed, "mesh seed override");
  run->add_option("--snapshots", snapshots, "VTK snapshot count override");

  CLI::App *mesh = app.add_subcommand("mesh", "mesh utilities");
  mesh->require_subcommand(1);

  std::vector<Real> domain{0.0, 0.0, 1.0, 1.0};
  int               n_el = 100, lloyd = 100;
  int64_t           gen_seed = 42;
  std::string       gen_out  = "mesh.txt";
  CLI::App *gen = mesh->add_subcommand("gen", "generate a Voronoi mesh");
  gen->add_option("--domain", domain, "rectangle x0 y0 x1 y1")
    ->expected(4);
  gen->add_option("--n", n_el, "number of elements");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--lloyd", lloyd, "relaxation iterations");
  gen->add_option("-o,--output", gen_out, "output mesh file");

  std::string       agg_input, agg_out = "agglomerated.txt";
  int               target = 100, rings = 36, sectors = 6;
  int64_t           agg_seed = 42;
  std::vector<Real> disk{0.0, 0.0, 1.0};
  CLI::App *agg = mesh->add_subcommand(
    "agglomerate", "agglomerate a fine mesh into polytopal elements");
  agg->add_option("--input", agg_input,
                  "fine mesh file (default: synthetic triangulated disk)");
  agg->add_option("--target", target, "target element count");
  agg->add_option("--seed", agg_seed, "seeding randomness");
  agg->add_option("--disk", disk, "synthetic disk cx cy radius")->expected(3);
  agg->add_option("--rings", rings, "disk triangulation rings");
  agg->add_option("--sectors", sectors, "disk triangulation sectors");
  agg->add_option("-o,--output", agg_out, "output mesh file");

  std::string check_path;
  CLI::App *check = mesh->add_subcommand("check", "validate a mesh file");
  check->add_option("mesh", check_path, "mesh file")->required();

  std::string csv_path;
  CLI::App   *rates =
    app.add_subcommand("rates", "fit convergence rates from an error CSV");
  rates->add_option("csv", csv_path, "error CSV file")->required();

  CLI11_PARSE(app, argc, argv);

  try
    {
      if (*run)
        return cmd_run(config_path, out_dir, seed, snapshots);
      if (*gen)
        return cmd_mesh_gen(domain, n_el, gen_seed, lloyd, gen_out);
      if (*agg)
        return cmd_mesh_agglomerate(agg_input, target, agg_seed, disk, rings,
                                    sectors, agg_out);
      if (*check)
        return cmd_mesh_check(check_path);
      if (*rates)
        return cmd_rates(csv_path);
    }
  catch (const std::exception &e)
    {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  return 0;
}
