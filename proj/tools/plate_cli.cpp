// Command-line front end: batch studies for the built-in benchmark cases or
// user-supplied JSON configurations, Navier series reference values, and
// CSV/VTK emission.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "platefem/adapt.hpp"
#include "platefem/assembly.hpp"
#include "platefem/builtin.hpp"
#include "platefem/config.hpp"
#include "platefem/estimator.hpp"
#include "platefem/io.hpp"
#include "platefem/oracle.hpp"

namespace fs = std::filesystem;
using namespace platefem;

namespace {

struct LoadedCase {
  std::string name;
  PlateProblem problem;
  StudyConfig study;
  ErrorMetric metric;
  OutputConfig output;
};

LoadedCase load_case(const std::string& config_path, const std::string& builtin) {
  if (config_path.empty() == builtin.empty())
    throw std::invalid_argument("exactly one of --config and --builtin is required");
  if (!config_path.empty()) {
    const RunConfig cfg = RunConfig::from_file(config_path);
    return LoadedCase{fs::path(config_path).stem().string(), cfg.make_problem(), cfg.study, {},
                      cfg.output};
  }
  const auto which = parse_builtin(builtin);
  if (!which)
    throw std::invalid_argument("unknown builtin case '" + builtin +
                                "' (point, line, square, lshape_ss, lshape_cc, lshape_free)");
  CaseSetup setup = make_builtin(*which);
  return LoadedCase{setup.name, setup.problem(), StudyConfig{}, setup.metric, {}};
}

std::string step_filename(const std::string& stem, int step) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_step%03d.vtk", step);
  return stem + buf;
}

void write_sample_grid(const fs::path& path, const Solution& sol, int n) {
  std::ofstream out(path);
  out << "x,y,deflection\n";
  const Mesh& mesh = *sol.field.mesh;
  double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
  for (const Vertex& v : mesh.vertices) {
    lo_x = std::min(lo_x, v.x);
    hi_x = std::max(hi_x, v.x);
    lo_y = std::min(lo_y, v.y);
    hi_y = std::max(hi_y, v.y);
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 p{lo_x + (hi_x - lo_x) * i / (n - 1.0), lo_y + (hi_y - lo_y) * j / (n - 1.0)};
      const int t = mesh.locate_triangle(p);
      if (t < 0) continue;
      out << format_double(p.x) << ',' << format_double(p.y) << ','
          << format_double(sol.field.eval_in(t, p, 0).value) << '\n';
    }
}

int run_solve(const LoadedCase& lc, const fs::path& out_dir, RefinementStrategy strategy,
              double theta, long max_dofs) {
  fs::create_directories(out_dir);
  StudyConfig study = lc.study;
  study.strategy = strategy;
  study.marking = MarkingParams(theta);
  study.max_dofs = max_dofs;

  const std::string stem = lc.name + "_" + to_string(strategy);
  const fs::path vtk_dir = lc.output.vtk_dir.empty() ? out_dir : fs::path(lc.output.vtk_dir);
  fs::create_directories(vtk_dir);
  std::optional<Solution> last_solution;
  auto observer = [&](int step, const PlateProblem&, const Solution& sol,
                      const EstimatorReport& rep) {
    write_vtk(vtk_dir / step_filename(stem, step), *sol.field.mesh, rep.eta_K,
              vertex_deflections(sol));
    last_solution = sol;
  };

  const StudyResult result = run_study(lc.problem, study, lc.metric, observer);
  const fs::path csv =
      lc.output.csv.empty() ? out_dir / (stem + ".csv") : fs::path(lc.output.csv);
  write_records_csv(csv, result.records);

  for (const ConvergenceRecord& r : result.records) {
    std::printf("step %2d  ndofs %7ld  nelems %6d  eta %.6g", r.step, r.ndofs, r.nelems, r.eta);
    if (r.energy_error) std::printf("  energynorm %.6g", *r.energy_error);
    std::printf("\n");
  }
  if (result.records.size() >= 2) {
    std::printf("eta slope: full %.3f, last window %.3f\n",
                eta_rate(result.records, static_cast<int>(result.records.size()) - 1),
                eta_rate(result.records, 2));
  }
  if (lc.output.sample_grid > 1 && last_solution)
    write_sample_grid(out_dir / (stem + "_fields.csv"), *last_solution, lc.output.sample_grid);
  std::printf("wrote %s\n", csv.string().c_str());

  if (!result.ok()) {
    std::fprintf(stderr, "study aborted: %s\n", result.error.c_str());
    return 2;
  }
  return 0;
}

int run_oracle(const std::string& case_name, double x, double y, int terms) {
  const Material mat(1.0, 0.3, 1.0);
  SeriesValue v;
  if (case_name == "point-max") {
    v = max_deflection_point_load(1.0, mat, terms > 0 ? terms : 100);
  } else {
    NavierCase nc;
    if (case_name == "point") nc = NavierCase::point(1.0, mat);
    else if (case_name == "line") nc = NavierCase::line(1.0, 1.0 / 3.0, mat);
    else if (case_name == "square") nc = NavierCase::square(1.0, 1.0 / 3.0, 1.0 / 3.0, mat);
    else throw std::invalid_argument("unknown oracle case '" + case_name +
                                     "' (point, line, square, point-max)");
    v = navier_deflection(nc, x, y, terms > 0 ? terms : 2000);
  }
  std::printf("value = %.12g\ntail_bound = %.3g\nterms = %d\n", v.value, v.tail_bound, v.terms);
  return 0;
}

int run_reproduce(const fs::path& out_dir, bool quick) {
  fs::create_directories(out_dir);
  struct Entry {
    BuiltinCase which;
    RefinementStrategy strategy;
    long max_dofs;
    long quick_dofs;
  };
  const std::vector<Entry> plan{
      {BuiltinCase::point, RefinementStrategy::uniform, 3000, 3000},
      {BuiltinCase::point, RefinementStrategy::adaptive, 3000, 1200},
      {BuiltinCase::line, RefinementStrategy::uniform, 10000, 2600},
      {BuiltinCase::line, RefinementStrategy::adaptive, 3500, 1500},
      {BuiltinCase::square, RefinementStrategy::uniform, 10000, 2600},
      {BuiltinCase::square, RefinementStrategy::adaptive, 3500, 1500},
      {BuiltinCase::lshape_ss, RefinementStrategy::uniform, 30000, 4000},
      {BuiltinCase::lshape_ss, RefinementStrategy::adaptive, 1600, 700},
      {BuiltinCase::lshape_cc, RefinementStrategy::uniform, 30000, 4000},
      {BuiltinCase::lshape_cc, RefinementStrategy::adaptive, 1600, 700},
      {BuiltinCase::lshape_free, RefinementStrategy::uniform, 30000, 4000},
      {BuiltinCase::lshape_free, RefinementStrategy::adaptive, 1600, 700},
  };

  std::ofstream summary(out_dir / "summary.csv");
  summary << "case,strategy,ndofs_final,eta_final,slope_full,slope_last2\n";
  for (const Entry& entry : plan) {
    const CaseSetup setup = make_builtin(entry.which);
    StudyConfig study;
    study.strategy = entry.strategy;
    study.max_dofs = quick ? entry.quick_dofs : entry.max_dofs;
    const std::string stem = setup.name + "_" + to_string(entry.strategy);
    std::printf("== %s (max_dofs %ld)\n", stem.c_str(), study.max_dofs);
    const StudyResult result = run_study(setup.problem(), study, setup.metric);
    if (!result.ok()) {
      std::fprintf(stderr, "study aborted: %s\n", result.error.c_str());
      return 2;
    }
    write_records_csv(out_dir / (stem + ".csv"), result.records);
    const auto& rec = result.records;
    const double full = eta_rate(rec, static_cast<int>(rec.size()) - 1);
    const double last2 = eta_rate(rec, 2);
    summary << setup.name << ',' << to_string(entry.strategy) << ',' << rec.back().ndofs << ','
            << format_double(rec.back().eta) << ',' << format_double(full) << ','
            << format_double(last2) << '\n';
    std::printf("   final N %ld, eta %.6g, slope full %.3f, last2 %.3f\n", rec.back().ndofs,
                rec.back().eta, full, last2);
  }
  std::printf("wrote %s\n", (out_dir / "summary.csv").string().c_str());
  return 0;
}

int run_export_vtk(const LoadedCase& lc, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const Solution sol = solve(lc.problem);
  const EstimatorReport rep = global_estimate(sol, lc.problem);
  const fs::path path = out_dir / (lc.name + ".vtk");
  write_vtk(path, *lc.problem.mesh, rep.eta_K, vertex_deflections(sol));
  std::printf("ndofs %ld  eta %.6g\nwrote %s\n", mesh_statistics(*lc.problem.mesh).N, rep.eta,
              path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Kirchhoff plate bending solver (Argyris elements)"};
  app.require_subcommand(1);

  std::string config_path, builtin_name, strategy_name = "uniform", oracle_case;
  double theta = 0.5, ox = 0.5, oy = 0.5;
  long max_dofs = 3000;
  int terms = 0;
  std::string out_dir = "out";

  CLI::App* solve_cmd = app.add_subcommand("solve", "run a convergence study");
  solve_cmd->add_option("--config", config_path, "JSON problem configuration");
  solve_cmd->add_option("--builtin", builtin_name, "built-in case name");
  solve_cmd->add_option("--strategy", strategy_name, "uniform|adaptive")
      ->check(CLI::IsMember({"uniform", "adaptive"}));
  solve_cmd->add_option("--theta", theta, "marking threshold (0,1)");
  solve_cmd->add_option("--max-dofs", max_dofs, "stop before exceeding this dof count");
  solve_cmd->add_option("--out", out_dir, "output directory");

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "evaluate the Navier series");
  oracle_cmd->add_option("--case", oracle_case, "point|line|square|point-max")->required();
  oracle_cmd->add_option("--x", ox, "x coordinate");
  oracle_cmd->add_option("--y", oy, "y coordinate");
  oracle_cmd->add_option("--terms", terms, "series truncation");

  bool quick = false;
  CLI::App* repro_cmd = app.add_subcommand("reproduce", "run all benchmark studies");
  repro_cmd->add_option("--out", out_dir, "output directory");
  repro_cmd->add_flag("--quick", quick, "smaller dof budgets (smoke run)");

  CLI::App* export_cmd = app.add_subcommand("export-vtk", "solve once and write a VTK file");
  export_cmd->add_option("--config", config_path, "JSON problem configuration");
  export_cmd->add_option("--builtin", builtin_name, "built-in case name");
  export_cmd->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      const LoadedCase lc = load_case(config_path, builtin_name);
      RefinementStrategy strategy =
          strategy_name == "adaptive" ? RefinementStrategy::adaptive : RefinementStrategy::uniform;
      if (!config_path.empty() && solve_cmd->count("--strategy") == 0)
        strategy = lc.study.strategy;
      const double eff_theta =
          (!config_path.empty() && solve_cmd->count("--theta") == 0) ? lc.study.marking.theta
                                                                     : theta;
      const long eff_dofs =
          (!config_path.empty() && solve_cmd->count("--max-dofs") == 0) ? lc.study.max_dofs
                                                                        : max_dofs;
      return run_solve(lc, out_dir, strategy, eff_theta, eff_dofs);
    }
    if (oracle_cmd->parsed()) return run_oracle(oracle_case, ox, oy, terms);
    if (repro_cmd->parsed()) return run_reproduce(out_dir, quick);
    if (export_cmd->parsed()) return run_export_vtk(load_case(config_path, builtin_name), out_dir);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
