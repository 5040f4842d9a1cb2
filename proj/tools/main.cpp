#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "liesde/dsl.hpp"
#include "liesde/experiment.hpp"
#include "liesde/flowtaylor.hpp"
#include "liesde/group.hpp"
#include "liesde/noise.hpp"
#include "liesde/sde.hpp"
#include "liesde/weinorman.hpp"

namespace {

using namespace liesde;

std::string write_file(const std::string& out_dir, const std::string& name,
                       const std::string& content) {
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + dir.string());
  }
  const std::filesystem::path path = dir / name;
  std::ofstream os(path, std::ios::binary);
  os << content;
  os.close();
  if (!os) throw std::runtime_error("cannot write " + path.string());
  std::cout << "wrote " << path.string() << "\n";
  return path.string();
}

std::string numbered(const char* stem, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.csv", stem, index);
  return buf;
}

int report_outcome(const ExperimentOutcome& out) {
  const CriterionResult& c = out.criterion;
  std::cout << (c.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": "
            << c.name << " - " << c.detail << "\n";
  for (const std::string& artifact : out.artifacts) {
    std::cout << "wrote " << artifact << "\n";
  }
  return c.pass ? 0 : 2;
}

std::vector<PolyVectorField> heisenberg_fields() {
  PolyVectorField y1(2), y2(2);
  y1.add_term(0, {0, 0}, 1.0);
  y2.add_term(1, {1, 0}, 1.0);
  return {PolyVectorField(2), y1, y2};
}

int cmd_simulate(const ExperimentConfig& cfg, const std::string& system) {
  const TimeGrid grid(cfg.t_end, cfg.steps);
  StratonovichSystem sys;
  std::size_t brownian_dims = 1;
  Eigen::VectorXd z0;
  if (system == "gbm") {
    PolyVectorField lin(1);
    lin.add_term(0, {1}, 1.0);
    sys.state_dim = 1;
    sys.noise_dim = 2;
    sys.fields = {lin};
    sys.coeff = {{Polynomial::constant(2, 0.08),
                  Polynomial::constant(2, 0.2)}};
    z0 = Eigen::VectorXd::Constant(1, 1.0);
  } else {  // heisenberg
    sys = system_from_fields(heisenberg_fields());
    brownian_dims = 2;
    z0 = Eigen::VectorXd::Zero(2);
  }
  for (std::size_t p = 0; p < cfg.paths; ++p) {
    const DrivingPath path = with_time_component(
        sample_brownian(grid, brownian_dims, cfg.seed, p));
    const Trajectory traj = integrate_heun(sys, path, z0);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    write_file(cfg.out_dir, numbered("trajectory", p), csv.str());
  }
  return 0;
}

MatrixLieGroup pick_group(const std::string& name, std::size_t dim) {
  if (name == "affine1") return MatrixLieGroup::affine1();
  if (name == "posdiag") return MatrixLieGroup::pos_diag(dim);
  return MatrixLieGroup::so3();
}

int cmd_group(const ExperimentConfig& cfg, const std::string& name,
              std::size_t dim) {
  const MatrixLieGroup group = pick_group(name, dim);
  const TimeGrid grid(cfg.t_end, cfg.steps);
  const DrivingPath path =
      sample_brownian(grid, group.algebra_dim(), cfg.seed, 0);
  const GroupTrajectory traj =
      integrate_group_sde(group, path, group.identity());
  std::ostringstream csv;
  write_group_csv(csv, traj);
  write_file(cfg.out_dir, "group_" + name + ".csv", csv.str());
  std::cout << "max membership defect " << format_double(traj.defect)
            << (traj.flagged ? " (flagged)" : "") << "\n";
  return 0;
}

int cmd_wei_norman(const ExperimentConfig& cfg, const std::string& name,
                   std::size_t dim) {
  const MatrixLieGroup group = pick_group(name, dim);
  const TimeGrid grid(cfg.t_end, cfg.steps);
  const DrivingPath path =
      sample_brownian(grid, group.algebra_dim(), cfg.seed, 0);
  const WeiNormanResult result = integrate_wei_norman(group, path);
  std::ostringstream csv;
  write_weinorman_csv(csv, result);
  write_file(cfg.out_dir, "weinorman_" + name + ".csv", csv.str());
  if (result.singular_index) {
    std::cout << "coordinates singular from node " << *result.singular_index
              << "\n";
  }
  return 0;
}

int cmd_taylor(const ExperimentConfig& cfg) {
  const std::vector<double> t_list = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8,
                                      1.0 / 4};
  Eigen::VectorXd z0(2);
  z0 << 0.5, -0.25;
  const RemainderStudy study =
      remainder_slope(heisenberg_fields(), z0, cfg.taylor_degree, t_list,
                      cfg.paths, cfg.seed, cfg.steps * 4, 8, 3.0, cfg.threads);
  std::ostringstream csv;
  write_taylor_csv(csv, study, cfg.taylor_degree);
  write_file(cfg.out_dir,
             "taylor_degree" + std::to_string(cfg.taylor_degree) + ".csv",
             csv.str());
  if (study.at_floor) {
    std::cout << "remainder at the integrator floor; no slope\n";
  } else if (study.slope) {
    std::cout << "remainder slope " << format_double(*study.slope) << "\n";
  }
  return 0;
}

int cmd_check_algebra(const ExperimentConfig& cfg, const std::string& dsl) {
  const std::string file = dsl.empty() ? cfg.dsl_file : dsl;
  if (file.empty()) {
    std::cerr << "check-algebra needs --dsl FILE or dsl_file in the config\n";
    return 1;
  }
  std::ifstream is(file, std::ios::binary);
  if (!is) {
    std::cerr << "cannot read " << file << "\n";
    return 1;
  }
  std::stringstream buffer;
  buffer << is.rdbuf();
  const FieldDslDocument doc = parse_field_dsl(buffer.str());
  if (doc.fields.empty()) {
    std::cerr << file << " defines no fields\n";
    return 1;
  }
  std::vector<PolyVectorField> gens;
  for (const auto& [name, field] : doc.fields) gens.push_back(field);
  const ClosureReport report = lie_closure(gens, cfg.dim_cap, cfg.dep_tol);
  std::cout << "generators: " << gens.size() << "\n"
            << "dimension: " << report.dimension << "\n"
            << "closed: " << (report.closed ? "true" : "false") << "\n"
            << "cap_hit: " << (report.cap_hit ? "true" : "false") << "\n";
  const InvolutivityReport inv = check_involutive(gens);
  std::cout << "involutive (sampled): " << (inv.involutive ? "true" : "false")
            << " max residual " << format_double(inv.max_residual) << "\n";
  return 0;
}

int cmd_paths(const ExperimentConfig& cfg, std::size_t dims) {
  const TimeGrid grid(cfg.t_end, cfg.steps);
  for (std::size_t p = 0; p < cfg.paths; ++p) {
    const DrivingPath path = sample_brownian(grid, dims, cfg.seed, p);
    std::ostringstream csv;
    write_path_csv(csv, path);
    write_file(cfg.out_dir, numbered("path", p), csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Stratonovich SDE toolkit: Heun and Lie-group integrators, Wei-Norman "
      "coordinates, superposition-rule checks, and truncated log-flow "
      "studies"};
  app.require_subcommand(0, 1);

  std::string config_file;
  std::uint64_t seed = 42;
  std::size_t steps = 1024;
  double t_end = 1.0;
  std::size_t paths = 64;
  std::size_t threads = 1;
  std::string out_dir = "out";
  auto* o_config =
      app.add_option("--config", config_file, "experiment config file");
  auto* o_seed = app.add_option("--seed", seed, "RNG seed");
  auto* o_steps = app.add_option("--steps", steps, "grid steps");
  auto* o_tend = app.add_option("--t-end", t_end, "time horizon");
  auto* o_paths = app.add_option("--paths", paths, "Monte Carlo paths");
  auto* o_threads = app.add_option("--threads", threads, "worker threads");
  auto* o_out = app.add_option("--out", out_dir, "output directory");

  auto* sc_sim =
      app.add_subcommand("simulate", "integrate a sample system (Heun)");
  std::string system_name = "gbm";
  sc_sim->add_option("--system", system_name, "system to integrate")
      ->check(CLI::IsMember({"gbm", "heisenberg"}));

  auto* sc_group =
      app.add_subcommand("group", "exponential-Euler group integrator");
  std::string group_name = "affine1";
  std::size_t group_dim = 1;
  sc_group->add_option("--group", group_name, "group")
      ->check(CLI::IsMember({"affine1", "posdiag", "so3"}));
  sc_group->add_option("--dim", group_dim, "posdiag size");

  auto* sc_wn =
      app.add_subcommand("wei-norman", "product-of-exponentials coordinates");
  std::string wn_group = "affine1";
  std::size_t wn_dim = 2;
  sc_wn->add_option("--group", wn_group, "group")
      ->check(CLI::IsMember({"affine1", "posdiag"}));
  sc_wn->add_option("--dim", wn_dim, "posdiag size");

  auto* sc_sup = app.add_subcommand(
      "superpose", "verify the linear superposition rule end to end");

  auto* sc_taylor = app.add_subcommand(
      "taylor", "truncated log-flow remainder study on the Heisenberg pair");
  std::size_t degree = 1;
  sc_taylor->add_option("--degree", degree, "truncation degree");

  auto* sc_check = app.add_subcommand(
      "check-algebra", "bracket-closure report for fields from a DSL file");
  std::string dsl_path;
  sc_check->add_option("--dsl", dsl_path, "vector-field DSL file");

  auto* sc_paths = app.add_subcommand("paths", "dump driving-path samples");
  std::size_t path_dims = 1;
  sc_paths->add_option("--dims", path_dims, "Brownian components");

  for (CLI::App* sc : {sc_sim, sc_group, sc_wn, sc_sup, sc_taylor, sc_check,
                       sc_paths}) {
    sc->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    ExperimentConfig cfg;
    if (o_config->count() > 0) cfg = load_config_file(config_file);
    if (o_seed->count() > 0) cfg.seed = seed;
    if (o_steps->count() > 0) cfg.steps = steps;
    if (o_tend->count() > 0) cfg.t_end = t_end;
    if (o_paths->count() > 0) cfg.paths = paths;
    if (o_threads->count() > 0) cfg.threads = threads;
    if (o_out->count() > 0) cfg.out_dir = out_dir;
    if (sc_taylor->parsed() && sc_taylor->count("--degree") > 0) {
      cfg.taylor_degree = degree;
    }
    cfg.validate();

    // A config naming an experiment runs it, whatever else was asked.
    if (!cfg.experiment.empty()) return report_outcome(run_experiment(cfg));

    if (sc_sim->parsed()) return cmd_simulate(cfg, system_name);
    if (sc_group->parsed()) return cmd_group(cfg, group_name, group_dim);
    if (sc_wn->parsed()) return cmd_wei_norman(cfg, wn_group, wn_dim);
    if (sc_sup->parsed()) {
      cfg.experiment = "linear_superposition";
      return report_outcome(run_experiment(cfg));
    }
    if (sc_taylor->parsed()) return cmd_taylor(cfg);
    if (sc_check->parsed()) return cmd_check_algebra(cfg, dsl_path);
    if (sc_paths->parsed()) return cmd_paths(cfg, path_dims);

    std::cerr << app.help();
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
