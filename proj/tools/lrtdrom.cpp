// lrtdrom command-line driver: snapshots, compress, rom, study, slopes.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrtdrom/errors.hpp"
#include "lrtdrom/interp.hpp"
#include "lrtdrom/rom.hpp"
#include "lrtdrom/snapshots.hpp"
#include "lrtdrom/study.hpp"
#include "lrtdrom/tt.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lrtdrom;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ParameterGrid training_grid(const StudyConfig& c) {
  std::optional<double> spacing;
  if (c.sweep == SweepVariable::Delta && !c.grid_spacing) spacing = c.sweep_values.front();
  const auto counts = c.training_counts(spacing);
  if (counts.empty()) throw ConfigError("config defines no training grid");
  return build_parameter_grid(c.problem.box, counts);
}

ParameterVector parse_alpha(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    char* end = nullptr;
    const double x = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0') throw ConfigError("bad parameter value '" + cell + "'");
    v.push_back(x);
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

int cmd_snapshots(const fs::path& config_path, const fs::path& out, int workers) {
  const std::string text = read_file(config_path);
  StudyConfig c = parse_config(text);
  if (workers > 0) c.workers = workers;
  fs::create_directories(out);
  const Mesh2D mesh = build_mesh(c.problem, c.h);
  check_mesh(mesh);
  const ParameterGrid grid = training_grid(c);
  const TimeGrid tg = c.time_grid();
  const SnapshotTensor phi = generate_snapshots(c.problem, mesh, tg, grid, c.workers, c.budget_bytes());
  save_tensor(phi, out / "snapshots.lrt1");
  std::ofstream(out / "config.json") << text;
  const SparseOperator M = assemble_mass(mesh);
  json meta{{"dims", phi.dims()},
            {"nodes", mesh.num_nodes()},
            {"mesh_h", mesh.h},
            {"norm0", norm0(phi, M, tg.dt())},
            {"frobenius", frobenius_norm(phi)}};
  std::ofstream(out / "snapshots.json") << meta.dump(2) << "\n";
  std::cout << meta.dump(2) << "\n";
  return 0;
}

int cmd_compress(const fs::path& dir, double eps) {
  const StudyConfig c = load_config(dir / "config.json");
  const Mesh2D mesh = build_mesh(c.problem, c.h);
  const SparseOperator M = assemble_mass(mesh);
  const SnapshotTensor phi = load_tensor(dir / "snapshots.lrt1");
  const double eps_tilde = eps_to_eps_tilde(eps, phi, M, c.time_grid().dt());
  CompressionReport report;
  const TTTensor tt = tt_svd(phi, eps_tilde, &report);
  report.eps = eps;
  save_tt(tt, dir / "tt.lrtt");
  json j{{"eps", report.eps},
         {"eps_tilde", report.eps_tilde},
         {"relative_error", report.relative_error},
         {"ranks", report.ranks},
         {"storage_bytes", report.storage_bytes},
         {"compression_ratio", report.compression_ratio}};
  std::ofstream(dir / "compress.json") << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_rom(const fs::path& dir, const std::string& alpha_text, Index ell) {
  const StudyConfig c = load_config(dir / "config.json");
  const Mesh2D mesh = build_mesh(c.problem, c.h);
  const SparseOperator M = assemble_mass(mesh);
  const SparseOperator L = assemble_h1_gram(mesh);
  const TTTensor tt = load_tt(dir / "tt.lrtt");
  const ParameterGrid grid = training_grid(c);
  const ParameterVector alpha = parse_alpha(alpha_text);
  require_in_box(c.problem.box, alpha);
  const InterpolationScheme scheme(grid, c.interp_order);
  const auto chi = chi_weights(alpha, scheme);
  const LocalBasis basis = local_reduced_space(tt, chi, ell);
  const TimeGrid tg = c.time_grid();
  const Eigen::VectorXd u0 = initial_state(mesh, c.problem);
  const DiscreteOperator op = assemble_operator(mesh, c.problem, alpha);
  const RomTrajectory rom = rom_solve(op, M, basis.S, tg, u0);
  const FomTrajectory fom = backward_euler_solve(op.A, op.g, M, u0, tg);
  const double E = error_E_alpha(fom, rom, L, tg.dt());
  std::vector<double> sigma(basis.sigma.data(), basis.sigma.data() + basis.sigma.size());
  json j{{"alpha", std::vector<double>(alpha.data(), alpha.data() + alpha.size())},
         {"ell", ell},
         {"R1", tt.rank(1)},
         {"E_alpha", E},
         {"sqrt_E_alpha", std::sqrt(E)},
         {"sigma", sigma}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_study(const fs::path& config_path, const fs::path& out, int workers) {
  StudyConfig c = load_config(config_path);
  if (!out.empty()) c.output = out;
  if (workers > 0) c.workers = workers;
  const StudyResult r = run_study(c);
  std::cout << read_file(c.output / "summary.json");
  std::cout << "rows written to " << r.csv.string() << "\n";
  return 0;
}

int cmd_slopes(const fs::path& csv, const std::string& var, double factor, bool mean) {
  const auto rows = read_csv(csv);
  const SlopeFit f = fit_rows(rows, sweep_variable_from_string(var), factor, mean);
  std::cout << "slope " << f.slope << "\nintercept " << f.intercept << "\nr2 " << f.r2 << "\npoints "
            << f.points << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank tensor reduced-order models for parametric parabolic problems"};
  app.require_subcommand(1);

  fs::path config, out, dir = ".", csv;
  int workers = 0;
  double eps = 1e-4, factor = 2.0;
  std::string alpha, var = "eps";
  Index ell = 8;
  bool mean = false;

  auto* snap = app.add_subcommand("snapshots", "Generate and store the snapshot tensor");
  snap->add_option("--config", config, "JSON study configuration")->required()->check(CLI::ExistingFile);
  snap->add_option("--out", out, "Output directory")->required();
  snap->add_option("--workers", workers, "Concurrent full-order solves");

  auto* comp = app.add_subcommand("compress", "Compress stored snapshots into a tensor train");
  comp->add_option("--eps", eps, "Target accuracy in the ||.||_0 norm");
  comp->add_option("--dir", dir, "Directory written by 'snapshots'");

  auto* rom = app.add_subcommand("rom", "Solve the reduced model at one parameter");
  rom->add_option("--alpha", alpha, "Comma-separated parameter vector")->required();
  rom->add_option("--ell", ell, "Reduced dimension");
  rom->add_option("--dir", dir, "Directory with config.json and tt.lrtt");

  auto* study = app.add_subcommand("study", "Run a sweep and write results.csv");
  study->add_option("--config", config, "JSON study configuration")->required()->check(CLI::ExistingFile);
  study->add_option("--out", out, "Output directory (overrides the config)");
  study->add_option("--workers", workers, "Worker threads (overrides the config)");

  auto* slopes = app.add_subcommand("slopes", "Fit log-log slopes to a study CSV");
  slopes->add_option("--csv", csv, "results.csv from 'study'")->required()->check(CLI::ExistingFile);
  slopes->add_option("--var", var, "eps, delta or ell");
  slopes->add_option("--plateau-factor", factor, "Trailing points within this factor of the minimum are dropped");
  slopes->add_flag("--mean", mean, "Fit E_mean instead of E_max");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*snap) return cmd_snapshots(config, out, workers);
    if (*comp) return cmd_compress(dir, eps);
    if (*rom) return cmd_rom(dir, alpha, ell);
    if (*study) return cmd_study(config, out, workers);
    if (*slopes) return cmd_slopes(csv, var, factor, mean);
  } catch (const lrtdrom::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
