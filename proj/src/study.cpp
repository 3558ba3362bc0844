#include "lrtdrom/study.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "lrtdrom/errors.hpp"
#include "lrtdrom/interp.hpp"
#include "lrtdrom/parallel.hpp"
#include "lrtdrom/rom.hpp"
#include "lrtdrom/tt.hpp"

namespace lrtdrom {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <typename T>
std::vector<T> get_list(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (v.is_array()) return get<std::vector<T>>(j, key, where);
  return {get<T>(j, key, where)};
}

Rect parse_rect(const json& j, const std::string& where) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (v.size() != 4) throw ConfigError(where + " needs [x0, x1, y0, y1]");
  return {v[0], v[1], v[2], v[3]};
}

ProblemSpec parse_problem(const json& j) {
  check_keys(j, {"kind", "outer", "holes", "robin_sides", "nu", "hole_robin", "source_sigma",
                 "source_center", "box"},
             "problem");
  const ProblemKind kind = problem_kind_from_string(get<std::string>(j, "kind", "problem"));
  ProblemSpec p = kind == ProblemKind::Heat ? ProblemSpec::heat() : ProblemSpec::advdiff();
  if (j.contains("outer")) p.outer = parse_rect(j["outer"], "problem.outer");
  if (j.contains("holes")) {
    if (!j["holes"].is_array()) throw ConfigError("problem.holes must be a list");
    p.holes.clear();
    for (const auto& h : j["holes"]) p.holes.push_back(parse_rect(h, "problem.holes"));
  }
  if (j.contains("robin_sides")) {
    p.robin_sides.clear();
    for (const auto& s : get<std::vector<std::string>>(j, "robin_sides", "problem")) {
      p.robin_sides.push_back(side_from_string(s));
    }
  }
  if (j.contains("nu")) p.nu = get<double>(j, "nu", "problem");
  if (j.contains("hole_robin")) p.hole_robin = get<double>(j, "hole_robin", "problem");
  if (j.contains("source_sigma")) p.source_sigma = get<double>(j, "source_sigma", "problem");
  if (j.contains("source_center")) {
    const auto c = get<std::vector<double>>(j, "source_center", "problem");
    if (c.size() != 2) throw ConfigError("problem.source_center needs two entries");
    p.source_center = {c[0], c[1]};
  }
  if (j.contains("box")) {
    p.box.bounds.clear();
    for (const auto& b : get<std::vector<std::vector<double>>>(j, "box", "problem")) {
      if (b.size() != 2) throw ConfigError("problem.box entries must be [min, max]");
      p.box.bounds.emplace_back(b[0], b[1]);
    }
  }
  return p;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool on_training_grid(const ParameterVector& a, const ParameterGrid& grid) {
  for (Index i = 0; i < grid.dim(); ++i) {
    const auto& n = grid.nodes[static_cast<std::size_t>(i)];
    if (!(n.array() == a(i)).any()) return false;
  }
  return true;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot write " + path.string());
  os << text;
}

double wall_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::Eps: return "eps";
    case SweepVariable::Delta: return "delta";
    case SweepVariable::Ell: return "ell";
  }
  return "?";
}

SweepVariable sweep_variable_from_string(const std::string& name) {
  if (name == "eps") return SweepVariable::Eps;
  if (name == "delta") return SweepVariable::Delta;
  if (name == "ell") return SweepVariable::Ell;
  throw ConfigError("unknown sweep variable '" + name + "' (expected eps, delta or ell)");
}

void StudyConfig::validate() const {
  problem.validate();
  if (!(h > 0.0)) throw ConfigError("mesh.h must be positive");
  if (steps < 1) throw ConfigError("time.N must be at least 1");
  if (grid_spacing) {
    if (!(*grid_spacing > 0.0)) throw ConfigError("grid.delta must be positive");
  } else if (sweep != SweepVariable::Delta) {
    if (static_cast<Index>(grid_counts.size()) != problem.box.dim()) {
      throw ConfigError("grid.K needs one count per parameter");
    }
    for (Index k : grid_counts) {
      if (k < 2) throw ConfigError("grid.K entries must be at least 2");
    }
  }
  if (eps.empty() || ell.empty()) throw ConfigError("compression.eps and rom.ell must be nonempty");
  for (double e : eps) {
    if (!(e >= 0.0)) throw ConfigError("compression.eps entries must be non-negative");
  }
  for (Index l : ell) {
    if (l < 1 || l > max_ell) {
      throw ConfigError("rom.ell entries must lie in [1, " + std::to_string(max_ell) + "]");
    }
  }
  if (interp_order < 1) throw ConfigError("interpolation.p must be at least 1");
  if (test_set.mode == TestSetConfig::Mode::Grid && test_set.n < 1) throw ConfigError("test_set.n must be positive");
  if (test_set.mode == TestSetConfig::Mode::Random && test_set.count < 1) {
    throw ConfigError("test_set.count must be positive");
  }
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(memory_budget_gb > 0.0)) throw ConfigError("memory_budget_gb must be positive");
  if (!(plateau_factor >= 1.0)) throw ConfigError("fit.plateau_factor must be at least 1");
  if (sweep_values.empty()) throw ConfigError("sweep has no values");
  for (double v : sweep_values) {
    if (sweep == SweepVariable::Eps && !(v >= 0.0)) throw ConfigError("eps sweep values must be non-negative");
    if (sweep == SweepVariable::Delta && !(v > 0.0)) throw ConfigError("delta sweep values must be positive");
    if (sweep == SweepVariable::Ell) {
      if (v != std::floor(v) || v < 1 || v > static_cast<double>(max_ell)) {
        throw ConfigError("ell sweep values must be integers in [1, " + std::to_string(max_ell) + "]");
      }
    }
  }
  if (sweep != SweepVariable::Eps && eps.size() != 1) {
    throw ConfigError("compression.eps must hold a single value unless eps is swept");
  }
  if (sweep != SweepVariable::Ell && ell.size() != 1) {
    throw ConfigError("rom.ell must hold a single value unless ell is swept");
  }
}

std::vector<Index> StudyConfig::training_counts(std::optional<double> spacing) const {
  if (spacing) return counts_for_spacing(problem.box, *spacing);
  if (grid_spacing) return counts_for_spacing(problem.box, *grid_spacing);
  return grid_counts;
}

std::uint64_t StudyConfig::budget_bytes() const { return memory_budget_bytes(memory_budget_gb); }

StudyConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"problem", "mesh", "time", "grid", "compression", "rom", "interpolation",
                 "test_set", "sweep", "output", "memory_budget_gb", "workers", "fom_cache", "fit"},
             "config");
  StudyConfig c;
  if (!j.contains("problem")) throw ConfigError("config needs a 'problem' block");
  c.problem = parse_problem(j["problem"]);

  if (j.contains("mesh")) {
    check_keys(j["mesh"], {"h"}, "mesh");
    if (j["mesh"].contains("h")) c.h = get<double>(j["mesh"], "h", "mesh");
  }
  if (j.contains("time")) {
    check_keys(j["time"], {"T", "N"}, "time");
    if (j["time"].contains("T")) c.problem.final_time = get<double>(j["time"], "T", "time");
    if (j["time"].contains("N")) c.steps = get<Index>(j["time"], "N", "time");
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, {"K", "delta"}, "grid");
    if (g.contains("K") && g.contains("delta")) throw ConfigError("grid takes either K or delta, not both");
    if (g.contains("K")) {
      c.grid_counts = get_list<Index>(g, "K", "grid");
      if (c.grid_counts.size() == 1) c.grid_counts.assign(static_cast<std::size_t>(c.problem.box.dim()), c.grid_counts[0]);
    }
    if (g.contains("delta")) c.grid_spacing = get<double>(g, "delta", "grid");
  }
  if (j.contains("compression")) {
    check_keys(j["compression"], {"eps"}, "compression");
    if (j["compression"].contains("eps")) c.eps = get_list<double>(j["compression"], "eps", "compression");
  }
  if (j.contains("rom")) {
    check_keys(j["rom"], {"ell", "max_ell"}, "rom");
    if (j["rom"].contains("max_ell")) c.max_ell = get<Index>(j["rom"], "max_ell", "rom");
    if (j["rom"].contains("ell")) c.ell = get_list<Index>(j["rom"], "ell", "rom");
  }
  if (j.contains("interpolation")) {
    check_keys(j["interpolation"], {"p"}, "interpolation");
    if (j["interpolation"].contains("p")) c.interp_order = get<int>(j["interpolation"], "p", "interpolation");
  }
  if (j.contains("test_set")) {
    const json& t = j["test_set"];
    check_keys(t, {"mode", "n", "offset", "count", "seed", "allow_training_overlap"}, "test_set");
    const std::string mode = t.contains("mode") ? get<std::string>(t, "mode", "test_set") : "grid";
    if (mode == "grid") {
      c.test_set.mode = TestSetConfig::Mode::Grid;
    } else if (mode == "random") {
      c.test_set.mode = TestSetConfig::Mode::Random;
    } else {
      throw ConfigError("test_set.mode must be 'grid' or 'random'");
    }
    if (t.contains("n")) c.test_set.n = get<Index>(t, "n", "test_set");
    if (t.contains("offset")) c.test_set.offset = get<bool>(t, "offset", "test_set");
    if (t.contains("count")) c.test_set.count = get<Index>(t, "count", "test_set");
    if (t.contains("seed")) c.test_set.seed = get<std::uint64_t>(t, "seed", "test_set");
    if (t.contains("allow_training_overlap")) {
      c.test_set.allow_training_overlap = get<bool>(t, "allow_training_overlap", "test_set");
    }
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    check_keys(s, {"variable", "values"}, "sweep");
    c.sweep = sweep_variable_from_string(get<std::string>(s, "variable", "sweep"));
    if (s.contains("values")) c.sweep_values = get_list<double>(s, "values", "sweep");
  }
  if (c.sweep_values.empty()) {
    if (c.sweep == SweepVariable::Eps) c.sweep_values = c.eps;
    if (c.sweep == SweepVariable::Ell) c.sweep_values.assign(c.ell.begin(), c.ell.end());
    if (c.sweep == SweepVariable::Delta && c.grid_spacing) c.sweep_values = {*c.grid_spacing};
  }
  if (j.contains("output")) c.output = get<std::string>(j, "output", "config");
  if (j.contains("memory_budget_gb")) c.memory_budget_gb = get<double>(j, "memory_budget_gb", "config");
  if (j.contains("workers")) c.workers = get<int>(j, "workers", "config");
  if (j.contains("fom_cache")) c.fom_cache = get<bool>(j, "fom_cache", "config");
  if (j.contains("fit")) {
    check_keys(j["fit"], {"plateau_factor"}, "fit");
    if (j["fit"].contains("plateau_factor")) c.plateau_factor = get<double>(j["fit"], "plateau_factor", "fit");
  }
  c.validate();
  return c;
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::vector<ParameterVector> build_test_set(const StudyConfig& config, const ParameterGrid& training) {
  const ParameterBox& box = config.problem.box;
  const Index D = box.dim();
  std::vector<ParameterVector> out;
  if (config.test_set.mode == TestSetConfig::Mode::Grid) {
    const Index n = config.test_set.n;
    if (!config.test_set.offset && n < 2) throw ConfigError("an endpoint test grid needs n >= 2");
    Index total = 1;
    for (Index i = 0; i < D; ++i) total *= n;
    for (Index lin = 0; lin < total; ++lin) {
      ParameterVector a(D);
      Index rest = lin;
      for (Index i = 0; i < D; ++i) {
        const double j = static_cast<double>(rest % n);
        rest /= n;
        const double t = config.test_set.offset ? (j + 0.5) / static_cast<double>(n)
                                                : j / static_cast<double>(n - 1);
        a(i) = box.lower(i) + t * box.width(i);
      }
      out.push_back(std::move(a));
    }
  } else {
    // 53 high bits of mt19937_64 mapped to [0, 1); fixed across platforms.
    std::mt19937_64 rng(config.test_set.seed);
    for (Index k = 0; k < config.test_set.count; ++k) {
      ParameterVector a(D);
      for (Index i = 0; i < D; ++i) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        a(i) = box.lower(i) + u * box.width(i);
      }
      out.push_back(std::move(a));
    }
  }
  if (!config.test_set.allow_training_overlap) {
    for (const auto& a : out) {
      if (on_training_grid(a, training)) {
        std::ostringstream os;
        os << "test point (" << a.transpose() << ") coincides with a training node";
        throw ConfigError(os.str());
      }
    }
  }
  return out;
}

std::string format_csv_row(const StudyRow& r) {
  std::ostringstream os;
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", r.wall_s);
  os << to_string(r.sweep) << ',' << format_double(r.value) << ',' << format_double(r.eps) << ','
     << format_double(r.delta_max) << ',' << r.ell << ',' << format_double(r.lambda_tail) << ','
     << format_double(r.E_max) << ',' << format_double(r.E_mean) << ',' << r.R1 << ',' << wall;
  return os.str();
}

StudyResult run_study(const StudyConfig& config) {
  config.validate();
  const auto study_start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(config.output);
  const std::filesystem::path cache_dir = config.output / "fom_cache";
  if (config.fom_cache) std::filesystem::create_directories(cache_dir);
  const std::uint64_t budget = config.budget_bytes();

  const ProblemSpec& problem = config.problem;
  const Mesh2D mesh = build_mesh(problem, config.h);
  check_mesh(mesh);
  const SparseOperator M = assemble_mass(mesh);
  const SparseOperator L = assemble_h1_gram(mesh);
  const double mass_norm = spectral_norm_spd(M);
  const TimeGrid tg = config.time_grid();
  const double dt = tg.dt();
  const Eigen::VectorXd u0 = initial_state(mesh, problem);
  std::cerr << "[study] " << to_string(problem.kind) << ": " << mesh.num_nodes() << " nodes, "
            << mesh.num_triangles() << " triangles, N = " << tg.steps << "\n";

  // Reference trajectories on the test set do not depend on the sweep.
  const ParameterGrid first_grid = build_parameter_grid(
      problem.box, config.training_counts(config.sweep == SweepVariable::Delta
                                              ? std::optional<double>(config.sweep_values.front())
                                              : std::nullopt));
  const std::vector<ParameterVector> tests = build_test_set(config, first_grid);
  std::vector<DiscreteOperator> ops(tests.size());
  std::vector<Eigen::MatrixXd> fom(tests.size());
  std::vector<Eigen::VectorXd> spectra(tests.size());
  check_budget(static_cast<std::uint64_t>(mesh.num_nodes()) * static_cast<std::uint64_t>(tg.steps) *
                   tests.size(),
               budget, "test-set trajectories");
  parallel_for(static_cast<std::ptrdiff_t>(tests.size()), config.workers, [&](std::ptrdiff_t j) {
    const auto& a = tests[static_cast<std::size_t>(j)];
    auto& op = ops[static_cast<std::size_t>(j)];
    op = assemble_operator(mesh, problem, a);
    auto& U = fom[static_cast<std::size_t>(j)];
    const std::uint64_t key = fom_cache_key(problem, a, config.h, tg.steps);
    std::optional<Eigen::MatrixXd> hit;
    if (config.fom_cache) hit = lookup_fom(cache_dir, key, mesh.num_nodes(), tg.steps);
    if (hit) {
      U = std::move(*hit);
    } else {
      U = backward_euler_solve(op.A, op.g, M, u0, tg).U;
      if (config.fom_cache) cache_fom(cache_dir, key, U);
    }
    spectra[static_cast<std::size_t>(j)] = correlation_spectrum(U, M);
  });
  std::cerr << "[study] " << tests.size() << " test trajectories ready ("
            << wall_since(study_start) << " s)\n";

  StudyResult result;
  result.csv = config.output / "results.csv";
  std::ofstream csv(result.csv, std::ios::trunc);
  if (!csv) throw FormatError("cannot write " + result.csv.string());
  csv << kCsvHeader << '\n';
  json errors = json::array();

  std::vector<Index> grid_counts;
  ParameterGrid grid;
  SnapshotTensor phi;
  double phi_norm0 = 0.0, phi_fro = 0.0;
  std::optional<TTTensor> tt;
  double tt_eps = -1.0;
  Index R1 = 0;

  for (double value : config.sweep_values) {
    const auto t0 = std::chrono::steady_clock::now();
    StudyRow row;
    row.sweep = config.sweep;
    row.value = value;
    row.eps = config.sweep == SweepVariable::Eps ? value : config.eps.front();
    const Index ell = config.sweep == SweepVariable::Ell ? static_cast<Index>(value) : config.ell.front();
    row.ell = ell;
    try {
      const auto counts = config.training_counts(
          config.sweep == SweepVariable::Delta ? std::optional<double>(value) : std::nullopt);
      if (counts != grid_counts) {
        grid = build_parameter_grid(problem.box, counts);
        if (!config.test_set.allow_training_overlap) {
          for (const auto& a : tests) {
            if (on_training_grid(a, grid)) throw ConfigError("test point coincides with a training node");
          }
        }
        tt.reset();
        phi = SnapshotTensor();
        grid_counts.clear();
        phi = generate_snapshots(problem, mesh, tg, grid, config.workers, budget);
        grid_counts = counts;
        phi_norm0 = norm0(phi, M, dt);
        phi_fro = frobenius_norm(phi);
        std::cerr << "[study] snapshots for K = " << grid.total() << " ready (" << wall_since(t0) << " s)\n";
      }
      row.delta_max = grid.max_step();
      if (!tt || tt_eps != row.eps) {
        tt.reset();
        const double eps_tilde = eps_to_eps_tilde(row.eps, phi_norm0, phi_fro, mass_norm, dt);
        tt = tt_svd(phi, eps_tilde);
        tt_eps = row.eps;
        R1 = tt->rank(1);
      }
      row.R1 = R1;
      const Index ell_eff = std::min({ell, R1, tg.steps});
      row.ell = ell_eff;

      const InterpolationScheme scheme(grid, config.interp_order);
      std::vector<double> E(tests.size());
      parallel_for(static_cast<std::ptrdiff_t>(tests.size()), config.workers, [&](std::ptrdiff_t j) {
        const auto k = static_cast<std::size_t>(j);
        const auto chi = chi_weights(tests[k], scheme);
        const LocalBasis basis = local_reduced_space(*tt, chi, ell_eff);
        const RomTrajectory rom = rom_solve(ops[k], M, basis.S, tg, u0);
        E[k] = error_E_alpha(fom[k], rom.lift(), L, dt);
      });
      const double emax = *std::max_element(E.begin(), E.end());
      const double esum = std::accumulate(E.begin(), E.end(), 0.0);
      row.E_max = std::sqrt(emax);
      row.E_mean = std::sqrt(esum / static_cast<double>(E.size()));
      row.lambda_tail = lambda_tail(std::span<const Eigen::VectorXd>(spectra), ell_eff);
    } catch (const std::exception& e) {
      row.error = e.what();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.lambda_tail = row.E_max = row.E_mean = nan;
      errors.push_back({{"value", value}, {"error", row.error}});
      std::cerr << "[study] " << to_string(config.sweep) << " = " << value << " failed: " << row.error << "\n";
    }
    row.wall_s = wall_since(t0);
    csv << format_csv_row(row) << '\n' << std::flush;
    if (row.error.empty()) {
      std::cerr << "[study] " << to_string(config.sweep) << " = " << value << ": E_max = " << row.E_max
                << ", E_mean = " << row.E_mean << ", R1 = " << row.R1 << ", ell = " << row.ell
                << ", Lambda = " << row.lambda_tail << " (" << row.wall_s << " s)\n";
    }
    result.rows.push_back(std::move(row));
  }

  std::ostringstream dat;
  dat << "# " << to_string(config.sweep) << " E_max E_mean lambda_tail R1\n";
  for (const auto& r : result.rows) {
    dat << format_double(r.value) << ' ' << format_double(r.E_max) << ' ' << format_double(r.E_mean)
        << ' ' << format_double(r.lambda_tail) << ' ' << r.R1 << '\n';
  }
  write_text(config.output / "results.dat", dat.str());

  json summary;
  summary["problem"] = to_string(problem.kind);
  summary["nodes"] = mesh.num_nodes();
  summary["mesh_h"] = mesh.h;
  summary["steps"] = tg.steps;
  summary["test_points"] = tests.size();
  summary["sweep"] = to_string(config.sweep);
  summary["rows"] = result.rows.size();
  summary["errors"] = errors;
  try {
    const SlopeFit fit = fit_rows(result.rows, config.sweep, config.plateau_factor);
    summary["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r2", fit.r2},
                      {"points", fit.points}};
  } catch (const Error& e) {
    summary["fit"] = nullptr;
    summary["fit_error"] = e.what();
  }
  summary["wall_s"] = wall_since(study_start);
  write_text(config.output / "summary.json", summary.dump(2) + "\n");
  return result;
}

SlopeFit slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("slope fit needs equally many x and y values");
  if (x.size() < 3) throw DomainError("slope fit needs at least 3 points");
  const std::size_t n = x.size();
  Eigen::VectorXd lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("slope fit needs positive values");
    lx(static_cast<Index>(i)) = std::log(x[i]);
    ly(static_cast<Index>(i)) = std::log(y[i]);
  }
  const double mx = lx.mean(), my = ly.mean();
  const double sxx = (lx.array() - mx).square().sum();
  if (!(sxx > 0.0)) throw DomainError("slope fit needs at least two distinct x values");
  const double sxy = ((lx.array() - mx) * (ly.array() - my)).sum();
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double ss_tot = (ly.array() - my).square().sum();
  const double ss_res = (ly.array() - f.intercept - f.slope * lx.array()).square().sum();
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  f.points = n;
  return f;
}

std::vector<std::size_t> exclude_plateau(const std::vector<double>& x, const std::vector<double>& y,
                                         double factor) {
  if (x.size() != y.size()) throw DimensionError("plateau exclusion needs equally many x and y values");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  if (order.empty()) return order;
  const double ymin = *std::min_element(y.begin(), y.end());
  std::size_t k = order.size();
  while (k > 0 && y[order[k - 1]] <= factor * ymin) --k;
  order.resize(std::min(order.size(), k + 1));
  return order;
}

std::vector<StudyRow> read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw FormatError(path.string() + " does not start with the expected header");
  }
  std::vector<StudyRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw FormatError("malformed row: " + line);
    StudyRow r;
    r.sweep = sweep_variable_from_string(f[0]);
    auto num = [&](const std::string& s) {
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str()) throw FormatError("bad number '" + s + "' in " + path.string());
      return v;
    };
    r.value = num(f[1]);
    r.eps = num(f[2]);
    r.delta_max = num(f[3]);
    r.ell = static_cast<Index>(num(f[4]));
    r.lambda_tail = num(f[5]);
    r.E_max = num(f[6]);
    r.E_mean = num(f[7]);
    r.R1 = static_cast<Index>(num(f[8]));
    r.wall_s = num(f[9]);
    rows.push_back(r);
  }
  return rows;
}

SlopeFit fit_rows(const std::vector<StudyRow>& rows, SweepVariable var, double plateau_factor,
                  bool use_mean) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    const double xv = var == SweepVariable::Ell ? r.lambda_tail : r.value;
    const double yv = use_mean ? r.E_mean : r.E_max;
    if (std::isfinite(xv) && std::isfinite(yv) && xv > 0.0 && yv > 0.0) {
      x.push_back(xv);
      y.push_back(yv);
    }
  }
  const auto keep = exclude_plateau(x, y, plateau_factor);
  std::vector<double> fx, fy;
  for (std::size_t i : keep) {
    fx.push_back(x[i]);
    fy.push_back(y[i]);
  }
  return slope_fit(fx, fy);
}

std::uint64_t fom_cache_key(const ProblemSpec& problem, const ParameterVector& alpha, double h,
                            Index steps) {
  std::uint64_t hash = 14695981039346656037ull;
  auto feed = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= b[i];
      hash *= 1099511628211ull;
    }
  };
  const std::string canon = problem.canonical_string();
  feed(canon.data(), canon.size());
  for (Index i = 0; i < alpha.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(alpha(i));
    feed(&bits, sizeof bits);
  }
  const auto hbits = std::bit_cast<std::uint64_t>(h);
  feed(&hbits, sizeof hbits);
  const auto n = static_cast<std::uint64_t>(steps);
  feed(&n, sizeof n);
  return hash;
}

std::filesystem::path fom_cache_path(const std::filesystem::path& dir, std::uint64_t key) {
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.lrt1", static_cast<unsigned long long>(key));
  return dir / name;
}

void cache_fom(const std::filesystem::path& dir, std::uint64_t key, const Eigen::MatrixXd& U) {
  const auto path = fom_cache_path(dir, key);
  auto tmp = path;
  tmp += ".tmp";
  save_tensor(SnapshotTensor({U.rows(), U.cols()}, Eigen::Map<const Eigen::VectorXd>(U.data(), U.size())),
              tmp);
  std::filesystem::rename(tmp, path);
}

std::optional<Eigen::MatrixXd> lookup_fom(const std::filesystem::path& dir, std::uint64_t key,
                                          Index rows, Index cols) {
  const auto path = fom_cache_path(dir, key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    const SnapshotTensor t = load_tensor(path);
    if (t.order() != 2 || t.dim(0) != rows || t.dim(1) != cols || !t.data().allFinite()) {
      return std::nullopt;
    }
    return Eigen::MatrixXd(Eigen::Map<const Eigen::MatrixXd>(t.data().data(), rows, cols));
  } catch (const FormatError&) {
    return std::nullopt;
  }
}

}  // namespace lrtdrom
