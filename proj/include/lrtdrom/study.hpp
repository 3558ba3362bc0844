#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lrtdrom/problem.hpp"
#include "lrtdrom/snapshots.hpp"

namespace lrtdrom {

enum class SweepVariable { Eps, Delta, Ell };

const char* to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string& name);

struct TestSetConfig {
  enum class Mode { Grid, Random } mode = Mode::Grid;
  Index n = 8;              // grid: points per dimension
  bool offset = true;       // grid: cell midpoints instead of endpoints
  Index count = 100;        // random
  std::uint64_t seed = 42;  // random, mt19937_64
  bool allow_training_overlap = false;
};

struct StudyConfig {
  ProblemSpec problem;
  double h = 0.2;
  Index steps = 100;
  std::vector<Index> grid_counts;     // empty when grid_spacing is used
  std::optional<double> grid_spacing;
  std::vector<double> eps{1e-4};
  std::vector<Index> ell{12};
  Index max_ell = 64;
  int interp_order = 2;
  TestSetConfig test_set;
  SweepVariable sweep = SweepVariable::Eps;
  std::vector<double> sweep_values;
  std::filesystem::path output = "lrtdrom_out";
  double memory_budget_gb = 8.0;
  int workers = 1;
  bool fom_cache = true;
  double plateau_factor = 2.0;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  TimeGrid time_grid() const { return {problem.final_time, steps}; }
  /// Node counts for an optional spacing override.
  std::vector<Index> training_counts(std::optional<double> spacing = std::nullopt) const;
  /// Effective memory budget: environment override, else the configured value.
  std::uint64_t budget_bytes() const;
};

/// Parses a JSON configuration; unknown keys throw ConfigError.
StudyConfig parse_config(const std::string& json_text);
StudyConfig load_config(const std::filesystem::path& path);

/// Test parameters per the test-set settings. Throws ConfigError when a test
/// point coincides with a training node and overlap is not allowed.
std::vector<ParameterVector> build_test_set(const StudyConfig& config, const ParameterGrid& training);

struct StudyRow {
  SweepVariable sweep = SweepVariable::Eps;
  double value = 0.0;
  double eps = 0.0;
  double delta_max = 0.0;
  Index ell = 0;
  double lambda_tail = 0.0;
  double E_max = 0.0;
  double E_mean = 0.0;
  Index R1 = 0;
  double wall_s = 0.0;
  std::string error;  // empty on success
};

inline constexpr const char* kCsvHeader =
    "sweep_var,value,eps,delta_max,ell,lambda_tail,E_max,E_mean,R1,wall_s";

std::string format_csv_row(const StudyRow& row);

struct StudyResult {
  std::vector<StudyRow> rows;
  std::filesystem::path csv;
};

/// Runs every sweep value, writing results.csv, results.dat and summary.json
/// under config.output. A failing row is recorded and the sweep continues.
StudyResult run_study(const StudyConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least squares on (log x, log y). Throws DomainError for fewer than three
/// pairs or a nonpositive value.
SlopeFit slope_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Indices of the points kept for a slope fit. Points are ordered by x
/// descending; the trailing run whose y lies within `factor` of the minimum
/// is dropped except for its first point.
std::vector<std::size_t> exclude_plateau(const std::vector<double>& x, const std::vector<double>& y,
                                         double factor = 2.0);

/// Rows of a study CSV; throws FormatError on a header mismatch.
std::vector<StudyRow> read_csv(const std::filesystem::path& path);

/// Fit of E_max against the sweep value (eps, delta) or against the tail
/// quantity (ell), after plateau exclusion.
SlopeFit fit_rows(const std::vector<StudyRow>& rows, SweepVariable var, double plateau_factor = 2.0,
                  bool use_mean = false);

/// Content key of a full-order run.
std::uint64_t fom_cache_key(const ProblemSpec& problem, const ParameterVector& alpha, double h,
                            Index steps);
std::filesystem::path fom_cache_path(const std::filesystem::path& dir, std::uint64_t key);
void cache_fom(const std::filesystem::path& dir, std::uint64_t key, const Eigen::MatrixXd& U);
/// Cached trajectory, or nothing when missing, unreadable or of the wrong shape.
std::optional<Eigen::MatrixXd> lookup_fom(const std::filesystem::path& dir, std::uint64_t key,
                                          Index rows, Index cols);

}  // namespace lrtdrom
