#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "lrtdrom/fem.hpp"
#include "lrtdrom/tensor.hpp"
#include "lrtdrom/time_stepping.hpp"

namespace lrtdrom {

/// Cartesian sampling grid in the parameter box with uniform nodes per
/// dimension (both endpoints included).
struct ParameterGrid {
  std::vector<Eigen::VectorXd> nodes;
  ParameterBox box;

  Index dim() const { return static_cast<Index>(nodes.size()); }
  Index count(Index i) const { return nodes[static_cast<std::size_t>(i)].size(); }
  std::vector<Index> counts() const;
  Index total() const;

  /// Largest gap between adjacent nodes in dimension i.
  double step(Index i) const;
  double max_step() const;
  /// sum_i step(i)^p.
  double step_power_sum(double p) const;

  ParameterVector point(std::span<const Index> multi) const;
  /// Grid point for a linear index, first dimension fastest.
  ParameterVector point(Index linear) const;
  std::vector<Index> multi_index(Index linear) const;
};

/// Uniform grid with counts[i] nodes in dimension i. Throws ConfigError if a
/// count is below 2 or the count list does not match the box.
ParameterGrid build_parameter_grid(const ParameterBox& box, const std::vector<Index>& counts);

/// Smallest node counts whose uniform spacing does not exceed `spacing`.
std::vector<Index> counts_for_spacing(const ParameterBox& box, double spacing);

/// Memory budget in bytes: LRTDROM_MEM_BUDGET_GB if set, else `default_gb`.
std::uint64_t memory_budget_bytes(double default_gb = 8.0);

/// Throws BudgetError if `entries` doubles exceed `budget_bytes`.
void check_budget(std::uint64_t entries, std::uint64_t budget_bytes, const char* what);

/// Snapshot tensor [M, N, K_1, ..., K_D]: one full-order run per grid point,
/// dispatched to `workers` threads; each run writes its own slice.
SnapshotTensor generate_snapshots(const ProblemSpec& problem, const Mesh2D& mesh,
                                  const TimeGrid& grid, const ParameterGrid& params,
                                  int workers = 1, std::uint64_t budget_bytes = memory_budget_bytes());

/// sqrt(sum_j x_j^T M x_j) over the columns of X, i.e. ||M^{1/2} X||_F.
double weighted_frobenius(const SparseOperator& M, const Eigen::Ref<const Eigen::MatrixXd>& X);

/// dt^{1/2} max over parameter slices of ||M^{1/2} Phi_xt||_F.
double norm0(const SnapshotTensor& phi, const SparseOperator& M, double dt);

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration, stopped at relative change below `tol`.
double spectral_norm_spd(const SparseOperator& M, double tol = 1e-6, int max_iter = 10000);

/// Binary tensor file: "LRT1", u32 order, u32 dims[order], f64 payload,
/// little-endian, canonical layout.
void save_tensor(const SnapshotTensor& t, const std::filesystem::path& path);
SnapshotTensor load_tensor(const std::filesystem::path& path);

}  // namespace lrtdrom
