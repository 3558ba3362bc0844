#pragma once

#include <functional>
#include <memory>

#include <Eigen/Core>

#include "lrtdrom/fem.hpp"

namespace lrtdrom {

/// Uniform time grid t_n = n T / N, n = 0..N.
struct TimeGrid {
  Index steps = 1;
  double final_time = 1.0;

  TimeGrid() = default;
  TimeGrid(double final_time, Index steps);

  double dt() const { return final_time / static_cast<double>(steps); }
  double time(Index n) const { return final_time * static_cast<double>(n) / static_cast<double>(steps); }
};

/// Columns u^1 .. u^N of a full-order solve; u^0 is not stored.
struct FomTrajectory {
  Eigen::MatrixXd U;
  TimeGrid grid;
  ParameterVector alpha;

  Index steps() const { return U.cols(); }
};

/// Factorization of M + dt A, reused across time steps. Uses LDL^T when the
/// matrix is symmetric and sparse LU otherwise.
class ShiftedSystem {
 public:
  ShiftedSystem(const SparseOperator& M, const SparseOperator& A, double dt);
  ~ShiftedSystem();
  ShiftedSystem(ShiftedSystem&&) noexcept;
  ShiftedSystem& operator=(ShiftedSystem&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  bool symmetric() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Backward Euler for M u' + A u = g with constant g:
/// (M + dt A) u^n = M u^{n-1} + dt g, n = 1..N.
FomTrajectory backward_euler_solve(const SparseOperator& A, const Eigen::VectorXd& g,
                                   const SparseOperator& M, const Eigen::VectorXd& u0,
                                   const TimeGrid& grid);

/// Same scheme with a time-dependent load evaluated at t_n.
FomTrajectory backward_euler_solve(const SparseOperator& A,
                                   const std::function<Eigen::VectorXd(double)>& load,
                                   const SparseOperator& M, const Eigen::VectorXd& u0,
                                   const TimeGrid& grid);

/// Initial coefficient vector of the configured problem.
Eigen::VectorXd initial_state(const Mesh2D& mesh, const ProblemSpec& problem);

/// Assembles A(alpha), g(alpha) and runs the full-order model.
FomTrajectory solve_fom(const Mesh2D& mesh, const ProblemSpec& problem,
                        const SparseOperator& M, const ParameterVector& alpha,
                        const TimeGrid& grid);

}  // namespace lrtdrom
