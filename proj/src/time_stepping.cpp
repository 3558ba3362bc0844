#include "lrtdrom/time_stepping.hpp"

#include <cmath>
#include <sstream>
#include <variant>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "lrtdrom/errors.hpp"

namespace lrtdrom {

TimeGrid::TimeGrid(double final_time_, Index steps_) : steps(steps_), final_time(final_time_) {
  if (steps < 1) throw ConfigError("time grid needs at least one step");
  if (!(final_time > 0.0)) throw ConfigError("final time must be positive");
}

struct ShiftedSystem::Impl {
  using Ldlt = Eigen::SimplicialLDLT<SparseOperator>;
  using Lu = Eigen::SparseLU<SparseOperator, Eigen::COLAMDOrdering<int>>;
  std::variant<Ldlt, Lu> solver;
};

ShiftedSystem::ShiftedSystem(const SparseOperator& M, const SparseOperator& A, double dt)
    : impl_(std::make_unique<Impl>()) {
  if (M.rows() != A.rows() || M.cols() != A.cols() || M.rows() != M.cols()) {
    throw DimensionError("mass and system matrices differ in size");
  }
  SparseOperator system = M + dt * A;
  system.makeCompressed();
  const SparseOperator transposed = system.transpose();
  const double asym = (system - transposed).norm();
  if (asym <= 1e-14 * system.norm()) {
    auto& ldlt = impl_->solver.emplace<Impl::Ldlt>();
    ldlt.compute(system);
    if (ldlt.info() != Eigen::Success) throw SolverError("LDL^T factorization of M + dt A failed");
    const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    const double ratio = d.minCoeff() / d.maxCoeff();
    if (!(d.minCoeff() > 0.0) || ratio < 1e-15) {
      std::ostringstream os;
      os << "M + dt A is numerically singular (pivot ratio " << ratio << ")";
      throw SolverError(os.str());
    }
  } else {
    auto& lu = impl_->solver.emplace<Impl::Lu>();
    lu.compute(system);
    if (lu.info() != Eigen::Success) {
      std::ostringstream os;
      os << "LU factorization of M + dt A failed: " << lu.lastErrorMessage();
      throw SolverError(os.str());
    }
    const double log_det = lu.logAbsDeterminant();
    if (!std::isfinite(log_det)) {
      throw SolverError("M + dt A is singular (log|det| = -inf)");
    }
  }
}

ShiftedSystem::~ShiftedSystem() = default;
ShiftedSystem::ShiftedSystem(ShiftedSystem&&) noexcept = default;
ShiftedSystem& ShiftedSystem::operator=(ShiftedSystem&&) noexcept = default;

Eigen::VectorXd ShiftedSystem::solve(const Eigen::VectorXd& rhs) const {
  return std::visit([&](auto& s) -> Eigen::VectorXd { return s.solve(rhs); }, impl_->solver);
}

bool ShiftedSystem::symmetric() const {
  return std::holds_alternative<Impl::Ldlt>(impl_->solver);
}

FomTrajectory backward_euler_solve(const SparseOperator& A,
                                   const std::function<Eigen::VectorXd(double)>& load,
                                   const SparseOperator& M, const Eigen::VectorXd& u0,
                                   const TimeGrid& grid) {
  if (u0.size() != M.rows()) throw DimensionError("initial state length mismatch");
  const double dt = grid.dt();
  const ShiftedSystem system(M, A, dt);
  FomTrajectory out;
  out.grid = grid;
  out.U.resize(M.rows(), grid.steps);
  Eigen::VectorXd u = u0;
  for (Index n = 1; n <= grid.steps; ++n) {
    const Eigen::VectorXd rhs = M * u + dt * load(grid.time(n));
    u = system.solve(rhs);
    if (!u.allFinite()) throw SolverError("non-finite state at step " + std::to_string(n));
    out.U.col(n - 1) = u;
  }
  return out;
}

FomTrajectory backward_euler_solve(const SparseOperator& A, const Eigen::VectorXd& g,
                                   const SparseOperator& M, const Eigen::VectorXd& u0,
                                   const TimeGrid& grid) {
  if (g.size() != M.rows()) throw DimensionError("load vector length mismatch");
  const Eigen::VectorXd dt_g = grid.dt() * g;
  const double dt = grid.dt();
  if (u0.size() != M.rows()) throw DimensionError("initial state length mismatch");
  const ShiftedSystem system(M, A, dt);
  FomTrajectory out;
  out.grid = grid;
  out.U.resize(M.rows(), grid.steps);
  Eigen::VectorXd u = u0;
  for (Index n = 1; n <= grid.steps; ++n) {
    u = system.solve(M * u + dt_g);
    if (!u.allFinite()) throw SolverError("non-finite state at step " + std::to_string(n));
    out.U.col(n - 1) = u;
  }
  return out;
}

Eigen::VectorXd initial_state(const Mesh2D& mesh, const ProblemSpec& problem) {
  switch (problem.initial) {
    case InitialCondition::Zero: return Eigen::VectorXd::Zero(mesh.num_nodes());
  }
  return Eigen::VectorXd::Zero(mesh.num_nodes());
}

FomTrajectory solve_fom(const Mesh2D& mesh, const ProblemSpec& problem,
                        const SparseOperator& M, const ParameterVector& alpha,
                        const TimeGrid& grid) {
  const auto op = assemble_operator(mesh, problem, alpha);
  auto traj = backward_euler_solve(op.A, op.g, M, initial_state(mesh, problem), grid);
  traj.alpha = alpha;
  return traj;
}

}  // namespace lrtdrom
