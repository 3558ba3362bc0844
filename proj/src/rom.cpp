#include "lrtdrom/rom.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "lrtdrom/errors.hpp"

namespace lrtdrom {

LocalBasis local_reduced_space(const TTTensor& tt, std::span<const Eigen::VectorXd> chi, Index ell) {
  const Eigen::MatrixXd& T1 = universal_basis(tt);
  const Eigen::MatrixXd C = local_coefficient_matrix(tt, chi);
  const Index cap = std::min(C.rows(), C.cols());
  if (ell < 1 || ell > cap) {
    throw DimensionError("ell = " + std::to_string(ell) + " outside [1, " + std::to_string(cap) + "]");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinU);
  LocalBasis b;
  b.sigma = svd.singularValues();
  b.coords = svd.matrixU().leftCols(ell);
  b.S = T1 * b.coords;
  return b;
}

RomTrajectory rom_solve(const DiscreteOperator& op, const SparseOperator& M,
                        const Eigen::MatrixXd& S, const TimeGrid& grid, const Eigen::VectorXd& u0) {
  if (S.rows() != M.rows() || op.A.rows() != M.rows() || op.g.size() != M.rows() ||
      u0.size() != M.rows()) {
    throw DimensionError("reduced solve inputs disagree in size");
  }
  const Eigen::MatrixXd MS = M * S;
  const Eigen::MatrixXd Mr = S.transpose() * MS;
  const Eigen::MatrixXd Ar = S.transpose() * (op.A * S);
  const Eigen::VectorXd gr = S.transpose() * op.g;

  Eigen::LLT<Eigen::MatrixXd> mass(Mr);
  if (mass.info() != Eigen::Success) throw SolverError("reduced mass matrix is not positive definite");
  const double dt = grid.dt();
  const Eigen::MatrixXd shifted = Mr + dt * Ar;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
  const double rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    throw SolverError("reduced system is singular (rcond " + std::to_string(rcond) + ")");
  }

  RomTrajectory rom;
  rom.grid = grid;
  rom.basis = S;
  rom.initial = mass.solve(MS.transpose() * u0);
  rom.coeffs.resize(S.cols(), grid.steps);
  const Eigen::VectorXd load = dt * gr;
  Eigen::VectorXd c = rom.initial;
  for (Index n = 0; n < grid.steps; ++n) {
    c = lu.solve(Mr * c + load);
    rom.coeffs.col(n) = c;
  }
  return rom;
}

RomTrajectory rom_solve(const ProblemSpec& problem, const Mesh2D& mesh, const ParameterVector& alpha,
                        const LocalBasis& basis, const TimeGrid& grid, const Eigen::VectorXd& u0) {
  return rom_solve(assemble_operator(mesh, problem, alpha), assemble_mass(mesh), basis.S, grid, u0);
}

LocalBasis pod_basis(const Eigen::Ref<const Eigen::MatrixXd>& snapshots, const SparseOperator& M,
                     Index ell) {
  if (snapshots.rows() != M.rows()) throw DimensionError("snapshots and mass matrix disagree in size");
  Eigen::SimplicialLLT<SparseOperator> chol(M);
  if (chol.info() != Eigen::Success) throw SolverError("mass matrix is not positive definite");
  // P M P^T = L L^T, so B = L^T P realizes M = B^T B.
  const Eigen::MatrixXd X = chol.matrixU() * (chol.permutationP() * snapshots);
  const Index m = X.rows(), n = X.cols();

  Eigen::MatrixXd W;
  Eigen::VectorXd sigma;
  if (n > 2 * m) {
    Eigen::MatrixXd Xt = X.transpose();
    Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr(Xt);
    const Eigen::MatrixXd Rt = Xt.topRows(m).triangularView<Eigen::Upper>().transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Rt, Eigen::ComputeThinU);
    W = svd.matrixU();
    sigma = svd.singularValues();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
    W = svd.matrixU();
    sigma = svd.singularValues();
  }
  const double floor = static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon() *
                       (sigma.size() > 0 ? sigma(0) : 0.0);
  Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > floor) ++rank;
  if (ell < 1 || ell > rank) {
    throw DimensionError("ell = " + std::to_string(ell) + " exceeds the numerical rank " +
                         std::to_string(rank));
  }
  LocalBasis b;
  b.sigma = sigma;
  const Eigen::MatrixXd Y = chol.matrixU().solve(W.leftCols(ell));
  b.S = chol.permutationPinv() * Y;
  return b;
}

LocalBasis pod_basis(const SnapshotTensor& phi, const SparseOperator& M, Index ell) {
  return pod_basis(unfold1(phi), M, ell);
}

Eigen::VectorXd correlation_spectrum(const Eigen::MatrixXd& U, const SparseOperator& M) {
  if (U.rows() != M.rows()) throw DimensionError("trajectory and mass matrix disagree in size");
  const Eigen::MatrixXd K = (U.transpose() * (M * U)) / static_cast<double>(U.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K, Eigen::EigenvaluesOnly);
  Eigen::VectorXd lambda = eig.eigenvalues().reverse();
  for (Index i = 0; i < lambda.size(); ++i) lambda(i) = std::max(0.0, lambda(i));
  return lambda;
}

double lambda_tail(std::span<const Eigen::VectorXd> spectra, Index ell) {
  if (spectra.empty()) throw DimensionError("lambda tail needs a nonempty test set");
  if (ell < 0) throw DimensionError("ell must be non-negative");
  double worst = 0.0;
  for (const auto& s : spectra) {
    const Index from = std::min(ell, s.size());
    worst = std::max(worst, s.tail(s.size() - from).sum());
  }
  return worst;
}

double lambda_tail(std::span<const Eigen::MatrixXd> trajectories, const SparseOperator& M, Index ell) {
  std::vector<Eigen::VectorXd> spectra;
  for (const auto& U : trajectories) spectra.push_back(correlation_spectrum(U, M));
  return lambda_tail(std::span<const Eigen::VectorXd>(spectra), ell);
}

double error_E_alpha(const Eigen::MatrixXd& fom, const Eigen::MatrixXd& rom, const SparseOperator& L,
                     double dt) {
  if (fom.rows() != rom.rows() || fom.cols() != rom.cols() || fom.rows() != L.rows()) {
    throw DimensionError("trajectories and H1 Gram matrix disagree in size");
  }
  const Eigen::MatrixXd e = fom - rom;
  const Eigen::MatrixXd Le = L * e;
  return dt * (e.array() * Le.array()).sum();
}

double error_E_alpha(const FomTrajectory& fom, const RomTrajectory& rom, const SparseOperator& L,
                     double dt) {
  return error_E_alpha(fom.U, rom.lift(), L, dt);
}

}  // namespace lrtdrom
