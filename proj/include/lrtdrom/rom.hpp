#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "lrtdrom/fem.hpp"
#include "lrtdrom/time_stepping.hpp"
#include "lrtdrom/tt.hpp"

namespace lrtdrom {

/// Reduced basis S (M x ell) with the singular values it was cut from.
/// Local bases from the tensor train are Euclidean-orthonormal; pod_basis
/// returns an M-orthonormal one.
struct LocalBasis {
  Eigen::MatrixXd S;
  Eigen::VectorXd sigma;   // all singular values of the source matrix, non-increasing
  Eigen::MatrixXd coords;  // R_1 x ell coordinates in the universal basis, empty for POD

  Index ell() const { return S.cols(); }
};

/// Reduced coefficients c^1 .. c^N together with the basis they refer to.
struct RomTrajectory {
  Eigen::MatrixXd coeffs;  // ell x N
  Eigen::VectorXd initial; // c^0
  Eigen::MatrixXd basis;   // M x ell
  TimeGrid grid;

  Index steps() const { return coeffs.cols(); }
  /// u_ell^n = S c^n for n = 1..N.
  Eigen::MatrixXd lift() const { return basis * coeffs; }
};

/// First ell left singular vectors of Phi~(alpha), computed from the small
/// SVD of C(alpha) and mapped through T_1. Throws DimensionError unless
/// 1 <= ell <= min(R_1, N).
LocalBasis local_reduced_space(const TTTensor& tt, std::span<const Eigen::VectorXd> chi, Index ell);

/// Galerkin backward Euler on span(S): M_r = S^T M S, A_r = S^T A S,
/// g_r = S^T g, M_r c^0 = S^T M u0. One dense factorization is reused.
RomTrajectory rom_solve(const DiscreteOperator& op, const SparseOperator& M,
                        const Eigen::MatrixXd& S, const TimeGrid& grid, const Eigen::VectorXd& u0);

/// Convenience form assembling A(alpha), g(alpha) and M.
RomTrajectory rom_solve(const ProblemSpec& problem, const Mesh2D& mesh, const ParameterVector& alpha,
                        const LocalBasis& basis, const TimeGrid& grid, const Eigen::VectorXd& u0);

/// M-orthonormal POD basis of the first-mode unfolding of phi: the ell
/// leading left singular vectors of M^{1/2} Phi_pod mapped back by M^{-1/2},
/// realized through a sparse Cholesky factor of M. Throws DimensionError when
/// ell exceeds the numerical rank.
LocalBasis pod_basis(const SnapshotTensor& phi, const SparseOperator& M, Index ell);
LocalBasis pod_basis(const Eigen::Ref<const Eigen::MatrixXd>& snapshots, const SparseOperator& M,
                     Index ell);

/// Eigenvalues of N^{-1} U^T M U, non-increasing, negatives clamped to 0.
Eigen::VectorXd correlation_spectrum(const Eigen::MatrixXd& U, const SparseOperator& M);

/// max over the test set of sum_{i > ell} lambda_i(alpha) (ell is 0-based
/// count of kept modes, so ell = 0 gives the full sum).
double lambda_tail(std::span<const Eigen::VectorXd> spectra, Index ell);
double lambda_tail(std::span<const Eigen::MatrixXd> trajectories, const SparseOperator& M, Index ell);

/// E = dt sum_n (e^n)^T L e^n with e^n = u_fom^n - u_rom^n.
double error_E_alpha(const Eigen::MatrixXd& fom, const Eigen::MatrixXd& rom, const SparseOperator& L,
                     double dt);
double error_E_alpha(const FomTrajectory& fom, const RomTrajectory& rom, const SparseOperator& L,
                     double dt);

}  // namespace lrtdrom
