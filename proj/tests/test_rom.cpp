#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "lrtdrom/errors.hpp"
#include "lrtdrom/interp.hpp"
#include "lrtdrom/rom.hpp"
#include "oracles.hpp"

using namespace lrtdrom;

namespace {

struct HeatFixture {
  ProblemSpec p = ProblemSpec::heat();
  Mesh2D mesh = build_mesh(p, 0.4);
  SparseOperator M = assemble_mass(mesh);
  SparseOperator L = assemble_h1_gram(mesh);
  TimeGrid tg{20.0, 50};
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(mesh.num_nodes());
};

/// Orthonormal basis of the column span, rank-revealing.
Eigen::MatrixXd orth(const Eigen::MatrixXd& X) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
  Index r = 0;
  while (r < svd.singularValues().size() && svd.singularValues()(r) > 1e-12 * svd.singularValues()(0)) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace

TEST_CASE("local reduced space from the tensor train") {
  HeatFixture f;
  const ParameterGrid grid = build_parameter_grid(f.p.box, {3, 3});
  const SnapshotTensor phi = generate_snapshots(f.p, f.mesh, f.tg, grid);
  const TTTensor tt = tt_svd(phi, 0.0);
  const InterpolationScheme scheme(grid, 2);

  // Grid node: singular values equal those of the stored snapshot matrix.
  const std::array<Index, 2> idx{1, 2};
  const auto chi = chi_weights(grid.point(idx), scheme);
  const LocalBasis b = local_reduced_space(tt, chi, 5);
  const Eigen::VectorXd ref = Eigen::JacobiSVD<Eigen::MatrixXd>(Eigen::MatrixXd(space_time_slice(phi, idx))).singularValues();
  for (Index i = 0; i < 10; ++i) CHECK(std::abs(b.sigma(i) - ref(i)) <= 1e-11 * ref(0));
  CHECK((b.S.transpose() * b.S - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);
  for (Index i = 1; i < b.sigma.size(); ++i) CHECK(b.sigma(i) <= b.sigma(i - 1));

  // Off-grid: small-SVD path matches the dense SVD of the extracted matrix.
  const auto chi2 = chi_weights(Eigen::Vector2d(0.2, 0.33), scheme);
  const LocalBasis c = local_reduced_space(tt, chi2, 4);
  const Eigen::VectorXd dense = Eigen::JacobiSVD<Eigen::MatrixXd>(extract_local_matrix<double>(tt, chi2)).singularValues();
  for (Index i = 0; i < 10; ++i) CHECK(std::abs(c.sigma(i) - dense(i)) <= 1e-11 * dense(0));

  // ell = R1 with full-rank C spans the universal space.
  const Index R1 = tt.rank(1);
  const Index cap = std::min(R1, f.tg.steps);
  const LocalBasis full = local_reduced_space(tt, chi2, cap);
  if (cap == R1 && c.sigma(R1 - 1) > 1e-12 * c.sigma(0)) {
    const Eigen::MatrixXd& T1 = universal_basis(tt);
    const Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(T1.transpose() * full.S).singularValues();
    CHECK(cosines.minCoeff() >= 1.0 - 1e-10);
  }
  CHECK_THROWS_AS(local_reduced_space(tt, chi2, 0), DimensionError);
  CHECK_THROWS_AS(local_reduced_space(tt, chi2, cap + 1), DimensionError);
}

TEST_CASE("Galerkin reproduction and identity basis") {
  HeatFixture f;
  const Eigen::Vector2d a(0.3, 0.6);
  const DiscreteOperator op = assemble_operator(f.mesh, f.p, a);
  const FomTrajectory fom = backward_euler_solve(op.A, op.g, f.M, f.u0, f.tg);

  Eigen::MatrixXd X(f.mesh.num_nodes(), fom.steps() + 1);
  X << f.u0, fom.U;
  const Eigen::MatrixXd S = orth(X);
  const RomTrajectory rom = rom_solve(op, f.M, S, f.tg, f.u0);
  CHECK(rom.steps() == fom.steps());
  CHECK((rom.lift() - fom.U).norm() <= 1e-10 * fom.U.norm());

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(f.mesh.num_nodes(), f.mesh.num_nodes());
  const RomTrajectory id = rom_solve(op, f.M, I, f.tg, f.u0);
  CHECK((id.lift() - fom.U).norm() <= 1e-10 * fom.U.norm());
}

TEST_CASE("reduced energy decays without forcing") {
  HeatFixture f;
  std::mt19937_64 rng(31);
  const DiscreteOperator op0 = assemble_operator(f.mesh, f.p, Eigen::Vector2d(0.4, 0.2));
  const DiscreteOperator op{op0.A, Eigen::VectorXd::Zero(f.mesh.num_nodes())};
  const Eigen::MatrixXd S = orth(oracle::random_matrix(f.mesh.num_nodes(), 6, rng));
  const Eigen::VectorXd u0 = oracle::random_matrix(f.mesh.num_nodes(), 1, rng);
  const RomTrajectory rom = rom_solve(op, f.M, S, f.tg, u0);
  const Eigen::MatrixXd Mr = S.transpose() * (f.M * S);
  double prev = rom.initial.dot(Mr * rom.initial);
  for (Index n = 0; n < rom.steps(); ++n) {
    const double e = rom.coeffs.col(n).dot(Mr * rom.coeffs.col(n));
    CHECK(e <= prev * (1 + 1e-13));
    prev = e;
  }
  // c^0 is the L2 projection of u0.
  const Eigen::VectorXd r = f.M * (u0 - S * rom.initial);
  CHECK((S.transpose() * r).norm() < 1e-12 * (f.M * u0).norm());
}

TEST_CASE("POD basis") {
  std::mt19937_64 rng(32);
  // Weighted optimality against a dense M^{1/2} oracle.
  const Index m = 12;
  const Eigen::MatrixXd Md = oracle::random_spd(m, rng);
  const SparseOperator M = Md.sparseView();
  const Eigen::MatrixXd X = oracle::random_matrix(m, 7, rng);
  const LocalBasis b = pod_basis(X, M, 3);
  CHECK((b.S.transpose() * Md * b.S - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-11);
  const Eigen::VectorXd s = oracle::weighted_singular_values(Md, X);
  CHECK((b.sigma - s).norm() < 1e-11 * s(0));
  const Eigen::MatrixXd P = b.S * (b.S.transpose() * Md * X);
  const double proj = (oracle::sqrtm(Md) * (X - P)).norm();
  CHECK(proj == doctest::Approx(s.tail(4).norm()).epsilon(1e-9));

  // Identity weight: plain SVD.
  SparseOperator I(m, m);
  I.setIdentity();
  const LocalBasis plain = pod_basis(X, I, 2);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU);
  const Eigen::MatrixXd cross = plain.S.transpose() * svd.matrixU().leftCols(2);
  CHECK((cross.cwiseAbs() - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);

  // Repeated snapshot: one mode, the M-normalized snapshot.
  const Eigen::VectorXd v = oracle::random_matrix(m, 1, rng);
  const Eigen::MatrixXd rep = v.replicate(1, 5);
  const LocalBasis one = pod_basis(rep, M, 1);
  const Eigen::VectorXd vn = v / std::sqrt(v.dot(Md * v));
  CHECK(std::min((one.S.col(0) - vn).norm(), (one.S.col(0) + vn).norm()) < 1e-12);
  CHECK_THROWS_AS(pod_basis(rep, M, 2), DimensionError);

  // Wide input takes the QR path.
  const Eigen::MatrixXd W = oracle::random_matrix(m, 60, rng);
  const LocalBasis w = pod_basis(W, M, 4);
  CHECK((w.sigma - oracle::weighted_singular_values(Md, W)).norm() < 1e-11 * w.sigma(0));
}

TEST_CASE("correlation spectrum and tails") {
  std::mt19937_64 rng(33);
  const Eigen::MatrixXd Md = oracle::random_spd(20, rng);
  const SparseOperator M = Md.sparseView();
  const Eigen::MatrixXd U = oracle::random_matrix(20, 6, rng);
  const Eigen::VectorXd lam = correlation_spectrum(U, M);
  const Eigen::VectorXd s = oracle::weighted_singular_values(Md, U);
  for (Index i = 0; i < 6; ++i) CHECK(lam(i) == doctest::Approx(s(i) * s(i) / 6.0).epsilon(1e-11));

  // M-orthonormal columns.
  Eigen::LLT<Eigen::MatrixXd> llt(Md);
  const Eigen::MatrixXd Q = llt.matrixU().solve(orth(U));
  const Eigen::VectorXd flat = correlation_spectrum(Q, M);
  CHECK((flat.array() - 1.0 / 6.0).abs().maxCoeff() < 1e-13);

  const Eigen::MatrixXd R1 = U.col(0) * Eigen::RowVectorXd::LinSpaced(6, 1, 6);
  const Eigen::VectorXd r1 = correlation_spectrum(R1, M);
  CHECK(r1(0) > 0);
  CHECK(r1.tail(5).maxCoeff() <= 1e-13 * r1(0));
  CHECK(r1.minCoeff() >= 0.0);

  const std::vector<Eigen::MatrixXd> trajs{U, 2.0 * U, R1};
  const double full = lambda_tail(std::span<const Eigen::MatrixXd>(trajs), M, 0);
  double expect = 0;
  for (const auto& T : trajs) expect = std::max(expect, (oracle::sqrtm(Md) * T).squaredNorm() / 6.0);
  CHECK(full == doctest::Approx(expect).epsilon(1e-12));
  CHECK(lambda_tail(std::span<const Eigen::MatrixXd>(trajs), M, 6) <= 1e-12);
  double prev = full;
  for (Index l = 1; l <= 6; ++l) {
    const double t = lambda_tail(std::span<const Eigen::MatrixXd>(trajs), M, l);
    CHECK(t <= prev);
    prev = t;
  }
  CHECK_THROWS_AS(lambda_tail(std::span<const Eigen::VectorXd>(), 1), DimensionError);
}

TEST_CASE("error functional") {
  HeatFixture f;
  std::mt19937_64 rng(34);
  const Eigen::MatrixXd A = oracle::random_matrix(f.mesh.num_nodes(), 8, rng);
  const Eigen::MatrixXd B = oracle::random_matrix(f.mesh.num_nodes(), 8, rng);
  CHECK(error_E_alpha(A, A, f.L, 0.1) == 0.0);
  const double e = error_E_alpha(A, B, f.L, 0.1);
  CHECK(error_E_alpha(2 * A, 2 * B, f.L, 0.1) == doctest::Approx(4 * e).epsilon(1e-14));
  CHECK(e == doctest::Approx(oracle::summed_h1(Eigen::MatrixXd(f.L), A - B, 0.1)).epsilon(1e-12));
  CHECK_THROWS_AS(error_E_alpha(A, B.leftCols(7), f.L, 0.1), DimensionError);
}

TEST_CASE("ROM error decreases with the reduced dimension") {
  const ProblemSpec p = ProblemSpec::heat();
  const Mesh2D mesh = build_mesh(p, 0.4);
  const SparseOperator M = assemble_mass(mesh);
  const SparseOperator L = assemble_h1_gram(mesh);
  const TimeGrid tg(20.0, 100);
  const ParameterGrid grid = build_parameter_grid(p.box, {5, 5});
  const SnapshotTensor phi = generate_snapshots(p, mesh, tg, grid);
  const double et = eps_to_eps_tilde(1e-4, phi, M, tg.dt());
  const TTTensor tt = tt_svd(phi, et);
  const InterpolationScheme scheme(grid, 2);
  const Eigen::Vector2d a(0.5, 0.9);
  const auto chi = chi_weights(a, scheme);
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(mesh.num_nodes());
  const DiscreteOperator op = assemble_operator(mesh, p, a);
  const FomTrajectory fom = backward_euler_solve(op.A, op.g, M, u0, tg);
  double prev = INFINITY;
  for (Index ell : {2, 4, 8}) {
    const LocalBasis b = local_reduced_space(tt, chi, ell);
    const double E = error_E_alpha(fom, rom_solve(op, M, b.S, tg, u0), L, tg.dt());
    CHECK(E < prev);
    prev = E;
  }
}
