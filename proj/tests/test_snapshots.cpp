#include <doctest.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lrtdrom/errors.hpp"
#include "lrtdrom/snapshots.hpp"
#include "oracles.hpp"

using namespace lrtdrom;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lrtdrom_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<unsigned char> read_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("parameter grids") {
  ParameterBox unit;
  unit.bounds = {{0.0, 1.0}};
  const ParameterGrid g = build_parameter_grid(unit, {3});
  CHECK(g.nodes[0](0) == 0.0);
  CHECK(g.nodes[0](1) == 0.5);
  CHECK(g.nodes[0](2) == 1.0);
  CHECK(g.step(0) == 0.5);

  const ParameterGrid heat = build_parameter_grid(ProblemSpec::heat().box, {11, 19});
  CHECK(heat.step(0) == doctest::Approx(0.0491).epsilon(1e-12));
  CHECK(heat.step(1) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(heat.total() == 209);
  CHECK(heat.nodes[0](10) == 0.501);
  CHECK(heat.nodes[1](18) == 0.9);
  CHECK(heat.step_power_sum(2) == doctest::Approx(0.0491 * 0.0491 + 0.0025).epsilon(1e-12));

  const ParameterGrid adv = build_parameter_grid(ProblemSpec::advdiff().box, std::vector<Index>(5, 4));
  for (Index i = 0; i < 5; ++i) CHECK(adv.step(i) == doctest::Approx(0.2 / 3).epsilon(1e-12));
  CHECK(adv.total() == 1024);

  // Strictly increasing nodes, first-dimension-fastest linear order.
  for (const auto& n : heat.nodes) {
    for (Index j = 1; j < n.size(); ++j) CHECK(n(j) > n(j - 1));
  }
  const auto idx = heat.multi_index(11 * 3 + 4);
  CHECK(idx[0] == 4);
  CHECK(idx[1] == 3);
  CHECK(heat.point(11 * 3 + 4)(1) == heat.nodes[1](3));

  CHECK_THROWS_AS(build_parameter_grid(unit, {1}), ConfigError);
  CHECK_THROWS_AS(build_parameter_grid(unit, {3, 3}), ConfigError);

  const auto k = counts_for_spacing(ProblemSpec::heat().box, 0.05);
  CHECK(k[0] == 11);
  CHECK(k[1] == 19);
}

TEST_CASE("memory budget and environment override") {
  ::unsetenv("LRTDROM_MEM_BUDGET_GB");
  CHECK(memory_budget_bytes(8.0) == 8ull << 30);
  ::setenv("LRTDROM_MEM_BUDGET_GB", "0.5", 1);
  CHECK(memory_budget_bytes(8.0) == 1ull << 29);
  CHECK_THROWS_AS(check_budget(1ull << 27, memory_budget_bytes(), "x"), BudgetError);
  ::setenv("LRTDROM_MEM_BUDGET_GB", "zero", 1);
  CHECK_THROWS_AS(memory_budget_bytes(), ConfigError);
  ::unsetenv("LRTDROM_MEM_BUDGET_GB");
  CHECK_NOTHROW(check_budget(1000, 8000, "x"));
  CHECK_THROWS_AS(check_budget(1001, 8000, "x"), BudgetError);
}

TEST_CASE("frobenius norm and unfolding") {
  SnapshotTensor z({2, 3});
  CHECK(frobenius_norm(z) == 0.0);
  SnapshotTensor ones({2, 3, 4});
  ones.data().setOnes();
  CHECK(frobenius_norm(ones) == doctest::Approx(std::sqrt(24.0)).epsilon(1e-15));
  std::mt19937_64 rng(3);
  const SnapshotTensor r = oracle::random_tensor({5, 4, 3, 2}, rng);
  CHECK(std::abs(frobenius_norm(r) - oracle::frobenius(r)) <= 1e-14 * oracle::frobenius(r));

  SnapshotTensor t({2, 2, 2});
  for (Index i = 0; i < 8; ++i) t.data()(i) = static_cast<double>(i);
  const Eigen::MatrixXd U = unfold1(t);
  CHECK(U.rows() == 2);
  CHECK(U.cols() == 4);
  for (Index j = 0; j < 2; ++j) {
    for (Index k = 0; k < 2; ++k) {
      CHECK(U(0, j + 2 * k) == t.at(0, j, k));
      CHECK(U(1, j + 2 * k) == t.at(1, j, k));
    }
  }
  const SnapshotTensor back = refold1(U, {2, 2, 2});
  CHECK(back.data() == t.data());

  // Rank-one outer product has a rank-one unfolding.
  SnapshotTensor o({4, 3, 2});
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 3; ++j)
      for (Index k = 0; k < 2; ++k) o.at(i, j, k) = (i + 1.0) * (j - 0.5) * (k + 2.0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(unfold1(o)));
  CHECK(svd.singularValues()(1) < 1e-14 * svd.singularValues()(0));
}

TEST_CASE("mode products") {
  std::mt19937_64 rng(5);
  const SnapshotTensor t = oracle::random_tensor({3, 4, 5}, rng);
  for (Index k = 0; k < 3; ++k) {
    for (Index i = 0; i < t.dim(k); ++i) {
      const SnapshotTensor s = mode_slice(t, k, i);
      const SnapshotTensor ref = oracle::mode_product(t, k, Eigen::VectorXd::Unit(t.dim(k), i));
      CHECK(s.dims() == ref.dims());
      CHECK((s.data() - ref.data()).norm() == 0.0);
    }
    const SnapshotTensor sum = mode_product(t, k, Eigen::VectorXd::Ones(t.dim(k)));
    SnapshotTensor acc(sum.dims());
    for (Index i = 0; i < t.dim(k); ++i) acc.data() += mode_slice(t, k, i).data();
    CHECK((sum.data() - acc.data()).norm() < 1e-14 * acc.data().norm());
  }
  const Eigen::VectorXd a = oracle::random_matrix(5, 1, rng);
  const SnapshotTensor p = mode_product(t, 2, a);
  const SnapshotTensor q = oracle::mode_product(t, 2, a);
  CHECK((p.data() - q.data()).norm() <= 1e-14 * q.data().norm());

  CHECK_THROWS_AS(mode_product(t, 3, a), DimensionError);
  CHECK_THROWS_AS(mode_product(t, 1, a), DimensionError);
}

TEST_CASE("snapshot generation") {
  const ProblemSpec p = ProblemSpec::heat();
  const Mesh2D m = build_mesh(p, 0.4);
  const SparseOperator M = assemble_mass(m);
  const TimeGrid tg(20.0, 100);

  // One node per dimension: the tensor is the single trajectory.
  ParameterGrid single;
  single.box = p.box;
  single.nodes = {Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, 0.4)};
  const SnapshotTensor one = generate_snapshots(p, m, tg, single, 1);
  CHECK(one.dims() == std::vector<Index>{m.num_nodes(), 100, 1, 1});
  const FomTrajectory f = solve_fom(m, p, M, Eigen::Vector2d(0.3, 0.4), tg);
  CHECK(Eigen::VectorXd(one.data()) == Eigen::Map<const Eigen::VectorXd>(f.U.data(), f.U.size()));

  const ParameterGrid grid = build_parameter_grid(p.box, {3, 3});
  const SnapshotTensor a = generate_snapshots(p, m, tg, grid, 1);
  const SnapshotTensor b = generate_snapshots(p, m, tg, grid, 4);
  CHECK(a.data() == b.data());
  CHECK(a.data().allFinite());
  const std::array<Index, 2> idx{2, 1};
  const FomTrajectory again = solve_fom(m, p, M, grid.point(idx), tg);
  CHECK(Eigen::MatrixXd(space_time_slice(a, idx)) == again.U);

  ::setenv("LRTDROM_MEM_BUDGET_GB", "0.0001", 1);
  CHECK_THROWS_AS(generate_snapshots(p, m, tg, grid, 1, memory_budget_bytes()), BudgetError);
  ::unsetenv("LRTDROM_MEM_BUDGET_GB");
}

TEST_CASE("norm0") {
  SnapshotTensor t({3, 2, 1});
  t.data() << 1, 2, 3, 4, 5, 6;
  SparseOperator I(3, 3);
  I.setIdentity();
  CHECK(norm0(t, I, 0.25) == doctest::Approx(0.5 * std::sqrt(91.0)).epsilon(1e-15));
  CHECK(weighted_frobenius(I, space_time_slice(t, Index{0})) == doctest::Approx(std::sqrt(91.0)));
  SparseOperator J(4, 4);
  J.setIdentity();
  CHECK_THROWS_AS(norm0(t, J, 0.1), DimensionError);

  std::mt19937_64 rng(9);
  const Eigen::MatrixXd S = oracle::random_spd(6, rng);
  const Eigen::MatrixXd X = oracle::random_matrix(6, 4, rng);
  const SparseOperator Ss = S.sparseView();
  CHECK(weighted_frobenius(Ss, X) == doctest::Approx((oracle::sqrtm(S) * X).norm()).epsilon(1e-12));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  CHECK(spectral_norm_spd(Ss, 1e-12, 100000) == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-8));
}

TEST_CASE("tensor files") {
  std::mt19937_64 rng(13);
  const SnapshotTensor t = oracle::random_tensor({4, 3, 2, 2}, rng);
  const fs::path p = temp_path("roundtrip.lrt1");
  save_tensor(t, p);
  const SnapshotTensor u = load_tensor(p);
  CHECK(u.dims() == t.dims());
  CHECK(std::memcmp(u.data().data(), t.data().data(), sizeof(double) * t.size()) == 0);

  // Golden bytes of the 2x2x2 tensor 0..7.
  SnapshotTensor g({2, 2, 2});
  for (Index i = 0; i < 8; ++i) g.data()(i) = static_cast<double>(i);
  const fs::path gp = temp_path("golden.lrt1");
  save_tensor(g, gp);
  const auto bytes = read_bytes(gp);
  REQUIRE(bytes.size() == 4 + 4 * 4 + 64);
  const unsigned char head[] = {'L', 'R', 'T', '1', 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0};
  CHECK(std::equal(std::begin(head), std::end(head), bytes.begin()));
  const unsigned char top[8][2] = {{0x00, 0x00}, {0xF0, 0x3F}, {0x00, 0x40}, {0x08, 0x40},
                                   {0x10, 0x40}, {0x14, 0x40}, {0x18, 0x40}, {0x1C, 0x40}};
  for (int i = 0; i < 8; ++i) {
    const std::size_t off = 20 + 8 * static_cast<std::size_t>(i);
    for (int b = 0; b < 6; ++b) CHECK(bytes[off + b] == 0);
    CHECK(bytes[off + 6] == top[i][0]);
    CHECK(bytes[off + 7] == top[i][1]);
  }

  // Truncated, bad magic, trailing bytes.
  {
    std::ofstream os(temp_path("short.lrt1"), std::ios::binary);
    os.write(reinterpret_cast<const char*>(bytes.data()), 30);
  }
  CHECK_THROWS_AS(load_tensor(temp_path("short.lrt1")), FormatError);
  {
    auto bad = bytes;
    bad[3] = '2';
    std::ofstream os(temp_path("magic.lrt1"), std::ios::binary);
    os.write(reinterpret_cast<const char*>(bad.data()), static_cast<std::streamsize>(bad.size()));
  }
  CHECK_THROWS_AS(load_tensor(temp_path("magic.lrt1")), FormatError);
  {
    std::ofstream os(temp_path("long.lrt1"), std::ios::binary);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    os.put('x');
  }
  CHECK_THROWS_AS(load_tensor(temp_path("long.lrt1")), FormatError);
  CHECK_THROWS_AS(load_tensor(temp_path("missing.lrt1")), FormatError);
}
