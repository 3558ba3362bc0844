#include <doctest.h>

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "lrtdrom/errors.hpp"
#include "lrtdrom/interp.hpp"
#include "oracles.hpp"

using namespace lrtdrom;

namespace {

ParameterBox box2() {
  ParameterBox b;
  b.bounds = {{0.0, 1.0}, {-0.5, 0.5}};
  return b;
}

DenseTensor<double> sample(const ParameterGrid& g, const std::function<double(double, double)>& f) {
  DenseTensor<double> s({g.count(0), g.count(1)});
  for (Index i = 0; i < g.count(0); ++i)
    for (Index j = 0; j < g.count(1); ++j) s.at(i, j) = f(g.nodes[0](i), g.nodes[1](j));
  return s;
}

}  // namespace

TEST_CASE("weights on simple grids") {
  const Eigen::Vector3d nodes(0.0, 0.5, 1.0);
  const ChiVector at_node = chi(0.5, nodes, 2);
  CHECK(at_node.weights == Eigen::Vector3d(0, 1, 0));

  const ChiVector mid = chi(0.25, nodes, 2);
  CHECK(mid.weights(0) == doctest::Approx(0.5));
  CHECK(mid.weights(1) == doctest::Approx(0.5));
  CHECK(mid.support == std::vector<Index>{0, 1});

  const ChiVector c = chi(0.2, nodes, 2);
  CHECK(c.weights(0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(c.weights(1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(c.weights(2) == 0.0);

  // Stencil clamped at the right edge; ties resolve to the smaller index.
  const ChiVector edge = chi(0.95, nodes, 2);
  CHECK(edge.support == std::vector<Index>{1, 2});
  const Eigen::VectorXd five = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
  const ChiVector tie = chi(0.5, five, 3);
  CHECK(tie.support == std::vector<Index>{1, 2, 3});
  const ChiVector tie4 = chi(0.5, five, 2);
  CHECK(tie4.support == std::vector<Index>{1, 2});
  const ChiVector tie_mid = chi(0.375, five, 3);
  CHECK(tie_mid.support == std::vector<Index>{0, 1, 2});
  CHECK((tie_mid.weights.head(3) - oracle::lagrange(0.375, {0.0, 0.25, 0.5})).norm() < 1e-15);

  CHECK_THROWS_AS(chi(1.01, nodes, 2), DomainError);
  CHECK_THROWS_AS(chi(-1e-9, nodes, 2), DomainError);
  CHECK_THROWS_AS(chi(0.5, nodes, 4), ConfigError);
}

TEST_CASE("chi_all and stability") {
  const InterpolationScheme s2(build_parameter_grid(box2(), {6, 9}), 2);
  const auto at = chi_all(s2.grid.point(std::array<Index, 2>{3, 4}), s2);
  CHECK(at[0].weights == Eigen::VectorXd::Unit(6, 3));
  CHECK(at[1].weights == Eigen::VectorXd::Unit(9, 4));

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u1(0.0, 1.0), u2(-0.5, 0.5);
  const InterpolationScheme s3(build_parameter_grid(box2(), {6, 9}), 3);
  double worst3 = 0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Vector2d a(u1(rng), u2(rng));
    for (const auto& c : chi_all(a, s2)) {
      CHECK(c.l1_norm() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(c.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(c.support.size() <= 2);
      CHECK((c.weights.array() >= 0).all());
    }
    for (const auto& c : chi_all(a, s3)) {
      CHECK(c.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(c.support.size() <= 3);
      worst3 = std::max(worst3, c.l1_norm());
    }
  }
  CHECK(worst3 <= 1.25);
  MESSAGE("measured l1 stability constant for p = 3: " << worst3);

  CHECK_THROWS_AS(InterpolationScheme(build_parameter_grid(box2(), {2, 9}), 3), ConfigError);
  CHECK_THROWS_AS(chi_all(Eigen::Vector3d(0.1, 0.1, 0.1), s2), DimensionError);
}

TEST_CASE("scalar interpolation") {
  const ParameterGrid g = build_parameter_grid(box2(), {5, 7});
  const InterpolationScheme s2(g, 2), s3(g, 3);
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u1(0.0, 1.0), u2(-0.5, 0.5);

  const auto c = sample(g, [](double, double) { return 4.25; });
  const auto lin = sample(g, [](double x, double y) { return 2 * x - 3 * y + 1; });
  const auto quad = sample(g, [](double x, double y) { return x * x - x * y + 2 * y * y; });
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector2d a(u1(rng), u2(rng));
    CHECK(interpolate_scalar(c, a, s2) == doctest::Approx(4.25).epsilon(1e-15));
    CHECK(std::abs(interpolate_scalar(lin, a, s2) - (2 * a(0) - 3 * a(1) + 1)) < 1e-13);
    CHECK(std::abs(interpolate_scalar(quad, a, s3) - (a(0) * a(0) - a(0) * a(1) + 2 * a(1) * a(1))) < 1e-12);
  }
  // Reproduction at the nodes.
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 7; ++j) {
      const std::array<Index, 2> idx{i, j};
      CHECK(interpolate_scalar(quad, g.point(idx), s2) == quad.at(i, j));
    }
  CHECK_THROWS_AS(interpolate_scalar(DenseTensor<double>({5, 6}), Eigen::Vector2d(0.1, 0.1), s2), DimensionError);
}

TEST_CASE("second-order convergence of linear interpolation") {
  auto f = [](double x, double y) { return std::sin(x) * std::cos(y); };
  ParameterBox b;
  b.bounds = {{0.0, 2.0}, {0.0, 2.0}};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<Eigen::Vector2d> pts;
  for (int k = 0; k < 1000; ++k) pts.emplace_back(u(rng), u(rng));
  std::vector<double> delta, err;
  for (Index K : {5, 9, 17, 33}) {
    const ParameterGrid g = build_parameter_grid(b, {K, K});
    const InterpolationScheme s(g, 2);
    const auto vals = sample(g, f);
    double e = 0;
    for (const auto& a : pts) e = std::max(e, std::abs(interpolate_scalar(vals, a, s) - f(a(0), a(1))));
    delta.push_back(g.max_step());
    err.push_back(e);
  }
  const double order = std::log(err.front() / err.back()) / std::log(delta.front() / delta.back());
  CHECK(order >= 1.8);
  CHECK(order <= 2.2);
}
