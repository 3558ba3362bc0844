#include "lrtdrom/fem.hpp"

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lrtdrom/errors.hpp"

namespace lrtdrom {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct ElementGeometry {
  std::array<Index, 3> v;
  std::array<Eigen::Vector2d, 3> x;
  double area;
  // Gradients of the three barycentric basis functions (constant on the element).
  std::array<Eigen::Vector2d, 3> grad;
};

ElementGeometry element(const Mesh2D& mesh, Index t) {
  ElementGeometry e;
  e.v = mesh.triangles[static_cast<std::size_t>(t)];
  for (int i = 0; i < 3; ++i) e.x[i] = mesh.nodes.col(e.v[i]);
  const double two_area = (e.x[1](0) - e.x[0](0)) * (e.x[2](1) - e.x[0](1)) -
                          (e.x[2](0) - e.x[0](0)) * (e.x[1](1) - e.x[0](1));
  e.area = 0.5 * two_area;
  if (!(std::abs(two_area) > 0.0)) {
    throw AssemblyError("degenerate triangle " + std::to_string(t));
  }
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d& a = e.x[(i + 1) % 3];
    const Eigen::Vector2d& b = e.x[(i + 2) % 3];
    e.grad[i] = Eigen::Vector2d(a(1) - b(1), b(0) - a(0)) / two_area;
  }
  return e;
}

SparseOperator from_triplets(Index n, const Triplets& triplets) {
  SparseOperator m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

// Seven-point degree-5 rule on the reference triangle: barycentric points, weights sum to 1.
struct QuadPoint {
  std::array<double, 3> bary;
  double weight;
};

const std::array<QuadPoint, 7>& seven_point_rule() {
  static const std::array<QuadPoint, 7> rule = [] {
    const double a1 = 0.059715871789770, b1 = 0.470142064105115;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456;
    const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
    return std::array<QuadPoint, 7>{{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, w0},
                                     {{a1, b1, b1}, w1},
                                     {{b1, a1, b1}, w1},
                                     {{b1, b1, a1}, w1},
                                     {{a2, b2, b2}, w2},
                                     {{b2, a2, b2}, w2},
                                     {{b2, b2, a2}, w2}}};
  }();
  return rule;
}

}  // namespace

SparseOperator assemble_mass(const Mesh2D& mesh) {
  Triplets tr;
  tr.reserve(static_cast<std::size_t>(9 * mesh.num_triangles()));
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = element(mesh, t);
    const double a = std::abs(e.area) / 12.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) tr.emplace_back(e.v[i], e.v[j], i == j ? 2 * a : a);
    }
  }
  return from_triplets(mesh.num_nodes(), tr);
}

SparseOperator assemble_stiffness(const Mesh2D& mesh) {
  Triplets tr;
  tr.reserve(static_cast<std::size_t>(9 * mesh.num_triangles()));
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = element(mesh, t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        tr.emplace_back(e.v[i], e.v[j], std::abs(e.area) * e.grad[i].dot(e.grad[j]));
      }
    }
  }
  return from_triplets(mesh.num_nodes(), tr);
}

SparseOperator assemble_h1_gram(const Mesh2D& mesh) {
  SparseOperator l = assemble_stiffness(mesh) + assemble_mass(mesh);
  l.makeCompressed();
  return l;
}

SparseOperator assemble_boundary_mass(const Mesh2D& mesh,
                                      const std::function<bool(const BoundaryTag&)>& select) {
  Triplets tr;
  for (const auto& edge : mesh.boundary_edges) {
    if (!select(edge.tag)) continue;
    const auto [a, b] = edge.nodes;
    const double len = (mesh.nodes.col(a) - mesh.nodes.col(b)).norm();
    tr.emplace_back(a, a, len / 3);
    tr.emplace_back(b, b, len / 3);
    tr.emplace_back(a, b, len / 6);
    tr.emplace_back(b, a, len / 6);
  }
  return from_triplets(mesh.num_nodes(), tr);
}

Eigen::VectorXd assemble_boundary_load(const Mesh2D& mesh,
                                       const std::function<bool(const BoundaryTag&)>& select) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (const auto& edge : mesh.boundary_edges) {
    if (!select(edge.tag)) continue;
    const auto [a, b] = edge.nodes;
    const double len = (mesh.nodes.col(a) - mesh.nodes.col(b)).norm();
    g(a) += len / 2;
    g(b) += len / 2;
  }
  return g;
}

SparseOperator assemble_advection(const Mesh2D& mesh, const ParameterVector& alpha) {
  Triplets tr;
  tr.reserve(static_cast<std::size_t>(9 * mesh.num_triangles()));
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = element(mesh, t);
    const Eigen::Vector2d centroid = (e.x[0] + e.x[1] + e.x[2]) / 3.0;
    const Eigen::Vector2d eta = eval_advection(centroid, alpha);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        tr.emplace_back(e.v[i], e.v[j], std::abs(e.area) * eta.dot(e.grad[j]) / 3.0);
      }
    }
  }
  return from_triplets(mesh.num_nodes(), tr);
}

Eigen::VectorXd assemble_source(const Mesh2D& mesh, const ProblemSpec& problem) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = element(mesh, t);
    const Eigen::Vector2d centroid = (e.x[0] + e.x[1] + e.x[2]) / 3.0;
    const double share = std::abs(e.area) * eval_source(problem, centroid) / 3.0;
    for (int i = 0; i < 3; ++i) b(e.v[i]) += share;
  }
  return b;
}

DiscreteOperator assemble_operator(const Mesh2D& mesh, const ProblemSpec& problem,
                                   const ParameterVector& alpha) {
  require_in_box(problem.box, alpha);
  DiscreteOperator op;
  if (problem.kind == ProblemKind::Heat) {
    auto outer = [](const BoundaryTag& t) { return t.kind == BoundaryTag::Kind::OuterRobin; };
    auto holes = [](const BoundaryTag& t) { return t.kind == BoundaryTag::Kind::HoleRobin; };
    op.A = problem.nu * assemble_stiffness(mesh) +
           alpha(0) * assemble_boundary_mass(mesh, outer) +
           problem.hole_robin * assemble_boundary_mass(mesh, holes);
    op.g = alpha(0) * assemble_boundary_load(mesh, outer) +
           problem.hole_robin * alpha(1) * assemble_boundary_load(mesh, holes);
  } else {
    op.A = problem.nu * assemble_stiffness(mesh) + assemble_advection(mesh, alpha);
    op.g = assemble_source(mesh, problem);
  }
  op.A.makeCompressed();
  return op;
}

Eigen::VectorXd interpolate(const Mesh2D& mesh,
                            const std::function<double(const Eigen::Vector2d&)>& f) {
  Eigen::VectorXd v(mesh.num_nodes());
  for (Index i = 0; i < mesh.num_nodes(); ++i) v(i) = f(mesh.nodes.col(i));
  return v;
}

double h1_error_squared(const Mesh2D& mesh, const Eigen::VectorXd& uh,
                        const std::function<double(const Eigen::Vector2d&)>& u,
                        const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& grad_u) {
  if (uh.size() != mesh.num_nodes()) throw DimensionError("coefficient vector length mismatch");
  double total = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto e = element(mesh, t);
    Eigen::Vector2d grad_h = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) grad_h += uh(e.v[i]) * e.grad[i];
    double local = 0.0;
    for (const auto& q : seven_point_rule()) {
      Eigen::Vector2d x = Eigen::Vector2d::Zero();
      double value_h = 0.0;
      for (int i = 0; i < 3; ++i) {
        x += q.bary[i] * e.x[i];
        value_h += q.bary[i] * uh(e.v[i]);
      }
      const double dv = u(x) - value_h;
      local += q.weight * (dv * dv + (grad_u(x) - grad_h).squaredNorm());
    }
    total += std::abs(e.area) * local;
  }
  return total;
}

}  // namespace lrtdrom
