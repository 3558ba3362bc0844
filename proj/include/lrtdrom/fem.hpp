#pragma once

#include <functional>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "lrtdrom/mesh.hpp"
#include "lrtdrom/problem.hpp"

namespace lrtdrom {

using SparseOperator = Eigen::SparseMatrix<double>;

/// Parameter-dependent system matrix and constant load of the semi-discrete
/// problem M u' + A u = g.
struct DiscreteOperator {
  SparseOperator A;
  Eigen::VectorXd g;
};

/// P1 mass matrix, M_ij = (phi_j, phi_i)_0.
SparseOperator assemble_mass(const Mesh2D& mesh);

/// P1 stiffness matrix, K_ij = (grad phi_j, grad phi_i)_0.
SparseOperator assemble_stiffness(const Mesh2D& mesh);

/// Gram matrix of the full H1 inner product, stiffness + mass.
SparseOperator assemble_h1_gram(const Mesh2D& mesh);

/// Boundary mass restricted to edges for which `select` returns true.
SparseOperator assemble_boundary_mass(const Mesh2D& mesh,
                                      const std::function<bool(const BoundaryTag&)>& select);

/// Load vector of the constant 1 on the selected boundary edges.
Eigen::VectorXd assemble_boundary_load(const Mesh2D& mesh,
                                       const std::function<bool(const BoundaryTag&)>& select);

/// Advection matrix C_ij = (eta . grad phi_j, phi_i)_0, one-point centroid rule.
SparseOperator assemble_advection(const Mesh2D& mesh, const ParameterVector& alpha);

/// Source load (f, phi_i)_0, one-point centroid rule.
Eigen::VectorXd assemble_source(const Mesh2D& mesh, const ProblemSpec& problem);

/// A(alpha) and g(alpha) of the configured problem. Throws DomainError when
/// alpha is outside the parameter box.
DiscreteOperator assemble_operator(const Mesh2D& mesh, const ProblemSpec& problem,
                                   const ParameterVector& alpha);

/// Nodal interpolant of f.
Eigen::VectorXd interpolate(const Mesh2D& mesh,
                            const std::function<double(const Eigen::Vector2d&)>& f);

/// ||u - u_h||_1^2 for a P1 coefficient vector u_h and exact u with gradient,
/// using a degree-5 seven-point rule on each triangle.
double h1_error_squared(const Mesh2D& mesh, const Eigen::VectorXd& uh,
                        const std::function<double(const Eigen::Vector2d&)>& u,
                        const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& grad_u);

}  // namespace lrtdrom
