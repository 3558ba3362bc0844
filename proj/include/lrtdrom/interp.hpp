#pragma once

#include <vector>

#include <Eigen/Core>

#include "lrtdrom/snapshots.hpp"
#include "lrtdrom/tensor.hpp"

namespace lrtdrom {

/// Lagrange weights of one parameter over the K_i grid nodes of its
/// dimension. Nonzero only on the stencil.
struct ChiVector {
  Eigen::VectorXd weights;
  std::vector<Index> support;  // stencil node indices, ascending

  double l1_norm() const { return weights.lpNorm<1>(); }
};

/// Order-p Lagrange interpolation over a parameter grid.
struct InterpolationScheme {
  ParameterGrid grid;
  int order = 2;

  InterpolationScheme() = default;
  /// Throws ConfigError if order < 1 or order exceeds a node count.
  InterpolationScheme(ParameterGrid grid, int order);
};

/// Weights on the p nodes nearest to `a`. Equidistant candidates resolve to
/// the smaller index; stencils stay inside the node list. Throws DomainError
/// when `a` lies outside [nodes.front(), nodes.back()].
ChiVector chi(double a, const Eigen::VectorXd& nodes, int p);

/// One ChiVector per parameter dimension.
std::vector<ChiVector> chi_all(const ParameterVector& alpha, const InterpolationScheme& scheme);

/// Dense weight vectors of chi_all, in the form the tensor-train contraction takes.
std::vector<Eigen::VectorXd> chi_weights(const ParameterVector& alpha,
                                         const InterpolationScheme& scheme);

/// sum over the stencil of prod_i chi^i_{k_i} g(k_1, ..., k_D) for samples
/// g stored as a K_1 x ... x K_D tensor.
double interpolate_scalar(const DenseTensor<double>& samples, const ParameterVector& alpha,
                          const InterpolationScheme& scheme);

}  // namespace lrtdrom
