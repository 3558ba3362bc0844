#include "lrtdrom/interp.hpp"

#include <cmath>
#include <sstream>

#include "lrtdrom/errors.hpp"

namespace lrtdrom {

InterpolationScheme::InterpolationScheme(ParameterGrid g, int p) : grid(std::move(g)), order(p) {
  if (order < 1) throw ConfigError("interpolation order must be at least 1");
  for (Index i = 0; i < grid.dim(); ++i) {
    if (grid.count(i) < order) {
      throw ConfigError("interpolation order " + std::to_string(order) + " exceeds the " +
                        std::to_string(grid.count(i)) + " nodes of dimension " + std::to_string(i));
    }
  }
}

ChiVector chi(double a, const Eigen::VectorXd& nodes, int p) {
  const Index K = nodes.size();
  if (p < 1 || p > K) throw ConfigError("stencil size must lie in [1, node count]");
  const double lo = nodes(0), hi = nodes(K - 1);
  if (!(a >= lo && a <= hi)) {
    std::ostringstream os;
    os << "parameter value " << a << " outside [" << lo << ", " << hi << "]";
    throw DomainError(os.str());
  }

  Index nearest = 0;
  for (Index k = 1; k < K; ++k) {
    if (std::abs(nodes(k) - a) < std::abs(nodes(nearest) - a)) nearest = k;
  }
  Index left = nearest, right = nearest;
  while (right - left + 1 < p) {
    if (left == 0) {
      ++right;
    } else if (right == K - 1) {
      --left;
    } else if (std::abs(nodes(left - 1) - a) <= std::abs(nodes(right + 1) - a)) {
      --left;
    } else {
      ++right;
    }
  }

  ChiVector out;
  out.weights = Eigen::VectorXd::Zero(K);
  for (Index j = left; j <= right; ++j) {
    double w = 1.0;
    for (Index m = left; m <= right; ++m) {
      if (m != j) w *= (a - nodes(m)) / (nodes(j) - nodes(m));
    }
    out.weights(j) = w;
    out.support.push_back(j);
  }
  return out;
}

std::vector<ChiVector> chi_all(const ParameterVector& alpha, const InterpolationScheme& scheme) {
  if (alpha.size() != scheme.grid.dim()) {
    throw DimensionError("parameter vector has " + std::to_string(alpha.size()) +
                         " entries, grid has " + std::to_string(scheme.grid.dim()) + " dimensions");
  }
  std::vector<ChiVector> out;
  for (Index i = 0; i < alpha.size(); ++i) {
    out.push_back(chi(alpha(i), scheme.grid.nodes[static_cast<std::size_t>(i)], scheme.order));
  }
  return out;
}

std::vector<Eigen::VectorXd> chi_weights(const ParameterVector& alpha,
                                         const InterpolationScheme& scheme) {
  std::vector<Eigen::VectorXd> out;
  for (auto& c : chi_all(alpha, scheme)) out.push_back(std::move(c.weights));
  return out;
}

double interpolate_scalar(const DenseTensor<double>& samples, const ParameterVector& alpha,
                          const InterpolationScheme& scheme) {
  const auto chis = chi_all(alpha, scheme);
  if (samples.order() != static_cast<Index>(chis.size())) {
    throw DimensionError("sample tensor order does not match the parameter dimension");
  }
  for (std::size_t i = 0; i < chis.size(); ++i) {
    if (samples.dim(static_cast<Index>(i)) != chis[i].weights.size()) {
      throw DimensionError("sample tensor does not match the grid in dimension " + std::to_string(i));
    }
  }
  // Odometer over the tensor-product stencil.
  std::vector<std::size_t> pos(chis.size(), 0);
  std::vector<Index> idx(chis.size());
  double sum = 0.0;
  for (;;) {
    double w = 1.0;
    for (std::size_t i = 0; i < chis.size(); ++i) {
      idx[i] = chis[i].support[pos[i]];
      w *= chis[i].weights(idx[i]);
    }
    sum += w * samples(idx);
    std::size_t i = 0;
    while (i < pos.size() && ++pos[i] == chis[i].support.size()) pos[i++] = 0;
    if (i == pos.size()) break;
  }
  return sum;
}

}  // namespace lrtdrom
