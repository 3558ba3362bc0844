#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "lrtdrom/problem.hpp"

namespace lrtdrom {

struct BoundaryTag {
  enum class Kind { OuterRobin, HoleRobin, NeumannZero };
  Kind kind = Kind::NeumannZero;
  int hole = -1;  ///< hole index for HoleRobin, -1 otherwise

  friend bool operator==(const BoundaryTag&, const BoundaryTag&) = default;
};

struct BoundaryEdge {
  std::array<Index, 2> nodes{};
  BoundaryTag tag;
};

/// Conforming triangulation of a rectangle minus rectangular holes.
struct Mesh2D {
  Eigen::Matrix2Xd nodes;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  double h = 0.0;          ///< maximum element diameter
  double cell_size = 0.0;  ///< side of the structured grid cells

  Index num_nodes() const { return nodes.cols(); }
  Index num_triangles() const { return static_cast<Index>(triangles.size()); }

  /// Signed area, positive for counter-clockwise vertex order.
  double signed_area(Index t) const;
  double diameter(Index t) const;
  double area() const;
};

/// Structured mesh: the outer rectangle is cut into square cells, each split
/// into two triangles along its rising diagonal; cells inside holes are
/// removed. `h` is the requested cell side; it is reduced to the largest value
/// not exceeding it that puts every hole edge on a grid line.
Mesh2D build_mesh(const ProblemSpec& problem, double h);

/// Cell side build_mesh will actually use for the requested `h`.
double snap_cell_size(const ProblemSpec& problem, double h);

/// Verifies orientation, boundary-edge ownership and quasi-uniformity.
/// Throws GeometryError on the first violated invariant.
void check_mesh(const Mesh2D& mesh);

}  // namespace lrtdrom
