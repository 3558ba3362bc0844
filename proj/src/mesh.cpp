#include "lrtdrom/mesh.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <cmath>
#include <map>
#include <numbers>

#include "lrtdrom/errors.hpp"

namespace lrtdrom {
namespace {

bool is_multiple(double length, double step) {
  const double q = length / step;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::abs(q));
}

bool grid_fits(const ProblemSpec& p, double s) {
  if (!is_multiple(p.outer.height(), s)) return false;
  for (const Rect& r : p.holes) {
    for (double x : {r.x0, r.x1}) {
      if (!is_multiple(x - p.outer.x0, s)) return false;
    }
    for (double y : {r.y0, r.y1}) {
      if (!is_multiple(y - p.outer.y0, s)) return false;
    }
  }
  return true;
}

}  // namespace

double Mesh2D::signed_area(Index t) const {
  const auto& tri = triangles[static_cast<std::size_t>(t)];
  const Eigen::Vector2d a = nodes.col(tri[0]), b = nodes.col(tri[1]), c = nodes.col(tri[2]);
  return 0.5 * ((b(0) - a(0)) * (c(1) - a(1)) - (c(0) - a(0)) * (b(1) - a(1)));
}

double Mesh2D::diameter(Index t) const {
  const auto& tri = triangles[static_cast<std::size_t>(t)];
  double d = 0.0;
  for (int i = 0; i < 3; ++i) {
    d = std::max(d, (nodes.col(tri[i]) - nodes.col(tri[(i + 1) % 3])).norm());
  }
  return d;
}

double Mesh2D::area() const {
  double a = 0.0;
  for (Index t = 0; t < num_triangles(); ++t) a += signed_area(t);
  return a;
}

double snap_cell_size(const ProblemSpec& problem, double h) {
  if (!(h > 0.0)) throw GeometryError("mesh size must be positive");
  const double width = problem.outer.width();
  const auto first = static_cast<long>(std::ceil(width / h - 1e-9));
  for (long n = std::max(1L, first); n < first + 100000; ++n) {
    const double s = width / static_cast<double>(n);
    if (grid_fits(problem, s)) return s;
  }
  throw GeometryError("no structured cell size fits the hole layout");
}

Mesh2D build_mesh(const ProblemSpec& problem, double h) {
  const Rect& box = problem.outer;
  if (!(box.x0 < box.x1 && box.y0 < box.y1)) throw GeometryError("outer rectangle is degenerate");
  for (const Rect& r : problem.holes) {
    if (!(r.x0 < r.x1 && r.y0 < r.y1) ||
        !(r.x0 > box.x0 && r.x1 < box.x1 && r.y0 > box.y0 && r.y1 < box.y1)) {
      throw GeometryError("hole rectangle is degenerate or not inside the outer rectangle");
    }
  }
  const double s = snap_cell_size(problem, h);
  const Index nx = std::lround(box.width() / s);
  const Index ny = std::lround(box.height() / s);

  auto hole_of_cell = [&](Index i, Index j) -> int {
    const double cx = box.x0 + (static_cast<double>(i) + 0.5) * s;
    const double cy = box.y0 + (static_cast<double>(j) + 0.5) * s;
    for (std::size_t k = 0; k < problem.holes.size(); ++k) {
      if (problem.holes[k].contains(cx, cy)) return static_cast<int>(k);
    }
    return -1;
  };

  std::vector<char> active(static_cast<std::size_t>(nx * ny));
  std::vector<char> used(static_cast<std::size_t>((nx + 1) * (ny + 1)), 0);
  auto grid_node = [&](Index i, Index j) { return i + (nx + 1) * j; };
  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      const bool on = hole_of_cell(i, j) < 0;
      active[static_cast<std::size_t>(i + nx * j)] = on;
      if (on) {
        for (Index di : {0, 1}) {
          for (Index dj : {0, 1}) used[static_cast<std::size_t>(grid_node(i + di, j + dj))] = 1;
        }
      }
    }
  }

  std::vector<Index> number(used.size(), -1);
  Index count = 0;
  for (std::size_t g = 0; g < used.size(); ++g) {
    if (used[g]) number[g] = count++;
  }

  Mesh2D mesh;
  mesh.cell_size = s;
  mesh.h = s * std::numbers::sqrt2;
  mesh.nodes.resize(2, count);
  for (Index j = 0; j <= ny; ++j) {
    for (Index i = 0; i <= nx; ++i) {
      const Index n = number[static_cast<std::size_t>(grid_node(i, j))];
      if (n >= 0) {
        mesh.nodes(0, n) = box.x0 + static_cast<double>(i) * s;
        mesh.nodes(1, n) = box.y0 + static_cast<double>(j) * s;
      }
    }
  }
  // Pin the far sides to the exact rectangle bounds.
  for (Index n = 0; n < count; ++n) {
    if (std::abs(mesh.nodes(0, n) - box.x1) < 1e-9 * s) mesh.nodes(0, n) = box.x1;
    if (std::abs(mesh.nodes(1, n) - box.y1) < 1e-9 * s) mesh.nodes(1, n) = box.y1;
  }

  for (Index j = 0; j < ny; ++j) {
    for (Index i = 0; i < nx; ++i) {
      if (!active[static_cast<std::size_t>(i + nx * j)]) continue;
      const Index p00 = number[static_cast<std::size_t>(grid_node(i, j))];
      const Index p10 = number[static_cast<std::size_t>(grid_node(i + 1, j))];
      const Index p11 = number[static_cast<std::size_t>(grid_node(i + 1, j + 1))];
      const Index p01 = number[static_cast<std::size_t>(grid_node(i, j + 1))];
      mesh.triangles.push_back({p00, p10, p11});
      mesh.triangles.push_back({p00, p11, p01});
    }
  }

  // Boundary edges are the edges owned by a single triangle.
  std::map<std::pair<Index, Index>, int> owners;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      Index a = tri[e], b = tri[(e + 1) % 3];
      ++owners[{std::min(a, b), std::max(a, b)}];
    }
  }
  const double tol = 1e-9 * s;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const Index a = tri[e], b = tri[(e + 1) % 3];
      if (owners[{std::min(a, b), std::max(a, b)}] != 1) continue;
      const Eigen::Vector2d mid = 0.5 * (mesh.nodes.col(a) + mesh.nodes.col(b));
      BoundaryEdge edge;
      edge.nodes = {a, b};
      std::optional<Side> side;
      if (std::abs(mid(0) - box.x0) < tol) side = Side::Left;
      else if (std::abs(mid(0) - box.x1) < tol) side = Side::Right;
      else if (std::abs(mid(1) - box.y0) < tol) side = Side::Bottom;
      else if (std::abs(mid(1) - box.y1) < tol) side = Side::Top;
      if (side) {
        const bool robin = std::find(problem.robin_sides.begin(), problem.robin_sides.end(),
                                     *side) != problem.robin_sides.end();
        edge.tag.kind = robin ? BoundaryTag::Kind::OuterRobin : BoundaryTag::Kind::NeumannZero;
      } else {
        for (std::size_t k = 0; k < problem.holes.size(); ++k) {
          const Rect& r = problem.holes[k];
          if (mid(0) > r.x0 - tol && mid(0) < r.x1 + tol && mid(1) > r.y0 - tol &&
              mid(1) < r.y1 + tol) {
            edge.tag = {BoundaryTag::Kind::HoleRobin, static_cast<int>(k)};
          }
        }
        if (edge.tag.kind != BoundaryTag::Kind::HoleRobin) {
          throw GeometryError("boundary edge matches neither the outer rectangle nor a hole");
        }
      }
      mesh.boundary_edges.push_back(edge);
    }
  }
  return mesh;
}

void check_mesh(const Mesh2D& mesh) {
  double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    if (!(mesh.signed_area(t) > 0.0)) {
      throw GeometryError("triangle " + std::to_string(t) + " is not positively oriented");
    }
    const double d = mesh.diameter(t);
    dmin = std::min(dmin, d);
    dmax = std::max(dmax, d);
  }
  if (dmax > 4.0 * dmin) throw GeometryError("mesh is not quasi-uniform");

  std::map<std::pair<Index, Index>, int> owners;
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      Index a = tri[e], b = tri[(e + 1) % 3];
      ++owners[{std::min(a, b), std::max(a, b)}];
    }
  }
  for (const auto& edge : mesh.boundary_edges) {
    const auto key = std::make_pair(std::min(edge.nodes[0], edge.nodes[1]),
                                    std::max(edge.nodes[0], edge.nodes[1]));
    const auto it = owners.find(key);
    if (it == owners.end() || it->second != 1) {
      throw GeometryError("boundary edge is not owned by exactly one triangle");
    }
  }
}

}  // namespace lrtdrom
