#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace lrtdrom {

using Index = Eigen::Index;
using ParameterVector = Eigen::VectorXd;

enum class ProblemKind { Heat, AdvDiff };

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

enum class Side { Left, Right, Bottom, Top };

/// Tensor-product parameter box; one [min, max] pair per parameter.
struct ParameterBox {
  std::vector<std::pair<double, double>> bounds;

  Index dim() const { return static_cast<Index>(bounds.size()); }
  double lower(Index i) const { return bounds[static_cast<std::size_t>(i)].first; }
  double upper(Index i) const { return bounds[static_cast<std::size_t>(i)].second; }
  double width(Index i) const { return upper(i) - lower(i); }
  bool contains(const ParameterVector& alpha) const;
};

enum class InitialCondition { Zero };

/// Description of one parametric parabolic problem.
///
/// Heat: u_t = div(nu grad u) with a Robin condition n.grad u + a1 (u - 1) = 0
/// on the sides listed in `robin_sides`, n.grad u + c u = c a2 on the hole
/// boundaries (c = `hole_robin`) and zero flux elsewhere.
///
/// AdvDiff: u_t = nu lap u - eta(x, a) . grad u + f(x) with zero flux on the
/// whole boundary and a Gaussian source f.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::Heat;
  Rect outer;
  std::vector<Rect> holes;
  std::vector<Side> robin_sides;
  double nu = 1.0;
  double hole_robin = 0.5;
  double source_sigma = 0.05;
  Eigen::Vector2d source_center{0.25, 0.25};
  ParameterBox box;
  double final_time = 1.0;
  InitialCondition initial = InitialCondition::Zero;

  /// Throws ConfigError or GeometryError when the description is inconsistent.
  void validate() const;

  /// Canonical text form; equal problems produce equal strings.
  std::string canonical_string() const;

  static ProblemSpec heat();
  static ProblemSpec advdiff();
};

/// Throws DomainError if alpha lies outside the parameter box.
void require_in_box(const ParameterBox& box, const ParameterVector& alpha);

/// Divergence-free advection field of the advection-diffusion problem,
/// (cos pi/4, sin pi/4) + (1/pi) (d_2 s, -d_1 s) for the cosine stream
/// function s(x, alpha).
Eigen::Vector2d eval_advection(const Eigen::Vector2d& x, const ParameterVector& alpha);

/// Gaussian source term of the advection-diffusion problem.
double eval_source(const ProblemSpec& problem, const Eigen::Vector2d& x);

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);
const char* to_string(Side side);
Side side_from_string(const std::string& name);

}  // namespace lrtdrom
