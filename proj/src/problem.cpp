#include "lrtdrom/problem.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lrtdrom/errors.hpp"

namespace lrtdrom {

bool ParameterBox::contains(const ParameterVector& alpha) const {
  if (alpha.size() != dim()) return false;
  for (Index i = 0; i < dim(); ++i) {
    if (!(alpha(i) >= lower(i) && alpha(i) <= upper(i))) return false;
  }
  return true;
}

void require_in_box(const ParameterBox& box, const ParameterVector& alpha) {
  if (alpha.size() != box.dim()) {
    throw DomainError("parameter vector has " + std::to_string(alpha.size()) +
                      " entries, box has " + std::to_string(box.dim()));
  }
  for (Index i = 0; i < box.dim(); ++i) {
    if (!(alpha(i) >= box.lower(i) && alpha(i) <= box.upper(i))) {
      std::ostringstream os;
      os << "parameter " << i << " = " << alpha(i) << " outside [" << box.lower(i) << ", "
         << box.upper(i) << "]";
      throw DomainError(os.str());
    }
  }
}

void ProblemSpec::validate() const {
  const Index expected_dim = kind == ProblemKind::Heat ? 2 : 5;
  if (box.dim() != expected_dim) {
    throw ConfigError(std::string(to_string(kind)) + " problem needs " +
                      std::to_string(expected_dim) + " parameters, got " +
                      std::to_string(box.dim()));
  }
  for (Index i = 0; i < box.dim(); ++i) {
    if (!(box.lower(i) < box.upper(i))) {
      throw ConfigError("parameter box dimension " + std::to_string(i) + " is empty");
    }
  }
  if (!(nu > 0.0)) throw ConfigError("diffusion coefficient must be positive");
  if (!(final_time > 0.0)) throw ConfigError("final time must be positive");
  if (kind == ProblemKind::AdvDiff && !(source_sigma > 0.0)) {
    throw ConfigError("source width must be positive");
  }
  if (!(outer.x0 < outer.x1 && outer.y0 < outer.y1)) {
    throw GeometryError("outer rectangle is degenerate");
  }
  for (std::size_t j = 0; j < holes.size(); ++j) {
    const Rect& r = holes[j];
    if (!(r.x0 < r.x1 && r.y0 < r.y1)) {
      throw GeometryError("hole " + std::to_string(j) + " is degenerate");
    }
    if (!(r.x0 > outer.x0 && r.x1 < outer.x1 && r.y0 > outer.y0 && r.y1 < outer.y1)) {
      throw GeometryError("hole " + std::to_string(j) + " is not strictly inside the domain");
    }
    for (std::size_t k = 0; k < j; ++k) {
      const Rect& o = holes[k];
      const bool apart = r.x1 < o.x0 || o.x1 < r.x0 || r.y1 < o.y0 || o.y1 < r.y0;
      if (!apart) {
        throw GeometryError("holes " + std::to_string(k) + " and " + std::to_string(j) +
                            " touch or overlap");
      }
    }
  }
  if (kind == ProblemKind::AdvDiff && !holes.empty()) {
    throw GeometryError("advection-diffusion problem has no holes");
  }
}

std::string ProblemSpec::canonical_string() const {
  std::ostringstream os;
  os << std::hexfloat;
  os << "kind=" << to_string(kind) << ";outer=" << outer.x0 << ',' << outer.x1 << ','
     << outer.y0 << ',' << outer.y1 << ";holes=";
  for (const auto& r : holes) os << r.x0 << ',' << r.x1 << ',' << r.y0 << ',' << r.y1 << '|';
  os << ";robin=";
  for (Side s : robin_sides) os << to_string(s) << '|';
  os << ";nu=" << nu << ";hole_robin=" << hole_robin << ";sigma=" << source_sigma
     << ";center=" << source_center(0) << ',' << source_center(1) << ";box=";
  for (const auto& [lo, hi] : box.bounds) os << lo << ',' << hi << '|';
  os << ";T=" << final_time << ";u0=zero";
  return os.str();
}

ProblemSpec ProblemSpec::heat() {
  ProblemSpec p;
  p.kind = ProblemKind::Heat;
  p.outer = {0.0, 10.0, 0.0, 4.0};
  // Three unit squares centred at x1 = 2.5, 5, 7.5 on the mid-line x2 = 2.
  p.holes = {{2.0, 3.0, 1.5, 2.5}, {4.5, 5.5, 1.5, 2.5}, {7.0, 8.0, 1.5, 2.5}};
  p.robin_sides = {Side::Left};
  p.nu = 1.0;
  p.hole_robin = 0.5;
  p.box.bounds = {{0.01, 0.501}, {0.0, 0.9}};
  p.final_time = 20.0;
  return p;
}

ProblemSpec ProblemSpec::advdiff() {
  ProblemSpec p;
  p.kind = ProblemKind::AdvDiff;
  p.outer = {0.0, 1.0, 0.0, 1.0};
  p.nu = 1.0 / 30.0;
  p.source_sigma = 0.05;
  p.source_center = {0.25, 0.25};
  p.box.bounds.assign(5, {-0.1, 0.1});
  p.final_time = 1.0;
  return p;
}

Eigen::Vector2d eval_advection(const Eigen::Vector2d& x, const ParameterVector& alpha) {
  using std::cos;
  using std::sin;
  constexpr double pi = std::numbers::pi;
  const double c1 = cos(pi * x(0)), s1 = sin(pi * x(0));
  const double c2 = cos(pi * x(1)), s2 = sin(pi * x(1));
  const double s21 = sin(2 * pi * x(0)), s22 = sin(2 * pi * x(1));
  // Partial derivatives of the stream function.
  const double d1 = -pi * alpha(0) * s1 - pi * alpha(2) * s1 * c2 - 2 * pi * alpha(3) * s21;
  const double d2 = -pi * alpha(1) * s2 - pi * alpha(2) * c1 * s2 - 2 * pi * alpha(4) * s22;
  const double base = std::numbers::sqrt2 / 2;
  return {base + d2 / pi, base - d1 / pi};
}

double eval_source(const ProblemSpec& problem, const Eigen::Vector2d& x) {
  const double s2 = problem.source_sigma * problem.source_sigma;
  const double r2 = (x - problem.source_center).squaredNorm();
  return std::exp(-r2 / (2 * s2)) / (2 * std::numbers::pi * s2);
}

const char* to_string(ProblemKind kind) {
  return kind == ProblemKind::Heat ? "heat" : "advdiff";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  if (name == "heat") return ProblemKind::Heat;
  if (name == "advdiff") return ProblemKind::AdvDiff;
  throw ConfigError("unknown problem kind '" + name + "'");
}

const char* to_string(Side side) {
  switch (side) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

Side side_from_string(const std::string& name) {
  if (name == "left") return Side::Left;
  if (name == "right") return Side::Right;
  if (name == "bottom") return Side::Bottom;
  if (name == "top") return Side::Top;
  throw ConfigError("unknown side '" + name + "'");
}

}  // namespace lrtdrom
