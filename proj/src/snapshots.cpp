#include "lrtdrom/snapshots.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "lrtdrom/binary_io.hpp"
#include "lrtdrom/errors.hpp"
#include "lrtdrom/parallel.hpp"

namespace lrtdrom {

std::vector<Index> ParameterGrid::counts() const {
  std::vector<Index> k;
  for (const auto& n : nodes) k.push_back(n.size());
  return k;
}

Index ParameterGrid::total() const {
  Index k = 1;
  for (const auto& n : nodes) k *= n.size();
  return k;
}

double ParameterGrid::step(Index i) const {
  const auto& n = nodes[static_cast<std::size_t>(i)];
  double gap = 0.0;
  for (Index j = 0; j + 1 < n.size(); ++j) gap = std::max(gap, std::abs(n(j + 1) - n(j)));
  return gap;
}

double ParameterGrid::max_step() const {
  double m = 0.0;
  for (Index i = 0; i < dim(); ++i) m = std::max(m, step(i));
  return m;
}

double ParameterGrid::step_power_sum(double p) const {
  double s = 0.0;
  for (Index i = 0; i < dim(); ++i) s += std::pow(step(i), p);
  return s;
}

ParameterVector ParameterGrid::point(std::span<const Index> multi) const {
  ParameterVector a(dim());
  for (Index i = 0; i < dim(); ++i) a(i) = nodes[static_cast<std::size_t>(i)](multi[static_cast<std::size_t>(i)]);
  return a;
}

std::vector<Index> ParameterGrid::multi_index(Index linear) const {
  std::vector<Index> k(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    k[i] = linear % nodes[i].size();
    linear /= nodes[i].size();
  }
  return k;
}

ParameterVector ParameterGrid::point(Index linear) const {
  const auto k = multi_index(linear);
  return point(k);
}

ParameterGrid build_parameter_grid(const ParameterBox& box, const std::vector<Index>& counts) {
  if (static_cast<Index>(counts.size()) != box.dim()) {
    throw ConfigError("grid needs " + std::to_string(box.dim()) + " node counts, got " +
                      std::to_string(counts.size()));
  }
  ParameterGrid grid;
  grid.box = box;
  for (Index i = 0; i < box.dim(); ++i) {
    const Index k = counts[static_cast<std::size_t>(i)];
    if (k < 2) throw ConfigError("each grid dimension needs at least 2 nodes");
    Eigen::VectorXd n(k);
    const double lo = box.lower(i), hi = box.upper(i);
    for (Index j = 0; j < k; ++j) n(j) = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(k - 1);
    n(k - 1) = hi;
    grid.nodes.push_back(std::move(n));
  }
  return grid;
}

std::vector<Index> counts_for_spacing(const ParameterBox& box, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("grid spacing must be positive");
  std::vector<Index> k;
  for (Index i = 0; i < box.dim(); ++i) {
    const double cells = std::ceil(box.width(i) / spacing - 1e-9);
    k.push_back(std::max<Index>(2, static_cast<Index>(cells) + 1));
  }
  return k;
}

std::uint64_t memory_budget_bytes(double default_gb) {
  double gb = default_gb;
  if (const char* env = std::getenv("LRTDROM_MEM_BUDGET_GB")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || !(v > 0.0)) throw ConfigError("LRTDROM_MEM_BUDGET_GB must be a positive number");
    gb = v;
  }
  return static_cast<std::uint64_t>(gb * 1024.0 * 1024.0 * 1024.0);
}

void check_budget(std::uint64_t entries, std::uint64_t budget_bytes, const char* what) {
  const std::uint64_t bytes = entries * sizeof(double);
  if (bytes > budget_bytes) {
    std::ostringstream os;
    os << what << " needs " << static_cast<double>(bytes) / (1u << 30) << " GiB, budget is "
       << static_cast<double>(budget_bytes) / (1u << 30) << " GiB";
    throw BudgetError(os.str());
  }
}

SnapshotTensor generate_snapshots(const ProblemSpec& problem, const Mesh2D& mesh,
                                  const TimeGrid& grid, const ParameterGrid& params,
                                  int workers, std::uint64_t budget_bytes) {
  const Index m = mesh.num_nodes();
  const Index n = grid.steps;
  const Index k = params.total();
  check_budget(static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n) *
                   static_cast<std::uint64_t>(k),
               budget_bytes, "snapshot tensor");
  std::vector<Index> dims{m, n};
  for (Index c : params.counts()) dims.push_back(c);
  SnapshotTensor phi(std::move(dims));
  const SparseOperator mass = assemble_mass(mesh);
  parallel_for(k, workers, [&](std::ptrdiff_t j) {
    const ParameterVector alpha = params.point(static_cast<Index>(j));
    try {
      space_time_slice(phi, static_cast<Index>(j)) = solve_fom(mesh, problem, mass, alpha, grid).U;
    } catch (const Error& e) {
      std::ostringstream os;
      os << "full-order run failed at alpha = (" << alpha.transpose() << "): " << e.what();
      throw SolverError(os.str());
    }
  });
  return phi;
}

double weighted_frobenius(const SparseOperator& M, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (M.cols() != X.rows()) throw DimensionError("mass matrix and slice disagree in size");
  const Eigen::MatrixXd MX = M * X;
  return std::sqrt(std::max(0.0, (MX.array() * X.array()).sum()));
}

double norm0(const SnapshotTensor& phi, const SparseOperator& M, double dt) {
  if (phi.order() < 2 || phi.dim(0) != M.rows()) {
    throw DimensionError("snapshot tensor does not match the mass matrix");
  }
  const Index slices = phi.size() / (phi.dim(0) * phi.dim(1));
  double best = 0.0;
  for (Index s = 0; s < slices; ++s) best = std::max(best, weighted_frobenius(M, space_time_slice(phi, s)));
  return std::sqrt(dt) * best;
}

double spectral_norm_spd(const SparseOperator& M, double tol, int max_iter) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(M.rows());
  // Break symmetry so the start vector is not orthogonal to the top eigenvector.
  for (Index i = 0; i < x.size(); ++i) x(i) += 1e-3 * std::sin(static_cast<double>(i) + 1.0);
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = M * x;
    const double next = x.dot(y);
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    x = y / ny;
    if (it > 0 && std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

void save_tensor(const SnapshotTensor& t, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.write("LRT1", 4);
  binary::write_u32(os, static_cast<std::uint32_t>(t.order()));
  for (Index d : t.dims()) binary::write_u32(os, static_cast<std::uint32_t>(d));
  binary::write_f64_array(os, t.data().data(), static_cast<std::size_t>(t.size()));
  if (!os) throw FormatError("write failed for " + path.string());
}

SnapshotTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  binary::expect_magic(is, "LRT1");
  const std::uint32_t order = binary::read_u32(is);
  if (order == 0 || order > 64) throw FormatError("unsupported tensor order " + std::to_string(order));
  std::vector<Index> dims(order);
  std::uint64_t total = 1;
  for (auto& d : dims) {
    d = binary::read_u32(is);
    if (d == 0) throw FormatError("zero tensor dimension");
    total *= static_cast<std::uint64_t>(d);
    if (total > (std::uint64_t{1} << 40)) throw FormatError("tensor dimensions overflow");
  }
  Eigen::VectorXd data(static_cast<Index>(total));
  binary::read_f64_array(is, data.data(), static_cast<std::size_t>(total));
  binary::expect_eof(is);
  return SnapshotTensor(std::move(dims), std::move(data));
}

}  // namespace lrtdrom
