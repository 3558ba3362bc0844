#include "lrtdrom/tt.hpp"

#include <cmath>
#include <fstream>

#include "lrtdrom/binary_io.hpp"

namespace lrtdrom {

double eps_to_eps_tilde(double eps, double norm0_phi, double frobenius_phi, double mass_norm,
                        double dt) {
  if (!(eps >= 0.0)) throw DomainError("eps must be non-negative");
  if (!(frobenius_phi > 0.0) || !(norm0_phi > 0.0)) {
    throw DomainError("cannot convert tolerances for a zero snapshot tensor");
  }
  if (!(mass_norm > 0.0) || !(dt > 0.0)) throw DomainError("mass norm and time step must be positive");
  return eps * norm0_phi / (std::sqrt(mass_norm * dt) * frobenius_phi);
}

double eps_to_eps_tilde(double eps, const SnapshotTensor& phi, const SparseOperator& M, double dt) {
  return eps_to_eps_tilde(eps, norm0(phi, M, dt), frobenius_norm(phi), spectral_norm_spd(M), dt);
}

void save_tt(const TTTensor& tt, const std::filesystem::path& path) {
  tt.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  os.write("LRTT", 4);
  binary::write_u32(os, static_cast<std::uint32_t>(tt.order()));
  for (Index n : tt.dims) binary::write_u32(os, static_cast<std::uint32_t>(n));
  for (Index k = 1; k < tt.order(); ++k) binary::write_u32(os, static_cast<std::uint32_t>(tt.rank(k)));
  for (const auto& c : tt.cores) binary::write_f64_array(os, c.data(), static_cast<std::size_t>(c.size()));
  if (!os) throw FormatError("write failed for " + path.string());
}

TTTensor load_tt(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  binary::expect_magic(is, "LRTT");
  const std::uint32_t d = binary::read_u32(is);
  if (d == 0 || d > 64) throw FormatError("unsupported tensor-train order " + std::to_string(d));
  TTTensor tt;
  for (std::uint32_t k = 0; k < d; ++k) {
    const std::uint32_t n = binary::read_u32(is);
    if (n == 0) throw FormatError("zero mode size");
    tt.dims.push_back(n);
  }
  tt.ranks.push_back(1);
  for (std::uint32_t k = 1; k < d; ++k) {
    const std::uint32_t r = binary::read_u32(is);
    if (r == 0) throw FormatError("zero rank");
    tt.ranks.push_back(r);
  }
  tt.ranks.push_back(1);
  for (std::uint32_t k = 0; k < d; ++k) {
    const std::uint64_t rows = static_cast<std::uint64_t>(tt.ranks[k]) * static_cast<std::uint64_t>(tt.dims[k]);
    const std::uint64_t cols = static_cast<std::uint64_t>(tt.ranks[k + 1]);
    if (rows * cols > (std::uint64_t{1} << 36)) throw FormatError("core size overflow");
    Eigen::MatrixXd core(static_cast<Index>(rows), static_cast<Index>(cols));
    binary::read_f64_array(is, core.data(), static_cast<std::size_t>(core.size()));
    tt.cores.push_back(std::move(core));
  }
  binary::expect_eof(is);
  return tt;
}

}  // namespace lrtdrom
