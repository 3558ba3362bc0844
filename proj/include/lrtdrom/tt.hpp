#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "lrtdrom/errors.hpp"
#include "lrtdrom/snapshots.hpp"
#include "lrtdrom/tensor.hpp"

namespace lrtdrom {

/// Tensor train with cores G_k of shape R_k x n_k x R_{k+1}, R_0 = R_d = 1.
/// Core k is held as the (R_k n_k) x R_{k+1} matrix with row index
/// r + R_k i, which is the first-index-fastest layout of the 3-way core.
template <typename Scalar>
struct TensorTrain {
  std::vector<Index> dims;
  std::vector<Index> ranks;  // d + 1 entries, first and last equal 1
  std::vector<Matrix<Scalar>> cores;

  Index order() const { return static_cast<Index>(dims.size()); }
  Index rank(Index k) const { return ranks[static_cast<std::size_t>(k)]; }
  const Matrix<Scalar>& core(Index k) const { return cores[static_cast<std::size_t>(k)]; }

  /// R_k x R_{k+1} slice of core k at mode index i.
  auto core_slice(Index k, Index i) const {
    return core(k).middleRows(rank(k) * i, rank(k));
  }

  Index storage_entries() const {
    Index s = 0;
    for (const auto& c : cores) s += c.size();
    return s;
  }

  /// Throws DimensionError when the cores do not chain.
  void validate() const {
    const std::size_t d = dims.size();
    if (d == 0 || ranks.size() != d + 1 || cores.size() != d) {
      throw DimensionError("tensor train has inconsistent dims, ranks and cores");
    }
    if (ranks.front() != 1 || ranks.back() != 1) throw DimensionError("boundary ranks must be 1");
    for (std::size_t k = 0; k < d; ++k) {
      if (cores[k].rows() != ranks[k] * dims[k] || cores[k].cols() != ranks[k + 1]) {
        throw DimensionError("core " + std::to_string(k) + " has the wrong shape");
      }
    }
  }
};

using TTTensor = TensorTrain<double>;

struct CompressionReport {
  double eps = 0.0;
  double eps_tilde = 0.0;
  /// sqrt of the discarded singular-value energy over ||T||_F.
  double relative_error = 0.0;
  std::vector<Index> ranks;  // interior ranks R_1 .. R_{d-1}
  std::uint64_t storage_bytes = 0;
  double compression_ratio = 0.0;
};

/// Rank-r factorization C ~ U (S V^T) with orthonormal U.
template <typename Scalar>
struct TruncatedSvd {
  Matrix<Scalar> U;
  Matrix<Scalar> SVt;
  Vector<Scalar> sigma;      // all computed singular values, non-increasing
  Scalar discarded_sq = 0;   // energy of the dropped tail
};

/// Smallest rank whose discarded tail energy stays strictly below budget^2;
/// a tail exactly at the threshold is kept. Singular values at roundoff
/// level relative to sigma_1 are always dropped. Returns at least 1.
template <typename Scalar>
Index truncation_rank(const Vector<Scalar>& sigma, Scalar budget, Index rows, Index cols) {
  const Index n = sigma.size();
  if (n == 0) return 1;
  const Scalar floor = std::sqrt(static_cast<Scalar>(std::max(rows, cols))) *
                       std::numeric_limits<Scalar>::epsilon() * sigma(0);
  Index numeric = 0;
  while (numeric < n && sigma(numeric) > floor) ++numeric;
  const Scalar limit = budget * budget;
  Index r = n;
  Scalar tail = 0;
  while (r > 1) {
    const Scalar next = tail + sigma(r - 1) * sigma(r - 1);
    if (!(next < limit)) break;
    tail = next;
    --r;
  }
  return std::max<Index>(1, std::min(r, numeric));
}

/// Truncated SVD of C with absolute Frobenius budget. Wide matrices go through
/// a QR of C^T so only a min(m, n) square SVD is formed.
template <typename Scalar>
TruncatedSvd<Scalar> truncated_svd(const Eigen::Ref<const Matrix<Scalar>>& C, Scalar budget) {
  const Index m = C.rows(), n = C.cols();
  TruncatedSvd<Scalar> out;
  Matrix<Scalar> Ufull;
  if (n > 2 * m) {
    Matrix<Scalar> Ct = C.transpose();
    Eigen::HouseholderQR<Eigen::Ref<Matrix<Scalar>>> qr(Ct);
    Matrix<Scalar> Rt = Ct.topRows(m).template triangularView<Eigen::Upper>().transpose();
    Ct.resize(0, 0);
    Eigen::BDCSVD<Matrix<Scalar>> svd(Rt, Eigen::ComputeThinU);
    out.sigma = svd.singularValues();
    Ufull = svd.matrixU();
    const Index r = truncation_rank<Scalar>(out.sigma, budget, m, n);
    out.U = Ufull.leftCols(r);
    out.SVt.noalias() = out.U.transpose() * C;
  } else {
    Eigen::BDCSVD<Matrix<Scalar>> svd(C, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.sigma = svd.singularValues();
    const Index r = truncation_rank<Scalar>(out.sigma, budget, m, n);
    out.U = svd.matrixU().leftCols(r);
    out.SVt = out.sigma.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
  }
  const Index r = out.U.cols();
  out.discarded_sq = out.sigma.tail(out.sigma.size() - r).squaredNorm();
  return out;
}

/// Sequential truncated SVDs of the unfoldings with per-step budget
/// eps_tilde ||T||_F / sqrt(d - 1). Cores 0..d-2 come out left-orthogonal.
template <typename Scalar>
TensorTrain<Scalar> tt_svd(const DenseTensor<Scalar>& t, Scalar eps_tilde,
                           CompressionReport* report = nullptr) {
  if (!(eps_tilde >= 0)) throw DimensionError("eps_tilde must be non-negative");
  const Index d = t.order();
  if (d < 2) throw DimensionError("tt_svd needs a tensor of order >= 2");
  const Scalar norm = frobenius_norm(t);
  const Scalar budget = eps_tilde * norm / std::sqrt(static_cast<Scalar>(d - 1));

  TensorTrain<Scalar> tt;
  tt.dims = t.dims();
  tt.ranks.assign(static_cast<std::size_t>(d + 1), 1);
  Scalar discarded = 0;

  Matrix<Scalar> rest;  // remainder S V^T of the previous step
  Index r_prev = 1;
  for (Index k = 0; k + 1 < d; ++k) {
    const Index rows = r_prev * t.dim(k);
    TruncatedSvd<Scalar> step;
    if (k == 0) {
      step = truncated_svd<Scalar>(unfold1(t), budget);
    } else {
      const Eigen::Map<const Matrix<Scalar>> C(rest.data(), rows, rest.size() / rows);
      step = truncated_svd<Scalar>(C, budget);
    }
    discarded += step.discarded_sq;
    r_prev = step.U.cols();
    tt.ranks[static_cast<std::size_t>(k + 1)] = r_prev;
    tt.cores.push_back(std::move(step.U));
    rest = std::move(step.SVt);
  }
  // rest is R_{d-1} x n_{d-1}; store as (R n) x 1.
  tt.cores.push_back(Eigen::Map<const Matrix<Scalar>>(rest.data(), rest.size(), 1));

  if (report) {
    report->eps_tilde = static_cast<double>(eps_tilde);
    report->relative_error =
        norm > 0 ? static_cast<double>(std::sqrt(discarded) / norm) : 0.0;
    report->ranks.assign(tt.ranks.begin() + 1, tt.ranks.end() - 1);
    report->storage_bytes = static_cast<std::uint64_t>(tt.storage_entries()) * sizeof(Scalar);
    report->compression_ratio =
        static_cast<double>(t.size()) / static_cast<double>(tt.storage_entries());
  }
  return tt;
}

/// Dense contraction of all cores. Throws BudgetError above the memory budget.
template <typename Scalar>
DenseTensor<Scalar> tt_to_full(const TensorTrain<Scalar>& tt,
                               std::uint64_t budget_bytes = memory_budget_bytes()) {
  tt.validate();
  const Index total = product(tt.dims);
  check_budget(static_cast<std::uint64_t>(total) * sizeof(Scalar) / sizeof(double), budget_bytes,
               "dense reconstruction");
  Matrix<Scalar> P = tt.core(0);  // (n_0) x R_1
  for (Index k = 1; k < tt.order(); ++k) {
    const Index rows = P.rows();
    Matrix<Scalar> next(rows * tt.dims[static_cast<std::size_t>(k)], tt.rank(k + 1));
    for (Index i = 0; i < tt.dims[static_cast<std::size_t>(k)]; ++i) {
      next.middleRows(rows * i, rows).noalias() = P * tt.core_slice(k, i);
    }
    P = std::move(next);
  }
  return DenseTensor<Scalar>(tt.dims, Eigen::Map<const Vector<Scalar>>(P.data(), P.size()));
}

/// Contracts core k with chi along its mode index: R_k x R_{k+1}.
template <typename Scalar, typename Derived>
Matrix<Scalar> contract_core(const TensorTrain<Scalar>& tt, Index k,
                             const Eigen::MatrixBase<Derived>& chi) {
  const Index n = tt.dims[static_cast<std::size_t>(k)];
  if (chi.size() != n) {
    throw DimensionError("interpolation vector for mode " + std::to_string(k) + " has length " +
                         std::to_string(chi.size()) + ", expected " + std::to_string(n));
  }
  Matrix<Scalar> W = Matrix<Scalar>::Zero(tt.rank(k), tt.rank(k + 1));
  for (Index i = 0; i < n; ++i) {
    if (chi(i) != Scalar(0)) W.noalias() += chi(i) * tt.core_slice(k, i);
  }
  return W;
}

/// C(alpha) = (G_1 x_3 chi^1 ... x_{D+2} chi^D) in universal coordinates:
/// an R_1 x N matrix with Phi~(alpha) = T_1 C(alpha).
template <typename Scalar>
Matrix<Scalar> local_coefficient_matrix(const TensorTrain<Scalar>& tt,
                                        std::span<const Vector<Scalar>> chi) {
  const Index d = tt.order();
  if (d < 2 || static_cast<Index>(chi.size()) != d - 2) {
    throw DimensionError("need one interpolation vector per parameter mode");
  }
  Vector<Scalar> w = Vector<Scalar>::Ones(1);
  for (Index k = d - 1; k >= 2; --k) {
    w = contract_core(tt, k, chi[static_cast<std::size_t>(k - 2)]) * w;
  }
  const Vector<Scalar> flat = tt.core(1) * w;
  return Eigen::Map<const Matrix<Scalar>>(flat.data(), tt.rank(1), tt.dims[1]);
}

/// Phi~(alpha) = Phi~ x_3 chi^1 ... x_{D+2} chi^D as an M x N matrix.
template <typename Scalar>
Matrix<Scalar> extract_local_matrix(const TensorTrain<Scalar>& tt,
                                    std::span<const Vector<Scalar>> chi) {
  return tt.core(0) * local_coefficient_matrix(tt, chi);
}

/// Orthonormal basis T_1 of the universal space (the first core). Throws
/// DimensionError when the first core is not left-orthogonal.
template <typename Scalar>
const Matrix<Scalar>& universal_basis(const TensorTrain<Scalar>& tt, Scalar tol = Scalar(1e-10)) {
  const Matrix<Scalar>& T1 = tt.core(0);
  const Matrix<Scalar> gram = T1.transpose() * T1;
  const Scalar dev = (gram - Matrix<Scalar>::Identity(gram.rows(), gram.cols())).norm();
  if (!(dev <= tol)) {
    throw DimensionError("first core is not left-orthogonal (deviation " + std::to_string(dev) + ")");
  }
  return T1;
}

/// Largest ||G_k^T G_k - I||_F over cores 0..d-2.
template <typename Scalar>
Scalar left_orthogonality_defect(const TensorTrain<Scalar>& tt) {
  Scalar worst = 0;
  for (Index k = 0; k + 1 < tt.order(); ++k) {
    const Matrix<Scalar>& G = tt.core(k);
    const Matrix<Scalar> gram = G.transpose() * G;
    worst = std::max(worst, (gram - Matrix<Scalar>::Identity(gram.rows(), gram.cols())).norm());
  }
  return worst;
}

/// Relative Frobenius tolerance that makes ||Phi~ - Phi||_F <= eps_tilde ||Phi||_F
/// imply ||Phi~ - Phi||_0 <= eps ||Phi||_0:
/// eps_tilde = eps ||Phi||_0 (||M|| dt)^{-1/2} / ||Phi||_F.
double eps_to_eps_tilde(double eps, const SnapshotTensor& phi, const SparseOperator& M, double dt);

/// Same conversion from precomputed norms.
double eps_to_eps_tilde(double eps, double norm0_phi, double frobenius_phi, double mass_norm,
                        double dt);

/// Tensor-train file: "LRTT", u32 d, u32 dims[d], u32 ranks[d-1], cores as f64
/// little-endian in core order, each core first-index-fastest.
void save_tt(const TTTensor& tt, const std::filesystem::path& path);
TTTensor load_tt(const std::filesystem::path& path);

}  // namespace lrtdrom
