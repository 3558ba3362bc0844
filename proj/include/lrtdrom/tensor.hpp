#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lrtdrom/errors.hpp"

namespace lrtdrom {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline Index product(std::span<const Index> dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<>());
}

/// Dense tensor of arbitrary order stored first-index-fastest: entry
/// (i_0, ..., i_{d-1}) lives at i_0 + n_0 (i_1 + n_1 (i_2 + ...)).
template <typename Scalar>
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
    validate_dims();
    data_ = Vector<Scalar>::Zero(product(dims_));
  }

  DenseTensor(std::vector<Index> dims, Vector<Scalar> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    validate_dims();
    if (data_.size() != product(dims_)) {
      throw DimensionError("tensor data length does not match dimensions");
    }
  }

  Index order() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index k) const { return dims_.at(static_cast<std::size_t>(k)); }
  const std::vector<Index>& dims() const { return dims_; }
  Index size() const { return data_.size(); }

  Vector<Scalar>& data() { return data_; }
  const Vector<Scalar>& data() const { return data_; }

  Index linear_index(std::span<const Index> idx) const {
    Index lin = 0;
    for (Index k = order(); k-- > 0;) lin = lin * dims_[static_cast<std::size_t>(k)] + idx[static_cast<std::size_t>(k)];
    return lin;
  }

  std::vector<Index> multi_index(Index linear) const {
    std::vector<Index> idx(dims_.size());
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      idx[k] = linear % dims_[k];
      linear /= dims_[k];
    }
    return idx;
  }

  Scalar& operator()(std::span<const Index> idx) { return data_(linear_index(idx)); }
  const Scalar& operator()(std::span<const Index> idx) const { return data_(linear_index(idx)); }

  template <typename... I>
  Scalar& at(I... i) {
    const std::array<Index, sizeof...(I)> idx{static_cast<Index>(i)...};
    return (*this)(idx);
  }
  template <typename... I>
  const Scalar& at(I... i) const {
    const std::array<Index, sizeof...(I)> idx{static_cast<Index>(i)...};
    return (*this)(idx);
  }

 private:
  void validate_dims() const {
    for (Index n : dims_) {
      if (n < 1) throw DimensionError("tensor dimensions must be positive");
    }
  }

  std::vector<Index> dims_;
  Vector<Scalar> data_;
};

using SnapshotTensor = DenseTensor<double>;

template <typename Scalar>
Scalar frobenius_norm(const DenseTensor<Scalar>& t) {
  return t.data().norm();
}

/// First-mode unfolding n_0 x (n_1 ... n_{d-1}); a view, no copy.
template <typename Scalar>
Eigen::Map<const Matrix<Scalar>> unfold1(const DenseTensor<Scalar>& t) {
  return {t.data().data(), t.dim(0), t.size() / t.dim(0)};
}

/// Inverse of unfold1.
template <typename Derived>
DenseTensor<typename Derived::Scalar> refold1(const Eigen::MatrixBase<Derived>& m,
                                              std::vector<Index> dims) {
  using Scalar = typename Derived::Scalar;
  if (dims.empty() || m.rows() != dims.front() || m.size() != product(dims)) {
    throw DimensionError("matrix shape does not match target tensor");
  }
  Matrix<Scalar> dense = m;
  return DenseTensor<Scalar>(std::move(dims),
                             Eigen::Map<const Vector<Scalar>>(dense.data(), dense.size()));
}

/// k-mode tensor-vector product (0-based mode): sum_i a_i T(..., i, ...).
template <typename Scalar, typename Derived>
DenseTensor<Scalar> mode_product(const DenseTensor<Scalar>& t, Index k,
                                 const Eigen::MatrixBase<Derived>& a) {
  if (k < 0 || k >= t.order()) throw DimensionError("mode index out of range");
  if (t.order() < 2) throw DimensionError("mode product needs a tensor of order >= 2");
  if (a.size() != t.dim(k)) {
    throw DimensionError("vector length " + std::to_string(a.size()) + " != mode size " +
                         std::to_string(t.dim(k)));
  }
  const auto& dims = t.dims();
  const Index left = product(std::span(dims).first(static_cast<std::size_t>(k)));
  const Index mid = t.dim(k);
  const Index right = t.size() / (left * mid);
  std::vector<Index> out_dims;
  for (Index j = 0; j < t.order(); ++j) {
    if (j != k) out_dims.push_back(t.dim(j));
  }
  DenseTensor<Scalar> out(std::move(out_dims));
  const Vector<Scalar> av = a;
  for (Index r = 0; r < right; ++r) {
    Eigen::Map<const Matrix<Scalar>> slab(t.data().data() + r * left * mid, left, mid);
    out.data().segment(r * left, left).noalias() = slab * av;
  }
  return out;
}

/// The i-th k-mode slice, i.e. T with index k fixed to i.
template <typename Scalar>
DenseTensor<Scalar> mode_slice(const DenseTensor<Scalar>& t, Index k, Index i) {
  if (i < 0 || i >= t.dim(k)) throw DimensionError("slice index out of range");
  return mode_product(t, k, Vector<Scalar>::Unit(t.dim(k), i));
}

/// Space-time slice of an order-(D+2) snapshot tensor at parameter
/// multi-index `params` (length D); a contiguous n_0 x n_1 view.
template <typename Scalar>
Eigen::Map<const Matrix<Scalar>> space_time_slice(const DenseTensor<Scalar>& t,
                                                  std::span<const Index> params) {
  if (static_cast<Index>(params.size()) + 2 != t.order()) {
    throw DimensionError("parameter index has wrong length");
  }
  Index lin = 0;
  for (Index k = static_cast<Index>(params.size()); k-- > 0;) {
    const Index p = params[static_cast<std::size_t>(k)];
    if (p < 0 || p >= t.dim(k + 2)) throw DimensionError("parameter index out of range");
    lin = lin * t.dim(k + 2) + p;
  }
  const Index block = t.dim(0) * t.dim(1);
  return {t.data().data() + lin * block, t.dim(0), t.dim(1)};
}

/// Space-time slice selected by the linear parameter index.
template <typename Scalar>
Eigen::Map<const Matrix<Scalar>> space_time_slice(const DenseTensor<Scalar>& t, Index linear) {
  const Index block = t.dim(0) * t.dim(1);
  if (linear < 0 || linear >= t.size() / block) throw DimensionError("slice index out of range");
  return {t.data().data() + linear * block, t.dim(0), t.dim(1)};
}

template <typename Scalar>
Eigen::Map<Matrix<Scalar>> space_time_slice(DenseTensor<Scalar>& t, Index linear) {
  const Index block = t.dim(0) * t.dim(1);
  if (linear < 0 || linear >= t.size() / block) throw DimensionError("slice index out of range");
  return {t.data().data() + linear * block, t.dim(0), t.dim(1)};
}

}  // namespace lrtdrom
