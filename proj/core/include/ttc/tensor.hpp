#pragma once

// Dense and tensor-train (TT) representations.
//
// Linearization: every multi-index is grouped column-major, i.e. the first
// index varies fastest. This applies to the flat storage of DenseTensor, to
// separations and unfoldings, to the left/right parts of a TT tensor and to
// the storage of a core U(j, x, k) (offset j + r0 * (x + d * k)). With this
// convention L(U) and R(U) are plain views of the core buffer, and the left
// part recursion reads T^{<=i} = (I_{d_i} (x) T^{<=i-1}) L(T_i).
//
// Indices are 0-based everywhere except eval_entry(), which takes 1-based
// indices, and the text observation format.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ttc/error.hpp"

namespace ttc {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using SliceMap = Eigen::Map<Matrix, 0, Eigen::OuterStride<>>;
using ConstSliceMap = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

inline constexpr int kMaxOrder = 12;
inline constexpr Index kDefaultDenseLimit = 100'000'000;

/// Product of dims[first, last).
Index product(std::span<const Index> dims, std::size_t first, std::size_t last);
Index product(std::span<const Index> dims);

class DenseTensor {
 public:
  DenseTensor() = default;
  /// Zero tensor.
  explicit DenseTensor(std::vector<Index> dims);
  DenseTensor(std::vector<Index> dims, std::vector<double> values);

  int order() const { return static_cast<int>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
  Index size() const { return static_cast<Index>(values_.size()); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](Index linear) const { return values_[static_cast<std::size_t>(linear)]; }
  double& operator[](Index linear) { return values_[static_cast<std::size_t>(linear)]; }

  Eigen::Map<const Vector> vec() const { return {values_.data(), size()}; }
  Eigen::Map<Vector> vec() { return {values_.data(), size()}; }

  Index linear_index(std::span<const Index> index) const;
  void multi_index(Index linear, std::span<Index> out) const;
  double at(std::span<const Index> index) const { return values_[static_cast<std::size_t>(linear_index(index))]; }

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  std::vector<Index> dims_;
  std::vector<double> values_;
};

/// Order-3 core U of shape (left, mode, right).
class Core {
 public:
  Core() = default;
  Core(Index left, Index mode, Index right);
  Core(Index left, Index mode, Index right, std::vector<double> data);

  Index left_rank() const { return left_; }
  Index mode_size() const { return mode_; }
  Index right_rank() const { return right_; }
  Index size() const { return static_cast<Index>(data_.size()); }

  double operator()(Index j, Index x, Index k) const { return data_[offset(j, x, k)]; }
  double& operator()(Index j, Index x, Index k) { return data_[offset(j, x, k)]; }

  /// L(U): (left * mode) x right.
  ConstMatrixMap left_unfolding() const { return {data_.data(), left_ * mode_, right_}; }
  MatrixMap left_unfolding() { return {data_.data(), left_ * mode_, right_}; }
  /// R(U): left x (mode * right).
  ConstMatrixMap right_unfolding() const { return {data_.data(), left_, mode_ * right_}; }
  MatrixMap right_unfolding() { return {data_.data(), left_, mode_ * right_}; }
  /// U(:, x, :) as a left x right matrix.
  ConstSliceMap slice(Index x) const {
    return {data_.data() + x * left_, left_, right_, Eigen::OuterStride<>(left_ * mode_)};
  }
  SliceMap slice(Index x) {
    return {data_.data() + x * left_, left_, right_, Eigen::OuterStride<>(left_ * mode_)};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  friend bool operator==(const Core&, const Core&) = default;

 private:
  std::size_t offset(Index j, Index x, Index k) const {
    return static_cast<std::size_t>(j + left_ * (x + mode_ * k));
  }

  Index left_ = 0;
  Index mode_ = 0;
  Index right_ = 0;
  std::vector<double> data_;
};

Matrix left_unfold(const Core& core);
Matrix right_unfold(const Core& core);
Core core_from_left_unfold(const Matrix& m, Index left, Index mode);
Core core_from_right_unfold(const Matrix& m, Index mode, Index right);

/// TT rank (r_1, ..., r_{m-1}); r_0 = r_m = 1 are implicit.
class RankVector {
 public:
  RankVector() = default;
  explicit RankVector(std::vector<Index> ranks);
  static RankVector uniform(int order, Index r);

  std::size_t size() const { return ranks_.size(); }
  Index operator[](std::size_t i) const { return ranks_[i]; }
  /// Bond dimension r_b for b in [0, m] including the unit boundary ranks.
  Index bond(std::size_t b) const;
  const std::vector<Index>& values() const { return ranks_; }

  /// Throws DomainError unless r_i <= min(d_1..d_i, d_{i+1}..d_m) and
  /// neighbouring ranks are compatible (r_i <= r_{i-1} d_i, r_{i-1} <= d_i r_i).
  void check_feasible(std::span<const Index> dims) const;
  bool feasible(std::span<const Index> dims) const;

  /// Componentwise 2r, the rank bound of a tangent vector.
  RankVector doubled() const;

  friend bool operator==(const RankVector&, const RankVector&) = default;

 private:
  std::vector<Index> ranks_;
};

class TTTensor {
 public:
  TTTensor() = default;
  /// Validates r_0 = r_m = 1 and agreement of adjacent ranks.
  explicit TTTensor(std::vector<Core> cores);
  static TTTensor zeros(std::span<const Index> dims, const RankVector& ranks);

  int order() const { return static_cast<int>(cores_.size()); }
  std::vector<Index> dims() const;
  RankVector ranks() const;
  Index dim(int i) const { return cores_[static_cast<std::size_t>(i)].mode_size(); }
  Index full_size() const;

  const Core& core(int i) const { return cores_[static_cast<std::size_t>(i)]; }
  /// Mutable access; callers must keep the core shape unchanged.
  Core& mutable_core(int i) { return cores_[static_cast<std::size_t>(i)]; }
  const std::vector<Core>& cores() const { return cores_; }

  /// Entry at a 0-based multi-index (no range checks).
  double value_at(std::span<const Index> index) const;

 private:
  std::vector<Core> cores_;
};

/// Entry at a 1-based multi-index; DomainError when out of range.
double eval_entry(const TTTensor& tt, std::span<const Index> index);

/// Materializes the tensor; CapacityError when it has more than max_entries.
DenseTensor to_dense(const TTTensor& tt, Index max_entries = kDefaultDenseLimit);

/// i-th separation, shape (d_1..d_i) x (d_{i+1}..d_m), 1 <= i <= m-1.
Matrix separation(const DenseTensor& x, int i);
ConstMatrixMap separation_view(const DenseTensor& x, int i);
DenseTensor fold_separation(const Matrix& m, std::vector<Index> dims);

/// Mode-i unfolding (1-based mode), shape d_i x (d*/d_i). Columns follow the
/// remaining indices in column-major order.
Matrix mode_unfold(const DenseTensor& x, int i);
DenseTensor mode_fold(const Matrix& m, int i, std::vector<Index> dims);
/// x times_i M; M.cols() must equal d_i.
DenseTensor mode_product(const DenseTensor& x, int i, const Matrix& m);

/// T^{<=i}, (d_1..d_i) x r_i, 0 <= i <= m.
Matrix left_part(const TTTensor& tt, int i);
/// T^{>=i}, r_{i-1} x (d_i..d_m), 1 <= i <= m+1.
Matrix right_part(const TTTensor& tt, int i);

/// max_i sigma_1(T^<i>) / min_i sigma_{r_i}(T^<i>); DomainError for the zero tensor.
double condition_number(const TTTensor& tt);

double inner(const DenseTensor& x, const DenseTensor& y);
double fro_norm(const DenseTensor& x);

/// Euclidean inner product of two TT tensors with the same dims.
double tt_inner(const TTTensor& a, const TTTensor& b);
/// a + b as a TT tensor of rank r_a + r_b.
TTTensor tt_add(const TTTensor& a, const TTTensor& b);
TTTensor tt_scale(const TTTensor& a, double s);

}  // namespace ttc
