#pragma once

#include <span>
#include <vector>

#include "ttc/tensor.hpp"

namespace ttc {

enum class SamplingMode { kWithoutReplacement, kWithReplacement };

/// Observed entries P_Omega(T): a list of (0-based multi-index, value) pairs.
/// Duplicate indices are only meaningful for with-replacement sampling and
/// are summed when densified.
class SparseObservations {
 public:
  SparseObservations() = default;
  explicit SparseObservations(std::vector<Index> dims,
                              SamplingMode mode = SamplingMode::kWithoutReplacement);

  int order() const { return static_cast<int>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index full_size() const { return full_size_; }
  Index size() const { return static_cast<Index>(values_.size()); }
  bool empty() const { return values_.empty(); }
  SamplingMode mode() const { return mode_; }

  void reserve(Index n);
  /// Range-checked append; DomainError when the index is outside dims.
  void add(std::span<const Index> index, double value);

  std::span<const Index> index(Index e) const {
    return {indices_.data() + e * order(), static_cast<std::size_t>(order())};
  }
  double value(Index e) const { return values_[static_cast<std::size_t>(e)]; }
  double& value(Index e) { return values_[static_cast<std::size_t>(e)]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// n / d*.
  double sampling_fraction() const;
  double squared_norm() const;

  /// Same index set, new values.
  SparseObservations with_values(std::vector<double> values) const;
  /// Duplicates merged by summation; entries sorted by linear index.
  SparseObservations coalesced() const;
  DenseTensor densify(Index max_entries = kDefaultDenseLimit) const;

 private:
  std::vector<Index> dims_;
  Index full_size_ = 0;
  SamplingMode mode_ = SamplingMode::kWithoutReplacement;
  std::vector<Index> indices_;
  std::vector<double> values_;
};

}  // namespace ttc
