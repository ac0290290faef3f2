#include "ttc/observations.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace ttc {

SparseObservations::SparseObservations(std::vector<Index> dims, SamplingMode mode)
    : dims_(std::move(dims)), mode_(mode) {
  if (dims_.empty() || dims_.size() > static_cast<std::size_t>(kMaxOrder)) {
    throw DomainError("observation order must be in [1, " + std::to_string(kMaxOrder) + "]");
  }
  for (Index d : dims_) {
    if (d < 1) throw DomainError("every dimension must be >= 1");
  }
  full_size_ = product(dims_);
}

void SparseObservations::reserve(Index n) {
  indices_.reserve(static_cast<std::size_t>(n * order()));
  values_.reserve(static_cast<std::size_t>(n));
}

void SparseObservations::add(std::span<const Index> index, double value) {
  if (static_cast<int>(index.size()) != order()) {
    throw DomainError("observation index has wrong order");
  }
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] < 0 || index[k] >= dims_[k]) {
      throw DomainError("observation index " + std::to_string(index[k]) + " out of range in mode " +
                        std::to_string(k + 1));
    }
  }
  indices_.insert(indices_.end(), index.begin(), index.end());
  values_.push_back(value);
}

double SparseObservations::sampling_fraction() const {
  return static_cast<double>(size()) / static_cast<double>(full_size_);
}

double SparseObservations::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

SparseObservations SparseObservations::with_values(std::vector<double> values) const {
  if (values.size() != values_.size()) throw ShapeError("with_values: count mismatch");
  SparseObservations out = *this;
  out.values_ = std::move(values);
  return out;
}

SparseObservations SparseObservations::coalesced() const {
  std::vector<Index> linear(values_.size());
  for (Index e = 0; e < size(); ++e) {
    const auto idx = index(e);
    Index lin = 0;
    Index stride = 1;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      lin += idx[k] * stride;
      stride *= dims_[k];
    }
    linear[static_cast<std::size_t>(e)] = lin;
  }
  std::vector<std::size_t> perm(values_.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return linear[a] < linear[b]; });
  SparseObservations out(dims_, mode_);
  out.reserve(size());
  for (std::size_t p = 0; p < perm.size(); ++p) {
    const std::size_t e = perm[p];
    if (p > 0 && linear[e] == linear[perm[p - 1]]) {
      out.values_.back() += values_[e];
      continue;
    }
    out.add(index(static_cast<Index>(e)), values_[e]);
  }
  return out;
}

DenseTensor SparseObservations::densify(Index max_entries) const {
  if (full_size_ > max_entries) {
    throw CapacityError("densify: " + std::to_string(full_size_) + " entries above limit " +
                        std::to_string(max_entries));
  }
  DenseTensor out(dims_);
  for (Index e = 0; e < size(); ++e) out[out.linear_index(index(e))] += values_[static_cast<std::size_t>(e)];
  return out;
}

}  // namespace ttc
