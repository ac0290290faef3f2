#include "ttc/tensor.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace ttc {

namespace {

std::size_t as_size(Index i) { return static_cast<std::size_t>(i); }

void check_dims(std::span<const Index> dims) {
  if (dims.empty() || dims.size() > static_cast<std::size_t>(kMaxOrder)) {
    throw DomainError("tensor order must be in [1, " + std::to_string(kMaxOrder) + "], got " +
                      std::to_string(dims.size()));
  }
  for (Index d : dims) {
    if (d < 1) throw DomainError("every dimension must be >= 1");
  }
}

void check_mode(int i, int lo, int hi, const char* what) {
  if (i < lo || i > hi) {
    throw DomainError(std::string(what) + ": index " + std::to_string(i) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

Index product(std::span<const Index> dims, std::size_t first, std::size_t last) {
  Index p = 1;
  for (std::size_t k = first; k < last; ++k) p *= dims[k];
  return p;
}

Index product(std::span<const Index> dims) { return product(dims, 0, dims.size()); }

// ---------------------------------------------------------------------------
// DenseTensor

DenseTensor::DenseTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
  check_dims(dims_);
  values_.assign(as_size(product(dims_)), 0.0);
}

DenseTensor::DenseTensor(std::vector<Index> dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  check_dims(dims_);
  if (static_cast<Index>(values_.size()) != product(dims_)) {
    throw ShapeError("dense tensor: value count " + std::to_string(values_.size()) +
                     " does not match product of dims " + std::to_string(product(dims_)));
  }
}

Index DenseTensor::linear_index(std::span<const Index> index) const {
  Index linear = 0;
  Index stride = 1;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    linear += index[k] * stride;
    stride *= dims_[k];
  }
  return linear;
}

void DenseTensor::multi_index(Index linear, std::span<Index> out) const {
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    out[k] = linear % dims_[k];
    linear /= dims_[k];
  }
}

// ---------------------------------------------------------------------------
// Core

Core::Core(Index left, Index mode, Index right) : left_(left), mode_(mode), right_(right) {
  if (left < 1 || mode < 1 || right < 1) throw DomainError("core dimensions must be >= 1");
  data_.assign(as_size(left * mode * right), 0.0);
}

Core::Core(Index left, Index mode, Index right, std::vector<double> data)
    : left_(left), mode_(mode), right_(right), data_(std::move(data)) {
  if (left < 1 || mode < 1 || right < 1) throw DomainError("core dimensions must be >= 1");
  if (static_cast<Index>(data_.size()) != left * mode * right) {
    throw ShapeError("core data size does not match its shape");
  }
}

Matrix left_unfold(const Core& core) { return core.left_unfolding(); }
Matrix right_unfold(const Core& core) { return core.right_unfolding(); }

Core core_from_left_unfold(const Matrix& m, Index left, Index mode) {
  if (m.rows() != left * mode) throw ShapeError("left unfolding has wrong row count");
  Core c(left, mode, m.cols());
  c.left_unfolding() = m;
  return c;
}

Core core_from_right_unfold(const Matrix& m, Index mode, Index right) {
  if (m.cols() != mode * right) throw ShapeError("right unfolding has wrong column count");
  Core c(m.rows(), mode, right);
  c.right_unfolding() = m;
  return c;
}

// ---------------------------------------------------------------------------
// RankVector

RankVector::RankVector(std::vector<Index> ranks) : ranks_(std::move(ranks)) {
  for (Index r : ranks_) {
    if (r < 1) throw DomainError("TT ranks must be >= 1");
  }
}

RankVector RankVector::uniform(int order, Index r) {
  return RankVector(std::vector<Index>(as_size(std::max(order - 1, 0)), r));
}

Index RankVector::bond(std::size_t b) const {
  if (b == 0 || b > ranks_.size()) return 1;
  return ranks_[b - 1];
}

bool RankVector::feasible(std::span<const Index> dims) const {
  if (ranks_.size() + 1 != dims.size()) return false;
  for (std::size_t i = 1; i < dims.size(); ++i) {
    const Index r = ranks_[i - 1];
    if (r > product(dims, 0, i) || r > product(dims, i, dims.size())) return false;
  }
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (bond(k + 1) > bond(k) * dims[k]) return false;
    if (bond(k) > dims[k] * bond(k + 1)) return false;
  }
  return true;
}

void RankVector::check_feasible(std::span<const Index> dims) const {
  if (ranks_.size() + 1 != dims.size()) {
    throw DomainError("rank vector has " + std::to_string(ranks_.size()) +
                      " entries, expected order - 1 = " + std::to_string(dims.size() - 1));
  }
  if (!feasible(dims)) throw DomainError("TT rank is infeasible for these dimensions");
}

RankVector RankVector::doubled() const {
  std::vector<Index> r = ranks_;
  for (auto& v : r) v *= 2;
  return RankVector(std::move(r));
}

// ---------------------------------------------------------------------------
// TTTensor

TTTensor::TTTensor(std::vector<Core> cores) : cores_(std::move(cores)) {
  if (cores_.empty() || cores_.size() > static_cast<std::size_t>(kMaxOrder)) {
    throw DomainError("TT order must be in [1, " + std::to_string(kMaxOrder) + "]");
  }
  if (cores_.front().left_rank() != 1 || cores_.back().right_rank() != 1) {
    throw ShapeError("TT boundary ranks must be 1");
  }
  for (std::size_t i = 0; i + 1 < cores_.size(); ++i) {
    if (cores_[i].right_rank() != cores_[i + 1].left_rank()) {
      throw ShapeError("TT core " + std::to_string(i) + " right rank does not match core " +
                       std::to_string(i + 1) + " left rank");
    }
  }
}

TTTensor TTTensor::zeros(std::span<const Index> dims, const RankVector& ranks) {
  if (ranks.size() + 1 != dims.size()) throw DomainError("rank vector length must be order - 1");
  std::vector<Core> cores;
  cores.reserve(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    cores.emplace_back(ranks.bond(k), dims[k], ranks.bond(k + 1));
  }
  return TTTensor(std::move(cores));
}

std::vector<Index> TTTensor::dims() const {
  std::vector<Index> d;
  d.reserve(cores_.size());
  for (const auto& c : cores_) d.push_back(c.mode_size());
  return d;
}

RankVector TTTensor::ranks() const {
  std::vector<Index> r;
  for (std::size_t i = 0; i + 1 < cores_.size(); ++i) r.push_back(cores_[i].right_rank());
  return RankVector(std::move(r));
}

Index TTTensor::full_size() const {
  Index p = 1;
  for (const auto& c : cores_) p *= c.mode_size();
  return p;
}

double TTTensor::value_at(std::span<const Index> index) const {
  Eigen::RowVectorXd row = cores_[0].slice(index[0]);
  for (std::size_t k = 1; k < cores_.size(); ++k) {
    row = row * cores_[k].slice(index[k]);
  }
  return row(0);
}

double eval_entry(const TTTensor& tt, std::span<const Index> index) {
  if (static_cast<int>(index.size()) != tt.order()) {
    throw DomainError("index has " + std::to_string(index.size()) + " entries, tensor order is " +
                      std::to_string(tt.order()));
  }
  std::vector<Index> zero_based(index.size());
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] < 1 || index[k] > tt.dim(static_cast<int>(k))) {
      throw DomainError("index " + std::to_string(index[k]) + " out of range [1, " +
                        std::to_string(tt.dim(static_cast<int>(k))) + "] in mode " +
                        std::to_string(k + 1));
    }
    zero_based[k] = index[k] - 1;
  }
  return tt.value_at(zero_based);
}

DenseTensor to_dense(const TTTensor& tt, Index max_entries) {
  const auto dims = tt.dims();
  // Guard before multiplying out, the product can overflow for large orders.
  double approx = 1.0;
  for (Index d : dims) approx *= static_cast<double>(d);
  if (approx > static_cast<double>(max_entries)) {
    throw CapacityError("to_dense: tensor has " + std::to_string(approx) +
                        " entries, above the limit " + std::to_string(max_entries));
  }
  Matrix full = left_part(tt, tt.order());
  return DenseTensor(dims, std::vector<double>(full.data(), full.data() + full.size()));
}

Matrix separation(const DenseTensor& x, int i) { return separation_view(x, i); }

ConstMatrixMap separation_view(const DenseTensor& x, int i) {
  check_mode(i, 1, x.order() - 1, "separation");
  const Index rows = product(x.dims(), 0, as_size(i));
  return {x.values().data(), rows, x.size() / rows};
}

DenseTensor fold_separation(const Matrix& m, std::vector<Index> dims) {
  if (m.size() != product(dims)) throw ShapeError("fold_separation: size mismatch");
  return DenseTensor(std::move(dims), std::vector<double>(m.data(), m.data() + m.size()));
}

Matrix mode_unfold(const DenseTensor& x, int i) {
  check_mode(i, 1, x.order(), "mode_unfold");
  const auto& dims = x.dims();
  const Index before = product(dims, 0, as_size(i - 1));
  const Index di = dims[as_size(i - 1)];
  const Index after = product(dims, as_size(i), dims.size());
  Matrix out(di, before * after);
  // Linear offset a + before * (k + di * c) maps to column a + before * c.
  for (Index c = 0; c < after; ++c) {
    for (Index k = 0; k < di; ++k) {
      for (Index a = 0; a < before; ++a) {
        out(k, a + before * c) = x[a + before * (k + di * c)];
      }
    }
  }
  return out;
}

DenseTensor mode_fold(const Matrix& m, int i, std::vector<Index> dims) {
  check_dims(dims);
  check_mode(i, 1, static_cast<int>(dims.size()), "mode_fold");
  const Index before = product(dims, 0, as_size(i - 1));
  const Index di = dims[as_size(i - 1)];
  const Index after = product(dims, as_size(i), dims.size());
  if (m.rows() != di || m.cols() != before * after) throw ShapeError("mode_fold: shape mismatch");
  DenseTensor out(std::move(dims));
  for (Index c = 0; c < after; ++c) {
    for (Index k = 0; k < di; ++k) {
      for (Index a = 0; a < before; ++a) {
        out[a + before * (k + di * c)] = m(k, a + before * c);
      }
    }
  }
  return out;
}

DenseTensor mode_product(const DenseTensor& x, int i, const Matrix& m) {
  check_mode(i, 1, x.order(), "mode_product");
  if (m.cols() != x.dim(i - 1)) {
    throw ShapeError("mode_product: matrix has " + std::to_string(m.cols()) +
                     " columns, mode size is " + std::to_string(x.dim(i - 1)));
  }
  std::vector<Index> dims = x.dims();
  dims[as_size(i - 1)] = m.rows();
  return mode_fold(m * mode_unfold(x, i), i, std::move(dims));
}

Matrix left_part(const TTTensor& tt, int i) {
  check_mode(i, 0, tt.order(), "left_part");
  Matrix part = Matrix::Ones(1, 1);
  for (int k = 0; k < i; ++k) {
    const Core& c = tt.core(k);
    const Index rows = part.rows();
    Matrix next(rows * c.mode_size(), c.right_rank());
    for (Index x = 0; x < c.mode_size(); ++x) {
      next.middleRows(x * rows, rows).noalias() = part * c.slice(x);
    }
    part = std::move(next);
  }
  return part;
}

Matrix right_part(const TTTensor& tt, int i) {
  check_mode(i, 1, tt.order() + 1, "right_part");
  Matrix part = Matrix::Ones(1, 1);
  for (int k = tt.order() - 1; k >= i - 1; --k) {
    const Core& c = tt.core(k);
    const Index d = c.mode_size();
    Matrix next(c.left_rank(), d * part.cols());
    for (Index col = 0; col < part.cols(); ++col) {
      for (Index x = 0; x < d; ++x) {
        next.col(x + d * col).noalias() = c.slice(x) * part.col(col);
      }
    }
    part = std::move(next);
  }
  return part;
}

double condition_number(const TTTensor& tt) {
  const int m = tt.order();
  if (m < 2) throw DomainError("condition_number needs order >= 2");
  // Left-orthogonalize, then sweep right to left. When cores 1..i are
  // left-orthogonal and i+1..m right-orthogonal, the singular values of
  // T^<i> are those of the bond factor between them.
  std::vector<Core> cores = tt.cores();
  for (int k = 0; k + 1 < m; ++k) {
    Core& c = cores[as_size(k)];
    Eigen::HouseholderQR<Matrix> qr(c.left_unfolding());
    const Index rows = c.left_rank() * c.mode_size();
    const Index cols = c.right_rank();
    const Index kept = std::min(rows, cols);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, kept);
    Matrix r = qr.matrixQR().topRows(kept).triangularView<Eigen::Upper>();
    c = core_from_left_unfold(q, c.left_rank(), c.mode_size());
    Core& next = cores[as_size(k + 1)];
    next = core_from_right_unfold(r * next.right_unfolding(), next.mode_size(), next.right_rank());
  }
  const auto ranks = tt.ranks();
  double sigma_max = 0.0;
  double sigma_min = std::numeric_limits<double>::infinity();
  for (int k = m - 1; k >= 1; --k) {
    Core& c = cores[as_size(k)];
    // R(C)^T = Q R  =>  R(C) = R^T Q^T with Q^T right-orthogonal.
    Matrix rt = c.right_unfolding().transpose();
    Eigen::HouseholderQR<Matrix> qr(rt);
    const Index kept = std::min(rt.rows(), rt.cols());
    Matrix q = qr.householderQ() * Matrix::Identity(rt.rows(), kept);
    Matrix factor = qr.matrixQR().topRows(kept).triangularView<Eigen::Upper>();
    factor.transposeInPlace();  // left_rank x kept
    Eigen::JacobiSVD<Matrix> svd(factor);
    const Vector& s = svd.singularValues();
    const Index r = ranks[as_size(k - 1)];
    sigma_max = std::max(sigma_max, s.size() > 0 ? s(0) : 0.0);
    const double smallest = r <= s.size() ? s(r - 1) : 0.0;
    sigma_min = std::min(sigma_min, smallest);
    c = core_from_right_unfold(q.transpose(), c.mode_size(), c.right_rank());
    Core& prev = cores[as_size(k - 1)];
    Matrix merged = prev.left_unfolding() * factor;
    prev = core_from_left_unfold(merged, prev.left_rank(), prev.mode_size());
  }
  if (sigma_max == 0.0) throw DomainError("condition_number of the zero tensor is undefined");
  if (sigma_min == 0.0) return std::numeric_limits<double>::infinity();
  return sigma_max / sigma_min;
}

double inner(const DenseTensor& x, const DenseTensor& y) {
  if (x.dims() != y.dims()) throw ShapeError("inner: dims differ");
  return x.vec().dot(y.vec());
}

double fro_norm(const DenseTensor& x) { return x.vec().norm(); }

double tt_inner(const TTTensor& a, const TTTensor& b) {
  if (a.dims() != b.dims()) throw ShapeError("tt_inner: dims differ");
  Matrix env = Matrix::Ones(1, 1);
  for (int k = 0; k < a.order(); ++k) {
    const Core& ca = a.core(k);
    const Core& cb = b.core(k);
    Matrix next = Matrix::Zero(ca.right_rank(), cb.right_rank());
    for (Index x = 0; x < ca.mode_size(); ++x) {
      next.noalias() += ca.slice(x).transpose() * env * cb.slice(x);
    }
    env = std::move(next);
  }
  return env(0, 0);
}

TTTensor tt_add(const TTTensor& a, const TTTensor& b) {
  if (a.dims() != b.dims()) throw ShapeError("tt_add: dims differ");
  const int m = a.order();
  if (m == 1) {
    Core c = a.core(0);
    for (Index x = 0; x < c.mode_size(); ++x) c(0, x, 0) += b.core(0)(0, x, 0);
    return TTTensor({c});
  }
  std::vector<Core> cores;
  cores.reserve(as_size(m));
  for (int k = 0; k < m; ++k) {
    const Core& ca = a.core(k);
    const Core& cb = b.core(k);
    const bool first = k == 0;
    const bool last = k == m - 1;
    const Index left = first ? 1 : ca.left_rank() + cb.left_rank();
    const Index right = last ? 1 : ca.right_rank() + cb.right_rank();
    Core c(left, ca.mode_size(), right);
    for (Index x = 0; x < ca.mode_size(); ++x) {
      auto s = c.slice(x);
      const Index lo_a = 0;
      const Index lo_b = first ? 0 : ca.left_rank();
      const Index ro_a = 0;
      const Index ro_b = last ? 0 : ca.right_rank();
      s.block(lo_a, ro_a, ca.left_rank(), ca.right_rank()) = ca.slice(x);
      s.block(lo_b, ro_b, cb.left_rank(), cb.right_rank()) += cb.slice(x);
    }
    cores.push_back(std::move(c));
  }
  return TTTensor(std::move(cores));
}

TTTensor tt_scale(const TTTensor& a, double s) {
  std::vector<Core> cores = a.cores();
  for (double& v : cores.back().data()) v *= s;
  return TTTensor(std::move(cores));
}

}  // namespace ttc
