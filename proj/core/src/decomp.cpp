#include "ttc/decomp.hpp"

#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace ttc {

namespace {

std::size_t as_size(Index i) { return static_cast<std::size_t>(i); }

// Thin Householder factorization m = q * r with q orthonormal, kept columns.
void thin_qr(const Matrix& m, Matrix& q, Matrix& r) {
  Eigen::HouseholderQR<Matrix> qr(m);
  const Index kept = std::min(m.rows(), m.cols());
  q = qr.householderQ() * Matrix::Identity(m.rows(), kept);
  r = qr.matrixQR().topRows(kept).triangularView<Eigen::Upper>();
}

}  // namespace

Matrix leading_left_singular_vectors(const Matrix& a, Index r, Matrix* coeffs) {
  if (r > a.rows()) {
    throw DomainError("cannot keep " + std::to_string(r) + " singular vectors of a matrix with " +
                      std::to_string(a.rows()) + " rows");
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Index available = svd.matrixU().cols();
  Matrix u;
  if (r <= available) {
    u = svd.matrixU().leftCols(r);
  } else {
    Matrix seed(a.rows(), available + a.rows());
    seed << svd.matrixU(), Matrix::Identity(a.rows(), a.rows());
    Eigen::HouseholderQR<Matrix> qr(seed);
    u = qr.householderQ() * Matrix::Identity(a.rows(), r);
    u.leftCols(available) = svd.matrixU();
  }
  if (coeffs != nullptr) *coeffs = u.transpose() * a;
  return u;
}

TTTensor tt_svd(const DenseTensor& x, const RankVector& r) {
  const auto& dims = x.dims();
  r.check_feasible(dims);
  const int m = x.order();
  std::vector<Core> cores;
  cores.reserve(as_size(m));
  Matrix remainder = ConstMatrixMap(x.values().data(), 1, x.size());
  Index left = 1;
  for (int k = 0; k + 1 < m; ++k) {
    const Index d = dims[as_size(k)];
    const Index rest = remainder.size() / (left * d);
    ConstMatrixMap unfolded(remainder.data(), left * d, rest);
    Matrix coeffs;
    Matrix u = leading_left_singular_vectors(unfolded, r[as_size(k)], &coeffs);
    cores.push_back(core_from_left_unfold(u, left, d));
    remainder = std::move(coeffs);
    left = r[as_size(k)];
  }
  cores.push_back(core_from_left_unfold(
      ConstMatrixMap(remainder.data(), remainder.size(), 1), left, dims.back()));
  return TTTensor(std::move(cores));
}

TTTensor left_orthogonalize(const TTTensor& tt) {
  std::vector<Core> cores = tt.cores();
  const int m = tt.order();
  for (int k = 0; k + 1 < m; ++k) {
    Core& c = cores[as_size(k)];
    Matrix q, r;
    thin_qr(c.left_unfolding(), q, r);
    c = core_from_left_unfold(q, c.left_rank(), c.mode_size());
    Core& next = cores[as_size(k + 1)];
    next = core_from_right_unfold(r * next.right_unfolding(), next.mode_size(), next.right_rank());
  }
  return TTTensor(std::move(cores));
}

TTTensor right_orthogonalize(const TTTensor& tt) {
  std::vector<Core> cores = tt.cores();
  for (int k = tt.order() - 1; k > 0; --k) {
    Core& c = cores[as_size(k)];
    Matrix q, r;
    thin_qr(c.right_unfolding().transpose(), q, r);
    c = core_from_right_unfold(q.transpose(), c.mode_size(), c.right_rank());
    Core& prev = cores[as_size(k - 1)];
    prev = core_from_left_unfold(prev.left_unfolding() * r.transpose(), prev.left_rank(),
                                 prev.mode_size());
  }
  return TTTensor(std::move(cores));
}

TTTensor round_tt(const TTTensor& tt, const RankVector& r) {
  const auto dims = tt.dims();
  r.check_feasible(dims);
  std::vector<Core> cores = right_orthogonalize(tt).cores();
  for (std::size_t k = 0; k + 1 < cores.size(); ++k) {
    Core& c = cores[k];
    Matrix coeffs;
    Matrix u = leading_left_singular_vectors(c.left_unfolding(), r[k], &coeffs);
    c = core_from_left_unfold(u, c.left_rank(), c.mode_size());
    Core& next = cores[k + 1];
    next = core_from_right_unfold(coeffs * next.right_unfolding(), next.mode_size(),
                                  next.right_rank());
  }
  return TTTensor(std::move(cores));
}

TTTensor retract(const DenseTensor& w, const RankVector& r) { return tt_svd(w, r); }

TTTensor retract(const TTTensor& w, const RankVector& r, RetractionPath path, Index dense_limit) {
  if (path == RetractionPath::kDense) {
    if (w.full_size() > dense_limit) {
      throw CapacityError("dense retraction requested for a tensor with " +
                          std::to_string(w.full_size()) + " entries (limit " +
                          std::to_string(dense_limit) + ")");
    }
    return tt_svd(to_dense(w, dense_limit), r);
  }
  return round_tt(w, r);
}

double tt_norm(const TTTensor& tt) {
  const TTTensor orth = left_orthogonalize(tt);
  const auto data = orth.cores().back().data();
  return Eigen::Map<const Vector>(data.data(), static_cast<Index>(data.size())).norm();
}

double tt_distance(const TTTensor& a, const TTTensor& b) {
  return tt_norm(tt_add(a, tt_scale(b, -1.0)));
}

Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

RankVector numerical_tt_rank(const DenseTensor& x, double rel_tol) {
  std::vector<Index> ranks;
  for (int i = 1; i < x.order(); ++i) {
    ranks.push_back(std::max<Index>(1, numerical_rank(separation(x, i), rel_tol)));
  }
  return RankVector(std::move(ranks));
}

}  // namespace ttc
