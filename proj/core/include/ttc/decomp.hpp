#pragma once

#include "ttc/tensor.hpp"

namespace ttc {

/// TT-SVD: sequential truncated SVDs of the separations, keeping the top
/// r_i left singular vectors at each step. Cores 1..m-1 of the result are
/// left-orthogonal. DomainError when r is infeasible for x.
TTTensor tt_svd(const DenseTensor& x, const RankVector& r);

/// Same tensor with cores 1..m-1 left-orthogonal (Householder QR sweep;
/// rank-deficient cores get a deterministic orthonormal completion).
TTTensor left_orthogonalize(const TTTensor& tt);

/// Same tensor with cores 2..m right-orthogonal: R(T_i) R(T_i)^T = I.
TTTensor right_orthogonalize(const TTTensor& tt);

/// Structured TT-SVD of a TT tensor: right-orthogonalize, then truncate left
/// to right. Equals tt_svd(to_dense(tt), r) without materializing.
TTTensor round_tt(const TTTensor& tt, const RankVector& r);

enum class RetractionPath {
  kStructured,  ///< round_tt on the rank <= 2r representation
  kDense,       ///< densify and run tt_svd; only for full_size() <= dense limit
};

inline constexpr Index kDenseRetractionLimit = 1'000'000;

/// Rank-r retraction by TT-SVD.
TTTensor retract(const DenseTensor& w, const RankVector& r);
TTTensor retract(const TTTensor& w, const RankVector& r,
                 RetractionPath path = RetractionPath::kStructured,
                 Index dense_limit = kDenseRetractionLimit);

/// Frobenius norm through orthogonalization (no cancellation).
double tt_norm(const TTTensor& tt);
/// ||a - b||_F.
double tt_distance(const TTTensor& a, const TTTensor& b);

/// Number of singular values above rel_tol * sigma_1.
Index numerical_rank(const Matrix& m, double rel_tol = 1e-10);
/// Numerical rank of every separation of x.
RankVector numerical_tt_rank(const DenseTensor& x, double rel_tol = 1e-10);

/// Orthonormal basis of the leading r left singular vectors of a, completed
/// deterministically when a has fewer than r singular vectors. `coeffs`
/// receives U_r^T a.
Matrix leading_left_singular_vectors(const Matrix& a, Index r, Matrix* coeffs = nullptr);

}  // namespace ttc
