#pragma once

// Tangent space of the fixed-TT-rank manifold under the weighted metric
// <X, Y>_W. A point T is stored in new left-orthogonal form [T~_1..T~_m]:
//
//   L(T~_i)^T (I (x) G_i^{1/2m}) L(T~_i) = I,   i = 1..m-1,
//
// obtained by left-orthogonalizing T^ = W^{1/2} T and scaling back with
// G_i^{-1/4m}. A tangent vector is sum_i [T~_1, .., X_i, .., T~_m] with the
// gauge L(X_i)^T (I (x) G_i^{1/2m}) L(T~_i) = 0 for i < m. The W-orthogonal
// projection is W^{-1/2} P_T^ W^{1/2}, where P_T^ is the Euclidean tangent
// projection at T^.

#include <memory>
#include <vector>

#include <Eigen/Cholesky>

#include "ttc/metric.hpp"
#include "ttc/observations.hpp"
#include "ttc/tensor.hpp"

namespace ttc {

class TangentSpace {
 public:
  /// New left-orthogonal decomposition of `point` under `weights`.
  TangentSpace(const TTTensor& point, ModeWeights weights);

  /// Adopts `base` as an already new-left-orthogonal decomposition;
  /// ContractViolation when the weighted Gram test fails by more than tol.
  static TangentSpace from_orthogonalized(TTTensor base, ModeWeights weights, double tol = 1e-8);

  int order() const { return base_.order(); }
  const TTTensor& base() const { return base_; }
  /// W^{1/2} base, Euclidean left-orthogonal.
  const TTTensor& scaled_base() const { return scaled_; }
  const ModeWeights& weights() const { return weights_; }

  /// G_i^{1/4m} and G_i^{-1/4m}.
  const Vector& quarter_power(int i) const { return quarter_[static_cast<std::size_t>(i)]; }
  const Vector& inverse_quarter_power(int i) const {
    return inverse_quarter_[static_cast<std::size_t>(i)];
  }

  /// Gram matrix P P^T of the right part P formed by scaled cores i+1..m
  /// (0-based core i); [1] for the last core.
  const Matrix& right_gram(int i) const { return right_gram_[static_cast<std::size_t>(i)]; }
  /// m * right_gram(i)^{-1} by SPD solve. A diagonal jitter of
  /// 1e-14 trace / n is added when the Gram matrix is numerically singular.
  Matrix solve_right_gram(int i, const Matrix& m) const;
  /// Whether the jitter was needed for core i.
  bool right_gram_jittered(int i) const { return jittered_[static_cast<std::size_t>(i)]; }

  /// max_i max |L(T~_i)^T (I (x) G_i^{1/2m}) L(T~_i) - I| over i < m.
  double gauge_gram_deviation() const;

 private:
  TangentSpace() = default;
  void build_caches();

  TTTensor base_;
  TTTensor scaled_;
  ModeWeights weights_;
  std::vector<Vector> quarter_;
  std::vector<Vector> inverse_quarter_;
  std::vector<Matrix> right_gram_;
  std::vector<Eigen::LLT<Matrix>> right_gram_factor_;
  std::vector<bool> jittered_;
};

TTTensor new_left_orthogonal(const TTTensor& t, const ModeWeights& w);

class TangentVector {
 public:
  TangentVector(std::shared_ptr<const TangentSpace> space, std::vector<Core> variations);

  const TangentSpace& space() const { return *space_; }
  std::shared_ptr<const TangentSpace> shared_space() const { return space_; }
  const std::vector<Core>& variations() const { return variations_; }
  const Core& variation(int i) const { return variations_[static_cast<std::size_t>(i)]; }

  TangentVector scaled(double s) const;

 private:
  std::shared_ptr<const TangentSpace> space_;
  std::vector<Core> variations_;
};

/// W-orthogonal projection of a onto the tangent space. The sparse overload
/// contracts only observed entries; the dense overload works on full
/// separations and is the reference for the sparse one.
TangentVector project_tangent(std::shared_ptr<const TangentSpace> space, const SparseObservations& a);
TangentVector project_tangent(std::shared_ptr<const TangentSpace> space, const DenseTensor& a);
/// As above, but first checks that `w` is the metric the space was built
/// with (ContractViolation otherwise).
TangentVector project_tangent(std::shared_ptr<const TangentSpace> space, const ModeWeights& w,
                              const SparseObservations& a);
TangentVector project_tangent(std::shared_ptr<const TangentSpace> space, const ModeWeights& w,
                              const DenseTensor& a);

/// sum_i dA_i as a TT tensor of rank <= 2r.
TTTensor tangent_to_full(const TangentVector& v);
/// The single component dA_i = [T~_1, .., X_i, .., T~_m].
TTTensor tangent_component(const TangentVector& v, int i);
/// base + t * v as a TT tensor of rank <= 2r.
TTTensor move_along(const TangentVector& v, double t);

/// ||v||_W, accumulated component-wise (the components are W-orthogonal).
double tangent_weighted_norm(const TangentVector& v);

/// max_i max |L(X_i)^T (I (x) G_i^{1/2m}) L(T~_i)| over i < m.
double gauge_deviation(const TangentVector& v);

/// v evaluated at the observed indices of `at`.
std::vector<double> tangent_values_at(const TangentVector& v, const SparseObservations& at);

}  // namespace ttc
