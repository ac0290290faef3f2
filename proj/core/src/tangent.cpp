#include "ttc/tangent.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ttc/decomp.hpp"

namespace ttc {

namespace {

std::size_t as_size(Index i) { return static_cast<std::size_t>(i); }

// L(U)^T diag(I (x) g) L(V): rows of L indexed j + r * x carry weight g(x).
Matrix weighted_left_gram(const Core& u, const Core& v, const Vector& g) {
  Matrix out = Matrix::Zero(u.right_rank(), v.right_rank());
  for (Index x = 0; x < u.mode_size(); ++x) {
    out.noalias() += g(x) * (u.slice(x).transpose() * v.slice(x));
  }
  return out;
}

void check_space_dims(const TangentSpace& space, const std::vector<Index>& dims) {
  if (space.base().dims() != dims) throw ShapeError("projection input dims differ from the base point");
}

void check_weights(const TangentSpace& space, const ModeWeights& w) {
  if (!(space.weights() == w)) {
    throw ContractViolation(
        "tangent space was orthogonalized under different weights than the ones supplied");
  }
}

// From the unprojected contractions Y_i (scaled space) to the variations X_i.
TangentVector finish_projection(std::shared_ptr<const TangentSpace> space, std::vector<Core> y) {
  const int m = space->order();
  std::vector<Core> variations;
  variations.reserve(as_size(m));
  for (int i = 0; i < m; ++i) {
    Core& yi = y[as_size(i)];
    Matrix hat = yi.left_unfolding();
    if (i + 1 < m) {
      const auto q = space->scaled_base().core(i).left_unfolding();
      hat -= q * (q.transpose() * hat);
      hat = space->solve_right_gram(i, hat);
    }
    Core a = core_from_left_unfold(hat, yi.left_rank(), yi.mode_size());
    variations.push_back(scale_core_mode(a, space->inverse_quarter_power(i)));
  }
  return TangentVector(std::move(space), std::move(variations));
}

}  // namespace

// ---------------------------------------------------------------------------
// TangentSpace

TangentSpace::TangentSpace(const TTTensor& point, ModeWeights weights) : weights_(std::move(weights)) {
  if (point.dims() != weights_.dims()) throw ShapeError("tangent space: weights/point dims differ");
  const int m = point.order();
  for (int i = 0; i < m; ++i) {
    quarter_.push_back(weights_.mode_power(i, 0.5));
    inverse_quarter_.push_back(weights_.mode_power(i, -0.5));
  }
  std::vector<Core> scaled;
  for (int i = 0; i < m; ++i) scaled.push_back(scale_core_mode(point.core(i), quarter_[as_size(i)]));
  scaled_ = left_orthogonalize(TTTensor(std::move(scaled)));
  std::vector<Core> tilde;
  for (int i = 0; i < m; ++i) {
    tilde.push_back(scale_core_mode(scaled_.core(i), inverse_quarter_[as_size(i)]));
  }
  base_ = TTTensor(std::move(tilde));
  build_caches();
}

TangentSpace TangentSpace::from_orthogonalized(TTTensor base, ModeWeights weights, double tol) {
  if (base.dims() != weights.dims()) throw ShapeError("tangent space: weights/point dims differ");
  TangentSpace space;
  space.weights_ = std::move(weights);
  const int m = base.order();
  for (int i = 0; i < m; ++i) {
    space.quarter_.push_back(space.weights_.mode_power(i, 0.5));
    space.inverse_quarter_.push_back(space.weights_.mode_power(i, -0.5));
  }
  std::vector<Core> scaled;
  for (int i = 0; i < m; ++i) scaled.push_back(scale_core_mode(base.core(i), space.quarter_[as_size(i)]));
  space.scaled_ = TTTensor(std::move(scaled));
  space.base_ = std::move(base);
  const double dev = space.gauge_gram_deviation();
  if (!(dev <= tol)) {
    throw ContractViolation("base is not new-left-orthogonal under the supplied weights (Gram deviation " +
                            std::to_string(dev) + ")");
  }
  space.build_caches();
  return space;
}

void TangentSpace::build_caches() {
  const int m = order();
  right_gram_.assign(as_size(m), Matrix());
  right_gram_factor_.assign(as_size(m), Eigen::LLT<Matrix>());
  jittered_.assign(as_size(m), false);
  right_gram_[as_size(m - 1)] = Matrix::Ones(1, 1);
  for (int i = m - 2; i >= 0; --i) {
    const Core& next = scaled_.core(i + 1);
    const Matrix& inner_gram = right_gram_[as_size(i + 1)];
    Matrix g = Matrix::Zero(next.left_rank(), next.left_rank());
    for (Index x = 0; x < next.mode_size(); ++x) {
      g.noalias() += next.slice(x) * inner_gram * next.slice(x).transpose();
    }
    right_gram_[as_size(i)] = std::move(g);
  }
  for (int i = 0; i < m; ++i) {
    Matrix g = right_gram_[as_size(i)];
    Eigen::LLT<Matrix> llt(g);
    const double eps = std::numeric_limits<double>::epsilon();
    if (llt.info() != Eigen::Success || !(llt.rcond() > eps)) {
      const double jitter = 1e-14 * g.trace() / static_cast<double>(g.rows());
      g.diagonal().array() += jitter > 0.0 ? jitter : 1e-300;
      llt.compute(g);
      jittered_[as_size(i)] = true;
    }
    right_gram_factor_[as_size(i)] = std::move(llt);
  }
}

Matrix TangentSpace::solve_right_gram(int i, const Matrix& m) const {
  // m G^{-1} = (G^{-1} m^T)^T for symmetric G.
  return right_gram_factor_[as_size(i)].solve(m.transpose()).transpose();
}

double TangentSpace::gauge_gram_deviation() const {
  double dev = 0.0;
  for (int i = 0; i + 1 < order(); ++i) {
    const Core& c = base_.core(i);
    Matrix g = weighted_left_gram(c, c, weights_.mode_power(i, 1.0));
    g -= Matrix::Identity(g.rows(), g.cols());
    dev = std::max(dev, g.cwiseAbs().maxCoeff());
  }
  return dev;
}

TTTensor new_left_orthogonal(const TTTensor& t, const ModeWeights& w) {
  return TangentSpace(t, w).base();
}

// ---------------------------------------------------------------------------
// TangentVector

TangentVector::TangentVector(std::shared_ptr<const TangentSpace> space, std::vector<Core> variations)
    : space_(std::move(space)), variations_(std::move(variations)) {
  if (!space_) throw ContractViolation("tangent vector without a tangent space");
  if (static_cast<int>(variations_.size()) != space_->order()) {
    throw ShapeError("tangent vector needs one variation per core");
  }
  for (int i = 0; i < space_->order(); ++i) {
    const Core& b = space_->base().core(i);
    const Core& x = variations_[as_size(i)];
    if (b.left_rank() != x.left_rank() || b.mode_size() != x.mode_size() ||
        b.right_rank() != x.right_rank()) {
      throw ShapeError("variation " + std::to_string(i) + " has the wrong shape");
    }
  }
}

TangentVector TangentVector::scaled(double s) const {
  std::vector<Core> v = variations_;
  for (auto& c : v) {
    for (double& x : c.data()) x *= s;
  }
  return TangentVector(space_, std::move(v));
}

// ---------------------------------------------------------------------------
// Projection

TangentVector project_tangent(std::shared_ptr<const TangentSpace> space, const SparseObservations& a) {
  check_space_dims(*space, a.dims());
  const TTTensor& hat = space->scaled_base();
  const int m = hat.order();
  const SparseObservations scaled = apply_weight_power(a, space->weights(), 0.5);

  std::vector<Core> y;
  for (int i = 0; i < m; ++i) {
    const Core& c = hat.core(i);
    y.emplace_back(c.left_rank(), c.mode_size(), c.right_rank());
  }
  std::vector<Eigen::RowVectorXd> left(as_size(m + 1));
  std::vector<Vector> right(as_size(m + 1));
  left[0] = Eigen::RowVectorXd::Ones(1);
  right[as_size(m)] = Vector::Ones(1);
  for (Index e = 0; e < scaled.size(); ++e) {
    const double value = scaled.value(e);
    if (value == 0.0) continue;
    const auto idx = scaled.index(e);
    for (int i = 0; i < m; ++i) {
      left[as_size(i + 1)].noalias() = left[as_size(i)] * hat.core(i).slice(idx[as_size(i)]);
    }
    for (int i = m - 1; i >= 0; --i) {
      right[as_size(i)].noalias() = hat.core(i).slice(idx[as_size(i)]) * right[as_size(i + 1)];
    }
    for (int i = 0; i < m; ++i) {
      y[as_size(i)].slice(idx[as_size(i)]).noalias() +=
          value * left[as_size(i)].transpose() * right[as_size(i + 1)].transpose();
    }
  }
  return finish_projection(std::move(space), std::move(y));
}

TangentVector project_tangent(std::shared_ptr<const TangentSpace> space, const DenseTensor& a) {
  check_space_dims(*space, a.dims());
  const TTTensor& hat = space->scaled_base();
  const int m = hat.order();
  const DenseTensor scaled = apply_weight_power(a, space->weights(), 0.5);
  const auto& dims = scaled.dims();

  std::vector<Core> y;
  for (int i = 0; i < m; ++i) {
    const Core& c = hat.core(i);
    const Matrix lp = left_part(hat, i);           // D_<i x r_{i-1}
    const Matrix rp = right_part(hat, i + 2);      // r_i x D_>i
    const Index rows = product(dims, 0, as_size(i) + 1);
    ConstMatrixMap sep(scaled.values().data(), rows, scaled.size() / rows);
    const Matrix contracted = sep * rp.transpose();  // D_<=i x r_i
    ConstMatrixMap regrouped(contracted.data(), lp.rows(), c.mode_size() * c.right_rank());
    y.push_back(core_from_right_unfold(lp.transpose() * regrouped, c.mode_size(), c.right_rank()));
  }
  return finish_projection(std::move(space), std::move(y));
}

TangentVector project_tangent(std::shared_ptr<const TangentSpace> space, const ModeWeights& w,
                              const SparseObservations& a) {
  check_weights(*space, w);
  return project_tangent(std::move(space), a);
}

TangentVector project_tangent(std::shared_ptr<const TangentSpace> space, const ModeWeights& w,
                              const DenseTensor& a) {
  check_weights(*space, w);
  return project_tangent(std::move(space), a);
}

// ---------------------------------------------------------------------------
// Tangent vector to TT

namespace {

// Block TT for sum_i [T~_1, .., V_i, .., T~_m] with V_i = variations.
TTTensor block_sum(const TTTensor& base, const std::vector<Core>& variations) {
  const int m = base.order();
  if (m == 1) return TTTensor({variations[0]});
  std::vector<Core> cores;
  cores.reserve(as_size(m));
  for (int k = 0; k < m; ++k) {
    const Core& t = base.core(k);
    const Core& x = variations[as_size(k)];
    const Index rl = t.left_rank();
    const Index rr = t.right_rank();
    const Index d = t.mode_size();
    if (k == 0) {
      Core c(1, d, 2 * rr);
      for (Index s = 0; s < d; ++s) {
        c.slice(s).leftCols(rr) = t.slice(s);
        c.slice(s).rightCols(rr) = x.slice(s);
      }
      cores.push_back(std::move(c));
    } else if (k == m - 1) {
      Core c(2 * rl, d, 1);
      for (Index s = 0; s < d; ++s) {
        c.slice(s).topRows(rl) = x.slice(s);
        c.slice(s).bottomRows(rl) = t.slice(s);
      }
      cores.push_back(std::move(c));
    } else {
      Core c(2 * rl, d, 2 * rr);
      for (Index s = 0; s < d; ++s) {
        auto blk = c.slice(s);
        blk.topLeftCorner(rl, rr) = t.slice(s);
        blk.topRightCorner(rl, rr) = x.slice(s);
        blk.bottomRightCorner(rl, rr) = t.slice(s);
      }
      cores.push_back(std::move(c));
    }
  }
  return TTTensor(std::move(cores));
}

}  // namespace

TTTensor tangent_to_full(const TangentVector& v) {
  return block_sum(v.space().base(), v.variations());
}

TTTensor tangent_component(const TangentVector& v, int i) {
  std::vector<Core> cores = v.space().base().cores();
  cores[as_size(i)] = v.variation(i);
  return TTTensor(std::move(cores));
}

TTTensor move_along(const TangentVector& v, double t) {
  const TTTensor& base = v.space().base();
  const int m = base.order();
  std::vector<Core> variations = v.variations();
  for (auto& c : variations) {
    for (double& x : c.data()) x *= t;
  }
  // base = [T~_1, .., T~_m] is absorbed into the last component.
  Core& last = variations[as_size(m - 1)];
  const auto b = base.core(m - 1).data();
  auto data = last.data();
  for (std::size_t k = 0; k < data.size(); ++k) data[k] += b[k];
  return block_sum(base, variations);
}

double tangent_weighted_norm(const TangentVector& v) {
  const TangentSpace& space = v.space();
  double total = 0.0;
  for (int i = 0; i < space.order(); ++i) {
    const Core hat = scale_core_mode(v.variation(i), space.quarter_power(i));
    const auto l = hat.left_unfolding();
    total += (l * space.right_gram(i)).cwiseProduct(l).sum();
  }
  return std::sqrt(std::max(total, 0.0));
}

double gauge_deviation(const TangentVector& v) {
  const TangentSpace& space = v.space();
  double dev = 0.0;
  for (int i = 0; i + 1 < space.order(); ++i) {
    const Matrix g =
        weighted_left_gram(v.variation(i), space.base().core(i), space.weights().mode_power(i, 1.0));
    dev = std::max(dev, g.cwiseAbs().maxCoeff());
  }
  return dev;
}

std::vector<double> tangent_values_at(const TangentVector& v, const SparseObservations& at) {
  const TTTensor full = tangent_to_full(v);
  std::vector<double> out(as_size(at.size()));
  for (Index e = 0; e < at.size(); ++e) out[as_size(e)] = full.value_at(at.index(e));
  return out;
}

}  // namespace ttc
