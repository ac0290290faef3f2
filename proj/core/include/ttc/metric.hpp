#pragma once

#include <span>
#include <vector>

#include "ttc/observations.hpp"
#include "ttc/tensor.hpp"

namespace ttc {

/// How the regularizer epsilon of the weight operator is chosen.
enum class EpsilonRule {
  kVeeSquared,         ///< epsilon = ||G||_vee^2 (zero gradient is a DomainError)
  kFixed,              ///< epsilon = value
  kFlooredVeeSquared,  ///< epsilon = max(||G||_vee^2, value), value defaults to 1e-30
};

struct EpsilonPolicy {
  EpsilonRule rule = EpsilonRule::kVeeSquared;
  double value = 1e-30;
};

/// Per-mode diagonal weights G_i = epsilon I + diag(M_i(G) M_i(G)^T) of the
/// data-driven metric <X, Y>_W = <X x_1 G_1^{1/2m} ... x_m G_m^{1/2m}, Y>.
/// Stored as diagonals only.
class ModeWeights {
 public:
  ModeWeights() = default;
  ModeWeights(std::vector<Vector> diag, double epsilon);
  /// G = 0, epsilon = 1: every diagonal entry is 1 and W is the identity.
  static ModeWeights identity(std::span<const Index> dims);

  int order() const { return static_cast<int>(diag_.size()); }
  double epsilon() const { return epsilon_; }
  const Vector& diag(int i) const { return diag_[static_cast<std::size_t>(i)]; }
  std::vector<Index> dims() const;

  /// diag_i^{p / (2m)} computed entrywise as exp(p log(g) / 2m).
  Vector mode_power(int i, double p) const;
  /// prod_i diag_i(x_i)^{p / (2m)} at a 0-based multi-index.
  double entry_factor(std::span<const Index> index, double p) const;

  friend bool operator==(const ModeWeights&, const ModeWeights&);

 private:
  std::vector<Vector> diag_;
  double epsilon_ = 1.0;
};

/// max over modes and slices of ||M_i(G)(k, :)||_2. Zero for empty G.
double vee_norm(const SparseObservations& g);

ModeWeights build_weights(const SparseObservations& g, EpsilonPolicy policy = {});

DenseTensor apply_weight_power(const DenseTensor& x, const ModeWeights& w, double power);
SparseObservations apply_weight_power(const SparseObservations& x, const ModeWeights& w,
                                      double power);
/// Core i scaled along its mode index by diag_i^{p/(2m)}; same ranks.
TTTensor apply_weight_power_tt(const TTTensor& t, const ModeWeights& w, double power);
/// Scales a single core along its mode index by diag_i^{p/(2m)}.
Core scale_core_mode(const Core& c, const Vector& factors);

double weighted_inner(const DenseTensor& x, const DenseTensor& y, const ModeWeights& w);
double weighted_norm(const DenseTensor& x, const ModeWeights& w);

}  // namespace ttc
