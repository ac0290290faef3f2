#include "ttc/metric.hpp"

#include <cmath>
#include <string>

namespace ttc {

namespace {

std::size_t as_size(Index i) { return static_cast<std::size_t>(i); }

void check_dims(const std::vector<Index>& a, const std::vector<Index>& b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": dims do not match the weights");
}

}  // namespace

ModeWeights::ModeWeights(std::vector<Vector> diag, double epsilon)
    : diag_(std::move(diag)), epsilon_(epsilon) {
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) {
    throw DomainError("weight regularizer epsilon must be positive and finite");
  }
  for (const auto& d : diag_) {
    for (Index k = 0; k < d.size(); ++k) {
      if (!(d(k) > 0.0) || !std::isfinite(d(k))) {
        throw DomainError("weight diagonals must be positive and finite");
      }
    }
  }
}

ModeWeights ModeWeights::identity(std::span<const Index> dims) {
  std::vector<Vector> diag;
  for (Index d : dims) diag.push_back(Vector::Ones(d));
  return ModeWeights(std::move(diag), 1.0);
}

std::vector<Index> ModeWeights::dims() const {
  std::vector<Index> out;
  for (const auto& d : diag_) out.push_back(d.size());
  return out;
}

Vector ModeWeights::mode_power(int i, double p) const {
  const double scale = p / (2.0 * order());
  const Vector& d = diag(i);
  Vector out(d.size());
  for (Index k = 0; k < d.size(); ++k) out(k) = std::exp(scale * std::log(d(k)));
  return out;
}

double ModeWeights::entry_factor(std::span<const Index> index, double p) const {
  double log_sum = 0.0;
  for (std::size_t k = 0; k < diag_.size(); ++k) log_sum += std::log(diag_[k](index[k]));
  return std::exp(p * log_sum / (2.0 * order()));
}

bool operator==(const ModeWeights& a, const ModeWeights& b) {
  if (a.epsilon_ != b.epsilon_ || a.diag_.size() != b.diag_.size()) return false;
  for (std::size_t k = 0; k < a.diag_.size(); ++k) {
    if (a.diag_[k].size() != b.diag_[k].size() || a.diag_[k] != b.diag_[k]) return false;
  }
  return true;
}

double vee_norm(const SparseObservations& g) {
  if (g.empty()) return 0.0;
  const SparseObservations merged =
      g.mode() == SamplingMode::kWithReplacement ? g.coalesced() : g;
  double best = 0.0;
  for (int i = 0; i < merged.order(); ++i) {
    Vector slice_sq = Vector::Zero(merged.dims()[as_size(i)]);
    for (Index e = 0; e < merged.size(); ++e) {
      const double v = merged.value(e);
      slice_sq(merged.index(e)[as_size(i)]) += v * v;
    }
    best = std::max(best, slice_sq.maxCoeff());
  }
  return std::sqrt(best);
}

ModeWeights build_weights(const SparseObservations& g, EpsilonPolicy policy) {
  const SparseObservations merged =
      g.mode() == SamplingMode::kWithReplacement ? g.coalesced() : g;
  std::vector<Vector> slice_sq;
  double vee_sq = 0.0;
  for (int i = 0; i < merged.order(); ++i) {
    Vector s = Vector::Zero(merged.dims()[as_size(i)]);
    for (Index e = 0; e < merged.size(); ++e) {
      const double v = merged.value(e);
      s(merged.index(e)[as_size(i)]) += v * v;
    }
    vee_sq = std::max(vee_sq, s.size() > 0 ? s.maxCoeff() : 0.0);
    slice_sq.push_back(std::move(s));
  }
  double epsilon = 0.0;
  switch (policy.rule) {
    case EpsilonRule::kVeeSquared:
      epsilon = vee_sq;
      if (!(epsilon > 0.0)) {
        throw DomainError("epsilon = ||G||_vee^2 is zero; the gradient vanishes");
      }
      break;
    case EpsilonRule::kFixed:
      epsilon = policy.value;
      break;
    case EpsilonRule::kFlooredVeeSquared:
      epsilon = std::max(vee_sq, policy.value);
      break;
  }
  for (auto& s : slice_sq) s.array() += epsilon;
  return ModeWeights(std::move(slice_sq), epsilon);
}

DenseTensor apply_weight_power(const DenseTensor& x, const ModeWeights& w, double power) {
  check_dims(x.dims(), w.dims(), "apply_weight_power");
  DenseTensor out = x;
  if (power == 0.0) return out;
  const auto& dims = x.dims();
  for (int i = 0; i < x.order(); ++i) {
    const Vector f = w.mode_power(i, power);
    const Index before = product(dims, 0, as_size(i));
    const Index di = dims[as_size(i)];
    const Index after = product(dims, as_size(i) + 1, dims.size());
    for (Index c = 0; c < after; ++c) {
      for (Index k = 0; k < di; ++k) {
        double* block = out.values().data() + before * (k + di * c);
        for (Index a = 0; a < before; ++a) block[a] *= f(k);
      }
    }
  }
  return out;
}

SparseObservations apply_weight_power(const SparseObservations& x, const ModeWeights& w,
                                      double power) {
  check_dims(x.dims(), w.dims(), "apply_weight_power");
  std::vector<Vector> factors;
  for (int i = 0; i < x.order(); ++i) factors.push_back(w.mode_power(i, power));
  std::vector<double> values(x.values().begin(), x.values().end());
  for (Index e = 0; e < x.size(); ++e) {
    const auto idx = x.index(e);
    double f = 1.0;
    for (std::size_t k = 0; k < idx.size(); ++k) f *= factors[k](idx[k]);
    values[as_size(e)] *= f;
  }
  return x.with_values(std::move(values));
}

Core scale_core_mode(const Core& c, const Vector& factors) {
  if (factors.size() != c.mode_size()) throw ShapeError("scale_core_mode: size mismatch");
  Core out = c;
  for (Index x = 0; x < c.mode_size(); ++x) out.slice(x) *= factors(x);
  return out;
}

TTTensor apply_weight_power_tt(const TTTensor& t, const ModeWeights& w, double power) {
  check_dims(t.dims(), w.dims(), "apply_weight_power_tt");
  std::vector<Core> cores;
  cores.reserve(t.cores().size());
  for (int i = 0; i < t.order(); ++i) cores.push_back(scale_core_mode(t.core(i), w.mode_power(i, power)));
  return TTTensor(std::move(cores));
}

double weighted_inner(const DenseTensor& x, const DenseTensor& y, const ModeWeights& w) {
  if (x.dims() != y.dims()) throw ShapeError("weighted_inner: dims differ");
  return inner(apply_weight_power(x, w, 1.0), y);
}

double weighted_norm(const DenseTensor& x, const ModeWeights& w) {
  return fro_norm(apply_weight_power(x, w, 0.5));
}

}  // namespace ttc
