#include "ttc/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <unordered_set>

#include "ttc/decomp.hpp"

namespace ttc {

namespace {

std::size_t as_size(Index i) { return static_cast<std::size_t>(i); }

// Evaluates the noise tensor E on the observed entries. Dense E is drawn in
// linearization order over the whole tensor; otherwise one draw per entry.
NoisyObservations noisy_from(const SparseObservations& clean, std::span<const Index> dims, double sigma,
                             std::uint64_t seed) {
  NoisyObservations out;
  const Index total = product(dims);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> e_on_omega(as_size(clean.size()));
  if (total <= kDenseNoiseLimit) {
    std::vector<double> e(as_size(total));
    double sq = 0.0;
    for (double& v : e) {
      v = normal(rng);
      sq += v * v;
    }
    out.noise_norm = std::sqrt(sq);
    std::vector<Index> strides(dims.size(), 1);
    for (std::size_t k = 1; k < dims.size(); ++k) strides[k] = strides[k - 1] * dims[k - 1];
    for (Index n = 0; n < clean.size(); ++n) {
      Index lin = 0;
      const auto idx = clean.index(n);
      for (std::size_t k = 0; k < dims.size(); ++k) lin += idx[k] * strides[k];
      e_on_omega[as_size(n)] = e[as_size(lin)];
    }
  } else {
    for (double& v : e_on_omega) v = normal(rng);
    out.noise_norm = std::sqrt(static_cast<double>(total));
    out.estimated = true;
  }
  out.delta = sigma == 0.0 ? 0.0 : sigma * std::sqrt(clean.squared_norm()) / out.noise_norm;
  std::vector<double> values(clean.values().begin(), clean.values().end());
  for (std::size_t n = 0; n < values.size(); ++n) values[n] += out.delta * e_on_omega[n];
  out.obs = clean.with_values(std::move(values));
  return out;
}

template <typename Source>
SparseObservations clean_values(const Source& source, const SparseObservations& obs);

template <>
SparseObservations clean_values(const TTTensor& source, const SparseObservations& obs) {
  std::vector<double> v(as_size(obs.size()));
  for (Index e = 0; e < obs.size(); ++e) v[as_size(e)] = source.value_at(obs.index(e));
  return obs.with_values(std::move(v));
}

template <>
SparseObservations clean_values(const DenseTensor& source, const SparseObservations& obs) {
  std::vector<double> v(as_size(obs.size()));
  for (Index e = 0; e < obs.size(); ++e) v[as_size(e)] = source.at(obs.index(e));
  return obs.with_values(std::move(v));
}

}  // namespace

Index manifold_dimension(std::span<const Index> dims, const RankVector& r) {
  if (r.size() + 1 != dims.size()) throw ShapeError("rank vector length must be order - 1");
  Index dim = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) dim += r.bond(k) * dims[k] * r.bond(k + 1);
  for (std::size_t k = 0; k < r.size(); ++k) dim -= r[k] * r[k];
  return dim;
}

Index os_to_n(std::span<const Index> dims, const RankVector& r, double os) {
  if (!(os > 0.0) || !std::isfinite(os)) throw DomainError("oversampling ratio must be positive");
  const double n = std::round(os * static_cast<double>(manifold_dimension(dims, r)));
  const double total = static_cast<double>(product(dims));
  return static_cast<Index>(std::clamp(n, 1.0, total));
}

TTTensor gen_synthetic_tt(std::span<const Index> dims, const RankVector& r, std::uint64_t seed) {
  r.check_feasible(dims);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Core> cores;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    Core c(r.bond(k), dims[k], r.bond(k + 1));
    for (double& v : c.data()) v = uniform(rng);
    cores.push_back(std::move(c));
  }
  return TTTensor(std::move(cores));
}

std::vector<Index> sample_indices(Index full_size, Index n, std::uint64_t seed, SamplingMode mode) {
  if (n < 0) throw DomainError("sample count must be non-negative");
  if (mode == SamplingMode::kWithoutReplacement && n > full_size) {
    throw DomainError("cannot draw " + std::to_string(n) + " distinct entries out of " +
                      std::to_string(full_size));
  }
  if (full_size <= 0 && n > 0) throw DomainError("cannot sample from an empty tensor");
  std::mt19937_64 rng(seed);
  std::vector<Index> out;
  out.reserve(as_size(n));
  if (mode == SamplingMode::kWithReplacement) {
    std::uniform_int_distribution<Index> pick(0, full_size - 1);
    for (Index k = 0; k < n; ++k) out.push_back(pick(rng));
  } else {
    // Floyd: one draw per selected element.
    std::unordered_set<Index> chosen;
    chosen.reserve(as_size(n));
    for (Index j = full_size - n; j < full_size; ++j) {
      const Index t = std::uniform_int_distribution<Index>(0, j)(rng);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    out.assign(chosen.begin(), chosen.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

SparseObservations sample_uniform(const TTTensor& source, Index n, std::uint64_t seed, SamplingMode mode) {
  const auto dims = source.dims();
  SparseObservations obs(dims, mode);
  obs.reserve(n);
  std::vector<Index> idx(dims.size());
  for (Index lin : sample_indices(source.full_size(), n, seed, mode)) {
    Index rest = lin;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      idx[k] = rest % dims[k];
      rest /= dims[k];
    }
    obs.add(idx, source.value_at(idx));
  }
  return obs;
}

SparseObservations sample_uniform(const DenseTensor& source, Index n, std::uint64_t seed, SamplingMode mode) {
  SparseObservations obs(source.dims(), mode);
  obs.reserve(n);
  std::vector<Index> idx(source.dims().size());
  for (Index lin : sample_indices(source.size(), n, seed, mode)) {
    source.multi_index(lin, idx);
    obs.add(idx, source[lin]);
  }
  return obs;
}

NoisyObservations add_noise(const TTTensor& truth, const SparseObservations& obs, double sigma,
                            std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError("noise level must be non-negative");
  if (truth.dims() != obs.dims()) throw ShapeError("truth and observations have different dims");
  return noisy_from(clean_values(truth, obs), obs.dims(), sigma, seed);
}

NoisyObservations add_noise(const DenseTensor& truth, const SparseObservations& obs, double sigma,
                            std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError("noise level must be non-negative");
  if (truth.dims() != obs.dims()) throw ShapeError("truth and observations have different dims");
  return noisy_from(clean_values(truth, obs), obs.dims(), sigma, seed);
}

double psnr(const DenseTensor& recovered, const DenseTensor& truth) {
  if (recovered.dims() != truth.dims()) throw ShapeError("psnr: dims differ");
  const double err = (recovered.vec() - truth.vec()).norm();
  const double ref = truth.vec().norm();
  if (err <= 1e-13 * ref) return std::numeric_limits<double>::infinity();
  const double peak = truth.vec().cwiseAbs().maxCoeff();
  return 10.0 * std::log10(static_cast<double>(truth.size()) * peak * peak / (err * err));
}

double psnr(const TTTensor& recovered, const DenseTensor& truth) {
  return psnr(to_dense(recovered), truth);
}

DenseTensor gen_smooth_tensor(std::span<const Index> dims, std::uint64_t seed, int terms) {
  if (terms < 1) throw DomainError("need at least one term");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  DenseTensor x(std::vector<Index>(dims.begin(), dims.end()));
  const std::size_t m = dims.size();
  std::vector<Index> idx(m);
  for (int t = 1; t <= terms; ++t) {
    const double amplitude = std::pow(static_cast<double>(t), -1.5);
    std::vector<Vector> profile;
    for (std::size_t k = 0; k < m; ++k) {
      const double centre = uniform(rng);
      const double width = 0.1 + 0.3 * uniform(rng);
      const double freq = 1.0 + 3.0 * uniform(rng);
      Vector f(dims[k]);
      for (Index i = 0; i < dims[k]; ++i) {
        const double s = (static_cast<double>(i) + 0.5) / static_cast<double>(dims[k]);
        const double z = (s - centre) / width;
        f(i) = std::exp(-z * z) * (1.0 + 0.5 * std::cos(freq * std::numbers::pi * s));
      }
      profile.push_back(std::move(f));
    }
    for (Index lin = 0; lin < x.size(); ++lin) {
      x.multi_index(lin, idx);
      double v = amplitude;
      for (std::size_t k = 0; k < m; ++k) v *= profile[k](idx[k]);
      x[lin] += v;
    }
  }
  const double lo = x.vec().minCoeff();
  const double hi = x.vec().maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  for (double& v : x.values()) v = (v - lo) / span;
  return x;
}

GridSearchResult grid_search_constant_step(const SparseObservations& obs, const RankVector& r,
                                           const SolverConfig& cfg, const Truth& truth,
                                           const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("step grid is empty");
  GridSearchResult out;
  for (double eta : grid) {
    SolverConfig c = cfg;
    c.step = StepRule::constant(eta);
    out.runs.push_back({eta, solve(obs, r, c, truth)});
  }
  bool have_converged = false;
  for (std::size_t k = 0; k < out.runs.size(); ++k) {
    const SolveResult& res = out.runs[k].result;
    const bool ok = res.status == SolveStatus::kConverged || res.status == SolveStatus::kStalled ||
                    res.status == SolveStatus::kZeroGradient;
    if (ok) {
      if (!have_converged || res.iterations < out.runs[out.best].result.iterations) out.best = k;
      have_converged = true;
    } else if (!have_converged) {
      const double f = res.log.back().objective;
      const double best_f = out.runs[out.best].result.log.back().objective;
      if (std::isfinite(f) && (!std::isfinite(best_f) || f < best_f)) out.best = k;
    }
  }
  return out;
}

}  // namespace ttc
