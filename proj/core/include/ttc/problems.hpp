#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ttc/observations.hpp"
#include "ttc/solver.hpp"
#include "ttc/tensor.hpp"

namespace ttc {

/// sum_k r_{k-1} d_k r_k - sum_k r_k^2, the dimension of the rank-r manifold.
Index manifold_dimension(std::span<const Index> dims, const RankVector& r);
/// round(os * manifold_dimension) clamped to [1, d*]; DomainError unless os > 0.
Index os_to_n(std::span<const Index> dims, const RankVector& r, double os);

/// Cores with i.i.d. Uniform[0, 1) entries drawn from mt19937_64(seed).
TTTensor gen_synthetic_tt(std::span<const Index> dims, const RankVector& r, std::uint64_t seed);

/// n uniformly drawn entries of the source, sorted by linear index.
/// Without replacement the indices are distinct (Floyd's algorithm).
SparseObservations sample_uniform(const TTTensor& source, Index n, std::uint64_t seed,
                                  SamplingMode mode = SamplingMode::kWithoutReplacement);
SparseObservations sample_uniform(const DenseTensor& source, Index n, std::uint64_t seed,
                                  SamplingMode mode = SamplingMode::kWithoutReplacement);
/// Linear indices only.
std::vector<Index> sample_indices(Index full_size, Index n, std::uint64_t seed, SamplingMode mode);

/// Tensors up to this size get a fully materialized noise tensor.
inline constexpr Index kDenseNoiseLimit = 1'000'000;

struct NoisyObservations {
  SparseObservations obs;
  /// delta = sigma ||P_Omega(T*)||_F / ||E||_F.
  double delta = 0.0;
  double noise_norm = 0.0;
  /// True when ||E||_F was replaced by its expectation sqrt(d*) because the
  /// tensor was too large to materialize E.
  bool estimated = false;
};

/// Observed values become T*(x) + delta E(x) with E i.i.d. standard normal.
NoisyObservations add_noise(const TTTensor& truth, const SparseObservations& obs, double sigma,
                            std::uint64_t seed);
NoisyObservations add_noise(const DenseTensor& truth, const SparseObservations& obs, double sigma,
                            std::uint64_t seed);

/// 10 log10(d* max|T*|^2 / ||T - T*||_F^2). +infinity when the error is at
/// most 1e-13 ||T*||_F.
double psnr(const DenseTensor& recovered, const DenseTensor& truth);
double psnr(const TTTensor& recovered, const DenseTensor& truth);

/// Image-like smooth tensor with values in [0, 1]: a sum of separable smooth
/// bumps with decaying amplitudes. Approximately, not exactly, low rank.
DenseTensor gen_smooth_tensor(std::span<const Index> dims, std::uint64_t seed, int terms = 12);

inline const std::vector<double> kConstantStepGrid = {0.5, 1.0, 2.0, 4.0, 8.0};

struct GridRun {
  double eta = 0.0;
  SolveResult result;
};

struct GridSearchResult {
  std::vector<GridRun> runs;
  /// Index into runs of the chosen step: the fewest iterations among
  /// converged runs, otherwise the smallest final objective.
  std::size_t best = 0;
  const GridRun& best_run() const { return runs[best]; }
};

/// Solves once per constant step in `grid` (cfg.step is overridden).
GridSearchResult grid_search_constant_step(const SparseObservations& obs, const RankVector& r,
                                           const SolverConfig& cfg, const Truth& truth = {},
                                           const std::vector<double>& grid = kConstantStepGrid);

}  // namespace ttc
