#include <benchmark/benchmark.h>

#include <memory>

#include "ttc/decomp.hpp"
#include "ttc/metric.hpp"
#include "ttc/problems.hpp"
#include "ttc/solver.hpp"
#include "ttc/tangent.hpp"

using namespace ttc;

namespace {

struct Instance {
  std::vector<Index> dims;
  RankVector r;
  TTTensor truth;
  SparseObservations obs;
};

Instance make_instance(Index d, Index rank, double os) {
  Instance in;
  in.dims = {d, d, d};
  in.r = RankVector({rank, rank});
  in.truth = gen_synthetic_tt(in.dims, in.r, 1);
  in.obs = sample_uniform(in.truth, os_to_n(in.dims, in.r, os), 2);
  return in;
}

// Residual at a perturbed point, its weights and the tangent space there.
struct ProjectionSetup {
  SparseObservations g;
  ModeWeights w;
  std::shared_ptr<const TangentSpace> space;
};

ProjectionSetup make_projection(const Instance& in) {
  const TTTensor point = gen_synthetic_tt(in.dims, in.r, 3);
  SparseObservations g = residual(point, in.obs);
  ModeWeights w = build_weights(g);
  return {g, w, std::make_shared<const TangentSpace>(point, w)};
}

void BM_ProjectSparse(benchmark::State& state) {
  const Instance in = make_instance(state.range(0), 3, 10.0);
  const ProjectionSetup p = make_projection(in);
  for (auto _ : state) benchmark::DoNotOptimize(project_tangent(p.space, p.g));
  state.counters["observed"] = static_cast<double>(p.g.size());
}

void BM_ProjectDense(benchmark::State& state) {
  const Instance in = make_instance(state.range(0), 3, 10.0);
  const ProjectionSetup p = make_projection(in);
  const DenseTensor dense = p.g.densify();
  for (auto _ : state) benchmark::DoNotOptimize(project_tangent(p.space, dense));
}

void retract_bench(benchmark::State& state, RetractionPath path) {
  const Instance in = make_instance(state.range(0), 4, 10.0);
  const TTTensor step = tt_add(in.truth, tt_scale(gen_synthetic_tt(in.dims, in.r, 4), -0.1));
  for (auto _ : state) benchmark::DoNotOptimize(retract(step, in.r, path));
}

void BM_RetractStructured(benchmark::State& state) { retract_bench(state, RetractionPath::kStructured); }
void BM_RetractDense(benchmark::State& state) { retract_bench(state, RetractionPath::kDense); }

void solver_iteration(benchmark::State& state, Algorithm algo) {
  const Instance in = make_instance(state.range(0), 3, 10.0);
  SolverConfig cfg;
  cfg.algorithm = algo;
  cfg.step = StepRule::constant(2.0);
  cfg.max_iters = 1;
  cfg.rel_tol = 1e-300;
  cfg.iterate_change_tol = 1e-300;
  const TTTensor init = spectral_init(in.obs, in.r);
  for (auto _ : state) benchmark::DoNotOptimize(solve_from(init, in.obs, in.r, cfg));
}

void BM_IterationRgd(benchmark::State& state) { solver_iteration(state, Algorithm::kRgd); }
void BM_IterationPrgd(benchmark::State& state) { solver_iteration(state, Algorithm::kPrgd); }

}  // namespace

BENCHMARK(BM_ProjectSparse)->Arg(20)->Arg(40)->Arg(60)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ProjectDense)->Arg(20)->Arg(40)->Arg(60)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RetractStructured)->Arg(20)->Arg(40)->Arg(60)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RetractDense)->Arg(20)->Arg(40)->Arg(60)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_IterationRgd)->Arg(30)->Arg(60)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IterationPrgd)->Arg(30)->Arg(60)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
