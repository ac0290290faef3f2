#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "test_support.hpp"
#include "ttc/problems.hpp"
#include "ttc/solver.hpp"

using namespace ttc;
using ttc::testing::random_dense;
using ttc::testing::random_tt;
using ttc::testing::rel_diff;

namespace {

SparseObservations full_observation(const TTTensor& t) {
  return sample_uniform(t, t.full_size(), 0);
}

// f(T + s V) on Omega for a dense direction V.
double objective_along(const TTTensor& t, const DenseTensor& dir, double s, const SparseObservations& obs) {
  const DenseTensor base = to_dense(t);
  double f = 0.0;
  for (Index e = 0; e < obs.size(); ++e) {
    const Index lin = base.linear_index(obs.index(e));
    const double r = base[lin] + s * dir[lin] - obs.value(e);
    f += 0.5 * r * r;
  }
  return f;
}

struct SmallInstance {
  TTTensor truth;
  TTTensor point;
  SparseObservations obs;
};

SmallInstance small_instance(std::uint64_t seed) {
  const std::vector<Index> dims{4, 5, 4};
  SmallInstance s{random_tt(dims, {2, 2}, seed), random_tt(dims, {2, 2}, seed + 1), {}};
  s.obs = sample_uniform(s.truth, 40, seed + 2);
  return s;
}

}  // namespace

TEST(Residual, ExactFitIsZero) {
  const TTTensor t = random_tt({3, 4, 3}, {2, 2}, 1);
  const SparseObservations obs = sample_uniform(t, 12, 2);
  const SparseObservations r = residual(t, obs);
  EXPECT_EQ(r.size(), 12);
  for (double v : r.values()) EXPECT_NEAR(v, 0.0, 1e-14);
  EXPECT_NEAR(objective(r), 0.0, 1e-26);
}

TEST(Residual, EmptyObservations) {
  const TTTensor t = random_tt({3, 4, 3}, {2, 2}, 3);
  const SparseObservations r = residual(t, SparseObservations(t.dims()));
  EXPECT_EQ(r.size(), 0);
  EXPECT_EQ(objective(r), 0.0);
}

TEST(Residual, MatchesDenseMaskOracle) {
  const TTTensor t = random_tt({3, 4, 3}, {2, 2}, 4);
  const DenseTensor truth = random_dense({3, 4, 3}, 5);
  const SparseObservations obs = sample_uniform(truth, 15, 6);
  const DenseTensor td = to_dense(t);
  const DenseTensor r = residual(t, obs).densify();
  double f = 0.0;
  for (Index lin = 0; lin < td.size(); ++lin) {
    bool observed = false;
    for (Index e = 0; e < obs.size(); ++e) observed |= td.linear_index(obs.index(e)) == lin;
    const double expected = observed ? td[lin] - truth[lin] : 0.0;
    EXPECT_NEAR(r[lin], expected, 1e-13);
    f += 0.5 * expected * expected;
  }
  EXPECT_NEAR(objective(residual(t, obs)), f, 1e-12 * f);
  EXPECT_THROW(residual(random_tt({3, 4, 4}, {2, 2}, 7), obs), ShapeError);
}

TEST(SpectralInit, FullObservationIsExact) {
  const TTTensor t = random_tt({4, 5, 4}, {2, 3}, 8);
  const TTTensor init = spectral_init(full_observation(t), t.ranks());
  EXPECT_LE(tt_distance(init, t), 1e-10 * tt_norm(t));
}

TEST(SpectralInit, HalfObservedRankOne) {
  const std::vector<Index> dims{4, 4, 4};
  const TTTensor t = gen_synthetic_tt(dims, RankVector({1, 1}), 9);
  const SparseObservations obs = sample_uniform(t, 32, 10);
  const TTTensor init = spectral_init(obs, RankVector({1, 1}));
  EXPECT_EQ(init.dims(), dims);
  EXPECT_EQ(init.ranks(), RankVector({1, 1}));
  EXPECT_GT(tt_norm(init), 0.0);
}

TEST(SpectralInit, EmptyGivesZeroAndWarning) {
  std::vector<std::string> warnings;
  const TTTensor init = spectral_init(SparseObservations({3, 3, 3}), RankVector({2, 2}), &warnings);
  EXPECT_EQ(tt_norm(init), 0.0);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_THROW(spectral_init(SparseObservations({2, 2, 2}), RankVector({3, 2})), DomainError);
}

TEST(AdaptiveStep, FullyObservedIsOne) {
  const TTTensor truth = random_tt({3, 4, 3}, {2, 2}, 11);
  const TTTensor t = random_tt({3, 4, 3}, {2, 2}, 12);
  const SparseObservations obs = full_observation(truth);
  const ModeWeights id = ModeWeights::identity(t.dims());
  const TangentVector v = project_tangent(std::make_shared<const TangentSpace>(t, id), residual(t, obs));
  ASSERT_TRUE(rgd_adaptive_step(v, obs).has_value());
  EXPECT_NEAR(*rgd_adaptive_step(v, obs), 1.0, 1e-12);
}

TEST(AdaptiveStep, HandInstanceScalarMinimizer) {
  // 2x2x2 instance: f(s) = 1/2 sum_Omega (T + s V - T*)^2 is minimized at
  // s* = -<P_Omega(T - T*), V> / ||P_Omega V||^2; the step is -s*.
  const std::vector<Index> dims{2, 2, 2};
  const TTTensor truth = random_tt(dims, {1, 1}, 13);
  const TTTensor t = random_tt(dims, {1, 1}, 14);
  SparseObservations obs(dims);
  for (const auto& idx : std::vector<std::vector<Index>>{{0, 0, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 0}, {1, 1, 1}}) {
    obs.add(idx, truth.value_at(idx));
  }
  const SparseObservations g = residual(t, obs);
  const TangentVector v =
      project_tangent(std::make_shared<const TangentSpace>(t, ModeWeights::identity(dims)), g);
  const DenseTensor vd = to_dense(tangent_to_full(v));
  double num = 0.0;
  double den = 0.0;
  for (Index e = 0; e < obs.size(); ++e) {
    const double ve = vd.at(obs.index(e));
    num += g.value(e) * ve;
    den += ve * ve;
  }
  ASSERT_TRUE(rgd_adaptive_step(v, obs).has_value());
  EXPECT_NEAR(*rgd_adaptive_step(v, obs), num / den, 1e-12 * num / den);
}

TEST(AdaptiveStep, ZeroGradientIsDone) {
  const TTTensor t = random_tt({3, 4, 3}, {2, 2}, 15);
  const SparseObservations obs = sample_uniform(t, 10, 16);
  const SparseObservations g = residual(t, obs).with_values(std::vector<double>(10, 0.0));
  const ModeWeights id = ModeWeights::identity(t.dims());
  const TangentVector v = project_tangent(std::make_shared<const TangentSpace>(t, id), g);
  EXPECT_FALSE(rgd_adaptive_step(v, obs).has_value());
  EXPECT_FALSE(prgd_adaptive_step(v, id, obs).has_value());
}

TEST(AdaptiveStep, PrgdWithUnitWeightsReducesToRgd) {
  const TTTensor truth = random_tt({3, 4, 3}, {2, 2}, 17);
  const TTTensor t = random_tt({3, 4, 3}, {2, 2}, 18);
  const SparseObservations obs = full_observation(truth);
  const SparseObservations g = residual(t, obs);
  const ModeWeights unit = build_weights(g.with_values(std::vector<double>(static_cast<std::size_t>(g.size()), 0.0)),
                                         {EpsilonRule::kFixed, 1.0});
  const TangentVector vp = project_tangent(std::make_shared<const TangentSpace>(t, unit),
                                           apply_weight_power(g, unit, -1.0));
  const ModeWeights id = ModeWeights::identity(t.dims());
  const TangentVector vr = project_tangent(std::make_shared<const TangentSpace>(t, id), g);
  EXPECT_NEAR(*prgd_adaptive_step(vp, unit, obs), *rgd_adaptive_step(vr, obs), 1e-12);
  EXPECT_THROW(prgd_adaptive_step(vp, build_weights(g), obs), ContractViolation);
}

TEST(Property, AdaptiveStepFirstOrderOptimality) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SmallInstance s = small_instance(100 + 10 * seed);
    const SparseObservations g = residual(s.point, s.obs);
    for (Algorithm algo : {Algorithm::kRgd, Algorithm::kPrgd}) {
      const ModeWeights w = algo == Algorithm::kPrgd ? build_weights(g) : ModeWeights::identity(g.dims());
      const SparseObservations dir = algo == Algorithm::kPrgd ? apply_weight_power(g, w, -1.0) : g;
      const TangentVector v = project_tangent(std::make_shared<const TangentSpace>(s.point, w), dir);
      const double alpha = *prgd_adaptive_step(v, w, s.obs);
      const DenseTensor vd = to_dense(tangent_to_full(v));
      const double h = 1e-4 * alpha;
      const double deriv = (objective_along(s.point, vd, -alpha + h, s.obs) -
                            objective_along(s.point, vd, -alpha - h, s.obs)) /
                           (2.0 * h);
      EXPECT_LE(std::abs(deriv) * alpha, 1e-8 * objective(g)) << "seed " << seed;
    }
  }
}

TEST(TheoryStep, Formula) {
  const std::vector<Index> dims{2, 2};
  SparseObservations zero(dims);
  EXPECT_NEAR(theory_step(build_weights(zero, {EpsilonRule::kFixed, 1.0}), 0.5), 2.002, 1e-15);
  EXPECT_NEAR(theory_step(build_weights(zero, {EpsilonRule::kFixed, 4.0}), 1.0), 2.002, 1e-15);
  EXPECT_THROW(theory_step(ModeWeights::identity(dims), 0.0), DomainError);
  EXPECT_THROW(theory_step(ModeWeights::identity(dims), 1.5), DomainError);
}

TEST(TheoryStep, DefaultEpsilonRule) {
  const SmallInstance s = small_instance(20);
  const SparseObservations g = residual(s.point, s.obs);
  const double p = s.obs.sampling_fraction();
  EXPECT_NEAR(theory_step(build_weights(g), p), 1.001 * vee_norm(g) / p, 1e-12 * vee_norm(g) / p);
}

TEST(ScheduledStep, ConstantScalesWithEpsilon) {
  const std::vector<Index> dims{2, 2};
  SparseObservations zero(dims);
  EXPECT_EQ(scheduled_step(StepRule::constant(0.7), ModeWeights::identity(dims), 0.3), 0.7);
  EXPECT_NEAR(scheduled_step(StepRule::constant(0.7), build_weights(zero, {EpsilonRule::kFixed, 9.0}), 0.3), 2.1,
              1e-15);
  EXPECT_THROW(scheduled_step(StepRule::adaptive(), ModeWeights::identity(dims), 0.3), DomainError);
}

TEST(Trim, Examples) {
  const DenseTensor x(std::vector<Index>{3}, {0.7, -0.7, 0.3});
  EXPECT_EQ(trim(x, 0.5), DenseTensor(std::vector<Index>{3}, {0.5, -0.5, 0.3}));
  EXPECT_EQ(trim(x, std::numeric_limits<double>::infinity()), x);
  EXPECT_EQ(trim(x, 0.0).vec().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Property, TrimPostconditions) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TTTensor t = random_tt({4, 5, 4}, {2, 3}, 30 + seed);
    const double zeta = trim_threshold(t, 2.0);
    EXPECT_NEAR(zeta, 10.0 * fro_norm(to_dense(t)) / (9.0 * std::sqrt(80.0)) * 2.0, 1e-12 * zeta);
    const DenseTensor trimmed = to_dense(trim(t, zeta));
    const DenseTensor dense = to_dense(t);
    EXPECT_LE(trimmed.vec().cwiseAbs().maxCoeff(), zeta * (1.0 + 1e-12));
    for (Index k = 0; k < dense.size(); ++k) {
      if (std::abs(dense[k]) < zeta) EXPECT_NEAR(trimmed[k], dense[k], 1e-10 * zeta);
      else EXPECT_NEAR(trimmed[k], std::copysign(zeta, dense[k]), 1e-10 * zeta);
    }
  }
}

TEST(StepRule, ParseAndPrint) {
  EXPECT_EQ(StepRule::parse("adaptive").kind, StepRule::Kind::kAdaptive);
  EXPECT_EQ(StepRule::parse("theory").value, 1.001);
  EXPECT_EQ(StepRule::parse("theory=2").value, 2.0);
  EXPECT_EQ(StepRule::parse("constant").value, 1.0);
  EXPECT_EQ(StepRule::parse("constant=0.5").value, 0.5);
  EXPECT_EQ(StepRule::parse("4").kind, StepRule::Kind::kConstant);
  EXPECT_EQ(StepRule::parse("4").value, 4.0);
  EXPECT_THROW(StepRule::parse("fast"), DomainError);
  EXPECT_THROW(StepRule::parse("constant=x"), DomainError);
  for (const char* s : {"adaptive", "theory=1.5", "constant=2"}) {
    const StepRule r = StepRule::parse(s);
    const StepRule back = StepRule::parse(r.to_string());
    EXPECT_EQ(back.kind, r.kind);
    EXPECT_EQ(back.value, r.value);
  }
}

TEST(SolverConfig, Validation) {
  const std::vector<Index> dims{4, 4, 4};
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate(dims));
  cfg.step = StepRule::constant(0.0);
  EXPECT_THROW(cfg.validate(dims), DomainError);
  cfg = SolverConfig{};
  cfg.rel_tol = 0.0;
  EXPECT_THROW(cfg.validate(dims), DomainError);
  cfg = SolverConfig{};
  cfg.trim_nu = -1.0;
  EXPECT_THROW(cfg.validate(dims), DomainError);
  cfg = SolverConfig{};
  cfg.trim_nu = 1.0;
  EXPECT_THROW(cfg.validate(std::vector<Index>{200, 200, 200}), DomainError);
  EXPECT_NO_THROW(cfg.validate(dims));
}

TEST(IterationLog, CsvRoundTrip) {
  IterationLog log;
  log.push({0, 1.5, std::sqrt(3.0), 0.1, 0.0, 0.25});
  log.push({1, 1.0 / 3.0, 0.8164965809277261, std::nullopt, 2.0 / 7.0, 1.5});
  std::stringstream ss;
  log.write_csv(ss);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), IterationLog::kHeader);
  const IterationLog back = IterationLog::read_csv(ss);
  ASSERT_EQ(back.records().size(), 2u);
  EXPECT_TRUE(back.same_trajectory(log));
  EXPECT_EQ(back.records()[1].objective, 1.0 / 3.0);
  EXPECT_FALSE(back.records()[1].rel_error.has_value());
  IterationLog other = log;
  other.push({2, 0.1, 0.1, std::nullopt, 0.1, 0.0});
  EXPECT_FALSE(other.same_trajectory(log));
  std::stringstream bad("iter,objective\n");
  EXPECT_THROW(IterationLog::read_csv(bad), IoError);
}

TEST(Solve, FullyObservedConvergesImmediately) {
  const TTTensor truth = random_tt({4, 5, 4}, {2, 3}, 40);
  for (Algorithm algo : {Algorithm::kPrgd, Algorithm::kRgd}) {
    SolverConfig cfg;
    cfg.algorithm = algo;
    cfg.rel_tol = 1e-10;
    const SolveResult res = solve(full_observation(truth), truth.ranks(), cfg, truth);
    EXPECT_EQ(res.status, SolveStatus::kConverged);
    EXPECT_LE(res.iterations, 5);
    EXPECT_LE(tt_distance(res.tensor, truth), 1e-10 * tt_norm(truth));
  }
}

TEST(Solve, PerturbedStartFullyObserved) {
  const TTTensor truth = random_tt({4, 5, 4}, {2, 3}, 41);
  const TTTensor start = tt_add(truth, tt_scale(random_tt({4, 5, 4}, {2, 3}, 42), 1e-3));
  SolverConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.iterate_change_tol = 1e-14;
  cfg.algorithm = Algorithm::kPrgd;
  cfg.step = StepRule::constant(1.0);
  const SolveResult res = solve_from(retract(start, truth.ranks()), full_observation(truth), truth.ranks(), cfg, truth);
  EXPECT_EQ(res.status, SolveStatus::kConverged) << res.message;
  EXPECT_LE(res.iterations, 50);
}

TEST(Solve, InvariantsAlongTrajectory) {
  const std::vector<Index> dims{8, 8, 8};
  const RankVector r({2, 2});
  const TTTensor truth = gen_synthetic_tt(dims, r, 43);
  const SparseObservations obs = sample_uniform(truth, os_to_n(dims, r, 6.0), 44);
  for (Algorithm algo : {Algorithm::kPrgd, Algorithm::kRgd}) {
    SolverConfig cfg;
    cfg.algorithm = algo;
    cfg.step = StepRule::adaptive();
    cfg.max_iters = 40;
    const SolveResult res = solve(obs, r, cfg, truth);
    EXPECT_FALSE(is_failure(res.status)) << res.message;
    const auto ranks = res.tensor.ranks();
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_LE(ranks[k], r[k]);
    ASSERT_FALSE(res.log.empty());
    EXPECT_EQ(res.log.records().front().iter, 0);
    EXPECT_EQ(res.log.records().front().step, 0.0);
    EXPECT_EQ(res.log.back().iter, res.iterations);
    for (const auto& rec : res.log.records()) {
      EXPECT_GE(rec.objective, 0.0);
      EXPECT_TRUE(std::isfinite(rec.objective));
      EXPECT_NEAR(rec.residual_norm, std::sqrt(2.0 * rec.objective), 1e-12 * (1.0 + rec.residual_norm));
      EXPECT_TRUE(rec.rel_error.has_value());
    }
    EXPECT_NEAR(res.log.back().objective, objective(residual(res.tensor, obs)), 1e-12);
  }
}

TEST(Solve, Deterministic) {
  const std::vector<Index> dims{6, 6, 6};
  const RankVector r({2, 2});
  const TTTensor truth = gen_synthetic_tt(dims, r, 45);
  const SparseObservations obs = sample_uniform(truth, os_to_n(dims, r, 5.0), 46);
  SolverConfig cfg;
  cfg.max_iters = 25;
  cfg.step = StepRule::adaptive();
  const SolveResult a = solve(obs, r, cfg, truth);
  const SolveResult b = solve(obs, r, cfg, truth);
  EXPECT_TRUE(a.log.same_trajectory(b.log));
  EXPECT_EQ(to_dense(a.tensor), to_dense(b.tensor));
}

TEST(Solve, LogEveryKeepsFirstAndLast) {
  const std::vector<Index> dims{6, 6, 6};
  const RankVector r({2, 2});
  const TTTensor truth = gen_synthetic_tt(dims, r, 47);
  const SparseObservations obs = sample_uniform(truth, os_to_n(dims, r, 5.0), 48);
  SolverConfig cfg;
  cfg.max_iters = 7;
  cfg.log_every = 3;
  cfg.rel_tol = 1e-14;
  cfg.iterate_change_tol = 1e-300;
  cfg.step = StepRule::adaptive();
  const SolveResult res = solve(obs, r, cfg, truth);
  std::vector<int> iters;
  for (const auto& rec : res.log.records()) iters.push_back(rec.iter);
  EXPECT_EQ(iters, (std::vector<int>{0, 3, 6, 7}));
}

TEST(Solve, HugeConstantStepDiverges) {
  const std::vector<Index> dims{6, 6, 6};
  const RankVector r({2, 2});
  const TTTensor truth = gen_synthetic_tt(dims, r, 49);
  const SparseObservations obs = sample_uniform(truth, os_to_n(dims, r, 3.0), 50);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::kRgd;
  cfg.step = StepRule::constant(1e6);
  cfg.max_iters = 100;
  const SolveResult res = solve(obs, r, cfg, truth);
  EXPECT_TRUE(is_failure(res.status)) << to_string(res.status);
  EXPECT_FALSE(res.message.empty());
}

TEST(Solve, StallsWhenIterateStopsMoving) {
  const std::vector<Index> dims{6, 6, 6};
  const RankVector r({2, 2});
  const TTTensor truth = gen_synthetic_tt(dims, r, 51);
  const SparseObservations obs = sample_uniform(truth, os_to_n(dims, r, 5.0), 52);
  SolverConfig cfg;
  cfg.step = StepRule::constant(1e-9);
  cfg.max_iters = 50;
  const SolveResult res = solve(obs, r, cfg);
  EXPECT_EQ(res.status, SolveStatus::kStalled);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_FALSE(res.log.back().rel_error.has_value());
}

TEST(Solve, TrimmingKeepsIteratesFinite) {
  const std::vector<Index> dims{10, 10, 10};
  const RankVector r({2, 2});
  const TTTensor truth = gen_synthetic_tt(dims, r, 53);
  const SparseObservations obs = sample_uniform(truth, os_to_n(dims, r, 5.0), 54);
  SolverConfig cfg;
  cfg.step = StepRule::adaptive();
  cfg.trim_nu = 3.0;
  cfg.max_iters = 30;
  const SolveResult res = solve(obs, r, cfg, truth);
  EXPECT_FALSE(is_failure(res.status));
  EXPECT_LT(*res.log.back().rel_error, *res.log.records().front().rel_error);
}

TEST(Solve, RejectsBadInput) {
  const TTTensor truth = random_tt({3, 3, 3}, {2, 2}, 55);
  SolverConfig cfg;
  EXPECT_THROW(solve(SparseObservations({3, 3, 3}), RankVector({2, 2}), cfg), DomainError);
  EXPECT_THROW(solve(full_observation(truth), RankVector({4, 2}), cfg), DomainError);
  EXPECT_THROW(solve(full_observation(truth), RankVector({2, 2}), cfg, random_tt({3, 3, 4}, {2, 2}, 1)),
               ShapeError);
}
