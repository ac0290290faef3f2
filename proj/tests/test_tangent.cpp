#include <gtest/gtest.h>

#include <Eigen/LU>
#include <Eigen/QR>
#include <memory>

#include "test_support.hpp"
#include "ttc/problems.hpp"
#include "ttc/tangent.hpp"

using namespace ttc;
using ttc::testing::random_dense;
using ttc::testing::random_tt;
using ttc::testing::rel_diff;

namespace {

ModeWeights random_weights(const std::vector<Index>& dims, std::uint64_t seed) {
  const DenseTensor src = random_dense(dims, seed);
  return build_weights(sample_uniform(src, std::max<Index>(1, product(dims) / 2), seed + 7));
}

std::shared_ptr<const TangentSpace> make_space(const TTTensor& t, const ModeWeights& w) {
  return std::make_shared<const TangentSpace>(t, w);
}

// L(X)^T (I (x) G^{1/2m}) L(Y), the row (j, x) weighted by g(x)^{1/2m}.
Matrix weighted_left_gram(const Core& x, const Core& y, const Vector& g_half) {
  Matrix lx = left_unfold(x);
  const Index r0 = x.left_rank();
  for (Index row = 0; row < lx.rows(); ++row) lx.row(row) *= g_half(row / r0);
  return lx.transpose() * left_unfold(y);
}

double max_component_cross(const TangentVector& v, const ModeWeights& w) {
  const int m = v.space().order();
  std::vector<DenseTensor> comps;
  for (int i = 0; i < m; ++i) comps.push_back(to_dense(tangent_component(v, i)));
  double worst = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double scale = weighted_norm(comps[static_cast<std::size_t>(i)], w) *
                               weighted_norm(comps[static_cast<std::size_t>(j)], w) +
                           1e-300;
      worst = std::max(worst, std::abs(weighted_inner(comps[static_cast<std::size_t>(i)],
                                                      comps[static_cast<std::size_t>(j)], w)) /
                                  scale);
    }
  }
  return worst;
}

double max_variation_diff(const TangentVector& a, const TangentVector& b) {
  double worst = 0.0;
  double scale = 0.0;
  for (int i = 0; i < a.space().order(); ++i) {
    const Eigen::Map<const Vector> va(a.variation(i).data().data(), a.variation(i).size());
    const Eigen::Map<const Vector> vb(b.variation(i).data().data(), b.variation(i).size());
    worst = std::max(worst, (va - vb).cwiseAbs().maxCoeff());
    scale = std::max(scale, vb.cwiseAbs().maxCoeff());
  }
  return worst / std::max(scale, 1e-300);
}

// Dense tensors spanning the i-th component space: cores of the base with
// core i replaced by a unit core, restricted to the gauge null space for i < m.
Matrix component_basis(const TangentSpace& space, int i) {
  const TTTensor& base = space.base();
  const Core& ti = base.core(i);
  const Index n = ti.size();
  Matrix coords = Matrix::Identity(n, n);
  if (i + 1 < base.order()) {
    const Vector g_half = space.weights().mode_power(i, 1.0);
    const Index r1 = ti.right_rank();
    Matrix constraint(r1 * r1, n);
    for (Index e = 0; e < n; ++e) {
      Core unit(ti.left_rank(), ti.mode_size(), r1);
      unit.data()[static_cast<std::size_t>(e)] = 1.0;
      const Matrix c = weighted_left_gram(unit, ti, g_half);
      constraint.col(e) = Eigen::Map<const Vector>(c.data(), c.size());
    }
    Eigen::FullPivLU<Matrix> lu(constraint);
    coords = lu.kernel();
  }
  const Index total = base.full_size();
  Matrix out(total, coords.cols());
  for (Index c = 0; c < coords.cols(); ++c) {
    std::vector<Core> cores = base.cores();
    cores[static_cast<std::size_t>(i)] =
        Core(ti.left_rank(), ti.mode_size(), ti.right_rank(),
             std::vector<double>(coords.col(c).data(), coords.col(c).data() + n));
    const DenseTensor d = to_dense(TTTensor(std::move(cores)));
    out.col(c) = d.vec();
  }
  return out;
}

// W-orthogonal projection of a onto span(B) by weighted least squares.
Vector weighted_projection(const Matrix& basis, const DenseTensor& a, const ModeWeights& w) {
  Matrix wb(basis.rows(), basis.cols());
  for (Index c = 0; c < basis.cols(); ++c) {
    DenseTensor col(a.dims(), std::vector<double>(basis.col(c).data(), basis.col(c).data() + basis.rows()));
    wb.col(c) = apply_weight_power(col, w, 0.5).vec();
  }
  const Vector wa = apply_weight_power(a, w, 0.5).vec();
  const Vector coef = wb.completeOrthogonalDecomposition().solve(wa);
  return basis * coef;
}

}  // namespace

TEST(NewLeftOrthogonal, IdentityWeightsGiveClassicalGauge) {
  const TTTensor t = random_tt({4, 4, 4}, {2, 2}, 1);
  const TTTensor q = new_left_orthogonal(t, ModeWeights::identity(t.dims()));
  for (int i = 0; i < 2; ++i) EXPECT_LE(ttc::testing::gram_deviation(left_unfold(q.core(i))), 1e-12);
  EXPECT_LE(rel_diff(to_dense(q), to_dense(t)), 1e-12);
}

TEST(NewLeftOrthogonal, WeightedGramAndValues) {
  const std::vector<Index> dims{4, 4, 4};
  const TTTensor t = random_tt(dims, {2, 2}, 2);
  const ModeWeights w = random_weights(dims, 3);
  const TTTensor q = new_left_orthogonal(t, w);
  for (int i = 0; i < 2; ++i) {
    const Matrix g = weighted_left_gram(q.core(i), q.core(i), w.mode_power(i, 1.0));
    EXPECT_LE((g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 1e-11);
  }
  EXPECT_LE(rel_diff(to_dense(q), to_dense(t)), 1e-11);
}

TEST(Property, WeightedLeftPartsAreOrthonormal) {
  // W^{1/2} applied to the first i cores gives orthonormal left parts.
  const std::vector<Index> dims{3, 4, 3, 4};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ModeWeights w = random_weights(dims, 20 + seed);
    const TangentSpace space(random_tt(dims, {2, 3, 2}, 30 + seed), w);
    EXPECT_LE(space.gauge_gram_deviation(), 1e-11);
    for (int i = 1; i <= 3; ++i) {
      EXPECT_LE(ttc::testing::gram_deviation(left_part(space.scaled_base(), i)), 1e-11);
    }
  }
}

TEST(TangentSpace, AdoptionChecksGauge) {
  const std::vector<Index> dims{3, 4, 3};
  const ModeWeights w = random_weights(dims, 4);
  const TTTensor t = random_tt(dims, {2, 2}, 5);
  EXPECT_THROW(TangentSpace::from_orthogonalized(t, w), ContractViolation);
  EXPECT_NO_THROW(TangentSpace::from_orthogonalized(new_left_orthogonal(t, w), w));
}

TEST(Projection, ManifoldPointIsFixed) {
  const std::vector<Index> dims{4, 3, 5};
  const TTTensor t = random_tt(dims, {2, 3}, 6);
  const ModeWeights w = random_weights(dims, 7);
  const auto space = make_space(t, w);
  const TangentVector v = project_tangent(space, to_dense(t));
  EXPECT_LE(rel_diff(to_dense(tangent_to_full(v)), to_dense(t)), 1e-10);
}

TEST(Projection, WeightMismatchIsContractViolation) {
  const std::vector<Index> dims{4, 3, 5};
  const TTTensor t = random_tt(dims, {2, 3}, 8);
  const auto space = make_space(t, random_weights(dims, 9));
  const DenseTensor a = random_dense(dims, 10);
  EXPECT_THROW(project_tangent(space, random_weights(dims, 11), a), ContractViolation);
  EXPECT_NO_THROW(project_tangent(space, space->weights(), a));
  EXPECT_THROW(project_tangent(space, random_dense({4, 3, 4}, 12)), ShapeError);
}

TEST(Projection, OrthogonalComplementGivesZero) {
  const std::vector<Index> dims{2, 2, 2};
  const TTTensor t = random_tt(dims, {1, 1}, 13);
  const ModeWeights w = random_weights(dims, 14);
  const auto space = make_space(t, w);
  const DenseTensor a = random_dense(dims, 15);
  Matrix all(8, 0);
  for (int i = 0; i < 3; ++i) {
    const Matrix b = component_basis(*space, i);
    Matrix grown(8, all.cols() + b.cols());
    grown << all, b;
    all = grown;
  }
  DenseTensor perp = a;
  perp.vec() -= weighted_projection(all, a, w);
  const TangentVector v = project_tangent(space, perp);
  for (const Core& c : v.variations()) {
    for (double x : c.data()) EXPECT_NEAR(x, 0.0, 1e-10 * fro_norm(a));
  }
}

TEST(Property, BruteForceOracleSmallestInstances) {
  const std::vector<Index> dims{2, 2, 2};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TTTensor t = random_tt(dims, {1, 1}, 100 + seed);
    const ModeWeights w = random_weights(dims, 200 + seed);
    const auto space = make_space(t, w);
    const DenseTensor a = random_dense(dims, 300 + seed);
    const TangentVector v = project_tangent(space, a);
    Vector total = Vector::Zero(8);
    for (int i = 0; i < 3; ++i) {
      const Vector expected = weighted_projection(component_basis(*space, i), a, w);
      const DenseTensor got = to_dense(tangent_component(v, i));
      EXPECT_LE((got.vec() - expected).norm(), 1e-8 * a.vec().norm()) << "seed " << seed << " core " << i;
      total += expected;
    }
    EXPECT_LE((to_dense(tangent_to_full(v)).vec() - total).norm(), 1e-8 * a.vec().norm());
  }
}

TEST(Property, ProjectionInvariants) {
  const std::vector<Index> dims{3, 4, 3, 3};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const TTTensor t = random_tt(dims, {2, 3, 2}, 400 + seed);
    const ModeWeights w = random_weights(dims, 500 + seed);
    const auto space = make_space(t, w);
    const DenseTensor a = random_dense(dims, 600 + seed);
    const DenseTensor b = random_dense(dims, 700 + seed);
    const TangentVector pa = project_tangent(space, a);
    const TangentVector pb = project_tangent(space, b);
    const DenseTensor pa_d = to_dense(tangent_to_full(pa));
    const DenseTensor pb_d = to_dense(tangent_to_full(pb));

    EXPECT_LE(gauge_deviation(pa), 1e-10);
    EXPECT_LE(max_component_cross(pa, w), 1e-10);

    const double lhs = weighted_inner(pa_d, b, w);
    const double rhs = weighted_inner(a, pb_d, w);
    EXPECT_NEAR(lhs, rhs, 1e-10 * weighted_norm(a, w) * weighted_norm(b, w));

    const TangentVector ppa = project_tangent(space, pa_d);
    EXPECT_LE(max_variation_diff(ppa, pa), 1e-10);
    EXPECT_LE(rel_diff(to_dense(tangent_to_full(ppa)), pa_d), 1e-10);

    EXPECT_LE(weighted_norm(pa_d, w), weighted_norm(a, w) * (1.0 + 1e-12));

    // First-order optimality: the residual is W-orthogonal to the tangent space.
    DenseTensor res = a;
    res.vec() -= pa_d.vec();
    EXPECT_NEAR(weighted_inner(res, pb_d, w), 0.0, 1e-10 * weighted_norm(a, w) * weighted_norm(pb_d, w));
  }
}

TEST(Property, SparsePathMatchesDensePath) {
  const std::vector<Index> dims{4, 5, 3, 4};
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const TTTensor t = random_tt(dims, {2, 3, 2}, 800 + seed);
    const ModeWeights w = random_weights(dims, 900 + seed);
    const auto space = make_space(t, w);
    const SparseObservations g = sample_uniform(random_dense(dims, 1000 + seed), 60, 1100 + seed);
    const TangentVector sparse = project_tangent(space, g);
    const TangentVector dense = project_tangent(space, g.densify());
    EXPECT_LE(max_variation_diff(sparse, dense), 1e-12);
  }
}

TEST(TangentToFull, ZeroVariations) {
  const TTTensor t = random_tt({3, 4, 3}, {2, 2}, 16);
  const auto space = make_space(t, ModeWeights::identity(t.dims()));
  std::vector<Core> zeros;
  for (const Core& c : space->base().cores()) zeros.emplace_back(c.left_rank(), c.mode_size(), c.right_rank());
  const TangentVector v(space, zeros);
  EXPECT_EQ(to_dense(tangent_to_full(v)).vec().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(tangent_weighted_norm(v), 0.0);
  EXPECT_LE(tangent_to_full(v).ranks()[0], 4);
}

TEST(TangentToFull, SingleLastVariation) {
  const TTTensor t = random_tt({3, 4, 3}, {2, 2}, 17);
  const ModeWeights w = random_weights(t.dims(), 18);
  const auto space = make_space(t, w);
  std::vector<Core> vars;
  for (const Core& c : space->base().cores()) vars.emplace_back(c.left_rank(), c.mode_size(), c.right_rank());
  Core x = ttc::testing::random_tt({2, 3}, {2}, 19).core(1);
  x = Core(2, 3, 1, std::vector<double>(x.data().begin(), x.data().end()));
  vars[2] = x;
  const TangentVector v(space, vars);
  std::vector<Core> cores = space->base().cores();
  cores[2] = x;
  const DenseTensor expected = to_dense(TTTensor(cores));
  EXPECT_LE(rel_diff(to_dense(tangent_to_full(v)), expected), 1e-13);
  EXPECT_NEAR(tangent_weighted_norm(v), weighted_norm(expected, w), 1e-12 * weighted_norm(expected, w));
}

TEST(TangentToFull, SumOfComponentsAndRankBound) {
  const std::vector<Index> dims{4, 3, 5, 3};
  const TTTensor t = random_tt(dims, {2, 3, 2}, 20);
  const ModeWeights w = random_weights(dims, 21);
  const auto space = make_space(t, w);
  const TangentVector v = project_tangent(space, random_dense(dims, 22));
  DenseTensor sum(dims);
  for (int i = 0; i < 4; ++i) sum.vec() += ttc::testing::brute_dense(tangent_component(v, i)).vec();
  const TTTensor full = tangent_to_full(v);
  EXPECT_LE(rel_diff(to_dense(full), sum), 1e-12);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_LE(full.ranks()[k], 2 * t.ranks()[k]);
  EXPECT_NEAR(tangent_weighted_norm(v), weighted_norm(sum, w), 1e-10 * weighted_norm(sum, w));
}

TEST(MoveAlong, BasePlusScaledDirection) {
  const std::vector<Index> dims{4, 3, 5};
  const TTTensor t = random_tt(dims, {2, 3}, 23);
  const auto space = make_space(t, random_weights(dims, 24));
  const TangentVector v = project_tangent(space, random_dense(dims, 25));
  DenseTensor expected = to_dense(t);
  expected.vec() -= 0.7 * to_dense(tangent_to_full(v)).vec();
  EXPECT_LE(rel_diff(to_dense(move_along(v, -0.7)), expected), 1e-12);
  EXPECT_LE(rel_diff(to_dense(move_along(v, 0.0)), to_dense(t)), 1e-12);
}

TEST(TangentValues, MatchDenseEntries) {
  const std::vector<Index> dims{4, 3, 5};
  const TTTensor t = random_tt(dims, {2, 3}, 26);
  const auto space = make_space(t, random_weights(dims, 27));
  const TangentVector v = project_tangent(space, random_dense(dims, 28));
  const DenseTensor d = to_dense(tangent_to_full(v));
  const SparseObservations at = sample_uniform(d, 20, 29);
  const std::vector<double> vals = tangent_values_at(v, at);
  for (Index e = 0; e < at.size(); ++e) EXPECT_NEAR(vals[static_cast<std::size_t>(e)], at.value(e), 1e-12);
}

TEST(RightGram, RankDeficientPointIsRegularized) {
  // Equal rows in the last core drop the last separation rank to 1.
  TTTensor t = random_tt({3, 3, 3}, {2, 2}, 30);
  Core& last = t.mutable_core(2);
  for (Index x = 0; x < 3; ++x) last(1, x, 0) = last(0, x, 0);
  const auto space = make_space(t, ModeWeights::identity(t.dims()));
  EXPECT_TRUE(space->right_gram_jittered(1));
  const TangentVector v = project_tangent(space, random_dense({3, 3, 3}, 31));
  for (const Core& c : v.variations()) {
    for (double x : c.data()) EXPECT_TRUE(std::isfinite(x));
  }
}
