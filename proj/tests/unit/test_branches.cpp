#include <gtest/gtest.h>

#include "plap/branches.hpp"
#include "plap/errors.hpp"
#include "support.hpp"

namespace plap {
namespace {

std::vector<double> below_star(int count) {
  const auto& s = test::smoke();
  const double l1 = s.ctx.eig.lambda1, ls = s.ctx.extreme.lambda_star, delta = 0.3 * (ls - l1);
  std::vector<double> g;
  for (int k = 0; k < count; ++k) g.push_back(l1 + delta + (ls - l1 - 2 * delta) * k / (count - 1));
  return g;
}

void expect_nehari(const BranchPoint& b, const ProblemData& data) {
  const Terms t = energy_terms(b.u.values, data);
  EXPECT_LE(std::fabs(t.H(b.lambda) - t.F), 1e-8 * (std::fabs(t.F) + t.A));
}

TEST(NPlus, NegativeEnergySolutionsAndMonotoneJ) {
  const auto& s = test::smoke();
  std::optional<Field> warm;
  double prev = 0.0;
  for (double lambda : below_star(5)) {
    const BranchPoint b = solve_nplus(lambda, s.data, s.ctx.eig, warm);
    EXPECT_LT(b.report.phi, 0.0);
    EXPECT_LE(b.report.residual, 1e-6);
    EXPECT_EQ(b.report.nehari_class, NehariClass::Plus);
    EXPECT_GE(b.min_value, 0.0);
    expect_nehari(b, s.data);
    EXPECT_LE(b.J, prev);
    prev = b.J;
    warm = b.u;
  }
}

TEST(NMinus, PositiveEnergySolutionsTouchPositiveF) {
  const auto& s = test::smoke();
  for (double lambda : below_star(3)) {
    const BranchPoint b = solve_nminus(lambda, s.data);
    EXPECT_GT(b.report.phi, 0.0);
    EXPECT_LE(b.report.residual, 1e-6);
    EXPECT_EQ(b.report.nehari_class, NehariClass::Minus);
    expect_nehari(b, s.data);
    double on_plus = 0.0;
    for (std::size_t k = 0; k < s.data.f.positive.size(); ++k) {
      const long idx = static_cast<long>(k) - 1;  // 1D node k is interior k - 1
      if (s.data.f.positive[k] && idx >= 0 && idx < b.u.values.size()) on_plus += b.u.values[idx];
    }
    EXPECT_GT(on_plus, 0.0);
  }
}

TEST(Branches, EnergyOrderingAtFixedLambda) {
  const auto& s = test::smoke();
  const double lambda = below_star(3)[1];
  EXPECT_LT(solve_nplus(lambda, s.data, s.ctx.eig).report.phi, 0.0);
  EXPECT_GT(solve_nminus(lambda, s.data).report.phi, 0.0);
}

TEST(Branches, WarmResolveReproducesPoint) {
  const auto& s = test::smoke();
  const double lambda = below_star(3)[1];
  const BranchPoint a = solve_nplus(lambda, s.data, s.ctx.eig);
  const BranchPoint b = solve_nplus(lambda, s.data, s.ctx.eig, a.u);
  EXPECT_LE((a.u.values - b.u.values).norm(), 1e-6 * a.u.values.norm());
  const BranchPoint c = solve_nminus(lambda, s.data);
  const BranchPoint d = solve_nminus(lambda, s.data, c.u);
  EXPECT_LE((c.u.values - d.u.values).norm(), 1e-6 * c.u.values.norm());
}

TEST(Branches, SymmetrizationInvariance) {
  const auto& s = test::smoke();
  const double lambda = below_star(3)[2];
  const Vec base = solve_nplus(lambda, s.data, s.ctx.eig).u.values;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Sign flips of a few nodes where the field is small keep both in Θ⁺.
    Vec v = base;
    const Vec r = random_field(static_cast<std::size_t>(v.size()), seed, 0.0, 1.0);
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (r[i] < 0.2) v[i] = -v[i];
    const Terms tv = energy_terms(v, s.data), ta = energy_terms(v.cwiseAbs(), s.data);
    EXPECT_EQ(tv.B, ta.B);
    EXPECT_EQ(tv.F, ta.F);
    EXPECT_LE(ta.A, tv.A);  // |∇|u|| <= |∇u| cellwise
    if (tv.H(lambda) < 0 && ta.H(lambda) < 0)
      EXPECT_LE(reduced_J(v.cwiseAbs(), lambda, s.data), reduced_J(v, lambda, s.data));
  }
}

TEST(AtStar, ContinuationSequence) {
  const auto& s = test::smoke();
  const double ls = s.ctx.extreme.lambda_star;
  const AtStarResult r = solve_at_star(s.data, s.ctx.eig, ls, 6);
  ASSERT_EQ(r.lambdas.size(), r.J_values.size());
  EXPECT_DOUBLE_EQ(r.lambdas.back(), ls);
  for (std::size_t k = 1; k < r.J_values.size(); ++k) EXPECT_LE(r.J_values[k], r.J_values[k - 1] + 1e-14);
  const Terms t = energy_terms(r.point.u.values, s.data);
  EXPECT_LT(t.H(ls), 0.0);
  EXPECT_LT(t.F, 0.0);
  EXPECT_LE(r.point.report.residual, 1e-6);
  EXPECT_LE(std::fabs(r.J_values.back() - r.point.J), 1e-6 * std::fabs(r.point.J));
}

TEST(PastStar, InsideSeparatedCone) {
  const auto& s = test::smoke();
  const double ls = s.ctx.extreme.lambda_star, mu0 = *s.ctx.mu0;
  std::vector<Vec> warm{s.ctx.star_minimizers.back().values};
  for (int k = 1; k <= 3; ++k) {
    const double lambda = ls * (1 + 0.01 * k);
    const BranchPoint b = solve_past_star(lambda, mu0, ls, s.data, warm);
    EXPECT_LT(H(b.u.values, mu0, s.data), 0.0);
    EXPECT_LT(b.report.phi, 0.0);
    EXPECT_LE(b.report.residual, 1e-6);
    expect_nehari(b, s.data);
  }
  EXPECT_THROW(solve_past_star(ls, mu0, ls, s.data, warm), SolverError);
}

TEST(Sweep, BelowLambda1IsEmptyCone) {
  const auto& s = test::smoke();
  const double l1 = s.ctx.eig.lambda1;
  const SweepResult r = sweep({0.3 * l1, 0.6 * l1}, s.ctx, s.data, {});
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows)
    if (row.branch == Branch::NPlus) EXPECT_EQ(row.status, "EmptyCone");
}

TEST(Sweep, DuplicatesAndLabelSwitch) {
  const auto& s = test::smoke();
  const double ls = s.ctx.extreme.lambda_star, mid = below_star(3)[1];
  SweepOptions o;
  o.mountain_pass = false;
  const SweepResult r = sweep({mid, mid, 1.01 * ls, 1.01 * ls}, s.ctx, s.data, o);
  ASSERT_EQ(r.rows.size(), 6u);
  EXPECT_EQ(r.rows[0].branch, Branch::NPlus);
  EXPECT_EQ(r.rows[1].branch, Branch::NMinus);
  EXPECT_EQ(r.rows[0].point->u.values, r.rows[2].point->u.values);
  EXPECT_EQ(r.rows[1].point->u.values, r.rows[3].point->u.values);
  EXPECT_EQ(r.rows[4].branch, Branch::Restricted);
  EXPECT_EQ(r.rows[5].branch, Branch::Restricted);
  EXPECT_EQ(r.rows[4].point->u.values, r.rows[5].point->u.values);
  EXPECT_THROW(sweep({1.0, 0.5}, s.ctx, s.data, o), SolverError);
}

TEST(Sweep, TwentyValuesBelowStarGiveFortyRows) {
  const auto& s = test::smoke();
  const SweepResult r = sweep(below_star(20), s.ctx, s.data, {});
  EXPECT_EQ(r.rows.size(), 40u);
  EXPECT_FALSE(r.any_error());
  EXPECT_TRUE(r.passes.empty());
}

TEST(EpsilonProbe, CoversCriterionStepsAndStopsAtFace) {
  const auto& s = test::smoke();
  const EpsilonProbe p = probe_epsilon(s.ctx, s.data, 0.01, 30);
  EXPECT_GE(p.steps, 3);
  EXPECT_NEAR(p.epsilon, 0.01 * p.steps * s.ctx.extreme.lambda_star, 1e-12);
  if (!p.exhausted) EXPECT_NE(p.stop_status, "ok");
}

}  // namespace
}  // namespace plap
