#include <gtest/gtest.h>

#include "plap/branches.hpp"
#include "plap/errors.hpp"
#include "plap/extremal.hpp"
#include "support.hpp"

namespace plap {
namespace {

ErrorKind kind_of(const std::function<void()>& body) {
  try {
    body();
  } catch (const SolverError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no SolverError thrown";
  return ErrorKind::InvalidArgument;
}

TEST(LambdaStar, NonnegativeFGivesLambda1) {
  auto d = build_domain(1, 3.0, 61);
  Vec f(61);
  for (int i = 0; i < 61; ++i) f[i] = std::fabs(d->coord(i)) < 1.0 ? 1.0 : 0.0;
  const ProblemData data = make_problem(d, 2.0, 3.0, WeightField(d, Vec::Ones(61)), WeightField(d, f));
  const EigenResult eig = lambda1(data);
  const ExtremeResult x = lambda_star(data, eig);
  EXPECT_FALSE(x.constraint_active);
  EXPECT_DOUBLE_EQ(x.lambda_star, eig.lambda1);
  const Vec a = x.u_star.values / x.u_star.values.norm(), b = eig.phi1.values / eig.phi1.values.norm();
  EXPECT_LE((a - b).norm(), 1e-12);
}

TEST(LambdaStar, NegativeFIsInfeasible) {
  const ProblemData data = test::constant_problem(1, 2.0, 41, 2.0, 3.0, 1.0, -1.0);
  const ExtremeResult x = lambda_star(data, lambda1(data));
  EXPECT_TRUE(x.infeasible);
}

TEST(LambdaStar, PresetExceedsLambda1WithFeasibleMinimizer) {
  const auto& s = test::smoke();
  const ExtremeResult& x = s.ctx.extreme;
  ASSERT_FALSE(x.infeasible);
  EXPECT_TRUE(x.constraint_active);
  EXPECT_GT(x.lambda_star, 1.05 * s.ctx.eig.lambda1);
  const Terms t = energy_terms(x.u_star.values, s.data);
  EXPECT_LE(std::fabs(t.F), 1e-6 * t.G);
  EXPECT_GT(t.B, 0.0);
  EXPECT_GE(x.u_star.values.minCoeff(), 0.0);
  EXPECT_NEAR(t.A / t.B, x.lambda_star, 1e-8 * x.lambda_star);
}

TEST(LambdaStar, DominatesLambda1OnRandomWeights) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const ProblemData data = test::random_problem(1, 2.0, 31, 2.0 + 0.2 * seed, 4.0, seed);
    const EigenResult eig = lambda1(data);
    ExtremalOptions o;
    o.restarts = 3;
    const ExtremeResult x = lambda_star(data, eig, o);
    if (x.infeasible) continue;
    EXPECT_GE(x.lambda_star, eig.lambda1 - 1e-8) << "seed=" << seed;
  }
}

TEST(LambdaStar, DeterministicForSeed) {
  const ProblemData data = test::random_problem(1, 2.0, 31, 2.0, 3.0, 4);
  const EigenResult eig = lambda1(data);
  EXPECT_EQ(lambda_star(data, eig).lambda_star, lambda_star(data, eig).lambda_star);
}

TEST(T0Rescale, ZeroClassAndScaleCovariance) {
  const auto& s = test::smoke();
  const ExtremeResult& x = s.ctx.extreme;
  const T0Result a = t0_rescale(x.u_star, x.lambda_star, s.data);
  EXPECT_LE(a.residual, 10 * 1e-6);
  EXPECT_EQ(nehari_test(a.w.values, x.lambda_star, s.data, 1e-6), NehariClass::Zero);
  EXPECT_LE(test::rel_err(a.t0, a.closed_form_t0), 1e-6);
  const T0Result b = t0_rescale(Field(x.u_star.domain, 2.0 * x.u_star.values), x.lambda_star, s.data);
  EXPECT_LE(test::rel_err(b.t0, 0.5 * a.t0), 1e-8);
  EXPECT_LE((b.w.values - a.w.values).norm(), 1e-8 * a.w.values.norm());
}

TEST(RestrictedMin, NegativeAndMonotoneInLambda) {
  const auto& s = test::smoke();
  ASSERT_TRUE(s.ctx.mu0.has_value());
  const double ls = s.ctx.extreme.lambda_star;
  std::vector<Vec> starts;
  for (const Field& m : s.ctx.star_minimizers) starts.push_back(m.values);
  double prev = 0.0;
  for (double k : {1.0, 2.0, 3.0, 4.0}) {
    const RestrictedMin r = restricted_min(ls * (1 + 0.01 * k), *s.ctx.mu0, s.data, starts);
    EXPECT_LT(r.value, 0.0);
    EXPECT_LE(r.value, prev + 1e-10 * std::fabs(prev));
    EXPECT_LE(r.constraint, 0.0);
    EXPECT_GE(r.v.values.minCoeff(), 0.0);
    prev = r.value;
    starts.insert(starts.begin(), r.v.values);
  }
}

TEST(RestrictedMin, InteriorMinimizerBelowLambdaStarIsASolution) {
  const auto& s = test::smoke();
  const double l1 = s.ctx.eig.lambda1, ls = s.ctx.extreme.lambda_star;
  const double lambda = 0.5 * (l1 + ls);
  const RestrictedMin r = restricted_min(lambda, ls, s.data, {s.ctx.eig.phi1.values});
  ASSERT_FALSE(r.on_boundary);
  const Vec w = fiber_scale(r.v.values, lambda, s.data) * r.v.values;
  EXPECT_LE(pde_residual(w, lambda, s.data), 1e-6);
}

TEST(RestrictedMin, NoStartInConeIsEmptyCone) {
  const auto& s = test::smoke();
  // All mass on the centre node, where f > 0.
  Vec spike = Vec::Zero(static_cast<Eigen::Index>(s.data.domain->interior_count()));
  spike[spike.size() / 2] = 1.0;
  EXPECT_EQ(kind_of([&] { restricted_min(1.2 * s.ctx.extreme.lambda_star, *s.ctx.mu0, s.data, {spike}); }),
            ErrorKind::EmptyCone);
}

TEST(CMu, NegativeAndDecreasingInMu) {
  const auto& s = test::smoke();
  const double l1 = s.ctx.eig.lambda1, ls = s.ctx.extreme.lambda_star;
  std::vector<Vec> starts{s.ctx.eig.phi1.values, s.ctx.extreme.u_star.values};
  const double c_hi = estimate_c_mu(l1 + 0.8 * (ls - l1), s.data, starts);
  const double c_lo = estimate_c_mu(l1 + 0.3 * (ls - l1), s.data, starts);
  EXPECT_LT(c_hi, 0.0);
  EXPECT_LT(c_lo, c_hi);
}

TEST(SeparationMu0, ExceedsMinimizerQuotient) {
  const auto& s = test::smoke();
  const double l1 = s.ctx.eig.lambda1, ls = s.ctx.extreme.lambda_star;
  const Vec v = s.ctx.star_minimizers.front().values;
  const Terms t = energy_terms(v, s.data);
  const double mu0 = separation_mu0(s.data, l1, ls, {v});
  EXPECT_GT(mu0, t.A / t.B);
  EXPECT_LT(mu0, ls);
  EXPECT_LT(H(v, mu0, s.data), 0.0);
}

TEST(SeparationMu0, Errors) {
  const auto& s = test::smoke();
  const double l1 = s.ctx.eig.lambda1, ls = s.ctx.extreme.lambda_star;
  EXPECT_THROW(separation_mu0(s.data, l1, ls, {}), SolverError);
  EXPECT_EQ(kind_of([&] { separation_mu0(s.data, l1, ls, {s.ctx.eig.phi1.values}); }),
            ErrorKind::SeparationFailed);
}

TEST(MuLambda, PreconditionAndPlateau) {
  const auto& s = test::smoke();
  const double ls = s.ctx.extreme.lambda_star, mu0 = *s.ctx.mu0;
  std::vector<Vec> warm{s.ctx.star_minimizers.back().values};
  EXPECT_THROW(mu_lambda(ls, mu0, ls, -1.0, s.data, warm), SolverError);
  const double lambda = 1.02 * ls;
  const BranchPoint first = solve_past_star(lambda, mu0, ls, s.data, warm);
  const Vec unit = first.u.values / e_norm(first.u, s.data.p, s.data.gamma);
  const MuLambdaResult m = mu_lambda(lambda, mu0, ls, first.J, s.data, {unit, s.ctx.extreme.u_star.values});
  EXPECT_GT(m.mu_lambda, mu0);
  EXPECT_LT(m.mu_lambda, ls);
  EXPECT_LE(std::fabs(m.J_face - first.J), 1e-6 * std::fabs(first.J));
  EXPECT_TRUE(m.endpoint.on_boundary);
}

TEST(N0Probe, NoZeroSetMemberBelowLambdaStar) {
  const auto& s = test::smoke();
  const double l1 = s.ctx.eig.lambda1, ls = s.ctx.extreme.lambda_star;
  for (double frac : {0.2, 0.5}) {
    const N0Probe probe = n0_probe(l1 + frac * (ls - l1), s.data, s.ctx.eig, 4, 3);
    EXPECT_FALSE(probe.found);
    EXPECT_GE(probe.min_quotient, ls - 1e-3);
  }
}

}  // namespace
}  // namespace plap
