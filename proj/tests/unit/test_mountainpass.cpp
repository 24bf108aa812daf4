#include <gtest/gtest.h>

#include <map>

#include "plap/errors.hpp"
#include "plap/mountainpass.hpp"
#include "support.hpp"

namespace plap {
namespace {

struct PassFixture {
  double lambda = 0.0;
  BranchPoint first;
  PassReport report;
};

const PassFixture& pass_at(int k) {
  static std::map<int, PassFixture> cache;
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  const auto& s = test::smoke();
  PassFixture fx;
  fx.lambda = s.ctx.extreme.lambda_star * (1 + 0.01 * k);
  fx.first = solve_past_star(fx.lambda, *s.ctx.mu0, s.ctx.extreme.lambda_star, s.data,
                             {s.ctx.star_minimizers.back().values});
  fx.report = second_solution(fx.lambda, s.ctx, fx.first, s.data, {});
  return cache.emplace(k, std::move(fx)).first->second;
}

TEST(StraightPath, KnotsAndEndpoints) {
  auto d = build_domain(1, 1.0, 11);
  const Field a(d, random_field(9, 1)), b(d, random_field(9, 2));
  EXPECT_THROW(straight_path(a, b, 7), SolverError);
  const Path p = straight_path(a, b, 8);
  ASSERT_EQ(p.knots.size(), 8u);
  EXPECT_EQ(p.knots.front().values, a.values);
  EXPECT_LE((p.knots.back().values - b.values).norm(), 1e-15);
}

TEST(RelativeDistance, Basics) {
  const Vec a = Vec::Ones(4);
  EXPECT_EQ(relative_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(relative_distance(a, 2 * a), 0.5);
}

TEST(BoundaryEndpoint, OnFaceNonnegativeAtPlateauValue) {
  const auto& s = test::smoke();
  const PassFixture& fx = pass_at(2);
  ASSERT_EQ(fx.report.status, "ok") << fx.report.message;
  // Same starts as the second-solution pipeline.
  const Vec unit = fx.first.u.values / e_norm(fx.first.u, s.data.p, s.data.gamma);
  const MuLambdaResult ml = mu_lambda(fx.lambda, *s.ctx.mu0, s.ctx.extreme.lambda_star, fx.first.J, s.data,
                                      {unit, s.ctx.extreme.u_star.values});
  EXPECT_EQ(ml.mu_lambda, fx.report.mu_lambda);
  const Field v = boundary_endpoint(fx.lambda, ml.mu_lambda, s.data, {ml.endpoint.v.values, unit});
  const Terms t = energy_terms(v.values, s.data);
  EXPECT_LE(std::fabs(t.H(fx.report.mu_lambda)), 1e-7 * t.A);
  EXPECT_LT(t.F, 0.0);
  EXPECT_GE(v.values.minCoeff(), 0.0);
  EXPECT_LE(std::fabs(reduced_J(v.values, fx.lambda, s.data) - fx.report.J_face), 1e-6 * std::fabs(fx.report.J_face));
}

TEST(OptimizePath, DescentLevelAndGeometry) {
  const PassFixture& fx = pass_at(2);
  ASSERT_EQ(fx.report.status, "ok") << fx.report.message;
  const PassResult& r = fx.report.pass;
  ASSERT_FALSE(r.c_history.empty());
  for (std::size_t k = 1; k < r.c_history.size(); ++k) EXPECT_LE(r.c_history[k], r.c_history[k - 1]);
  EXPECT_LE(r.c_descent, r.c_history.front());
  EXPECT_LT(r.c_lambda, 0.0);
  EXPECT_GT(r.c_lambda, fx.report.J_mu0);
  EXPECT_GT(r.saddle_knot, 0);
  EXPECT_LT(r.saddle_knot, static_cast<int>(r.path.knots.size()) - 1);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(r.geometry_checks.items[static_cast<std::size_t>(i)], Tri::True) << i;
}

TEST(OptimizePath, KnotDoublingStable) {
  const auto& s = test::smoke();
  const PassFixture& fx = pass_at(2);
  ASSERT_EQ(fx.report.status, "ok") << fx.report.message;
  const PassResult& r = fx.report.pass;
  PathOptions o;
  o.knots = 2 * static_cast<int>(r.path.knots.size());
  const PassResult d = optimize_path(fx.lambda, r.path.knots.front(), r.path.knots.back(), s.data, o);
  EXPECT_LE(test::rel_err(d.c_lambda, r.c_lambda), 1e-3);
}

TEST(GeometryChecklist, NotApplicableAtOrBelowLambdaStar) {
  const auto& s = test::smoke();
  const PassFixture& fx = pass_at(1);
  GeometryInputs in;
  in.lambda = s.ctx.extreme.lambda_star;
  in.lambda_star = s.ctx.extreme.lambda_star;
  const GeometryChecks g = geometry_checklist(in, fx.first.u, fx.first.u, fx.report.pass.path, s.data, {}, 2, 1);
  for (Tri t : g.items) EXPECT_EQ(t, Tri::NotApplicable);
  EXPECT_FALSE(g.all_pass());
}

TEST(RefineSaddle, SecondSolutionProperties) {
  const auto& s = test::smoke();
  for (int k : {1, 2, 3}) {
    const PassFixture& fx = pass_at(k);
    ASSERT_EQ(fx.report.status, "ok") << fx.report.message;
    ASSERT_TRUE(fx.report.saddle.has_value());
    const BranchPoint& b = *fx.report.saddle;
    EXPECT_LT(b.report.phi, 0.0);
    EXPECT_GT(b.report.phi, fx.report.J_mu0);
    EXPECT_LE(b.report.residual, 1e-5);
    EXPECT_GT(fx.report.saddle_distance, 1e-2);
    EXPECT_GE(b.min_value, 0.0);
    EXPECT_LT(b.report.tail_fraction, 0.01);
    const Terms t = energy_terms(b.u.values, s.data);
    EXPECT_LE(std::fabs(t.H(fx.lambda) - t.F), 1e-8 * (std::fabs(t.F) + t.A));
  }
}

TEST(RefineSaddle, StartingAtFirstSolutionIsRejected) {
  const auto& s = test::smoke();
  const PassFixture& fx = pass_at(1);
  try {
    refine_saddle(fx.first.u, fx.lambda, s.data, fx.first.u);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConvergedToFirstSolution);
  }
}

TEST(SecondEndpoint, SpreadReported) {
  const auto& s = test::smoke();
  const PassFixture& fx = pass_at(2);
  SecondSolutionOptions o;
  o.second_endpoint = true;
  const PassReport r = second_solution(fx.lambda, s.ctx, fx.first, s.data, o);
  ASSERT_EQ(r.status, "ok") << r.message;
  EXPECT_TRUE(r.second_run);
  ASSERT_EQ(r.second_status, "ok");
  EXPECT_LE(test::rel_err(r.c_lambda_second, r.pass.c_lambda), 1e-2);
}

}  // namespace
}  // namespace plap
