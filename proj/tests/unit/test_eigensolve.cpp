#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <numbers>

#include "plap/eigensolve.hpp"
#include "plap/errors.hpp"
#include "plap/kernels.hpp"
#include "support.hpp"

namespace plap {
namespace {

using std::numbers::pi;

// Smallest λ of K v = λ M_h v by a dense Cholesky reduction; M_h may be
// singular (localized h), K is positive definite.
double dense_lambda1(const ProblemData& data) {
  const Domain& d = *data.domain;
  const auto m = static_cast<Eigen::Index>(d.interior_count());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    int i, j;
    d.interior_ij(static_cast<std::size_t>(k), i, j);
    if (d.dim == 1) {
      K(k, k) = 2 / d.dx;
      for (int o : {-1, 1})
        if (long q = d.interior_index(i + o, 0); q >= 0) K(k, q) = -1 / d.dx;
    } else {
      K(k, k) = 4;
      const int di[4] = {-1, 1, 0, 0}, dj[4] = {0, 0, -1, 1};
      for (int t = 0; t < 4; ++t)
        if (long q = d.interior_index(i + di[t], j + dj[t]); q >= 0) K(k, q) = -1;
    }
  }
  const Eigen::MatrixXd Linv = K.llt().matrixL().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::MatrixXd C = Linv * data.wh.asDiagonal() * Linv.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
  return 1.0 / es.eigenvalues().maxCoeff();
}

TEST(Lambda1, UnitIntervalApproachesPiSquared) {
  double prev = 1e9;
  for (int n : {51, 101, 201}) {
    const ProblemData data = test::constant_problem(1, 0.5, n, 2.0, 3.0, 1.0, -1.0);
    const EigenResult r = lambda1(data);
    const double err = test::rel_err(r.lambda1, pi * pi);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(Lambda1, DoublingHHalvesEigenvalue) {
  const ProblemData one = test::constant_problem(1, 0.5, 101, 2.5, 3.5, 1.0, -1.0);
  const ProblemData two = test::constant_problem(1, 0.5, 101, 2.5, 3.5, 2.0, -1.0);
  EXPECT_LE(test::rel_err(lambda1(two).lambda1, 0.5 * lambda1(one).lambda1), 1e-7);
}

TEST(Lambda1, MatchesDenseOracleP2) {
  for (int dim : {1, 2}) {
    auto d = build_domain(dim, 3.0, dim == 1 ? 201 : 31);
    Vec h(d->node_count());
    for (std::size_t k = 0; k < d->node_count(); ++k) {
      const int i = static_cast<int>(k % static_cast<std::size_t>(d->n));
      const int j = static_cast<int>(k / static_cast<std::size_t>(d->n));
      const double r = dim == 1 ? std::fabs(d->coord(i)) : std::hypot(d->coord(i), d->coord(j));
      h[static_cast<Eigen::Index>(k)] = r < 1.5 ? 1.0 + 0.3 * std::cos(r) : 0.0;
    }
    const auto nodes = static_cast<Eigen::Index>(d->node_count());
    const ProblemData data =
        make_problem(d, 2.0, 3.0, WeightField(d, h), WeightField(d, Vec::Constant(nodes, -1.0)), 0.0);
    const EigenResult r = lambda1(data);
    EXPECT_LE(test::rel_err(r.lambda1, dense_lambda1(data)), 1e-6) << "dim=" << dim;
    EXPECT_LE(r.residual, 1e-6);
  }
}

TEST(Lambda1, EigenfunctionPositiveNormalizedSeedIndependent) {
  const ProblemData data = test::random_problem(1, 2.0, 81, 3.0, 4.0, 5);
  EigenOptions a, b;
  a.seed = 1;
  b.seed = 99;
  const EigenResult ra = lambda1(data, nullptr, a), rb = lambda1(data, nullptr, b);
  EXPECT_GE(ra.phi1.values.minCoeff(), 0.0);
  EXPECT_NEAR(kernels::active().power_sum(ra.phi1.values.data(), data.wh.data(), 79, 3.0), 1.0, 1e-10);
  EXPECT_LE((ra.phi1.values - rb.phi1.values).norm(), 1e-4 * ra.phi1.values.norm());
  EXPECT_LE(ra.residual, 1e-6);
}

TEST(Lambda1, NestedMasksAreMonotone) {
  const ProblemData data = test::constant_problem(2, 3.0, 31, 2.0, 3.0, 1.0, -1.0);
  const Domain& d = *data.domain;
  std::vector<char> small(d.interior_count()), large(d.interior_count());
  for (std::size_t k = 0; k < d.interior_count(); ++k) {
    small[k] = d.interior_radius(k) < 1.5;
    large[k] = d.interior_radius(k) < 2.5;
  }
  const double ls = lambda1(data, &small).lambda1, ll = lambda1(data, &large).lambda1;
  const double full = lambda1(data).lambda1;
  EXPECT_GE(ls, ll);
  EXPECT_GE(ll, full);
}

TEST(Lambda1, NoAdmissibleFieldWhenHNonpositive) {
  const ProblemData data = test::constant_problem(1, 1.0, 21, 2.0, 3.0, -1.0, 1.0);
  try {
    lambda1(data);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoAdmissibleField);
  }
}

TEST(Hypotheses, NegativeFViolatesF1) {
  const ProblemData data = test::constant_problem(1, 2.0, 41, 2.0, 3.0, 1.0, -1.0);
  const HypothesisReport r = validate_hypotheses(data, lambda1(data));
  EXPECT_FALSE(r.F1);
  EXPECT_TRUE(r.F_inf);
}

TEST(Hypotheses, NoZeroNodesGivesF2NotApplicable) {
  auto d = build_domain(1, 4.0, 81);
  Vec f(81);
  for (int i = 0; i < 81; ++i) f[i] = std::fabs(d->coord(i)) < 1.0 ? 1.0 : -2.0;
  const ProblemData data =
      make_problem(d, 2.0, 3.0, WeightField(d, Vec::Constant(81, 1.0)), WeightField(d, f));
  const HypothesisReport r = validate_hypotheses(data, lambda1(data));
  EXPECT_TRUE(r.F1);
  EXPECT_EQ(r.F2, Tri::NotApplicable);
  EXPECT_TRUE(r.F_inf);
  EXPECT_EQ(r.count_f_zero, 0u);
  EXPECT_TRUE(r.F_phi1);
  EXPECT_LT(r.f_phi1_integral, 0.0);
}

TEST(Hypotheses, PresetSatisfiesAll) {
  const auto& s = test::smoke();
  const HypothesisReport r = validate_hypotheses(s.data, s.ctx.eig);
  EXPECT_TRUE(r.F1);
  EXPECT_TRUE(r.F_inf);
  EXPECT_TRUE(r.F_phi1);
  EXPECT_NE(r.F2, Tri::False);
  EXPECT_GT(r.count_f_zero, 0u);
}

}  // namespace
}  // namespace plap
