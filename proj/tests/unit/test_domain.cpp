#include <gtest/gtest.h>

#include <stdexcept>

#include "plap/errors.hpp"
#include "support.hpp"

namespace plap {
namespace {

TEST(BuildDomain, SmallestGrid) {
  auto d = build_domain(1, 0.5, 3);
  EXPECT_EQ(d->interior_count(), 1u);
  EXPECT_DOUBLE_EQ(d->coord(0), -0.5);
  EXPECT_DOUBLE_EQ(d->coord(1), 0.0);
  EXPECT_DOUBLE_EQ(d->coord(2), 0.5);
}

TEST(BuildDomain, Spacing) { EXPECT_DOUBLE_EQ(build_domain(1, 1.0, 101)->dx, 0.02); }

TEST(BuildDomain, InteriorCount2D) { EXPECT_EQ(build_domain(2, 1.0, 101)->interior_count(), 99u * 99u); }

TEST(BuildDomain, RejectsBadInput) {
  EXPECT_THROW(build_domain(3, 1.0, 11), SolverError);
  EXPECT_THROW(build_domain(1, 0.0, 11), SolverError);
  EXPECT_THROW(build_domain(1, -1.0, 11), SolverError);
  EXPECT_THROW(build_domain(2, 1.0, 2), SolverError);
}

TEST(BuildDomain, CoordinatesReproducible) {
  auto a = build_domain(2, 3.7, 41), b = build_domain(2, 3.7, 41);
  for (int k = 0; k < 41; ++k) EXPECT_EQ(a->coord(k), b->coord(k));
  EXPECT_EQ(a->coord(20), 0.0);
}

TEST(Field, LengthMustMatchInterior) {
  auto d = build_domain(1, 1.0, 11);
  EXPECT_THROW(Field(d, Vec::Zero(11)), SolverError);
  EXPECT_NO_THROW(Field(d, Vec::Zero(9)));
}

TEST(WeightField, MasksPartitionNodes) {
  auto d = build_domain(2, 1.0, 9);
  Vec w = random_field(d->node_count(), 3, -1.0, 1.0);
  w[0] = 0.0;
  w[5] = 1e-13;
  WeightField f(d, w);
  EXPECT_EQ(f.count_positive() + f.count_negative() + f.count_zero(), d->node_count());
  EXPECT_TRUE(f.zero[0]);
  EXPECT_TRUE(f.zero[5]);
  for (std::size_t i = 0; i < d->node_count(); ++i)
    EXPECT_EQ(f.positive[i] + f.negative[i] + f.zero[i], 1);
}

TEST(GradNormPowers, ZeroField) {
  auto d = build_domain(2, 1.0, 7);
  const Vec g = grad_norm_powers(*d, Vec::Zero(d->interior_count()), 3.0, 0.0);
  EXPECT_EQ(g.size(), static_cast<Eigen::Index>(d->cell_count()));
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

// Linear interior values; the cells touching the boundary see the zero
// Dirichlet value and are skipped.
Vec linear_1d(const Domain& d, double slope) {
  Vec u(d.interior_count());
  for (int i = 1; i < d.n - 1; ++i) u[i - 1] = slope * d.coord(i) + 100.0;
  return u;
}

TEST(GradNormPowers, LinearSlopeTwoCubed) {
  auto d = build_domain(1, 1.0, 11);
  const Vec g = grad_norm_powers(*d, linear_1d(*d, 2.0), 3.0, 0.0);
  for (int c = 1; c < d->n - 2; ++c) EXPECT_NEAR(g[c], 8.0, 1e-10);
}

TEST(GradNormPowers, RegularizedUnitSlope) {
  auto d = build_domain(1, 1.0, 11);
  const Vec g = grad_norm_powers(*d, linear_1d(*d, 1.0), 2.0, 1.0);
  for (int c = 1; c < d->n - 2; ++c) EXPECT_NEAR(g[c], 2.0, 1e-10);
}

TEST(GradNormPowers, LinearFieldGradientExact2D) {
  auto d = build_domain(2, 1.0, 9);
  Vec u(d->interior_count());
  for (std::size_t k = 0; k < d->interior_count(); ++k) {
    int i, j;
    d->interior_ij(k, i, j);
    u[static_cast<Eigen::Index>(k)] = 3.0 * d->coord(i) - 2.0 * d->coord(j) + 10.0;
  }
  const CellGradient g = cell_gradient(*d, u);
  // Both triangles of every square whose four corners are interior.
  for (int j = 1; j < d->n - 2; ++j)
    for (int i = 1; i < d->n - 2; ++i)
      for (int t = 0; t < 2; ++t) {
        const auto c = 2 * (static_cast<Eigen::Index>(j) * (d->n - 1) + i) + t;
        EXPECT_NEAR(g.gx[c], 3.0, 1e-12);
        EXPECT_NEAR(g.gy[c], -2.0, 1e-12);
      }
}

TEST(GradNormPowers, SquaredStencilP2) {
  auto d = build_domain(2, 1.0, 7);
  const Vec u = random_field(d->interior_count(), 12);
  const Vec g = grad_norm_powers(*d, u, 2.0, 0.0);
  auto at = [&](int i, int j) {
    const long k = d->interior_index(i, j);
    return k < 0 ? 0.0 : u[k];
  };
  Eigen::Index c = 0;
  for (int j = 0; j < d->n - 1; ++j)
    for (int i = 0; i < d->n - 1; ++i) {
      const double lower = std::pow(at(i + 1, j) - at(i, j), 2) + std::pow(at(i, j + 1) - at(i, j), 2);
      const double upper =
          std::pow(at(i + 1, j + 1) - at(i, j + 1), 2) + std::pow(at(i + 1, j + 1) - at(i + 1, j), 2);
      EXPECT_NEAR(g[c++], lower / (d->dx * d->dx), 1e-10);
      EXPECT_NEAR(g[c++], upper / (d->dx * d->dx), 1e-10);
    }
}

TEST(Integrate, ConstantOneInterval) {
  for (int n : {11, 101}) {
    auto d = build_domain(1, 1.0, n);
    EXPECT_NEAR(integrate_nodes(*d, Vec::Ones(n)), 2.0, 1e-12);
  }
}

TEST(Integrate, ConstantOneSquare) {
  auto d = build_domain(2, 1.0, 41);
  EXPECT_NEAR(integrate_nodes(*d, Vec::Ones(41 * 41)), 4.0, 1e-12);
}

TEST(Integrate, OddFunctionVanishes) {
  auto d = build_domain(1, 2.0, 61);
  Vec v(61);
  for (int i = 0; i < 61; ++i) v[i] = std::sin(d->coord(i)) * (1 + d->coord(i) * d->coord(i));
  EXPECT_NEAR(integrate_nodes(*d, v), 0.0, 1e-13);
}

TEST(Integrate, LinearAndMonotone) {
  auto d = build_domain(2, 1.0, 15);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Vec a = random_field(d->interior_count(), s);
    const Vec b = random_field(d->interior_count(), s + 100);
    EXPECT_NEAR(integrate_interior(*d, 2.0 * a - 3.0 * b),
                2.0 * integrate_interior(*d, a) - 3.0 * integrate_interior(*d, b), 1e-12);
    const Vec hi = a.cwiseMax(b);
    EXPECT_LE(integrate_interior(*d, a), integrate_interior(*d, hi));
    const Vec ca = random_field(d->cell_count(), s + 7), cb = ca.array() + 0.1;
    EXPECT_LE(integrate_cells(*d, ca), integrate_cells(*d, cb));
  }
}

TEST(ENorm, ZeroAndScaling) {
  auto d = build_domain(2, 1.0, 11);
  EXPECT_EQ(e_norm(*d, Vec::Zero(d->interior_count()), 2.5, 3.5), 0.0);
  const Vec u = random_field(d->interior_count(), 9);
  for (double t : {0.3, 1.0, 7.0}) EXPECT_NEAR(e_norm(*d, t * u, 2.5, 3.5), t * e_norm(*d, u, 2.5, 3.5), 1e-12 * t);
}

TEST(ENorm, TriangleInequality) {
  auto d = build_domain(1, 2.0, 41);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Vec a = random_field(d->interior_count(), 2 * s), b = random_field(d->interior_count(), 2 * s + 1);
    for (double p : {1.5, 2.0, 3.0})
      EXPECT_LE(e_norm(*d, a + b, p, p + 1.0), e_norm(*d, a, p, p + 1.0) + e_norm(*d, b, p, p + 1.0) + 1e-12);
  }
}

TEST(ENorm, HatFunctionHandQuadrature) {
  // One interior node of height 2 at spacing 1: ∫|u'|² = 2·(2/1)²·1 = 8 and
  // lumped ∫|u|⁴ = 1·2⁴ = 16, so ‖u‖ = (8 + 16^{1/2})^{1/2} = √12.
  auto d = build_domain(1, 1.0, 3);
  EXPECT_NEAR(e_norm(*d, Vec::Constant(1, 2.0), 2.0, 4.0), std::sqrt(12.0), 1e-14);
}

}  // namespace
}  // namespace plap
