#include <gtest/gtest.h>

#include <vector>

#include "plap/kernels.hpp"
#include "support.hpp"

namespace plap {
namespace {

using kernels::Backend;

class KernelEquivalence : public ::testing::TestWithParam<double> {
 protected:
  void SetUp() override {
    if (!kernels::avx2_supported()) GTEST_SKIP() << "no AVX2 on this host";
  }
};

// Lengths cover empty input, sub-vector tails and several full vectors.
const std::vector<std::size_t> kLengths{0, 1, 3, 4, 5, 7, 8, 9, 31, 64, 257};

TEST_P(KernelEquivalence, PowerSumMatchesScalar) {
  const double q = GetParam();
  const auto& s = kernels::table_for(Backend::Scalar);
  const auto& v = kernels::table_for(Backend::Avx2);
  for (std::size_t n : kLengths) {
    const Vec x = random_field(n, 11 + n, -2.0, 2.0);
    const Vec w = random_field(n, 97 + n, 0.0, 1.0);
    const double a = s.power_sum(x.data(), w.data(), n, q);
    const double b = v.power_sum(x.data(), w.data(), n, q);
    EXPECT_LE(std::fabs(a - b), 1e-13 * std::max(1.0, std::fabs(a))) << "n=" << n;
  }
}

TEST_P(KernelEquivalence, PowerSumGradMatchesScalar) {
  const double q = GetParam();
  const auto& s = kernels::table_for(Backend::Scalar);
  const auto& v = kernels::table_for(Backend::Avx2);
  for (std::size_t n : kLengths) {
    Vec x = random_field(n, 5 + n, -2.0, 2.0);
    if (n > 2) x[1] = 0.0;  // exact zero must give a zero gradient entry
    const Vec w = random_field(n, 7 + n, -1.0, 1.0);
    Vec ga = Vec::Constant(static_cast<Eigen::Index>(n), 0.25), gb = ga;
    const double a = s.power_sum_grad(x.data(), w.data(), n, q, -0.7, ga.data());
    const double b = v.power_sum_grad(x.data(), w.data(), n, q, -0.7, gb.data());
    EXPECT_LE(std::fabs(a - b), 1e-13 * std::max(1.0, std::fabs(a)));
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_LE(std::fabs(ga[i] - gb[i]), 4e-15 * std::max(1.0, std::fabs(ga[i]))) << i;
    if (n > 2) EXPECT_EQ(gb[1], 0.25);
  }
}

TEST_P(KernelEquivalence, PowerPairMatchesScalar) {
  const double e = GetParam() / 2.0;
  const auto& s = kernels::table_for(Backend::Scalar);
  const auto& v = kernels::table_for(Backend::Avx2);
  for (std::size_t n : kLengths) {
    Vec t = random_field(n, 3 + n, 0.0, 4.0);
    if (n > 0) t[0] = 0.0;
    Vec va(n), fa(n), vb(n), fb(n);
    s.power_pair(t.data(), n, e, va.data(), fa.data());
    v.power_pair(t.data(), n, e, vb.data(), fb.data());
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_LE(std::fabs(va[i] - vb[i]), 4e-15 * std::max(1.0, std::fabs(va[i])));
      EXPECT_LE(std::fabs(fa[i] - fb[i]), 4e-15 * std::max(1.0, std::fabs(fa[i])));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Exponents, KernelEquivalence, ::testing::Values(1.5, 2.0, 2.5, 3.0, 4.0, 5.3));

TEST(KernelFastPaths, IntegerExponentsAreBitIdentical) {
  if (!kernels::avx2_supported()) GTEST_SKIP() << "no AVX2 on this host";
  const std::size_t n = 37;
  const Vec t = random_field(n, 1, 0.0, 3.0);
  for (double e : {1.0, 1.5}) {
    Vec va(n), fa(n), vb(n), fb(n);
    kernels::table_for(Backend::Scalar).power_pair(t.data(), n, e, va.data(), fa.data());
    kernels::table_for(Backend::Avx2).power_pair(t.data(), n, e, vb.data(), fb.data());
    EXPECT_EQ(va, vb);
    EXPECT_EQ(fa, fb);
  }
}

TEST(KernelDispatch, SelectBackendSwitchesActiveTable) {
  const Backend before = kernels::active().backend;
  kernels::select_backend(Backend::Scalar);
  EXPECT_EQ(kernels::active().backend, Backend::Scalar);
  if (kernels::avx2_supported()) {
    kernels::select_backend(Backend::Avx2);
    EXPECT_EQ(kernels::active().backend, Backend::Avx2);
  }
  kernels::select_backend(before);
}

TEST(KernelDispatch, EnergyAgreesAcrossBackends) {
  if (!kernels::avx2_supported()) GTEST_SKIP() << "no AVX2 on this host";
  const Backend before = kernels::active().backend;
  const ProblemData data = test::random_problem(2, 1.0, 21, 2.5, 3.5, 4);
  const Vec u = random_field(data.domain->interior_count(), 8);
  kernels::select_backend(Backend::Scalar);
  const double a = phi(u, 1.3, data);
  const Vec ga = phi_grad(u, 1.3, data);
  kernels::select_backend(Backend::Avx2);
  const double b = phi(u, 1.3, data);
  const Vec gb = phi_grad(u, 1.3, data);
  kernels::select_backend(before);
  EXPECT_LE(test::rel_err(a, b), 1e-13);
  EXPECT_LE((ga - gb).norm(), 1e-13 * ga.norm());
}

}  // namespace
}  // namespace plap
