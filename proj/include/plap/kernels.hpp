#pragma once

// Data-parallel inner loops of the energy evaluation.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds
// with PLAP_HAVE_AVX2, an AVX2/FMA variant. The active table is chosen once
// at startup from CPUID and can be overridden with PLAP_KERNELS=scalar|avx2
// or select_backend(). Both variants agree to a few ulp; exponents 1, 1.5,
// 2, 3 and 4 take exact fast paths in both, so p = 2 problems are
// bit-identical per element across backends.

#include <cstddef>
#include <span>
#include <string_view>

namespace plap::kernels {

enum class Backend { Scalar, Avx2 };

// Σ w_i |x_i|^q
using PowerSumFn = double (*)(const double* x, const double* w, std::size_t n, double q);

// Returns Σ w_i |x_i|^q and accumulates grad_i += scale * q * w_i |x_i|^(q-2) x_i.
using PowerSumGradFn = double (*)(const double* x, const double* w, std::size_t n, double q,
                                  double scale, double* grad);

// value_i = t_i^e, factor_i = t_i^(e-1); t_i >= 0. factor is 0 where t_i == 0 and e < 1.
using PowerPairFn = void (*)(const double* t, std::size_t n, double e, double* value,
                             double* factor);

struct Table {
  Backend backend;
  const char* name;
  PowerSumFn power_sum;
  PowerSumGradFn power_sum_grad;
  PowerPairFn power_pair;
};

namespace scalar {
double power_sum(const double* x, const double* w, std::size_t n, double q);
double power_sum_grad(const double* x, const double* w, std::size_t n, double q, double scale,
                      double* grad);
void power_pair(const double* t, std::size_t n, double e, double* value, double* factor);
}  // namespace scalar

#if defined(PLAP_HAVE_AVX2)
namespace avx2 {
double power_sum(const double* x, const double* w, std::size_t n, double q);
double power_sum_grad(const double* x, const double* w, std::size_t n, double q, double scale,
                      double* grad);
void power_pair(const double* t, std::size_t n, double e, double* value, double* factor);
}  // namespace avx2
#endif

bool avx2_supported();

// Throws std::invalid_argument if the backend is unavailable on this machine.
const Table& table_for(Backend backend);
const Table& active();
void select_backend(Backend backend);

// Span conveniences over the active table.
double power_sum(std::span<const double> x, std::span<const double> w, double q);
double power_sum_grad(std::span<const double> x, std::span<const double> w, double q, double scale,
                      std::span<double> grad);
void power_pair(std::span<const double> t, double e, std::span<double> value,
                std::span<double> factor);

}  // namespace plap::kernels
