#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "plap/kernels.hpp"

namespace plap::kernels {

namespace {

const Table kScalar{Backend::Scalar, "scalar", &scalar::power_sum, &scalar::power_sum_grad,
                    &scalar::power_pair};

#if defined(PLAP_HAVE_AVX2)
const Table kAvx2{Backend::Avx2, "avx2", &avx2::power_sum, &avx2::power_sum_grad,
                  &avx2::power_pair};
#endif

const Table* initial_table() {
  const char* env = std::getenv("PLAP_KERNELS");
  if (env != nullptr) {
    const std::string v(env);
    if (v == "scalar") return &kScalar;
    if (v == "avx2" && avx2_supported()) return &table_for(Backend::Avx2);
  }
  if (avx2_supported()) return &table_for(Backend::Avx2);
  return &kScalar;
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{initial_table()};
  return table;
}

}  // namespace

bool avx2_supported() {
#if defined(PLAP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table& table_for(Backend backend) {
  if (backend == Backend::Scalar) return kScalar;
#if defined(PLAP_HAVE_AVX2)
  if (avx2_supported()) return kAvx2;
#endif
  throw std::invalid_argument("AVX2 kernels are not available on this machine");
}

const Table& active() { return *current().load(std::memory_order_acquire); }

void select_backend(Backend backend) {
  current().store(&table_for(backend), std::memory_order_release);
}

double power_sum(std::span<const double> x, std::span<const double> w, double q) {
  return active().power_sum(x.data(), w.data(), x.size(), q);
}

double power_sum_grad(std::span<const double> x, std::span<const double> w, double q, double scale,
                      std::span<double> grad) {
  return active().power_sum_grad(x.data(), w.data(), x.size(), q, scale, grad.data());
}

void power_pair(std::span<const double> t, double e, std::span<double> value,
                std::span<double> factor) {
  active().power_pair(t.data(), t.size(), e, value.data(), factor.data());
}

}  // namespace plap::kernels
