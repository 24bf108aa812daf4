#include <cmath>

#include "plap/kernels.hpp"

namespace plap::kernels::scalar {

namespace {

// |x|^(q-1) for ax = |x| >= 0, with exact paths for the common exponents.
inline double abs_pow_m1(double ax, double q) {
  if (q == 2.0) return ax;
  if (q == 3.0) return ax * ax;
  if (q == 4.0) return ax * ax * ax;
  if (q == 1.5) return std::sqrt(ax);
  if (ax == 0.0) return 0.0;
  return std::pow(ax, q - 1.0);
}

inline double abs_pow(double ax, double q) {
  if (q == 2.0) return ax * ax;
  if (q == 3.0) return ax * ax * ax;
  if (q == 4.0) {
    const double s = ax * ax;
    return s * s;
  }
  if (q == 1.5) return ax * std::sqrt(ax);
  if (ax == 0.0) return 0.0;
  return std::pow(ax, q);
}

}  // namespace

double power_sum(const double* x, const double* w, std::size_t n, double q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += w[i] * abs_pow(std::fabs(x[i]), q);
  return sum;
}

double power_sum_grad(const double* x, const double* w, std::size_t n, double q, double scale,
                      double* grad) {
  double sum = 0.0;
  const double qs = q * scale;
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = std::fabs(x[i]);
    const double m1 = abs_pow_m1(ax, q);
    sum += w[i] * (m1 * ax);
    grad[i] += qs * w[i] * std::copysign(m1, x[i]);
  }
  return sum;
}

void power_pair(const double* t, std::size_t n, double e, double* value, double* factor) {
  if (e == 1.0) {
    for (std::size_t i = 0; i < n; ++i) {
      value[i] = t[i];
      factor[i] = 1.0;
    }
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t[i];
    double f;
    if (e == 1.5) {
      f = std::sqrt(ti);
    } else if (e == 2.0) {
      f = ti;
    } else if (ti == 0.0) {
      f = 0.0;
    } else {
      f = std::pow(ti, e - 1.0);
    }
    factor[i] = f;
    value[i] = f * ti;
  }
}

}  // namespace plap::kernels::scalar
