#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "plap/app.hpp"
#include "plap/config.hpp"
#include "plap/functionals.hpp"
#include "plap/sweep.hpp"
#include "plap/util.hpp"

namespace plap::test {

inline ProblemData constant_problem(int dim, double L, int n, double p, double gamma, double h,
                                    double f, double eps_reg = 1e-10) {
  auto d = build_domain(dim, L, n);
  const auto k = static_cast<Eigen::Index>(d->node_count());
  return make_problem(d, p, gamma, WeightField(d, Vec::Constant(k, h)), WeightField(d, Vec::Constant(k, f)),
                      eps_reg);
}

// Random weights on all nodes in [lo, hi].
inline ProblemData random_problem(int dim, double L, int n, double p, double gamma, std::uint64_t seed,
                                  double eps_reg = 1e-10) {
  auto d = build_domain(dim, L, n);
  const std::size_t k = d->node_count();
  Vec h = random_field(k, seed, 0.2, 1.5);
  Vec f = random_field(k, seed + 17, -1.0, 1.0);
  return make_problem(d, p, gamma, WeightField(d, h), WeightField(d, f), eps_reg);
}

inline double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300});
}

// Coarse preset (configs/smoke_1d.json values) shared by the solver tests.
inline RunConfig smoke_config() {
  RunConfig c = preset_config();
  c.L = 6.0;
  c.n = 51;
  c.f.params["bumps"][0]["radius"] = 0.6;
  c.f.params["zero_width"] = 0.25;
  return c;
}

struct SmokeRun {
  RunConfig config;
  ProblemData data;
  SweepContext ctx;
};

// Computed once per test binary: λ₁, λ*, the at-star chain and μ₀.
inline const SmokeRun& smoke() {
  static const SmokeRun run = [] {
    SmokeRun r;
    r.config = smoke_config();
    r.data = problem_from_config(r.config);
    r.ctx = prepare_sweep(r.data, {}, {}, r.config.solver.star_steps);
    return r;
  }();
  return run;
}

}  // namespace plap::test
