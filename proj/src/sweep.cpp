#include "plap/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "plap/errors.hpp"
#include "plap/util.hpp"

namespace plap {

namespace {

Vec unit(const Vec& u, const ProblemData& data) {
  return u / e_norm(*data.domain, u, data.p, data.gamma);
}

template <class F>
void record(std::string& status, std::string& message, F&& body) {
  try {
    body();
  } catch (const SolverError& e) {
    status = std::string(to_string(e.kind()));
    message = e.what();
  } catch (const std::exception& e) {
    status = "Error";
    message = e.what();
  }
}

}  // namespace

bool SweepResult::any_error() const {
  for (const auto& r : rows)
    if (r.status != "ok") return true;
  for (const auto& p : passes)
    if (p.status != "ok") return true;
  return false;
}

SweepContext prepare_sweep(const ProblemData& data, const EigenOptions& eigen,
                           const ExtremalOptions& extremal, int star_steps) {
  SweepContext ctx;
  ctx.eig = lambda1(data, nullptr, eigen);
  ctx.extreme = lambda_star(data, ctx.eig, extremal);
  if (ctx.extreme.infeasible) {
    ctx.mu0_error = "InfeasibleConstraint: lambda* is infinite";
    return ctx;
  }
  std::string status, message;
  record(status, message, [&] {
    const AtStarResult at = solve_at_star(data, ctx.eig, ctx.extreme.lambda_star, star_steps);
    ctx.star_minimizers = at.minimizers;
    std::vector<Vec> mins;
    for (const Field& m : at.minimizers) mins.push_back(m.values);
    ctx.mu0 = separation_mu0(data, ctx.eig.lambda1, ctx.extreme.lambda_star, mins);
  });
  if (!ctx.mu0) ctx.mu0_error = message;
  return ctx;
}

PassReport second_solution(double lambda, const SweepContext& ctx, const BranchPoint& first,
                           const ProblemData& data, const SecondSolutionOptions& opt) {
  PassReport rep;
  rep.lambda = lambda;
  if (!ctx.mu0) {
    rep.status = "SeparationFailed";
    rep.message = ctx.mu0_error;
    return rep;
  }
  rep.mu0 = *ctx.mu0;
  rep.J_mu0 = first.J;
  const double lstar = ctx.extreme.lambda_star;
  record(rep.status, rep.message, [&] {
    const Vec v_first = unit(first.u.values, data);
    const MuLambdaResult ml =
        mu_lambda(lambda, rep.mu0, lstar, rep.J_mu0, data, {v_first, ctx.extreme.u_star.values},
                  opt.plateau_tol);
    rep.mu_lambda = ml.mu_lambda;
    rep.J_face = ml.J_face;
    rep.bisections = ml.bisections;
    const Field v = boundary_endpoint(lambda, rep.mu_lambda, data, {ml.endpoint.v.values, v_first},
                                      opt.face_tol);
    const Field v_fibered(data.domain, fiber_scale(v.values, lambda, data) * v.values);
    rep.pass = optimize_path(lambda, first.u, v_fibered, data, opt.path);
    GeometryInputs gi;
    gi.lambda = lambda;
    gi.lambda_star = lstar;
    gi.mu0 = rep.mu0;
    gi.mu_lambda = rep.mu_lambda;
    gi.J_mu0 = rep.J_mu0;
    gi.J_face = rep.J_face;
    gi.plateau_tol = opt.plateau_tol;
    gi.face_tol = opt.face_tol;
    gi.c_lambda = rep.pass.c_lambda;
    rep.pass.geometry_checks =
        geometry_checklist(gi, first.u, v, rep.pass.path, data, {}, opt.geometry_samples, opt.seed);
    rep.saddle = refine_saddle(rep.pass.saddle, lambda, data, first.u, opt.separation);
    rep.saddle_distance = relative_distance(rep.saddle->u.values, first.u.values);

    if (opt.second_endpoint) {
      rep.second_run = true;
      rep.second_status = "ok";
      std::string msg;
      record(rep.second_status, msg, [&] {
        std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
        std::vector<Vec> starts{v_first};
        for (int s = 0; s < 4; ++s) {
          Vec r = ctx.extreme.u_star.values;
          for (Eigen::Index i = 0; i < r.size(); ++i) r[i] *= 0.5 + uniform01(rng);
          starts.push_back(r);
        }
        const Field v2 = boundary_endpoint(lambda, rep.mu_lambda, data, starts, opt.face_tol);
        rep.endpoint_distance = relative_distance(v2.values, v.values);
        const Field v2f(data.domain, fiber_scale(v2.values, lambda, data) * v2.values);
        rep.c_lambda_second = optimize_path(lambda, first.u, v2f, data, opt.path).c_lambda;
      });
    }
  });
  return rep;
}

EpsilonProbe probe_epsilon(const SweepContext& ctx, const ProblemData& data, double step, int max_steps,
                           const BranchOptions& options) {
  EpsilonProbe probe;
  probe.step = step;
  const double lstar = ctx.extreme.lambda_star;
  probe.last_lambda = lstar;
  if (ctx.extreme.infeasible || !ctx.mu0) {
    probe.stop_status = ctx.extreme.infeasible ? "InfeasibleConstraint" : "SeparationFailed";
    probe.stop_message = ctx.mu0_error;
    return probe;
  }
  std::vector<Vec> warm;
  if (!ctx.star_minimizers.empty()) warm.push_back(ctx.star_minimizers.back().values);
  for (int k = 1; k <= max_steps; ++k) {
    const double lam = lstar * (1.0 + k * step);
    bool ok = false;
    record(probe.stop_status, probe.stop_message, [&] {
      const BranchPoint b = solve_past_star(lam, *ctx.mu0, lstar, data, warm, options);
      warm.insert(warm.begin(), unit(b.u.values, data));
      if (warm.size() > 2) warm.pop_back();
      ok = true;
    });
    if (!ok) return probe;
    probe.steps = k;
    probe.last_lambda = lam;
    probe.epsilon = lam - lstar;
  }
  probe.exhausted = true;
  return probe;
}

SweepResult sweep(const std::vector<double>& lambdas, const SweepContext& ctx, const ProblemData& data,
                  const SweepOptions& opt) {
  if (!std::is_sorted(lambdas.begin(), lambdas.end()))
    fail(ErrorKind::InvalidArgument, "lambda grid must be sorted ascending");
  const double lstar = ctx.extreme.infeasible ? std::numeric_limits<double>::infinity()
                                              : ctx.extreme.lambda_star;
  const std::size_t n = lambdas.size();

  // Below or at λ*: two independent warm-start chains.
  std::vector<SweepRow> plus(n), minus(n);
  parallel_for(
      2,
      [&](std::size_t chain) {
        std::optional<Field> warm;
        auto& out = chain == 0 ? plus : minus;
        for (std::size_t i = 0; i < n; ++i) {
          const double lam = lambdas[i];
          if (lam > lstar) continue;
          if (i > 0 && lambdas[i - 1] == lam) {
            out[i] = out[i - 1];
            continue;
          }
          SweepRow row;
          row.lambda = lam;
          row.branch = chain == 0 ? Branch::NPlus : Branch::NMinus;
          record(row.status, row.message, [&] {
            row.point = chain == 0 ? solve_nplus(lam, data, ctx.eig, warm, opt.branch)
                                   : solve_nminus(lam, data, warm, opt.branch);
            warm = row.point->u;
          });
          out[i] = std::move(row);
        }
      },
      opt.threads);

  // Past λ*: restricted minimizer chain, then the mountain pass.
  std::vector<SweepRow> first(n), second(n);
  std::vector<std::optional<PassReport>> passes(n);
  std::vector<Vec> warm;
  if (!ctx.star_minimizers.empty()) warm.push_back(ctx.star_minimizers.back().values);
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = lambdas[i];
    if (!(lam > lstar)) continue;
    if (i > 0 && lambdas[i - 1] == lam) {
      first[i] = first[i - 1];
      second[i] = second[i - 1];
      passes[i] = passes[i - 1];
      continue;
    }
    SweepRow row;
    row.lambda = lam;
    row.branch = Branch::Restricted;
    if (!ctx.mu0) {
      row.status = "SeparationFailed";
      row.message = ctx.mu0_error;
    } else {
      record(row.status, row.message, [&] {
        row.point = solve_past_star(lam, *ctx.mu0, lstar, data, warm, opt.branch);
        warm.insert(warm.begin(), unit(row.point->u.values, data));
        if (warm.size() > 2) warm.pop_back();
      });
    }
    if (opt.mountain_pass) {
      SweepRow mp;
      mp.lambda = lam;
      mp.branch = Branch::MountainPass;
      if (row.point) {
        PassReport rep = second_solution(lam, ctx, *row.point, data, opt.second);
        mp.status = rep.status;
        mp.message = rep.message;
        mp.point = rep.saddle;
        passes[i] = std::move(rep);
      } else {
        mp.status = row.status;
        mp.message = "no first solution: " + row.message;
      }
      second[i] = std::move(mp);
    }
    first[i] = std::move(row);
  }

  SweepResult res;
  for (std::size_t i = 0; i < n; ++i) {
    if (lambdas[i] > lstar) {
      res.rows.push_back(first[i]);
      if (opt.mountain_pass) res.rows.push_back(second[i]);
      if (passes[i]) res.passes.push_back(*passes[i]);
    } else {
      res.rows.push_back(plus[i]);
      res.rows.push_back(minus[i]);
    }
  }
  return res;
}

}  // namespace plap
