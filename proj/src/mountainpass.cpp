#include "plap/mountainpass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "plap/errors.hpp"
#include "plap/optimize.hpp"
#include "plap/util.hpp"

namespace plap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KnotState {
  double energy = 0.0;
  Vec grad;
};

KnotState evaluate(const Vec& u, double lambda, const ProblemData& data) {
  TermGrads g;
  const Terms t = energy_terms(u, data, g);
  KnotState s;
  s.energy = phi_value(t.H(lambda), t.F, data.p, data.gamma);
  s.grad = (g.A - lambda * g.B) / data.p - g.F / data.gamma;
  return s;
}

double p_norm(const Preconditioner& P, const Vec& v) { return std::sqrt(std::max(0.0, P.inner(v, v))); }

// Upwind tangent (toward the higher neighbour), unit in the P-norm.
Vec tangent(const std::vector<Vec>& x, const std::vector<double>& e, std::size_t i,
            const Preconditioner& P) {
  Vec t;
  if (e[i + 1] > e[i] && e[i] > e[i - 1]) t = x[i + 1] - x[i];
  else if (e[i + 1] < e[i] && e[i] < e[i - 1]) t = x[i] - x[i - 1];
  else t = x[i + 1] - x[i - 1];
  const double n = p_norm(P, t);
  return n > 0.0 ? Vec(t / n) : t;
}

// Equal P-arclength resampling of knots [first, last], endpoints kept.
void reparametrize(std::vector<Vec>& x, std::size_t first, std::size_t last, const Preconditioner& P) {
  if (last <= first + 1) return;
  std::vector<double> s(last - first + 1, 0.0);
  for (std::size_t k = first + 1; k <= last; ++k)
    s[k - first] = s[k - first - 1] + p_norm(P, x[k] - x[k - 1]);
  const double total = s.back();
  if (!(total > 0.0)) return;
  std::vector<Vec> out(x.begin() + static_cast<long>(first), x.begin() + static_cast<long>(last) + 1);
  std::size_t seg = 0;
  const std::size_t m = last - first;
  for (std::size_t k = 1; k < m; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(m);
    while (seg + 1 < m && s[seg + 1] < target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double w = len > 0.0 ? (target - s[seg]) / len : 0.0;
    out[k] = (1.0 - w) * x[first + seg] + w * x[first + seg + 1];
  }
  for (std::size_t k = 1; k < m; ++k) x[first + k] = out[k];
}

double path_length(const std::vector<Vec>& x, const Preconditioner& P) {
  double len = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) len += p_norm(P, x[k] - x[k - 1]);
  return len;
}

}  // namespace

bool GeometryChecks::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](Tri t) { return t == Tri::True; });
}

double relative_distance(const Vec& a, const Vec& b) {
  const double n = std::max(a.norm(), b.norm());
  return n > 0.0 ? (a - b).norm() / n : 0.0;
}

Path straight_path(const Field& from, const Field& to, int knots) {
  if (knots < 8) fail(ErrorKind::InvalidArgument, "a path needs at least 8 knots");
  if (from.domain != to.domain) fail(ErrorKind::InvalidArgument, "endpoints live on different grids");
  Path path;
  for (int k = 0; k < knots; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(knots - 1);
    path.knots.emplace_back(from.domain, (1.0 - t) * from.values + t * to.values);
  }
  return path;
}

Field boundary_endpoint(double lambda, double mu_lambda, const ProblemData& data,
                        const std::vector<Vec>& starts, double face_tol) {
  RestrictedOptions ro;
  ro.boundary_tol = face_tol;
  RestrictedMin rm;
  try {
    rm = face_min(lambda, mu_lambda, data, starts, ro);
  } catch (const SolverError& e) {
    fail(ErrorKind::BoundaryMinimizerNotFound, e.what());
  }
  const Terms t = energy_terms(rm.v.values, data);
  if (!(std::fabs(t.H(mu_lambda)) <= face_tol * t.A) || !(t.F < 0.0))
    fail(ErrorKind::BoundaryMinimizerNotFound, "face minimizer is off H_mu = 0");
  return rm.v;
}

PassResult optimize_path(double lambda, const Field& from, const Field& to, const ProblemData& data,
                         const PathOptions& opt) {
  const Path init = straight_path(from, to, opt.knots);
  const Preconditioner P(data);
  const std::size_t K = init.knots.size();
  std::vector<Vec> x(K);
  for (std::size_t k = 0; k < K; ++k) x[k] = init.knots[k].values;
  const double scale = std::max(p_norm(P, from.values), p_norm(P, to.values));
  const double collapse_len = 1e-8 * scale;

  std::vector<KnotState> st(K);
  auto eval_all = [&](const std::vector<Vec>& xs, std::vector<KnotState>& out) {
    parallel_for(K, [&](std::size_t k) { out[k] = evaluate(xs[k], lambda, data); }, opt.threads);
  };
  auto energies = [](const std::vector<KnotState>& s) {
    std::vector<double> e(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) e[k] = s[k].energy;
    return e;
  };
  auto top = [&](const std::vector<KnotState>& s) {
    std::size_t best = 1;
    for (std::size_t k = 1; k + 1 < K; ++k)
      if (s[k].energy > s[best].energy) best = k;
    return best;
  };
  auto path_max = [](const std::vector<KnotState>& s) {
    double m = -kInf;
    for (const auto& k : s) m = std::max(m, k.energy);
    return m;
  };

  // Moves of the interior knots along `force`, each capped at opt.step of the
  // knot's P-norm.
  auto move = [&](const std::vector<Vec>& xs, const std::vector<Vec>& force, double h) {
    std::vector<Vec> y = xs;
    for (std::size_t k = 1; k + 1 < K; ++k) {
      const double fn = p_norm(P, force[k]);
      const double cap = opt.step * std::max(p_norm(P, xs[k]), 1e-3 * scale);
      const double a = fn * h > cap ? cap / fn : h;
      y[k] = xs[k] + a * force[k];
    }
    return y;
  };

  PassResult res;
  eval_all(x, st);
  res.c_history.push_back(path_max(st));

  // Descent: perpendicular preconditioned force.
  double h = 1.0;
  bool settled = false;
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    res.sweeps = sweep + 1;
    const std::vector<double> e = energies(st);
    std::vector<Vec> force(K);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < K; ++k) {
      const Vec tau = tangent(x, e, k, P);
      const Vec d = P.apply(st[k].grad);
      force[k] = -(d - st[k].grad.dot(tau) * tau);
      worst = std::max(worst, p_norm(P, force[k]) / std::max(1.0, p_norm(P, x[k])));
    }
    if (worst <= opt.force_tol) {
      settled = true;
      break;
    }
    bool accepted = false;
    while (h > 1e-12) {
      std::vector<Vec> y = move(x, force, h);
      reparametrize(y, 0, K - 1, P);
      if (path_length(y, P) < collapse_len) fail(ErrorKind::PathCollapse, "knots merged");
      std::vector<KnotState> sy(K);
      eval_all(y, sy);
      const double c_new = path_max(sy);
      if (std::isfinite(c_new) && c_new <= res.c_history.back()) {
        x = std::move(y);
        st = std::move(sy);
        res.c_history.push_back(c_new);
        accepted = true;
        h = std::min(1.0, 1.5 * h);
        break;
      }
      h *= 0.5;
    }
    if (!accepted) {
      settled = true;  // no admissible descent step left
      break;
    }
  }
  if (!settled && res.sweeps >= opt.max_sweeps && opt.max_sweeps > 0) {
    // The descent is an upper-bound estimate; an unsettled path still feeds the
    // climbing phase unless it is far from stationary.
    const std::vector<double> e = energies(st);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < K; ++k) {
      const Vec tau = tangent(x, e, k, P);
      const Vec d = P.apply(st[k].grad);
      worst = std::max(worst, p_norm(P, d - st[k].grad.dot(tau) * tau) / std::max(1.0, p_norm(P, x[k])));
    }
    if (worst > 1e3 * opt.force_tol) fail(ErrorKind::MaxSweepsExceeded, "string did not settle");
  }
  res.c_descent = path_max(st);

  // Climbing: the top knot reverses its tangential force; the two sides are
  // resampled separately so the climber stays put.
  std::size_t ci = top(st);
  double hc = h > 1e-6 ? h : 1e-3;
  // The climb is not monotone in any merit, so the knot set whose climber has
  // the smallest force is kept.
  std::vector<Vec> best_x = x;
  std::vector<KnotState> best_st = st;
  std::size_t best_ci = ci;
  double best_force = kInf;
  for (int sweep = 0; sweep < opt.max_climb_sweeps; ++sweep) {
    res.climb_sweeps = sweep + 1;
    const std::vector<double> e = energies(st);
    std::vector<Vec> force(K);
    for (std::size_t k = 1; k + 1 < K; ++k) {
      const Vec tau = tangent(x, e, k, P);
      const Vec d = P.apply(st[k].grad);
      const double gt = st[k].grad.dot(tau);
      force[k] = k == ci ? Vec(-d + 2.0 * gt * tau) : Vec(-(d - gt * tau));
    }
    const double climb_force = p_norm(P, force[ci]) / std::max(1.0, p_norm(P, x[ci]));
    if (climb_force < best_force) {
      best_force = climb_force;
      best_x = x;
      best_st = st;
      best_ci = ci;
    }
    if (climb_force <= opt.climb_tol) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    while (hc > 1e-12) {
      std::vector<Vec> y = move(x, force, hc);
      reparametrize(y, 0, ci, P);
      reparametrize(y, ci, K - 1, P);
      if (path_length(y, P) < collapse_len) fail(ErrorKind::PathCollapse, "knots merged");
      std::vector<KnotState> sy(K);
      eval_all(y, sy);
      // Merit: gradient norm at the climber.
      const double gn_new = p_norm(P, P.apply(sy[ci].grad));
      const double gn_old = p_norm(P, P.apply(st[ci].grad));
      if (std::isfinite(sy[ci].energy) && gn_new <= 1.05 * gn_old) {
        x = std::move(y);
        st = std::move(sy);
        accepted = true;
        hc = std::min(1.0, 1.5 * hc);
        break;
      }
      hc *= 0.5;
    }
    if (!accepted) break;
    ci = top(st);
  }
  x = std::move(best_x);
  st = std::move(best_st);
  ci = best_ci;
  res.climb_force = best_force;

  res.saddle_knot = static_cast<int>(ci);
  res.saddle = Field(data.domain, x[ci]);
  res.c_lambda = st[ci].energy;
  res.residual = pde_residual(x[ci], lambda, data);
  for (std::size_t k = 0; k < K; ++k) res.path.knots.emplace_back(data.domain, x[k]);
  return res;
}

GeometryChecks geometry_checklist(const GeometryInputs& in, const Field& u_first, const Field& v_end,
                                  const Path& path, const ProblemData& data,
                                  const std::vector<Vec>& boundary_starts, int samples,
                                  std::uint64_t seed) {
  GeometryChecks g;
  if (!(in.lambda > in.lambda_star)) return g;
  auto tri = [](bool b) { return b ? Tri::True : Tri::False; };

  g.items[0] = tri(in.mu0 < in.mu_lambda && in.mu_lambda < in.lambda_star);

  const Terms tv = energy_terms(v_end.values, data);
  const bool on_face = std::fabs(tv.H(in.mu_lambda)) <= in.face_tol * tv.A && tv.F < 0.0;
  g.items[1] = tri(on_face && std::fabs(in.J_face - in.J_mu0) <= in.plateau_tol * std::fabs(in.J_mu0));

  // (iii) j_λ from face minimizations on H_{μ₀} = 0.
  std::vector<Vec> starts = boundary_starts;
  std::mt19937_64 rng(seed);
  const Vec base = boundary_starts.empty() ? u_first.values : boundary_starts.front();
  for (int s = 0; s < samples; ++s) {
    Vec r = base.cwiseAbs();
    for (Eigen::Index i = 0; i < r.size(); ++i) r[i] *= 0.5 + uniform01(rng);
    starts.push_back(r);
  }
  g.j_lambda = kInf;
  g.j_samples = 0;
  for (const Vec& s : starts) {
    try {
      RestrictedOptions ro;
      ro.boundary_tol = in.face_tol;
      const RestrictedMin rm = face_min(in.lambda, in.mu0, data, {u_first.values, s}, ro);
      g.j_lambda = std::min(g.j_lambda, rm.value);
      ++g.j_samples;
    } catch (const SolverError&) {
    }
  }
  g.items[2] = g.j_samples > 0
                   ? tri(g.j_lambda > in.J_mu0 + in.plateau_tol * std::fabs(in.J_mu0))
                   : Tri::False;

  // (iv) sign change of H_{μ₀} along the knots.
  bool neg = false, pos = false;
  for (const Field& k : path.knots) {
    const double hm = H(k.values, in.mu0, data);
    neg = neg || hm < 0.0;
    pos = pos || hm > 0.0;
  }
  const Terms tu = energy_terms(u_first.values, data);
  g.items[3] = tri(tu.H(in.mu0) < 0.0 && tv.H(in.mu0) > 0.0 && neg && pos);

  // (v) witness path with H_{λ*} < c < 0 throughout: the straight segment
  // between the endpoints, else the optimized path, both sampled densely.
  auto max_h_star = [&](const std::vector<Vec>& knots) {
    double m = -kInf;
    constexpr int kSub = 16;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k)
      for (int s = 0; s <= kSub; ++s) {
        const double w = static_cast<double>(s) / kSub;
        m = std::max(m, H((1.0 - w) * knots[k] + w * knots[k + 1], in.lambda_star, data));
      }
    return m;
  };
  const Vec vf = fiber_scale(v_end.values, in.lambda, data) * v_end.values;
  g.max_H_star = max_h_star({u_first.values, vf});
  g.witness = "segment";
  if (!(g.max_H_star < 0.0)) {
    std::vector<Vec> knots;
    for (const Field& k : path.knots) knots.push_back(k.values);
    const double m = max_h_star(knots);
    if (m < g.max_H_star) {
      g.max_H_star = m;
      g.witness = "optimized";
    }
  }
  g.items[4] = tri(g.max_H_star < 0.0);

  g.items[5] = tri(in.J_mu0 < in.c_lambda && in.c_lambda < 0.0);
  return g;
}

BranchPoint refine_saddle(const Field& candidate, double lambda, const ProblemData& data,
                          const Field& first_solution, double separation, const BranchOptions& opt) {
  const Vec u0 = candidate.values.cwiseAbs();
  const NewtonResult nr = newton_polish(u0, lambda, data, opt.newton_tol);
  if (!(nr.residual <= opt.residual_tol))
    fail(ErrorKind::NoConvergence, "saddle polish did not reach the residual tolerance");
  const Vec& u = nr.u;
  if (u.minCoeff() < -1e-8 * u.cwiseAbs().maxCoeff())
    fail(ErrorKind::NoConvergence, "polished saddle changes sign");
  if (relative_distance(u, first_solution.values) <= separation)
    fail(ErrorKind::ConvergedToFirstSolution, "saddle polish returned the first solution");
  BranchPoint bp;
  bp.lambda = lambda;
  bp.branch = Branch::MountainPass;
  bp.u = Field(data.domain, u);
  bp.report = energy_report(u, lambda, data, opt.nehari_tol);
  bp.J = bp.report.phi;
  bp.iterations = nr.iterations;
  bp.min_value = nr.u.minCoeff();
  if (bp.report.nehari_class == NehariClass::Off)
    fail(ErrorKind::NoConvergence, "polished saddle is off the Nehari set");
  return bp;
}

}  // namespace plap
