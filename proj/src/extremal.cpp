#include "plap/extremal.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <random>

#include "plap/errors.hpp"
#include "plap/util.hpp"

namespace plap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Objective rayleigh_objective(const ProblemData& data) {
  return [&data](const Vec& u, Vec* grad) {
    if (grad) {
      TermGrads g;
      const Terms t = energy_terms(u, data, g);
      if (!(t.B > 0.0)) return kInf;
      const double R = t.A / t.B;
      *grad = (g.A - R * g.B) / t.B;
      return R;
    }
    const Terms t = energy_terms(u, data);
    return t.B > 0.0 ? t.A / t.B : kInf;
  };
}

// c(u) = -F/Γ; c <= 0 encodes ∫f|u|^γ >= 0.
Objective negative_f_ratio(const ProblemData& data) {
  return [&data](const Vec& u, Vec* grad) {
    if (grad) {
      TermGrads g;
      const Terms t = energy_terms(u, data, g);
      if (!(t.G > 0.0)) return kInf;
      *grad = -(g.F * t.G - t.F * g.G) / (t.G * t.G);
      return -t.F / t.G;
    }
    const Terms t = energy_terms(u, data);
    return t.G > 0.0 ? -t.F / t.G : kInf;
  };
}

// ψ = -a log(-H_λ) + b log(-F): a monotone transform of J_λ⁺ on its cone.
Objective psi_plus(double lambda, const ProblemData& data) {
  const double a = data.gamma / (data.gamma - data.p);
  const double b = data.p / (data.gamma - data.p);
  return [&data, lambda, a, b](const Vec& u, Vec* grad) {
    if (grad) {
      TermGrads g;
      const Terms t = energy_terms(u, data, g);
      const double Hv = t.H(lambda);
      if (!(Hv < 0.0) || !(t.F < 0.0)) return kInf;
      *grad = (-a / Hv) * (g.A - lambda * g.B) + (b / t.F) * g.F;
      return -a * std::log(-Hv) + b * std::log(-t.F);
    }
    const Terms t = energy_terms(u, data);
    const double Hv = t.H(lambda);
    if (!(Hv < 0.0) || !(t.F < 0.0)) return kInf;
    return -a * std::log(-Hv) + b * std::log(-t.F);
  };
}

// c(u) = H_μ(u) / ∫|∇u|^p.
Objective h_mu_ratio(double mu, const ProblemData& data) {
  return [&data, mu](const Vec& u, Vec* grad) {
    if (grad) {
      TermGrads g;
      const Terms t = energy_terms(u, data, g);
      if (!(t.A > 0.0)) return kInf;
      *grad = -mu * (g.B * t.A - t.B * g.A) / (t.A * t.A);
      return 1.0 - mu * t.B / t.A;
    }
    const Terms t = energy_terms(u, data);
    return t.A > 0.0 ? 1.0 - mu * t.B / t.A : kInf;
  };
}

Vec unit(const Vec& u, const ProblemData& data) {
  return u / e_norm(*data.domain, u, data.p, data.gamma);
}

std::vector<std::size_t> positive_f_nodes(const ProblemData& data) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < data.wf.size(); ++i)
    if (data.wf[i] > 0.0) out.push_back(static_cast<std::size_t>(i));
  return out;
}

Vec random_start(const ProblemData& data, const EigenResult& eig, std::uint64_t seed,
                 const std::vector<std::size_t>& fplus) {
  const Domain& d = *data.domain;
  std::mt19937_64 rng(seed);
  const std::size_t c = fplus[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(fplus.size()))];
  const double width = d.dx * 2.0 + uniform01(rng) * 0.5 * d.L;
  Vec x = bump_at(d, c, width);
  const Vec& phi = eig.phi1.values;
  const double scale = x.maxCoeff() / std::max(phi.maxCoeff(), 1e-300);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += 0.1 * scale * uniform01(rng) * phi[i];
  return x;
}

}  // namespace

Vec bump_at(const Domain& d, std::size_t center, double width) {
  int ci, cj;
  d.interior_ij(center, ci, cj);
  const double cx = d.coord(ci);
  const double cy = d.dim == 2 ? d.coord(cj) : 0.0;
  Vec v = Vec::Zero(static_cast<Eigen::Index>(d.interior_count()));
  for (std::size_t idx = 0; idx < d.interior_count(); ++idx) {
    int i, j;
    d.interior_ij(idx, i, j);
    double r2 = (d.coord(i) - cx) * (d.coord(i) - cx);
    if (d.dim == 2) r2 += (d.coord(j) - cy) * (d.coord(j) - cy);
    const double q = 1.0 - r2 / (width * width);
    if (q > 0.0) v[static_cast<Eigen::Index>(idx)] = q * q;
  }
  if (v.maxCoeff() <= 0.0) v[static_cast<Eigen::Index>(center)] = 1.0;
  return v;
}

ExtremeResult lambda_star(const ProblemData& data, const EigenResult& eig,
                          const ExtremalOptions& opt) {
  ExtremeResult res;
  const std::vector<std::size_t> fplus = positive_f_nodes(data);
  bool any_nonneg = !fplus.empty();
  for (Eigen::Index i = 0; i < data.wf.size() && !any_nonneg; ++i)
    any_nonneg = data.wf[i] >= -opt.sign_tol * data.w1[i];
  if (!any_nonneg) {
    res.infeasible = true;
    res.lambda_star = kInf;
    return res;
  }

  const double f_phi = F(eig.phi1.values, data);
  if (f_phi >= 0.0) {
    // The unconstrained minimizer already satisfies the constraint.
    res.lambda_star = eig.lambda1;
    res.u_star = Field(data.domain, unit(eig.phi1.values, data));
    const Terms t = energy_terms(res.u_star.values, data);
    res.F_at_min = t.F;
    res.constraint_residual = std::fabs(t.F / t.G);
    res.constraint_active = false;
    res.restarts = 0;
    res.best_seed = opt.seed;
    try {
      res.t0 = t0_rescale(res.u_star, res.lambda_star, data).t0;
    } catch (const SolverError&) {
      res.t0 = 0.0;
    }
    return res;
  }
  const int R = std::max(1, opt.restarts);
  struct Run {
    bool ok = false;
    double value = kInf;
    double c = kInf;
    double nu = 0.0;
    Vec x;
  };
  std::vector<Run> runs(static_cast<std::size_t>(R));
  const Preconditioner P(data);
  const Normalizer norm = e_normalizer(data);
  const Objective obj = rayleigh_objective(data);
  const Objective con = negative_f_ratio(data);

  parallel_for(static_cast<std::size_t>(R), [&](std::size_t r) {
    Vec x0;
    const std::uint64_t seed = opt.seed + r;
    if (r == 0 || fplus.empty()) {
      x0 = eig.phi1.values;
      if (!fplus.empty()) {
        Vec masked = Vec::Zero(x0.size());
        for (std::size_t i : fplus) masked[static_cast<Eigen::Index>(i)] = x0[static_cast<Eigen::Index>(i)];
        if (energy_terms(masked, data).B > 0.0) x0 = masked;
      }
    } else {
      x0 = random_start(data, eig, seed, fplus);
    }
    if (!(energy_terms(x0, data).B > 0.0)) x0 += eig.phi1.values;
    AugLagOptions ao;
    ao.constraint_tol = opt.constraint_tol;
    ao.inner.grad_tol = 1e-10;
    ao.inner.max_iter = 4000;
    try {
      const AugLagResult al = augmented_lagrangian(obj, con, ConstraintKind::Inequality, x0, P, norm, ao);
      Run& run = runs[r];
      run.x = al.x;
      run.value = al.objective;
      run.c = al.constraint;
      run.nu = al.multiplier;
      run.ok = std::isfinite(al.objective) && al.constraint <= 1e3 * opt.constraint_tol;
    } catch (const SolverError&) {
      runs[r].ok = false;
    }
  }, opt.threads);

  int best = -1;
  for (int r = 0; r < R; ++r) {
    const Run& run = runs[static_cast<std::size_t>(r)];
    if (!run.ok) continue;
    if (best < 0 || run.value < runs[static_cast<std::size_t>(best)].value) best = r;
  }
  if (best < 0) {
    res.infeasible = true;
    res.lambda_star = kInf;
    res.restarts = R;
    return res;
  }
  const Run& b = runs[static_cast<std::size_t>(best)];
  const Vec u = unit(b.x.cwiseAbs(), data);
  const Terms t = energy_terms(u, data);
  res.lambda_star = t.A / t.B;
  res.u_star = Field(data.domain, u);
  res.F_at_min = t.F;
  res.constraint_residual = std::fabs(t.F / t.G);
  res.multiplier = b.nu;
  res.restarts = R;
  res.best_seed = opt.seed + static_cast<std::uint64_t>(best);
  try {
    res.t0 = t0_rescale(res.u_star, res.lambda_star, data).t0;
  } catch (const SolverError&) {
    res.t0 = 0.0;
  }
  return res;
}

ExtremeResult lambda_star(const ProblemData& data, int restarts, std::uint64_t seed) {
  EigenOptions eo;
  eo.seed = seed;
  const EigenResult eig = lambda1(data, nullptr, eo);
  ExtremalOptions opt;
  opt.restarts = restarts;
  opt.seed = seed;
  return lambda_star(data, eig, opt);
}

T0Result t0_rescale(const Field& u_star, double lambda_star, const ProblemData& data) {
  if (!std::isfinite(lambda_star)) fail(ErrorKind::DegenerateScaling, "lambda* is not finite");
  TermGrads g;
  energy_terms(u_star.values, data, g);
  const Vec a = (g.A - lambda_star * g.B) / data.p;
  const Vec b = g.F / data.gamma;
  const double na = a.norm();
  if (!(na > 0.0) || !(b.norm() > 0.0)) fail(ErrorKind::DegenerateScaling, "vanishing residual parts");
  const double k = data.gamma - data.p;
  auto resid = [&](double logt) { return (a - std::exp(k * logt) * b).norm() / na; };

  // Golden-section search in log t; the residual is unimodal in s = t^{γ-p}.
  const double lo0 = std::log(1e-6), hi0 = std::log(1e6);
  double lo = lo0, hi = hi0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = resid(x1), f2 = resid(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = resid(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = resid(x2);
    }
  }
  const double logt = 0.5 * (lo + hi);
  if (logt - lo0 < 1e-6 || hi0 - logt < 1e-6)
    fail(ErrorKind::DegenerateScaling, "no interior minimum of the stationarity residual");
  T0Result out;
  out.t0 = std::exp(logt);
  const double s_ls = a.dot(b) / b.squaredNorm();
  out.closed_form_t0 = s_ls > 0.0 ? std::pow(s_ls, 1.0 / k) : 0.0;
  out.w = Field(data.domain, out.t0 * u_star.values);
  out.residual = pde_residual(out.w.values, lambda_star, data);
  return out;
}

namespace {

// Last point of the segment from `inside` (c <= 0) toward `outside` with
// c <= 0, found by bisection on the blend parameter.
Vec pull_back(const Vec& inside, const Vec& outside, const Objective& con) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double c = con((1.0 - mid) * inside + mid * outside, nullptr);
    if (c <= -1e-12) lo = mid;
    else hi = mid;
  }
  return (1.0 - lo) * inside + lo * outside;
}

RestrictedMin cone_solve(double lambda, double mu, const ProblemData& data,
                         const std::vector<Vec>& starts, const RestrictedOptions& opt,
                         ConstraintKind kind) {
  const Objective psi = psi_plus(lambda, data);
  const Objective con = h_mu_ratio(mu, data);
  // H_μ <= 0 is a hard domain: the cone is bounded away from F = 0 there, while
  // ψ is unbounded below outside it.
  const Objective obj = [&psi, &con](const Vec& u, Vec* grad) {
    if (!(con(u, nullptr) <= 0.0)) return kInf;
    return psi(u, grad);
  };
  const Preconditioner P(data);
  const Normalizer norm = e_normalizer(data);

  std::vector<Vec> feasible;
  const Vec* anchor = nullptr;
  for (const Vec& s : starts) {
    if (s.size() != data.wf.size()) continue;
    const Vec a = s.cwiseAbs();
    if (std::isfinite(obj(a, nullptr))) {
      feasible.push_back(unit(a, data));
      if (!anchor) anchor = &s;
    }
  }
  if (anchor) {
    const Vec in = anchor->cwiseAbs();
    for (const Vec& s : starts) {
      if (s.size() != data.wf.size()) continue;
      const Vec a = s.cwiseAbs();
      if (std::isfinite(obj(a, nullptr))) continue;
      const Vec b = pull_back(unit(in, data), unit(a, data), con);
      if (std::isfinite(obj(b, nullptr))) feasible.push_back(unit(b, data));
    }
  }

  RestrictedMin best;
  bool have = false;
  for (const Vec& s : feasible) {
    AugLagResult al;
    try {
      al = augmented_lagrangian(obj, con, kind, s, P, norm, opt.auglag);
    } catch (const SolverError&) {
      continue;
    }
    const Vec v = unit(al.x.cwiseAbs(), data);
    const Terms t = energy_terms(v, data);
    if (!(t.H(lambda) < 0.0) || !(t.F < 0.0)) continue;
    RestrictedMin r;
    r.mu = mu;
    r.lambda = lambda;
    r.value = reduced_J(t.H(lambda), t.F, data.p, data.gamma);
    r.v = Field(data.domain, v);
    r.H_mu = t.H(mu);
    r.constraint = r.H_mu / t.A;
    r.on_boundary = r.constraint >= -opt.boundary_tol;
    r.iterations = al.inner_iterations;
    r.converged = al.converged;
    const bool ok = kind == ConstraintKind::Equality
                        ? std::fabs(r.constraint) <= opt.boundary_tol
                        : r.constraint <= 0.0;
    if (!ok) continue;
    if (!have || r.value < best.value) {
      best = r;
      have = true;
    }
  }
  if (!have) fail(ErrorKind::EmptyCone, "no feasible start for the restricted cone");
  return best;
}

}  // namespace

RestrictedMin restricted_min(double lambda, double mu, const ProblemData& data,
                             const std::vector<Vec>& starts, const RestrictedOptions& opt) {
  return cone_solve(lambda, mu, data, starts, opt, ConstraintKind::Inequality);
}

RestrictedMin face_min(double lambda, double mu, const ProblemData& data,
                       const std::vector<Vec>& starts, const RestrictedOptions& opt) {
  RestrictedMin r = cone_solve(lambda, mu, data, starts, opt, ConstraintKind::Equality);
  r.on_boundary = true;
  return r;
}

double estimate_c_mu(double mu, const ProblemData& data, const std::vector<Vec>& starts) {
  const Objective con = h_mu_ratio(mu, data);
  const Objective f_ratio = negative_f_ratio(data);  // minimizing -F/Γ maximizes F/Γ
  const Preconditioner P(data);
  const Normalizer norm = e_normalizer(data);
  double best = -kInf;
  for (const Vec& s : starts) {
    if (!std::isfinite(con(s, nullptr))) continue;
    try {
      const AugLagResult al = augmented_lagrangian(f_ratio, con, ConstraintKind::Inequality, s, P, norm);
      if (al.constraint > 1e-8) continue;
      best = std::max(best, F(unit(al.x, data), data));
    } catch (const SolverError&) {
    }
  }
  if (!std::isfinite(best)) fail(ErrorKind::EmptyCone, "no sample in the closed cone");
  return best;
}

double separation_mu0(const ProblemData& data, double lambda1, double lambda_star,
                      const std::vector<Vec>& minimizers, int grid, double margin) {
  if (minimizers.empty()) fail(ErrorKind::InvalidArgument, "no minimizers supplied");
  if (!(lambda_star > lambda1)) fail(ErrorKind::SeparationFailed, "lambda* does not exceed lambda1");
  double qmax = -kInf;
  for (const Vec& v : minimizers) {
    const Terms t = energy_terms(v, data);
    if (!(t.B > 0.0)) fail(ErrorKind::SeparationFailed, "minimizer with nonpositive h-mass");
    qmax = std::max(qmax, t.A / t.B);
  }
  const double span = lambda_star - lambda1;
  if (qmax <= lambda1 + 1e-9 * std::fabs(lambda1) + 1e-14)
    fail(ErrorKind::SeparationFailed, "minimizer quotient equals lambda1");
  const double target = qmax + 0.5 * (lambda_star - qmax);
  double best = kInf;
  for (int k = 1; k <= grid; ++k) {
    const double mu = lambda1 + span * static_cast<double>(k) / static_cast<double>(grid + 1);
    bool ok = true;
    for (const Vec& v : minimizers) {
      const Terms t = energy_terms(v, data);
      if (!(t.H(mu) < -margin * t.A)) {
        ok = false;
        break;
      }
    }
    if (ok && (!std::isfinite(best) || std::fabs(mu - target) < std::fabs(best - target))) best = mu;
  }
  if (!std::isfinite(best)) fail(ErrorKind::SeparationFailed, "no grid value separates the minimizers");
  return best;
}

MuLambdaResult mu_lambda(double lambda, double mu0, double lambda_star, double J_mu0,
                         const ProblemData& data, const std::vector<Vec>& face_starts,
                         double plateau_tol, int max_bisections) {
  if (!(lambda > lambda_star)) fail(ErrorKind::InvalidArgument, "mu_lambda needs lambda > lambda*");
  if (!(mu0 < lambda_star)) fail(ErrorKind::InvalidArgument, "mu0 must lie below lambda*");
  MuLambdaResult out;
  out.J_mu0 = J_mu0;
  // Supplied starts first (the first feasible one anchors the pull-back of the
  // others), then the two most recent face minimizers.
  std::deque<Vec> recent;
  auto probe = [&](double mu, RestrictedMin& rm) {
    std::vector<Vec> starts = face_starts;
    starts.insert(starts.end(), recent.begin(), recent.end());
    rm = face_min(lambda, mu, data, starts);
    recent.push_front(rm.v.values);
    if (recent.size() > 2) recent.pop_back();
    return rm.value >= J_mu0 - plateau_tol * std::fabs(J_mu0);
  };
  double lo = mu0, hi = lambda_star;
  RestrictedMin lo_min, rm;
  const double first = mu0 + 1e-3 * (lambda_star - mu0);
  if (!probe(first, rm)) fail(ErrorKind::PlateauNotFound, "face minimum already below J(mu0) next to mu0");
  lo = first;
  lo_min = rm;
  for (int it = 0; it < max_bisections && hi - lo > 1e-11 * lambda_star; ++it) {
    const double mid = 0.5 * (lo + hi);
    out.bisections = it + 1;
    if (probe(mid, rm)) {
      lo = mid;
      lo_min = rm;
    } else {
      hi = mid;
    }
  }
  out.mu_lambda = lo;
  out.endpoint = lo_min;
  out.J_face = lo_min.value;
  return out;
}

N0Probe n0_probe(double lambda_target, const ProblemData& data, const EigenResult& eig,
                 int attempts, std::uint64_t seed) {
  N0Probe out;
  out.min_quotient = kInf;
  const std::vector<std::size_t> fplus = positive_f_nodes(data);
  if (fplus.empty()) return out;
  const Preconditioner P(data);
  const Normalizer norm = e_normalizer(data);
  const Objective obj = rayleigh_objective(data);
  const Objective con = negative_f_ratio(data);
  for (int k = 0; k < attempts; ++k) {
    Vec x0 = random_start(data, eig, seed + 7919u * static_cast<std::uint64_t>(k + 1), fplus);
    if (!(energy_terms(x0, data).B > 0.0)) x0 += eig.phi1.values;
    ++out.attempts;
    try {
      AugLagOptions ao;
      ao.constraint_tol = 1e-10;
      const AugLagResult al = augmented_lagrangian(obj, con, ConstraintKind::Equality, x0, P, norm, ao);
      if (std::fabs(al.constraint) > 1e-8) continue;
      out.min_quotient = std::min(out.min_quotient, al.objective);
    } catch (const SolverError&) {
    }
  }
  out.found = out.min_quotient < lambda_target;
  return out;
}

}  // namespace plap
