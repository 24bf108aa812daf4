#include "plap/branches.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "plap/errors.hpp"
#include "plap/optimize.hpp"

namespace plap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Monotone transforms of J_λ^± on their cones (see reduced_J).
Objective psi(double lambda, const ProblemData& data, bool plus) {
  const double a = data.gamma / (data.gamma - data.p);
  const double b = data.p / (data.gamma - data.p);
  const double sgn = plus ? -1.0 : 1.0;  // work with -H, -F on the plus cone
  return [&data, lambda, a, b, sgn, plus](const Vec& u, Vec* grad) {
    TermGrads g;
    const Terms t = grad ? energy_terms(u, data, g) : energy_terms(u, data);
    const double Hs = sgn * t.H(lambda);
    const double Fs = sgn * t.F;
    if (!(Hs > 0.0) || !(Fs > 0.0)) return kInf;
    // plus: minimize -a log(-H) + b log(-F); minus: minimize a log H - b log F.
    const double ha = plus ? -a : a;
    const double fb = plus ? b : -b;
    if (grad) *grad = (ha / t.H(lambda)) * (g.A - lambda * g.B) + (fb / t.F) * g.F;
    return ha * std::log(Hs) + fb * std::log(Fs);
  };
}

Vec unit(const Vec& u, const ProblemData& data) {
  return u / e_norm(*data.domain, u, data.p, data.gamma);
}

LbfgsResult best_of(const Objective& obj, const std::vector<Vec>& starts, const ProblemData& data,
                    const LbfgsOptions& opt) {
  const Preconditioner P(data);
  const Normalizer norm = e_normalizer(data);
  LbfgsResult best;
  bool have = false;
  for (const Vec& s : starts) {
    if (s.size() == 0 || !std::isfinite(obj(s, nullptr))) continue;
    LbfgsResult r = sphere_lbfgs(obj, s, P, norm, opt);
    if (!have || r.value < best.value) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) fail(ErrorKind::EmptyCone, "no start inside the cone");
  return best;
}

}  // namespace

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::NPlus: return "NPLUS";
    case Branch::NMinus: return "NMINUS";
    case Branch::Restricted: return "RESTRICTED";
    case Branch::MountainPass: return "MOUNTAIN_PASS";
  }
  return "NPLUS";
}

BranchPoint finish_point(const Vec& v, double lambda, Branch branch, NehariClass expected,
                         const ProblemData& data, const BranchOptions& opt) {
  const Vec av = v.cwiseAbs();
  const Terms t = energy_terms(av, data);
  const double s = fiber_scale(t.H(lambda), t.F, data.p, data.gamma);
  const Vec u0 = s * av;
  const NewtonResult nr = newton_polish(u0, lambda, data, opt.newton_tol);
  if (!(nr.residual <= opt.residual_tol))
    fail(ErrorKind::NoConvergence, "Newton polish did not reach the residual tolerance");
  if ((nr.u - u0).norm() > 0.5 * u0.norm())
    fail(ErrorKind::NoConvergence, "Newton polish left the neighbourhood of the minimizer");
  BranchPoint bp;
  bp.lambda = lambda;
  bp.branch = branch;
  bp.u = Field(data.domain, nr.u);
  bp.report = energy_report(nr.u, lambda, data, opt.nehari_tol);
  bp.J = reduced_J(t.H(lambda), t.F, data.p, data.gamma);
  bp.iterations = nr.iterations;
  bp.min_value = nr.u.minCoeff();
  if (bp.report.nehari_class != expected)
    fail(ErrorKind::NoConvergence, "polished point left the expected Nehari class");
  if (bp.min_value < -1e-8 * nr.u.cwiseAbs().maxCoeff())
    fail(ErrorKind::NoConvergence, "polished point changes sign");
  return bp;
}

BranchPoint solve_nplus(double lambda, const ProblemData& data, const EigenResult& eig,
                        const std::optional<Field>& warm, const BranchOptions& opt) {
  std::vector<Vec> starts;
  if (warm) starts.push_back(warm->values);
  starts.push_back(eig.phi1.values);
  const LbfgsResult r = best_of(psi(lambda, data, true), starts, data, opt.lbfgs);
  BranchPoint bp = finish_point(r.x, lambda, Branch::NPlus, NehariClass::Plus, data, opt);
  bp.iterations += r.iterations;
  bp.warm_started = warm.has_value();
  return bp;
}

std::vector<std::size_t> largest_positive_component(const ProblemData& data) {
  const Domain& d = *data.domain;
  const auto k = d.interior_count();
  std::vector<int> label(k, -1);
  std::vector<std::size_t> best;
  for (std::size_t s = 0; s < k; ++s) {
    if (label[s] >= 0 || !(data.wf[static_cast<Eigen::Index>(s)] > 0.0)) continue;
    std::vector<std::size_t> comp;
    std::deque<std::size_t> queue{s};
    label[s] = 1;
    while (!queue.empty()) {
      const std::size_t c = queue.front();
      queue.pop_front();
      comp.push_back(c);
      int i, j;
      d.interior_ij(c, i, j);
      const int di[4] = {1, -1, 0, 0};
      const int dj[4] = {0, 0, 1, -1};
      for (int q = 0; q < (d.dim == 1 ? 2 : 4); ++q) {
        const long nb = d.interior_index(i + di[q], j + dj[q]);
        if (nb < 0) continue;
        const auto nbu = static_cast<std::size_t>(nb);
        if (label[nbu] >= 0 || !(data.wf[nb] > 0.0)) continue;
        label[nbu] = 1;
        queue.push_back(nbu);
      }
    }
    if (comp.size() > best.size()) best = std::move(comp);
  }
  return best;
}

BranchPoint solve_nminus(double lambda, const ProblemData& data, const std::optional<Field>& warm,
                         const BranchOptions& opt) {
  const Domain& d = *data.domain;
  const Objective obj = psi(lambda, data, false);
  std::vector<Vec> starts;
  if (warm) starts.push_back(warm->values);
  const std::vector<std::size_t> comp = largest_positive_component(data);
  if (!comp.empty()) {
    // Centre node and extent of the component.
    double cx = 0.0, cy = 0.0;
    for (std::size_t c : comp) {
      int i, j;
      d.interior_ij(c, i, j);
      cx += d.coord(i);
      cy += d.dim == 2 ? d.coord(j) : 0.0;
    }
    cx /= static_cast<double>(comp.size());
    cy /= static_cast<double>(comp.size());
    std::size_t center = comp.front();
    double best = kInf, radius = 0.0;
    for (std::size_t c : comp) {
      int i, j;
      d.interior_ij(c, i, j);
      const double r = std::hypot(d.coord(i) - cx, d.dim == 2 ? d.coord(j) - cy : 0.0);
      if (r < best) {
        best = r;
        center = c;
      }
      radius = std::max(radius, r);
    }
    double width = radius + d.dx;
    for (int shrink = 0; shrink < 30; ++shrink) {
      const Vec b = bump_at(d, center, width);
      const Terms t = energy_terms(b, data);
      if (t.F > 0.0 && t.H(lambda) > 0.0) {
        starts.push_back(b);
        break;
      }
      width *= 0.7;
      if (width < d.dx) break;
    }
  }
  const LbfgsResult r = best_of(obj, starts, data, opt.lbfgs);
  BranchPoint bp = finish_point(r.x, lambda, Branch::NMinus, NehariClass::Minus, data, opt);
  bp.iterations += r.iterations;
  bp.warm_started = warm.has_value();
  return bp;
}

AtStarResult solve_at_star(const ProblemData& data, const EigenResult& eig, double lambda_star,
                           int steps, double stall_factor, const BranchOptions& opt) {
  if (!std::isfinite(lambda_star)) fail(ErrorKind::InvalidArgument, "lambda* is not finite");
  AtStarResult out;
  std::optional<Field> warm;
  const double span = lambda_star - eig.lambda1;
  for (int n = 1; n <= steps + 1; ++n) {
    const double lam = n <= steps ? lambda_star - span * std::ldexp(1.0, -n) : lambda_star;
    BranchPoint bp = solve_nplus(lam, data, eig, warm, opt);
    const Vec v = unit(bp.u.values, data);
    if (!out.minimizers.empty()) {
      const Vec& prev = out.minimizers.back().values;
      if ((v - prev).norm() > stall_factor * prev.norm())
        fail(ErrorKind::ContinuationStall, "consecutive minimizers drift apart");
    }
    out.lambdas.push_back(lam);
    out.J_values.push_back(bp.report.phi);
    out.minimizers.emplace_back(data.domain, v);
    warm = out.minimizers.back();
    if (n == steps + 1) out.point = std::move(bp);
  }
  return out;
}

BranchPoint solve_past_star(double lambda, double mu0, double lambda_star, const ProblemData& data,
                            const std::vector<Vec>& warm, const BranchOptions& opt) {
  if (!(lambda > lambda_star)) fail(ErrorKind::InvalidArgument, "solve_past_star needs lambda > lambda*");
  const RestrictedMin rm = restricted_min(lambda, mu0, data, warm);
  if (rm.on_boundary) fail(ErrorKind::BoundaryHit, "restricted minimizer lies on H_mu0 = 0");
  BranchPoint bp = finish_point(rm.v.values, lambda, Branch::Restricted, NehariClass::Plus, data, opt);
  bp.J = rm.value;
  bp.iterations += rm.iterations;
  bp.warm_started = !warm.empty();
  if (!(H(bp.u.values, mu0, data) < 0.0))
    fail(ErrorKind::BoundaryHit, "polished first solution left the mu0 cone");
  return bp;
}

}  // namespace plap
