#include "plap/optimize.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <deque>
#include <limits>

#include "plap/errors.hpp"

namespace plap {

struct Preconditioner::Impl {
  std::vector<Eigen::Index> active;  // masked node -> full index
  SpMat Pfull;                       // restricted matrix, kept for inner()
  Eigen::SimplicialLLT<SpMat> llt;
};

Preconditioner::Preconditioner(const ProblemData& data, const std::vector<char>* mask,
                               double mass_shift)
    : impl_(std::make_unique<Impl>()) {
  const Domain& d = *data.domain;
  const auto k = static_cast<Eigen::Index>(d.interior_count());
  if (mask != nullptr) {
    if (static_cast<Eigen::Index>(mask->size()) != k)
      fail(ErrorKind::InvalidArgument, "mask length does not match interior node count");
    mask_ = *mask;
  } else {
    mask_.assign(static_cast<std::size_t>(k), 1);
  }
  std::vector<Eigen::Index> to_reduced(static_cast<std::size_t>(k), -1);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (mask_[static_cast<std::size_t>(i)]) {
      to_reduced[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(impl_->active.size());
      impl_->active.push_back(i);
    }
  }
  if (impl_->active.empty()) fail(ErrorKind::NoAdmissibleField, "empty mask");
  const SpMat K = stiffness_matrix(d);
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index col = 0; col < K.outerSize(); ++col) {
    for (SpMat::InnerIterator it(K, col); it; ++it) {
      const auto r = to_reduced[static_cast<std::size_t>(it.row())];
      const auto c = to_reduced[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  }
  const auto na = static_cast<Eigen::Index>(impl_->active.size());
  for (Eigen::Index i = 0; i < na; ++i) trip.emplace_back(i, i, mass_shift * d.node_volume());
  impl_->Pfull.resize(na, na);
  impl_->Pfull.setFromTriplets(trip.begin(), trip.end());
  impl_->llt.compute(impl_->Pfull);
  if (impl_->llt.info() != Eigen::Success)
    fail(ErrorKind::NoConvergence, "preconditioner factorization failed");
}

Preconditioner::~Preconditioner() = default;
Preconditioner::Preconditioner(Preconditioner&&) noexcept = default;
Preconditioner& Preconditioner::operator=(Preconditioner&&) noexcept = default;

Vec Preconditioner::apply(const Vec& g) const {
  const auto na = static_cast<Eigen::Index>(impl_->active.size());
  Vec r(na);
  for (Eigen::Index i = 0; i < na; ++i) r[i] = g[impl_->active[static_cast<std::size_t>(i)]];
  const Vec z = impl_->llt.solve(r);
  Vec out = Vec::Zero(g.size());
  for (Eigen::Index i = 0; i < na; ++i) out[impl_->active[static_cast<std::size_t>(i)]] = z[i];
  return out;
}

double Preconditioner::inner(const Vec& a, const Vec& b) const {
  const auto na = static_cast<Eigen::Index>(impl_->active.size());
  Vec ra(na), rb(na);
  for (Eigen::Index i = 0; i < na; ++i) {
    const auto j = impl_->active[static_cast<std::size_t>(i)];
    ra[i] = a[j];
    rb[i] = b[j];
  }
  return ra.dot(impl_->Pfull * rb);
}

void Preconditioner::project(Vec& v) const {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!mask_[static_cast<std::size_t>(i)]) v[i] = 0.0;
}

namespace {

struct Pair {
  Vec s, y;
  double rho;
};

Vec two_loop(const Vec& g, const std::deque<Pair>& mem, const Preconditioner& P) {
  Vec q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t k = mem.size(); k-- > 0;) {
    alpha[k] = mem[k].rho * mem[k].s.dot(q);
    q -= alpha[k] * mem[k].y;
  }
  Vec r = P.apply(q);
  if (!mem.empty()) {
    const Pair& last = mem.back();
    const Vec Py = P.apply(last.y);
    const double scale = last.s.dot(last.y) / last.y.dot(Py);
    if (std::isfinite(scale) && scale > 0.0) r *= scale;
  }
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double beta = mem[k].rho * mem[k].y.dot(r);
    r += (alpha[k] - beta) * mem[k].s;
  }
  return -r;
}

}  // namespace

LbfgsResult sphere_lbfgs(const Objective& objective, const Vec& x0, const Preconditioner& P,
                         const Normalizer& normalize, const LbfgsOptions& opt) {
  LbfgsResult res;
  Vec x = x0;
  P.project(x);
  double nx = normalize(x);
  if (!(nx > 0.0) || !std::isfinite(nx)) fail(ErrorKind::ZeroField, "optimizer start is zero");
  x /= nx;
  Vec g;
  double f = objective(x, &g);
  if (!std::isfinite(f)) fail(ErrorKind::EmptyCone, "optimizer start is infeasible");
  P.project(g);

  std::deque<Pair> mem;
  int stall = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it;
    const Vec Pg = P.apply(g);
    const double gn = std::sqrt(std::max(0.0, g.dot(Pg)));
    res.grad_norm = gn;
    if (gn <= opt.grad_tol * std::max(1.0, std::fabs(f))) {
      res.converged = true;
      break;
    }
    const double xx = P.inner(x, x);
    auto tangential = [&](Vec d) {
      P.project(d);
      d -= (P.inner(d, x) / xx) * x;
      return d;
    };
    Vec d = tangential(two_loop(g, mem, P));
    if (!(g.dot(d) < 0.0)) {
      mem.clear();
      d = tangential(-Pg);
    }
    const double move = std::sqrt(P.inner(d, d) / xx);
    double alpha = move > opt.max_move ? opt.max_move / move : 1.0;
    const double slope = g.dot(d);

    bool accepted = false;
    Vec xt, gt;
    double ft = 0.0;
    for (int ls = 0; ls < 50; ++ls) {
      xt = x + alpha * d;
      const double nt = normalize(xt);
      if (nt > 0.0 && std::isfinite(nt)) {
        xt /= nt;
        ft = objective(xt, &gt);
        if (std::isfinite(ft) && ft <= f + opt.armijo * alpha * slope) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!mem.empty()) {
        mem.clear();
        continue;
      }
      // No descent along the preconditioned gradient: at a minimum to round-off.
      res.converged = gn <= 1e3 * opt.grad_tol * std::max(1.0, std::fabs(f));
      break;
    }
    P.project(gt);
    const Vec s = xt - x;
    const Vec y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      mem.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(mem.size()) > opt.memory) mem.pop_front();
    }
    if (f - ft <= opt.rel_decrease_tol * std::max(1.0, std::fabs(f))) ++stall;
    else stall = 0;
    x = std::move(xt);
    g = std::move(gt);
    f = ft;
    if (stall >= opt.stall_iters) {
      res.converged = true;
      break;
    }
    res.iterations = it + 1;
  }
  res.x = std::move(x);
  res.value = f;
  return res;
}

AugLagResult augmented_lagrangian(const Objective& objective, const Objective& constraint,
                                  ConstraintKind kind, const Vec& x0, const Preconditioner& P,
                                  const Normalizer& normalize, const AugLagOptions& opt) {
  AugLagResult res;
  Vec x = x0;
  double nu = 0.0;
  double rho = opt.rho0;
  double prev_viol = std::numeric_limits<double>::infinity();
  const bool ineq = kind == ConstraintKind::Inequality;

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    res.outer = outer + 1;
    const double nu_k = nu, rho_k = rho;
    const Objective lagr = [&](const Vec& v, Vec* grad) {
      Vec gf, gc;
      const double f = objective(v, grad ? &gf : nullptr);
      if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
      const double c = constraint(v, grad ? &gc : nullptr);
      if (!std::isfinite(c)) return std::numeric_limits<double>::infinity();
      double val, w;
      if (ineq) {
        const double z = nu_k + rho_k * c;
        if (z > 0.0) {
          val = f + (z * z - nu_k * nu_k) / (2.0 * rho_k);
          w = z;
        } else {
          val = f - nu_k * nu_k / (2.0 * rho_k);
          w = 0.0;
        }
      } else {
        val = f + nu_k * c + 0.5 * rho_k * c * c;
        w = nu_k + rho_k * c;
      }
      if (grad) *grad = w != 0.0 ? Vec(gf + w * gc) : gf;
      return val;
    };
    const LbfgsResult inner = sphere_lbfgs(lagr, x, P, normalize, opt.inner);
    res.inner_iterations += inner.iterations;
    x = inner.x;
    const double c = constraint(x, nullptr);
    double viol;
    if (ineq) {
      viol = std::max(c, -nu / rho);
      viol = std::fabs(viol);
      nu = std::max(0.0, nu + rho * c);
    } else {
      viol = std::fabs(c);
      nu += rho * c;
    }
    res.constraint = c;
    res.multiplier = nu;
    if (viol <= opt.constraint_tol && inner.converged) {
      res.converged = true;
      break;
    }
    if (viol > 0.25 * prev_viol) rho = std::min(rho * 10.0, opt.rho_max);
    prev_viol = viol;
  }
  res.x = x;
  res.objective = objective(x, nullptr);
  return res;
}

NewtonResult newton_polish(const Vec& u0, double lambda, const ProblemData& data, double tol,
                           int max_iter) {
  NewtonResult res;
  Vec u = u0;
  const double floor_norm = 0.2 * u0.norm();
  Vec g = phi_grad(u, lambda, data);
  double gn = g.norm();
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    if (gn / std::max(1.0, u.norm()) <= tol) {
      res.converged = true;
      break;
    }
    const SpMat Hs = phi_hessian(u, lambda, data);
    Eigen::SparseLU<SpMat> lu;
    lu.compute(Hs);
    if (lu.info() != Eigen::Success) break;
    const Vec delta = lu.solve(-g);
    if (!delta.allFinite()) break;
    bool accepted = false;
    for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
      const Vec ut = u + alpha * delta;
      if (ut.norm() < floor_norm) continue;
      const Vec gt = phi_grad(ut, lambda, data);
      const double gtn = gt.norm();
      if (gtn < (1.0 - 1e-4 * alpha) * gn) {
        u = ut;
        g = gt;
        gn = gtn;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    res.iterations = it + 1;
  }
  if (!res.converged && gn / std::max(1.0, u.norm()) <= tol) res.converged = true;
  res.u = u;
  res.residual = gn / std::max(1.0, u.norm());
  return res;
}

Normalizer e_normalizer(const ProblemData& data) {
  const auto domain = data.domain;
  const double p = data.p, gamma = data.gamma;
  return [domain, p, gamma](const Vec& x) { return e_norm(*domain, x, p, gamma); };
}

}  // namespace plap
