#include "plap/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "plap/errors.hpp"
#include "plap/kernels.hpp"

namespace plap {

namespace {

std::span<const double> cspan(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> mspan(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Nodes touched by one cell and their coefficients in (gx, gy), times dx.
struct Stencil {
  int count = 0;
  long node[3] = {-1, -1, -1};
  double cx[3] = {0, 0, 0};
  double cy[3] = {0, 0, 0};
};

Stencil cell_stencil(const Domain& d, std::size_t c) {
  Stencil s;
  if (d.dim == 1) {
    const int i = static_cast<int>(c);
    s.count = 2;
    s.node[0] = d.interior_index(i, 0);
    s.cx[0] = -1.0;
    s.node[1] = d.interior_index(i + 1, 0);
    s.cx[1] = 1.0;
    return s;
  }
  const std::size_t sq = c / 2;
  const int i = static_cast<int>(sq % static_cast<std::size_t>(d.n - 1));
  const int j = static_cast<int>(sq / static_cast<std::size_t>(d.n - 1));
  s.count = 3;
  if (c % 2 == 0) {
    s.node[0] = d.interior_index(i, j);
    s.cx[0] = -1.0;
    s.cy[0] = -1.0;
    s.node[1] = d.interior_index(i + 1, j);
    s.cx[1] = 1.0;
    s.node[2] = d.interior_index(i, j + 1);
    s.cy[2] = 1.0;
  } else {
    s.node[0] = d.interior_index(i + 1, j + 1);
    s.cx[0] = 1.0;
    s.cy[0] = 1.0;
    s.node[1] = d.interior_index(i, j + 1);
    s.cx[1] = -1.0;
    s.node[2] = d.interior_index(i + 1, j);
    s.cy[2] = -1.0;
  }
  return s;
}

}  // namespace

double critical_exponent(int dim, double p) {
  if (p < static_cast<double>(dim)) return dim * p / (dim - p);
  return std::numeric_limits<double>::infinity();
}

ProblemData make_problem(std::shared_ptr<const Domain> domain, double p, double gamma,
                         WeightField h, WeightField f, double eps_reg) {
  if (!domain) fail(ErrorKind::InvalidArgument, "missing domain");
  if (!(p > 1.0)) fail(ErrorKind::InvalidArgument, "p must exceed 1");
  if (!(gamma > p)) fail(ErrorKind::InvalidArgument, "gamma must exceed p");
  if (!(gamma < critical_exponent(domain->dim, p)))
    fail(ErrorKind::InvalidArgument, "gamma must be below the critical exponent");
  if (!(eps_reg >= 0.0)) fail(ErrorKind::InvalidArgument, "eps_reg must be nonnegative");
  if (h.domain.get() != domain.get() || f.domain.get() != domain.get())
    fail(ErrorKind::InvalidArgument, "weights live on a different domain");
  ProblemData data;
  data.domain = domain;
  data.p = p;
  data.gamma = gamma;
  data.eps_reg = eps_reg;
  const double vol = domain->node_volume();
  data.wh = vol * h.interior();
  data.wf = vol * f.interior();
  data.wh_abs = data.wh.cwiseAbs();
  data.wf_abs = data.wf.cwiseAbs();
  data.w1 = Vec::Constant(static_cast<Eigen::Index>(domain->interior_count()), vol);
  data.h = std::move(h);
  data.f = std::move(f);
  return data;
}

Terms energy_terms(const Vec& u, const ProblemData& data) {
  Terms t;
  t.A = dirichlet_energy(*data.domain, u, data.p, data.eps_reg);
  t.B = kernels::power_sum(cspan(u), cspan(data.wh), data.p);
  t.F = kernels::power_sum(cspan(u), cspan(data.wf), data.gamma);
  t.G = kernels::power_sum(cspan(u), cspan(data.w1), data.gamma);
  return t;
}

Terms energy_terms(const Vec& u, const ProblemData& data, TermGrads& g) {
  const auto k = u.size();
  g.A = Vec::Zero(k);
  g.B = Vec::Zero(k);
  g.F = Vec::Zero(k);
  g.G = Vec::Zero(k);
  Terms t;
  t.A = dirichlet_energy(*data.domain, u, data.p, data.eps_reg, &g.A);
  t.B = kernels::power_sum_grad(cspan(u), cspan(data.wh), data.p, 1.0, mspan(g.B));
  t.F = kernels::power_sum_grad(cspan(u), cspan(data.wf), data.gamma, 1.0, mspan(g.F));
  t.G = kernels::power_sum_grad(cspan(u), cspan(data.w1), data.gamma, 1.0, mspan(g.G));
  return t;
}

double H(const Vec& u, double lambda, const ProblemData& data) {
  return energy_terms(u, data).H(lambda);
}

double F(const Vec& u, const ProblemData& data) {
  return kernels::power_sum(cspan(u), cspan(data.wf), data.gamma);
}

double phi_value(double Hv, double Fv, double p, double gamma) { return Hv / p - Fv / gamma; }

double phi(const Vec& u, double lambda, const ProblemData& data) {
  const Terms t = energy_terms(u, data);
  return phi_value(t.H(lambda), t.F, data.p, data.gamma);
}

Vec phi_grad(const Vec& u, double lambda, const ProblemData& data) {
  Vec g = Vec::Zero(u.size());
  dirichlet_energy(*data.domain, u, data.p, data.eps_reg, &g, 1.0 / data.p);
  kernels::power_sum_grad(cspan(u), cspan(data.wh), data.p, -lambda / data.p, mspan(g));
  kernels::power_sum_grad(cspan(u), cspan(data.wf), data.gamma, -1.0 / data.gamma, mspan(g));
  return g;
}

Vec p_laplacian(const Vec& u, const ProblemData& data) {
  Vec g = Vec::Zero(u.size());
  dirichlet_energy(*data.domain, u, data.p, data.eps_reg, &g, 1.0 / data.p);
  return g;
}

SpMat stiffness_matrix(const Domain& d) {
  std::vector<Eigen::Triplet<double>> trip;
  const double w = d.cell_volume() / (d.dx * d.dx);
  trip.reserve(d.cell_count() * 9);
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const Stencil s = cell_stencil(d, c);
    for (int a = 0; a < s.count; ++a) {
      if (s.node[a] < 0) continue;
      for (int b = 0; b < s.count; ++b) {
        if (s.node[b] < 0) continue;
        const double v = w * (s.cx[a] * s.cx[b] + s.cy[a] * s.cy[b]);
        if (v != 0.0) trip.emplace_back(s.node[a], s.node[b], v);
      }
    }
  }
  const auto k = static_cast<Eigen::Index>(d.interior_count());
  SpMat K(k, k);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

SpMat phi_hessian(const Vec& u, double lambda, const ProblemData& data) {
  const Domain& d = *data.domain;
  const double p = data.p;
  const double gamma = data.gamma;
  const CellGradient g = cell_gradient(d, u);
  const double vol = d.cell_volume();
  const double inv2 = 1.0 / (d.dx * d.dx);
  const double eps2 = data.eps_reg * data.eps_reg;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(d.cell_count() * 9 + static_cast<std::size_t>(u.size()));
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    const double gx = g.gx[ci];
    const double gy = d.dim == 2 ? g.gy[ci] : 0.0;
    const double t = eps2 + gx * gx + gy * gy;
    double f1, f2 = 0.0;
    if (p == 2.0) {
      f1 = 1.0;
    } else if (t == 0.0) {
      // p > 2 gives a vanishing Hessian here; p < 2 without regularization is singular.
      f1 = p > 2.0 ? 0.0 : 1e12;
    } else {
      f1 = std::pow(t, 0.5 * p - 1.0);
      f2 = (p - 2.0) * std::pow(t, 0.5 * p - 2.0);
    }
    const Stencil s = cell_stencil(d, c);
    for (int a = 0; a < s.count; ++a) {
      if (s.node[a] < 0) continue;
      const double ga = gx * s.cx[a] + gy * s.cy[a];
      for (int b = 0; b < s.count; ++b) {
        if (s.node[b] < 0) continue;
        const double gb = gx * s.cx[b] + gy * s.cy[b];
        const double v = vol * inv2 * (f1 * (s.cx[a] * s.cx[b] + s.cy[a] * s.cy[b]) + f2 * ga * gb);
        if (v != 0.0) trip.emplace_back(s.node[a], s.node[b], v);
      }
    }
  }
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double au = std::fabs(u[i]);
    const double bp = p == 2.0 ? 1.0 : std::pow(std::max(au, 1e-12), p - 2.0);
    const double fg = gamma == 2.0 ? 1.0 : (au == 0.0 ? 0.0 : std::pow(au, gamma - 2.0));
    const double v = -lambda * (p - 1.0) * data.wh[i] * bp - (gamma - 1.0) * data.wf[i] * fg;
    trip.emplace_back(i, i, v);
  }
  SpMat Hs(u.size(), u.size());
  Hs.setFromTriplets(trip.begin(), trip.end());
  return Hs;
}

std::string_view to_string(NehariClass c) {
  switch (c) {
    case NehariClass::Plus: return "PLUS";
    case NehariClass::Minus: return "MINUS";
    case NehariClass::Zero: return "ZERO";
    case NehariClass::Off: return "OFF";
  }
  return "OFF";
}

NehariClass classify(double Hv, double Fv, double tol, double scale) {
  if (std::fabs(Hv - Fv) > tol * (std::fabs(Hv) + std::fabs(Fv) + scale)) return NehariClass::Off;
  const double band = tol * scale;
  if (Hv < -band) return NehariClass::Plus;
  if (Hv > band) return NehariClass::Minus;
  if (std::fabs(Fv) <= band) return NehariClass::Zero;
  return NehariClass::Off;
}

double field_scale(const Vec& u, double lambda, const ProblemData& data) {
  const double a = dirichlet_energy(*data.domain, u, data.p, data.eps_reg);
  const double b = std::fabs(lambda) * kernels::power_sum(cspan(u), cspan(data.wh_abs), data.p);
  const double f = kernels::power_sum(cspan(u), cspan(data.wf_abs), data.gamma);
  return std::max({a, b, f});
}

NehariClass nehari_test(const Vec& u, double lambda, const ProblemData& data, double tol) {
  if (u.size() == 0 || u.cwiseAbs().maxCoeff() == 0.0) fail(ErrorKind::ZeroField, "nehari_test on u = 0");
  const Terms t = energy_terms(u, data);
  return classify(t.H(lambda), t.F, tol, field_scale(u, lambda, data));
}

double fiber_scale(double Hv, double Fv, double p, double gamma) {
  if (!(Hv * Fv > 0.0)) fail(ErrorKind::SignMismatch, "H and F must share a strict sign");
  return std::pow(Hv / Fv, 1.0 / (gamma - p));
}

double fiber_scale(const Vec& u, double lambda, const ProblemData& data) {
  const Terms t = energy_terms(u, data);
  return fiber_scale(t.H(lambda), t.F, data.p, data.gamma);
}

double reduced_J(double Hv, double Fv, double p, double gamma) {
  if (!(Hv * Fv > 0.0)) fail(ErrorKind::SignMismatch, "H and F must share a strict sign");
  const double c = (gamma - p) / (p * gamma);
  const double mag = c * std::pow(std::fabs(Hv), gamma / (gamma - p)) /
                     std::pow(std::fabs(Fv), p / (gamma - p));
  return Hv < 0.0 ? -mag : mag;
}

double reduced_J(const Vec& u, double lambda, const ProblemData& data) {
  const Terms t = energy_terms(u, data);
  return reduced_J(t.H(lambda), t.F, data.p, data.gamma);
}

double pde_residual(const Vec& u, double lambda, const ProblemData& data) {
  const double nu = u.norm();
  if (nu == 0.0) fail(ErrorKind::ZeroField, "pde_residual on u = 0");
  return phi_grad(u, lambda, data).norm() / std::max(1.0, nu);
}

double tail_fraction(const Vec& u, double R, const ProblemData& data) {
  const Domain& d = *data.domain;
  const double nv = d.node_volume();
  double g_all = 0.0, g_tail = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double v = nv * std::pow(std::fabs(u[i]), data.gamma);
    g_all += v;
    if (d.interior_radius(static_cast<std::size_t>(i)) > R) g_tail += v;
  }
  const Vec cells = grad_norm_powers(d, u, data.p, 0.0);
  const double cv = d.cell_volume();
  double a_all = 0.0, a_tail = 0.0;
  for (Eigen::Index c = 0; c < cells.size(); ++c) {
    const double v = cv * cells[c];
    a_all += v;
    if (d.cell_radius(static_cast<std::size_t>(c)) > R) a_tail += v;
  }
  const double total = g_all + a_all;
  if (total == 0.0) return 0.0;
  return std::clamp((g_tail + a_tail) / total, 0.0, 1.0);
}

ConeFlags cone_membership(const Vec& u, double lambda, double mu, const ProblemData& data) {
  const Terms t = energy_terms(u, data);
  if (t.A == 0.0 && t.G == 0.0) fail(ErrorKind::ZeroField, "cone_membership on u = 0");
  ConeFlags flags;
  // Normalizing ∫|∇u|^p = 1 rescales H by 1/A and leaves its sign; same for F.
  flags.in_L_minus = t.H(lambda) < 0.0;
  flags.in_B_plus = t.F > 0.0;
  flags.in_Theta_plus = t.H(mu) < 0.0 && t.F < 0.0;
  return flags;
}

EnergyReport energy_report(const Vec& u, double lambda, const ProblemData& data, double tol,
                           double tail_radius_factor) {
  const Terms t = energy_terms(u, data);
  EnergyReport r;
  r.lambda = lambda;
  r.H = t.H(lambda);
  r.F = t.F;
  r.phi = phi_value(r.H, r.F, data.p, data.gamma);
  r.nehari_class = classify(r.H, r.F, tol, field_scale(u, lambda, data));
  r.residual = u.norm() == 0.0 ? 0.0 : pde_residual(u, lambda, data);
  r.tail_fraction = tail_fraction(u, tail_radius_factor * data.domain->L, data);
  return r;
}

}  // namespace plap
