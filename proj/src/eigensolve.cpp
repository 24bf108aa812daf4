#include "plap/eigensolve.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "plap/errors.hpp"
#include "plap/optimize.hpp"
#include "plap/util.hpp"

namespace plap {

namespace {

Vec cosine_bump(const Domain& d) {
  Vec v(static_cast<Eigen::Index>(d.interior_count()));
  for (std::size_t idx = 0; idx < d.interior_count(); ++idx) {
    int i, j;
    d.interior_ij(idx, i, j);
    double b = std::cos(0.5 * std::numbers::pi * d.coord(i) / d.L);
    if (d.dim == 2) b *= std::cos(0.5 * std::numbers::pi * d.coord(j) / d.L);
    v[static_cast<Eigen::Index>(idx)] = b;
  }
  return v;
}

}  // namespace

EigenResult lambda1(const ProblemData& data, const std::vector<char>* mask, const EigenOptions& opt) {
  const Domain& d = *data.domain;
  const auto k = static_cast<Eigen::Index>(d.interior_count());
  std::vector<char> m = mask ? *mask : std::vector<char>(static_cast<std::size_t>(k), 1);
  bool any = false;
  for (char c : m) any = any || c;
  if (!any) fail(ErrorKind::NoAdmissibleField, "empty eigenvalue mask");

  std::mt19937_64 rng(opt.seed);
  Vec x0 = cosine_bump(d);
  for (Eigen::Index i = 0; i < k; ++i) {
    x0[i] = m[static_cast<std::size_t>(i)] ? x0[i] * (1.0 + opt.jitter * uniform01(rng)) : 0.0;
  }
  Terms t0 = energy_terms(x0, data);
  if (!(t0.B > 0.0)) {
    for (Eigen::Index i = 0; i < k; ++i)
      if (!(data.wh[i] > 0.0)) x0[i] = 0.0;
    t0 = energy_terms(x0, data);
    if (!(t0.B > 0.0)) fail(ErrorKind::NoAdmissibleField, "h <= 0 on the admissible set");
  }

  const Objective rayleigh = [&](const Vec& u, Vec* grad) {
    if (grad) {
      TermGrads g;
      const Terms t = energy_terms(u, data, g);
      if (!(t.B > 0.0)) return std::numeric_limits<double>::infinity();
      const double R = t.A / t.B;
      *grad = (g.A - R * g.B) / t.B;
      return R;
    }
    const Terms t = energy_terms(u, data);
    if (!(t.B > 0.0)) return std::numeric_limits<double>::infinity();
    return t.A / t.B;
  };
  const Preconditioner P(data, &m);
  LbfgsOptions lo;
  lo.max_iter = opt.max_iter;
  lo.grad_tol = opt.grad_tol;
  lo.max_move = 1.0;
  const LbfgsResult r = sphere_lbfgs(rayleigh, x0, P, e_normalizer(data), lo);

  Vec u = r.x.cwiseAbs();
  const double B = energy_terms(u, data).B;
  u /= std::pow(B, 1.0 / data.p);
  Vec grad;
  EigenResult out;
  out.lambda1 = rayleigh(u, &grad);
  out.residual = grad.norm();
  out.iterations = r.iterations;
  out.phi1 = Field(data.domain, u);
  return out;
}

std::string to_string(Tri t) {
  switch (t) {
    case Tri::False: return "false";
    case Tri::True: return "true";
    case Tri::NotApplicable: return "NA";
  }
  return "NA";
}

std::vector<char> interior_mask(const WeightField& w, const std::vector<char>& node_mask,
                                bool erode) {
  const Domain& d = *w.domain;
  auto at = [&](int i, int j) -> bool {
    if (i < 0 || i >= d.n || j < 0 || j >= (d.dim == 1 ? 1 : d.n)) return false;
    return node_mask[static_cast<std::size_t>(d.dim == 1 ? i : j * d.n + i)] != 0;
  };
  std::vector<char> out(d.interior_count(), 0);
  for (std::size_t idx = 0; idx < d.interior_count(); ++idx) {
    int i, j;
    d.interior_ij(idx, i, j);
    bool keep = at(i, j);
    if (keep && erode) {
      keep = at(i - 1, j) && at(i + 1, j);
      if (d.dim == 2) keep = keep && at(i, j - 1) && at(i, j + 1);
    }
    out[idx] = keep ? 1 : 0;
  }
  return out;
}

namespace {

bool any_set(const std::vector<char>& m) {
  for (char c : m)
    if (c) return true;
  return false;
}

}  // namespace

HypothesisReport validate_hypotheses(const ProblemData& data, const EigenResult& full,
                                     const EigenOptions& opt) {
  const Domain& d = *data.domain;
  const WeightField& f = data.f;
  HypothesisReport rep;
  std::ostringstream notes;

  const std::vector<char> plus = interior_mask(f, f.positive, false);
  const std::vector<char> minus = interior_mask(f, f.negative, false);
  const std::vector<char> zero = interior_mask(f, f.zero, false);
  for (std::size_t i = 0; i < plus.size(); ++i) {
    rep.count_f_plus += plus[i] != 0;
    rep.count_f_minus += minus[i] != 0;
    rep.count_f_zero += zero[i] != 0;
  }
  rep.F1 = rep.count_f_plus > 0 && rep.count_f_minus > 0;

  // F2 compares Dirichlet eigenvalues of -Δ_p without weight.
  if (rep.count_f_zero == 0) {
    rep.F2 = Tri::NotApplicable;
  } else {
    const WeightField one(data.domain, Vec::Ones(static_cast<Eigen::Index>(d.node_count())));
    const ProblemData unweighted = make_problem(data.domain, data.p, data.gamma, one, data.f, data.eps_reg);
    std::vector<char> pz_nodes(d.node_count());
    for (std::size_t i = 0; i < pz_nodes.size(); ++i) pz_nodes[i] = f.positive[i] || f.zero[i];
    auto solve = [&](const std::vector<char>& node_mask, bool erode) -> std::optional<double> {
      const std::vector<char> m = interior_mask(f, node_mask, erode);
      if (!any_set(m)) return std::nullopt;
      return lambda1(unweighted, &m, opt).lambda1;
    };
    const auto pz = solve(pz_nodes, false);
    const auto z = solve(f.zero, false);
    rep.lambda1_plus_zero = pz.value_or(std::numeric_limits<double>::infinity());
    rep.lambda1_zero = z.value_or(std::numeric_limits<double>::infinity());
    rep.F2 = (pz && z && *pz < *z) ? Tri::True : Tri::False;
    rep.lambda1_plus_zero_eroded = solve(pz_nodes, true);
    rep.lambda1_zero_eroded = solve(f.zero, true);
    auto differs = [](const std::optional<double>& a, const std::optional<double>& b) {
      if (!a || !b) return a.has_value() != b.has_value();
      return std::fabs(*a - *b) > 0.05 * std::fabs(*b);
    };
    rep.eroded_differs = differs(rep.lambda1_plus_zero_eroded, pz) || differs(rep.lambda1_zero_eroded, z);
    notes << "F2 uses node sets as interiors (no erosion); ";
    if (rep.eroded_differs) notes << "eroded-mask eigenvalues differ by more than 5%; ";
    notes << "compactness requires lambda to avoid the spectrum on balls inside the zero set (not certified); ";
  }

  double shell_max = -std::numeric_limits<double>::infinity();
  for (std::size_t node = 0; node < d.node_count(); ++node) {
    const int i = static_cast<int>(d.dim == 1 ? node : node % static_cast<std::size_t>(d.n));
    const int j = static_cast<int>(d.dim == 1 ? 0 : node / static_cast<std::size_t>(d.n));
    const bool shell = i == 0 || i == d.n - 1 || (d.dim == 2 && (j == 0 || j == d.n - 1));
    if (shell) shell_max = std::max(shell_max, f.values[static_cast<Eigen::Index>(node)]);
  }
  rep.f_shell_max = shell_max;
  rep.F_inf = shell_max < 0.0;

  rep.f_phi1_integral = F(full.phi1.values, data);
  rep.F_phi1 = rep.f_phi1_integral < 0.0;
  rep.notes = notes.str();
  return rep;
}

}  // namespace plap
