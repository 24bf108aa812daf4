#include "plap/domain.hpp"

#include <cmath>
#include <string>

#include "plap/errors.hpp"
#include "plap/kernels.hpp"

namespace plap {

std::size_t Domain::interior_count() const {
  const auto k = static_cast<std::size_t>(m());
  return dim == 1 ? k : k * k;
}

std::size_t Domain::node_count() const {
  const auto k = static_cast<std::size_t>(n);
  return dim == 1 ? k : k * k;
}

std::size_t Domain::cell_count() const {
  const auto k = static_cast<std::size_t>(n - 1);
  return dim == 1 ? k : 2 * k * k;
}

double Domain::cell_volume() const { return dim == 1 ? dx : 0.5 * dx * dx; }

double Domain::node_volume() const { return dim == 1 ? dx : dx * dx; }

double Domain::coord(int k) const {
  return L * static_cast<double>(2 * k - (n - 1)) / static_cast<double>(n - 1);
}

void Domain::interior_ij(std::size_t idx, int& i, int& j) const {
  if (dim == 1) {
    i = static_cast<int>(idx) + 1;
    j = 0;
    return;
  }
  i = static_cast<int>(idx % static_cast<std::size_t>(m())) + 1;
  j = static_cast<int>(idx / static_cast<std::size_t>(m())) + 1;
}

long Domain::interior_index(int i, int j) const {
  if (i <= 0 || i >= n - 1) return -1;
  if (dim == 1) return i - 1;
  if (j <= 0 || j >= n - 1) return -1;
  return static_cast<long>(j - 1) * m() + (i - 1);
}

double Domain::interior_radius(std::size_t idx) const {
  int i, j;
  interior_ij(idx, i, j);
  if (dim == 1) return std::fabs(coord(i));
  return std::hypot(coord(i), coord(j));
}

double Domain::cell_radius(std::size_t c) const {
  if (dim == 1) {
    const int i = static_cast<int>(c);
    return std::fabs(0.5 * (coord(i) + coord(i + 1)));
  }
  const std::size_t sq = c / 2;
  const int i = static_cast<int>(sq % static_cast<std::size_t>(n - 1));
  const int j = static_cast<int>(sq / static_cast<std::size_t>(n - 1));
  double x, y;
  if (c % 2 == 0) {
    x = (2.0 * coord(i) + coord(i + 1)) / 3.0;
    y = (2.0 * coord(j) + coord(j + 1)) / 3.0;
  } else {
    x = (coord(i) + 2.0 * coord(i + 1)) / 3.0;
    y = (coord(j) + 2.0 * coord(j + 1)) / 3.0;
  }
  return std::hypot(x, y);
}

std::shared_ptr<const Domain> build_domain(int dim, double L, int n) {
  if (dim != 1 && dim != 2) fail(ErrorKind::InvalidArgument, "dimension must be 1 or 2");
  if (!(L > 0.0) || !std::isfinite(L)) fail(ErrorKind::InvalidArgument, "half width must be positive");
  if (n < 3) fail(ErrorKind::InvalidArgument, "need at least 3 nodes per axis");
  auto d = std::make_shared<Domain>();
  d->dim = dim;
  d->L = L;
  d->n = n;
  d->dx = 2.0 * L / static_cast<double>(n - 1);
  return d;
}

Field::Field(std::shared_ptr<const Domain> d, Vec v) : domain(std::move(d)), values(std::move(v)) {
  if (!domain) fail(ErrorKind::InvalidArgument, "field without domain");
  if (static_cast<std::size_t>(values.size()) != domain->interior_count())
    fail(ErrorKind::InvalidArgument, "field length does not match interior node count");
  if (!values.allFinite()) fail(ErrorKind::InvalidArgument, "field has non-finite entries");
}

Field Field::zeros(std::shared_ptr<const Domain> d) {
  const auto k = static_cast<Eigen::Index>(d->interior_count());
  return Field(std::move(d), Vec::Zero(k));
}

WeightField::WeightField(std::shared_ptr<const Domain> d, Vec all_nodes, double tau)
    : domain(std::move(d)), values(std::move(all_nodes)), tau_sign(tau) {
  if (!domain) fail(ErrorKind::InvalidArgument, "weight without domain");
  if (static_cast<std::size_t>(values.size()) != domain->node_count())
    fail(ErrorKind::InvalidArgument, "weight length does not match node count");
  if (!values.allFinite()) fail(ErrorKind::InvalidArgument, "weight has non-finite entries");
  const auto k = static_cast<std::size_t>(values.size());
  positive.assign(k, 0);
  negative.assign(k, 0);
  zero.assign(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    const double v = values[static_cast<Eigen::Index>(i)];
    if (std::fabs(v) <= tau_sign) zero[i] = 1;
    else if (v > 0.0) positive[i] = 1;
    else negative[i] = 1;
  }
}

Vec WeightField::interior() const {
  const Domain& d = *domain;
  Vec out(static_cast<Eigen::Index>(d.interior_count()));
  for (std::size_t idx = 0; idx < d.interior_count(); ++idx) {
    int i, j;
    d.interior_ij(idx, i, j);
    const long node = d.dim == 1 ? i : static_cast<long>(j) * d.n + i;
    out[static_cast<Eigen::Index>(idx)] = values[node];
  }
  return out;
}

namespace {
std::size_t count(const std::vector<char>& mask) {
  std::size_t c = 0;
  for (char v : mask) c += v != 0;
  return c;
}
}  // namespace

std::size_t WeightField::count_positive() const { return count(positive); }
std::size_t WeightField::count_negative() const { return count(negative); }
std::size_t WeightField::count_zero() const { return count(zero); }

namespace {

inline double node_value(const Domain& d, const Vec& u, int i, int j) {
  const long k = d.interior_index(i, j);
  return k < 0 ? 0.0 : u[k];
}

inline void add_node(const Domain& d, Vec& out, int i, int j, double v) {
  const long k = d.interior_index(i, j);
  if (k >= 0) out[k] += v;
}

}  // namespace

CellGradient cell_gradient(const Domain& d, const Vec& u) {
  CellGradient g;
  const double inv = 1.0 / d.dx;
  if (d.dim == 1) {
    g.gx.resize(d.n - 1);
    for (int i = 0; i < d.n - 1; ++i)
      g.gx[i] = (node_value(d, u, i + 1, 0) - node_value(d, u, i, 0)) * inv;
    return g;
  }
  const auto cells = static_cast<Eigen::Index>(d.cell_count());
  g.gx.resize(cells);
  g.gy.resize(cells);
  Eigen::Index c = 0;
  for (int j = 0; j < d.n - 1; ++j) {
    for (int i = 0; i < d.n - 1; ++i) {
      const double u00 = node_value(d, u, i, j);
      const double u10 = node_value(d, u, i + 1, j);
      const double u01 = node_value(d, u, i, j + 1);
      const double u11 = node_value(d, u, i + 1, j + 1);
      g.gx[c] = (u10 - u00) * inv;
      g.gy[c] = (u01 - u00) * inv;
      ++c;
      g.gx[c] = (u11 - u01) * inv;
      g.gy[c] = (u11 - u10) * inv;
      ++c;
    }
  }
  return g;
}

void scatter_gradient(const Domain& d, const Vec& cx, const Vec& cy, Vec& out) {
  const double inv = 1.0 / d.dx;
  if (d.dim == 1) {
    for (int i = 0; i < d.n - 1; ++i) {
      add_node(d, out, i + 1, 0, cx[i] * inv);
      add_node(d, out, i, 0, -cx[i] * inv);
    }
    return;
  }
  Eigen::Index c = 0;
  for (int j = 0; j < d.n - 1; ++j) {
    for (int i = 0; i < d.n - 1; ++i) {
      double a = cx[c] * inv, b = cy[c] * inv;
      add_node(d, out, i + 1, j, a);
      add_node(d, out, i, j + 1, b);
      add_node(d, out, i, j, -a - b);
      ++c;
      a = cx[c] * inv;
      b = cy[c] * inv;
      add_node(d, out, i + 1, j + 1, a + b);
      add_node(d, out, i, j + 1, -a);
      add_node(d, out, i + 1, j, -b);
      ++c;
    }
  }
}

namespace {

Vec squared_norms(const Domain& d, const CellGradient& g, double eps_reg) {
  Vec t = g.gx.cwiseProduct(g.gx);
  if (d.dim == 2) t += g.gy.cwiseProduct(g.gy);
  t.array() += eps_reg * eps_reg;
  return t;
}

}  // namespace

Vec grad_norm_powers(const Domain& d, const Vec& u, double p, double eps_reg) {
  const CellGradient g = cell_gradient(d, u);
  const Vec t = squared_norms(d, g, eps_reg);
  Vec value(t.size()), factor(t.size());
  kernels::power_pair({t.data(), static_cast<std::size_t>(t.size())}, 0.5 * p,
                      {value.data(), static_cast<std::size_t>(value.size())},
                      {factor.data(), static_cast<std::size_t>(factor.size())});
  return value;
}

double dirichlet_energy(const Domain& d, const Vec& u, double p, double eps_reg, Vec* grad,
                        double scale) {
  const CellGradient g = cell_gradient(d, u);
  const Vec t = squared_norms(d, g, eps_reg);
  Vec value(t.size()), factor(t.size());
  kernels::power_pair({t.data(), static_cast<std::size_t>(t.size())}, 0.5 * p,
                      {value.data(), static_cast<std::size_t>(value.size())},
                      {factor.data(), static_cast<std::size_t>(factor.size())});
  const double offset = eps_reg > 0.0 ? std::pow(eps_reg, p) : 0.0;
  double sum = 0.0;
  for (Eigen::Index c = 0; c < value.size(); ++c) sum += value[c] - offset;
  const double vol = d.cell_volume();
  if (grad != nullptr) {
    const Vec w = (scale * vol * p) * factor;
    const Vec cx = w.cwiseProduct(g.gx);
    const Vec cy = d.dim == 2 ? Vec(w.cwiseProduct(g.gy)) : Vec();
    scatter_gradient(d, cx, cy, *grad);
  }
  return vol * sum;
}

double integrate_interior(const Domain& d, const Vec& values) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) sum += values[i];
  return sum * d.node_volume();
}

double integrate_nodes(const Domain& d, const Vec& all_nodes) {
  auto w = [&](int k) { return (k == 0 || k == d.n - 1) ? 0.5 : 1.0; };
  double sum = 0.0;
  if (d.dim == 1) {
    for (int i = 0; i < d.n; ++i) sum += w(i) * all_nodes[i];
    return sum * d.dx;
  }
  for (int j = 0; j < d.n; ++j)
    for (int i = 0; i < d.n; ++i) sum += w(i) * w(j) * all_nodes[static_cast<long>(j) * d.n + i];
  return sum * d.dx * d.dx;
}

double integrate_cells(const Domain& d, const Vec& cell_values) {
  double sum = 0.0;
  for (Eigen::Index c = 0; c < cell_values.size(); ++c) sum += cell_values[c];
  return sum * d.cell_volume();
}

double e_norm(const Domain& d, const Vec& u, double p, double gamma) {
  const double a = dirichlet_energy(d, u, p, 0.0);
  const Vec w = Vec::Constant(u.size(), d.node_volume());
  const double g = kernels::power_sum({u.data(), static_cast<std::size_t>(u.size())},
                                      {w.data(), static_cast<std::size_t>(w.size())}, gamma);
  return std::pow(a + std::pow(g, p / gamma), 1.0 / p);
}

double e_norm(const Field& u, double p, double gamma) { return e_norm(*u.domain, u.values, p, gamma); }

}  // namespace plap
