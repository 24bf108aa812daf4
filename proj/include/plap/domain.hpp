#pragma once

// Truncated tensor grid on [-L, L]^dim with zero Dirichlet values, the
// discrete gradient and the regularized p-Dirichlet energy.
//
// Unknowns live on interior nodes only. In 1D the cells are the n-1 grid
// intervals. In 2D each grid square is split into two linear triangles,
//   lower: (i,j) (i+1,j) (i,j+1)    upper: (i+1,j+1) (i,j+1) (i+1,j)
// so that the gradient is exact for linear fields and p = 2 reproduces the
// five-point Laplacian.

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <vector>

namespace plap {

using Vec = Eigen::VectorXd;

struct Domain {
  int dim = 1;
  double L = 1.0;
  int n = 3;
  double dx = 1.0;

  // Interior nodes per axis.
  int m() const { return n - 2; }
  std::size_t interior_count() const;
  std::size_t node_count() const;
  std::size_t cell_count() const;
  double cell_volume() const;
  // Quadrature weight of one node (dx^dim).
  double node_volume() const;

  // Coordinate of grid index k in [0, n).
  double coord(int k) const;
  // Interior node index -> grid indices (i, j); j = 0 in 1D.
  void interior_ij(std::size_t idx, int& i, int& j) const;
  // Grid indices -> interior index, or -1 on the boundary.
  long interior_index(int i, int j) const;
  // Euclidean distance of an interior node / cell centroid from the origin.
  double interior_radius(std::size_t idx) const;
  double cell_radius(std::size_t c) const;
};

std::shared_ptr<const Domain> build_domain(int dim, double L, int n);

struct Field {
  std::shared_ptr<const Domain> domain;
  Vec values;

  Field() = default;
  Field(std::shared_ptr<const Domain> d, Vec v);
  static Field zeros(std::shared_ptr<const Domain> d);
};

// Values on every node (boundary included) with cached sign masks.
struct WeightField {
  std::shared_ptr<const Domain> domain;
  Vec values;
  double tau_sign = 0.0;
  std::vector<char> positive, negative, zero;

  WeightField() = default;
  WeightField(std::shared_ptr<const Domain> d, Vec all_nodes, double tau = 1e-12);
  // Restriction to interior nodes, in interior ordering.
  Vec interior() const;
  std::size_t count_positive() const;
  std::size_t count_negative() const;
  std::size_t count_zero() const;
};

// Per-cell gradient components. gx has cell_count entries; gy is empty in 1D.
struct CellGradient {
  Vec gx, gy;
};

CellGradient cell_gradient(const Domain& d, const Vec& u);

// Adds D^T applied to (cx, cy) into out, i.e. the adjoint of cell_gradient.
void scatter_gradient(const Domain& d, const Vec& cx, const Vec& cy, Vec& out);

// (eps^2 + |grad u|^2)^{p/2} per cell.
Vec grad_norm_powers(const Domain& d, const Vec& u, double p, double eps_reg);

// A(u) = sum_c vol (eps^2 + |g_c|^2)^{p/2} - eps^p, with the gradient
// dA/du accumulated into grad when non-null (scaled by `scale`).
double dirichlet_energy(const Domain& d, const Vec& u, double p, double eps_reg,
                        Vec* grad = nullptr, double scale = 1.0);

// Quadrature. Interior-node values: sum * dx^dim (zero boundary). All-node
// values: tensor trapezoid rule. Cell values: sum * cell volume.
double integrate_interior(const Domain& d, const Vec& values);
double integrate_nodes(const Domain& d, const Vec& all_nodes);
double integrate_cells(const Domain& d, const Vec& cell_values);

// [∫|∇u|^p + (∫|u|^γ)^{p/γ}]^{1/p}
double e_norm(const Domain& d, const Vec& u, double p, double gamma);
double e_norm(const Field& u, double p, double gamma);

}  // namespace plap
