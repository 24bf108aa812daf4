#pragma once

// Energy functionals of -Δ_p u - λ h|u|^{p-2}u = f|u|^{γ-2}u on the grid.
//
//   A(u) = ∫|∇u|^p       B(u) = ∫h|u|^p       F(u) = ∫f|u|^γ     Γ(u) = ∫|u|^γ
//   H_λ = A - λB         Φ_λ = H_λ/p - F/γ
//
// All integrals use the nodal rule with weight dx^dim on interior nodes.

#include <Eigen/SparseCore>
#include <memory>
#include <string_view>

#include "plap/domain.hpp"

namespace plap {

using SpMat = Eigen::SparseMatrix<double>;

struct ProblemData {
  std::shared_ptr<const Domain> domain;
  double p = 2.0;
  double gamma = 3.0;
  WeightField h;
  WeightField f;
  double eps_reg = 1e-10;

  // Interior quadrature weights: h dx^dim, f dx^dim, |h| dx^dim, |f| dx^dim, dx^dim.
  Vec wh, wf, wh_abs, wf_abs, w1;
};

// p* = dim p / (dim - p) for p < dim, +inf otherwise.
double critical_exponent(int dim, double p);

ProblemData make_problem(std::shared_ptr<const Domain> domain, double p, double gamma,
                         WeightField h, WeightField f, double eps_reg = 1e-10);

struct Terms {
  double A = 0.0;
  double B = 0.0;
  double F = 0.0;
  double G = 0.0;  // ∫|u|^γ
  double H(double lambda) const { return A - lambda * B; }
};

struct TermGrads {
  Vec A, B, F, G;
};

Terms energy_terms(const Vec& u, const ProblemData& data);
Terms energy_terms(const Vec& u, const ProblemData& data, TermGrads& grads);

double H(const Vec& u, double lambda, const ProblemData& data);
double F(const Vec& u, const ProblemData& data);
double phi(const Vec& u, double lambda, const ProblemData& data);
double phi_value(double H, double F, double p, double gamma);
Vec phi_grad(const Vec& u, double lambda, const ProblemData& data);

// Second derivative of the discrete Φ_λ (used by the Newton polish).
SpMat phi_hessian(const Vec& u, double lambda, const ProblemData& data);

// Σ vol D_c^T D_c: the p = 2 stiffness matrix, i.e. half the Hessian of ∫|∇u|^2.
SpMat stiffness_matrix(const Domain& d);

// Discrete p-Laplacian (1/p) dA/du.
Vec p_laplacian(const Vec& u, const ProblemData& data);

enum class NehariClass { Plus, Minus, Zero, Off };
std::string_view to_string(NehariClass c);

// OFF if |H - F| > tol (|H| + |F| + scale); otherwise PLUS for H < -tol scale,
// MINUS for H > tol scale, ZERO when both |H| and |F| are within tol scale.
NehariClass classify(double H, double F, double tol, double scale = 1.0);

// Magnitude of the terms making up H and F, used to make tolerances relative.
double field_scale(const Vec& u, double lambda, const ProblemData& data);

NehariClass nehari_test(const Vec& u, double lambda, const ProblemData& data, double tol);

// s = (H/F)^{1/(γ-p)}; SignMismatch unless H F > 0.
double fiber_scale(double H, double F, double p, double gamma);
double fiber_scale(const Vec& u, double lambda, const ProblemData& data);

// ∓ c |H|^{γ/(γ-p)} / |F|^{p/(γ-p)}, c = (γ-p)/(pγ); minus on the H, F < 0 cone.
double reduced_J(double H, double F, double p, double gamma);
double reduced_J(const Vec& u, double lambda, const ProblemData& data);

// ‖Φ'_λ(u)‖₂ / max(1, ‖u‖₂)
double pde_residual(const Vec& u, double lambda, const ProblemData& data);

// Share of ∫|u|^γ + ∫|∇u|^p carried by nodes and cells with |x| > R.
double tail_fraction(const Vec& u, double R, const ProblemData& data);

struct ConeFlags {
  bool in_L_minus = false;     // H_λ(u) < 0 with ∫|∇u|^p = 1
  bool in_B_plus = false;      // F(u) > 0 with ∫|∇u|^p = 1
  bool in_Theta_plus = false;  // H_μ(u) < 0 and F(u) < 0
};
ConeFlags cone_membership(const Vec& u, double lambda, double mu, const ProblemData& data);

struct EnergyReport {
  double lambda = 0.0;
  double H = 0.0;
  double F = 0.0;
  double phi = 0.0;
  NehariClass nehari_class = NehariClass::Off;
  double residual = 0.0;
  double tail_fraction = 0.0;
};

EnergyReport energy_report(const Vec& u, double lambda, const ProblemData& data, double tol = 1e-6,
                           double tail_radius_factor = 0.8);

}  // namespace plap
