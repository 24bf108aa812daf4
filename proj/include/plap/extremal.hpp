#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "plap/eigensolve.hpp"
#include "plap/functionals.hpp"
#include "plap/optimize.hpp"

namespace plap {

struct ExtremeResult {
  bool infeasible = false;  // no field with F >= 0 and ∫h|u|^p > 0
  double lambda_star = 0.0;
  Field u_star;             // nonnegative, unit E-norm
  double F_at_min = 0.0;
  double t0 = 0.0;
  double constraint_residual = 0.0;  // |F/Γ| at u*
  double multiplier = 0.0;
  int restarts = 0;
  std::uint64_t best_seed = 0;
  bool constraint_active = true;     // false when F(φ₁) >= 0 and u* = φ₁
};

struct ExtremalOptions {
  int restarts = 8;
  std::uint64_t seed = 1;
  double constraint_tol = 1e-11;
  double sign_tol = 1e-12;
  unsigned threads = 0;
};

// inf ∫|∇u|^p / ∫h|u|^p subject to ∫f|u|^γ >= 0, ∫h|u|^p > 0.
ExtremeResult lambda_star(const ProblemData& data, const EigenResult& eig,
                          const ExtremalOptions& options = {});
ExtremeResult lambda_star(const ProblemData& data, int restarts, std::uint64_t seed);

struct T0Result {
  double t0 = 0.0;
  Field w;
  double residual = 0.0;         // pde_residual(w, λ*)
  double closed_form_t0 = 0.0;   // least-squares cross-check
};

// Picks t so that t u* is a critical point of Φ_{λ*}: minimizes the scale-free
// residual ‖a - t^{γ-p} b‖ / ‖a‖ over t ∈ [1e-6, 1e6], a = Φ-part of order p,
// b = order-γ part. DegenerateScaling without an interior minimum.
T0Result t0_rescale(const Field& u_star, double lambda_star, const ProblemData& data);

struct RestrictedMin {
  double mu = 0.0;
  double lambda = 0.0;
  double value = 0.0;  // Ĵ_λ⁺(μ)
  Field v;             // unit E-norm, nonnegative
  bool on_boundary = false;
  double H_mu = 0.0;
  double constraint = 0.0;  // H_μ(v) / ∫|∇v|^p
  int iterations = 0;
  bool converged = false;
};

struct RestrictedOptions {
  double boundary_tol = 1e-7;  // on H_μ / ∫|∇v|^p
  AugLagOptions auglag{};
};

// inf { J_λ⁺(v) : H_μ(v) <= 0, F(v) < 0, ‖v‖ = 1 }, best over the supplied
// starts. Starts outside H_μ <= 0 are pulled back along the segment to the first
// feasible start. EmptyCone if no start lies in the cone.
RestrictedMin restricted_min(double lambda, double mu, const ProblemData& data,
                             const std::vector<Vec>& starts, const RestrictedOptions& options = {});

// Minimum of J_λ⁺ on the face H_μ = 0.
RestrictedMin face_min(double lambda, double mu, const ProblemData& data,
                       const std::vector<Vec>& starts, const RestrictedOptions& options = {});

// max F(v) over sampled v with H_μ(v) <= 0 and unit E-norm; strictly negative
// for μ < λ*.
double estimate_c_mu(double mu, const ProblemData& data, const std::vector<Vec>& starts);

// μ₀ ∈ (λ₁, λ*) on a uniform grid of `grid` interior points, separating every
// minimizer: H_{μ₀}(v) < -margin ∫|∇v|^p. Chooses the grid value nearest the
// midpoint between the largest minimizer quotient and λ*.
double separation_mu0(const ProblemData& data, double lambda1, double lambda_star,
                      const std::vector<Vec>& minimizers, int grid = 64, double margin = 1e-3);

struct MuLambdaResult {
  double mu_lambda = 0.0;
  double J_mu0 = 0.0;        // Ĵ_λ⁺(μ₀)
  double J_face = 0.0;       // face minimum at μ^λ
  RestrictedMin endpoint;    // face minimizer at μ^λ
  int bisections = 0;
};

// Largest μ in (μ₀, λ*) with Ĵ_λ⁺(μ) = Ĵ_λ⁺(μ₀) up to plateau_tol relative.
MuLambdaResult mu_lambda(double lambda, double mu0, double lambda_star, double J_mu0,
                         const ProblemData& data, const std::vector<Vec>& face_starts,
                         double plateau_tol = 1e-6, int max_bisections = 40);

struct N0Probe {
  double min_quotient = 0.0;  // smallest ∫|∇u|^p/∫h|u|^p found with F(u) = 0
  bool found = false;         // a field with quotient below the target was found
  int attempts = 0;
};

// Searches for unit fields with F = 0, ∫h|u|^p > 0 and quotient below
// `lambda_target`.
N0Probe n0_probe(double lambda_target, const ProblemData& data, const EigenResult& eig,
                 int attempts, std::uint64_t seed);

// Nonnegative bump of radius `width` centred at interior node `center`.
Vec bump_at(const Domain& d, std::size_t center, double width);

}  // namespace plap
