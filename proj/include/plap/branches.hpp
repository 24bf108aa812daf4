#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plap/eigensolve.hpp"
#include "plap/extremal.hpp"
#include "plap/functionals.hpp"

namespace plap {

enum class Branch { NPlus, NMinus, Restricted, MountainPass };
std::string_view to_string(Branch b);

struct BranchPoint {
  double lambda = 0.0;
  Branch branch = Branch::NPlus;
  Field u;
  EnergyReport report;
  double J = 0.0;  // reduced functional value on the unit sphere before fibering
  int iterations = 0;
  bool warm_started = false;
  double min_value = 0.0;  // smallest nodal value (positivity check)
};

struct BranchOptions {
  double residual_tol = 1e-6;   // accepted pde_residual
  double newton_tol = 1e-11;    // Newton polish target
  double nehari_tol = 1e-6;
  LbfgsOptions lbfgs{};
};

// Minimizer of J_λ⁺ over {H_λ < 0, F < 0}, fibered onto N⁺_λ.
BranchPoint solve_nplus(double lambda, const ProblemData& data, const EigenResult& eig,
                        const std::optional<Field>& warm = std::nullopt,
                        const BranchOptions& options = {});

// Minimizer of J_λ⁻ over {H_λ > 0, F > 0}, fibered onto N⁻_λ.
BranchPoint solve_nminus(double lambda, const ProblemData& data,
                         const std::optional<Field>& warm = std::nullopt,
                         const BranchOptions& options = {});

struct AtStarResult {
  BranchPoint point;                // at λ = λ*
  std::vector<double> lambdas;      // continuation parameters, λ* last
  std::vector<double> J_values;     // Ĵ_{λ_n}⁺
  std::vector<Field> minimizers;    // unit-norm minimizers along the sequence
};

// λ_n = λ* - (λ* - λ₁) 2^{-n}, n = 1..steps, then λ*; warm-started chain.
// ContinuationStall if consecutive unit minimizers differ by more than
// stall_factor in relative 2-norm.
AtStarResult solve_at_star(const ProblemData& data, const EigenResult& eig, double lambda_star,
                           int steps, double stall_factor = 0.5, const BranchOptions& options = {});

// First solution past λ*: restricted minimizer of J_λ⁺ over H_{μ₀} <= 0.
// BoundaryHit when the minimizer sits on H_{μ₀} = 0.
BranchPoint solve_past_star(double lambda, double mu0, double lambda_star, const ProblemData& data,
                            const std::vector<Vec>& warm, const BranchOptions& options = {});

// Fibers v onto the Nehari set, symmetrizes with |.| and Newton-polishes.
// NoConvergence if the polish fails or leaves the expected Nehari class.
BranchPoint finish_point(const Vec& v, double lambda, Branch branch, NehariClass expected,
                         const ProblemData& data, const BranchOptions& options);

// Largest connected component of the interior Ω_f⁺ nodes.
std::vector<std::size_t> largest_positive_component(const ProblemData& data);

}  // namespace plap
