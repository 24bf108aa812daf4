#pragma once

// Optimizers shared by the eigen, extremal, branch and mountain-pass solvers.
//
// Most objectives here are 0-homogeneous (quotients and the reduced
// functional), so iterates are renormalized after every step and only the
// direction matters. Objectives return +inf outside their domain of
// definition; the line search treats that as a failed trial step.

#include <functional>
#include <memory>
#include <vector>

#include "plap/functionals.hpp"

namespace plap {

// Value and (optionally) gradient; +inf marks an infeasible point.
using Objective = std::function<double(const Vec& x, Vec* grad)>;
using Normalizer = std::function<double(const Vec& x)>;

// P = K₂ + shift·M restricted to the unmasked nodes; identity-free, i.e.
// masked-out components of apply() are zero.
class Preconditioner {
 public:
  explicit Preconditioner(const ProblemData& data, const std::vector<char>* mask = nullptr,
                          double mass_shift = 1.0);
  ~Preconditioner();
  Preconditioner(Preconditioner&&) noexcept;
  Preconditioner& operator=(Preconditioner&&) noexcept;

  Vec apply(const Vec& g) const;         // P^{-1} g
  double inner(const Vec& a, const Vec& b) const;  // a^T P b
  void project(Vec& v) const;            // zero components outside the mask
  const std::vector<char>& mask() const { return mask_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<char> mask_;
};

struct LbfgsOptions {
  int max_iter = 2000;
  int memory = 8;
  double grad_tol = 1e-9;   // on sqrt(g^T P^{-1} g)
  double rel_decrease_tol = 1e-15;
  int stall_iters = 8;
  double max_move = 0.3;    // relative P-norm move per step
  double armijo = 1e-4;
};

struct LbfgsResult {
  Vec x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Preconditioned L-BFGS with renormalization x <- x / normalize(x) after each
// step. Requires objective(x0) finite.
LbfgsResult sphere_lbfgs(const Objective& objective, const Vec& x0, const Preconditioner& P,
                         const Normalizer& normalize, const LbfgsOptions& options = {});

enum class ConstraintKind { Inequality, Equality };  // c(x) <= 0 or c(x) = 0

struct AugLagOptions {
  int max_outer = 40;
  double rho0 = 10.0;
  double rho_max = 1e10;
  double constraint_tol = 1e-10;
  LbfgsOptions inner{};
};

struct AugLagResult {
  Vec x;
  double objective = 0.0;
  double constraint = 0.0;
  double multiplier = 0.0;
  int outer = 0;
  int inner_iterations = 0;
  bool converged = false;
};

// Powell–Hestenes–Rockafellar augmented Lagrangian around sphere_lbfgs for a
// single constraint.
AugLagResult augmented_lagrangian(const Objective& objective, const Objective& constraint,
                                  ConstraintKind kind, const Vec& x0, const Preconditioner& P,
                                  const Normalizer& normalize, const AugLagOptions& options = {});

struct NewtonResult {
  Vec u;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Damped Newton on Φ'_λ(u) = 0 with ‖Φ'_λ‖ as merit. Refuses steps that
// shrink ‖u‖ below a fifth of its starting value (collapse onto u = 0).
NewtonResult newton_polish(const Vec& u0, double lambda, const ProblemData& data, double tol = 1e-11,
                           int max_iter = 60);

// E-norm normalizer for the problem's exponents.
Normalizer e_normalizer(const ProblemData& data);

}  // namespace plap
