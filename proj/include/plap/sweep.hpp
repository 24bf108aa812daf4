#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plap/branches.hpp"
#include "plap/eigensolve.hpp"
#include "plap/extremal.hpp"
#include "plap/mountainpass.hpp"

namespace plap {

// Everything computed once per problem before sweeping λ.
struct SweepContext {
  EigenResult eig;
  ExtremeResult extreme;
  std::optional<double> mu0;            // unset when separation failed
  std::vector<Field> star_minimizers;   // unit minimizers of the continuation to λ*
  std::string mu0_error;
};

struct SecondSolutionOptions {
  PathOptions path{};
  double plateau_tol = 1e-6;
  double face_tol = 1e-7;
  double separation = 1e-2;
  int geometry_samples = 4;
  std::uint64_t seed = 1;
  bool second_endpoint = false;  // rerun the path from another boundary minimizer
};

// Diagnostics of the second-solution pipeline at one λ > λ*.
struct PassReport {
  double lambda = 0.0;
  std::string status = "ok";
  std::string message;
  double mu0 = 0.0;
  double mu_lambda = 0.0;
  double J_mu0 = 0.0;
  double J_face = 0.0;
  int bisections = 0;
  PassResult pass;
  std::optional<BranchPoint> saddle;
  double saddle_distance = 0.0;   // relative distance to the first solution
  // Second boundary endpoint (optional rerun).
  bool second_run = false;
  double c_lambda_second = 0.0;
  double endpoint_distance = 0.0;
  std::string second_status;
};

// Mountain-pass second solution next to the first solution `first` at λ > λ*.
// Errors are recorded in the report, never thrown.
PassReport second_solution(double lambda, const SweepContext& ctx, const BranchPoint& first,
                           const ProblemData& data, const SecondSolutionOptions& options = {});

// Empirical width of the interval past λ*: λ_k = λ*(1 + k step) is advanced
// while solve_past_star succeeds (its minimizer stays off H_{μ₀} = 0).
struct EpsilonProbe {
  double step = 0.0;
  int steps = 0;                // successful λ_k
  double last_lambda = 0.0;     // largest successful λ_k, λ* if none
  double epsilon = 0.0;         // last_lambda - λ*
  bool exhausted = false;       // every step succeeded
  std::string stop_status = "ok";
  std::string stop_message;
};

EpsilonProbe probe_epsilon(const SweepContext& ctx, const ProblemData& data, double step, int max_steps,
                           const BranchOptions& options = {});

struct SweepRow {
  double lambda = 0.0;
  Branch branch = Branch::NPlus;
  std::optional<BranchPoint> point;
  std::string status = "ok";     // "ok" or the error kind
  std::string message;
};

struct SweepOptions {
  BranchOptions branch{};
  SecondSolutionOptions second{};
  bool mountain_pass = true;
  unsigned threads = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<PassReport> passes;
  bool any_error() const;
};

// λ₁, λ*, the continuation to λ* and μ₀. Throws on failures of λ₁; an
// infeasible λ* or failed separation is recorded in the context.
SweepContext prepare_sweep(const ProblemData& data, const EigenOptions& eigen,
                           const ExtremalOptions& extremal, int star_steps = 8);

// λ <= λ*: N⁺ and N⁻ rows. λ > λ*: RESTRICTED and MOUNTAIN_PASS rows. Warm
// starts chain along the grid per branch; repeated λ values copy the previous
// rows. Per-point failures become error rows.
SweepResult sweep(const std::vector<double>& lambdas, const SweepContext& ctx, const ProblemData& data,
                  const SweepOptions& options = {});

}  // namespace plap
