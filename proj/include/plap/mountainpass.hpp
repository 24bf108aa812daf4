#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "plap/branches.hpp"
#include "plap/eigensolve.hpp"
#include "plap/extremal.hpp"
#include "plap/functionals.hpp"

namespace plap {

// η(t_i) for uniform t_i in [0, 1]; the first and last knots are the fixed
// endpoints.
struct Path {
  std::vector<Field> knots;
};

Path straight_path(const Field& from, const Field& to, int knots);

struct GeometryChecks {
  std::array<Tri, 6> items{Tri::NotApplicable, Tri::NotApplicable, Tri::NotApplicable,
                           Tri::NotApplicable, Tri::NotApplicable, Tri::NotApplicable};
  double j_lambda = 0.0;       // sampled minimum of Φ_λ over ∂Θ_{μ₀}⁺
  int j_samples = 0;
  double max_H_star = 0.0;     // max of H_{λ*} along the item (v) witness path
  std::string witness;         // "segment" or "optimized"
  bool all_pass() const;
};

struct PassResult {
  double c_lambda = 0.0;
  Field saddle;                    // climbing knot
  int saddle_knot = 0;
  double residual = 0.0;           // pde_residual(saddle, λ)
  GeometryChecks geometry_checks;
  Path path;
  std::vector<double> c_history;   // max knot energy per accepted descent sweep
  double c_descent = 0.0;          // max knot energy at the end of the descent phase
  int sweeps = 0;
  int climb_sweeps = 0;
  double climb_force = 0.0;        // relative force at the returned climber
  bool converged = false;
};

struct PathOptions {
  int knots = 16;
  int max_sweeps = 3000;
  int max_climb_sweeps = 10000;
  double step = 0.05;         // relative P-norm move of a knot per sweep
  double force_tol = 1e-6;    // perpendicular force, relative
  double climb_tol = 1e-7;
  unsigned threads = 0;
};

// v ∈ S_λ^∂(μ^λ): face minimizer of J_λ⁺ on H_{μ^λ} = 0, unit E-norm and
// nonnegative. BoundaryMinimizerNotFound if the face solve fails or leaves the
// face.
Field boundary_endpoint(double lambda, double mu_lambda, const ProblemData& data,
                        const std::vector<Vec>& starts, double face_tol = 1e-7);

// String method between fixed endpoints: interior knots follow the
// preconditioned perpendicular force with equal P-arclength reparametrization
// and step halving whenever the path maximum would rise; then the top knot
// climbs. PathCollapse if the path shrinks to a point, MaxSweepsExceeded if the
// descent phase does not settle.
PassResult optimize_path(double lambda, const Field& from, const Field& to, const ProblemData& data,
                         const PathOptions& options = {});

struct GeometryInputs {
  double lambda = 0.0;
  double lambda_star = 0.0;
  double mu0 = 0.0;
  double mu_lambda = 0.0;
  double J_mu0 = 0.0;        // Ĵ_λ⁺(μ₀)
  double J_face = 0.0;       // face minimum at μ^λ
  double plateau_tol = 1e-6;
  double face_tol = 1e-7;
  double c_lambda = 0.0;
};

// Items (i)..(vi) of the mountain-pass geometry; all NA for λ <= λ*.
// j_λ is sampled by face minimizations of J_λ⁺ on H_{μ₀} = 0 from `samples`
// seeded starts.
GeometryChecks geometry_checklist(const GeometryInputs& in, const Field& u_first, const Field& v_end,
                                  const Path& path, const ProblemData& data,
                                  const std::vector<Vec>& boundary_starts, int samples,
                                  std::uint64_t seed);

// Newton polish of the saddle candidate. ConvergedToFirstSolution when the
// result is within `separation` (relative) of the first solution.
BranchPoint refine_saddle(const Field& candidate, double lambda, const ProblemData& data,
                          const Field& first_solution, double separation = 1e-2,
                          const BranchOptions& options = {});

double relative_distance(const Vec& a, const Vec& b);

}  // namespace plap
