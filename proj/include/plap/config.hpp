#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "plap/domain.hpp"

namespace plap {

// Named weight profile. Profiles and their parameters (r = |x| or distance to a
// bump centre):
//   constant      value
//   plateau       inner, outer, radius, taper       cosine step inner -> outer
//   bump_annulus  bumps [{center, radius, height}], zero_width, f_inf
//                 height inside a bump, 0 within zero_width of it, f_inf beyond
//   gaussian      amplitude, width, offset          offset + amplitude exp(-r²/2w²)
//   file          path                              nodal values (JSON array or text)
struct WeightProfile {
  std::string profile = "constant";
  nlohmann::json params = nlohmann::json::object();
  bool operator==(const WeightProfile&) const = default;
};

struct LambdaPlan {
  std::string mode = "auto";     // "auto" or "grid"
  std::vector<double> grid;
  int below = 5;                 // auto: samples in [λ₁ + δ, λ* - δ]
  double delta_fraction = 0.3;   // δ = delta_fraction (λ* - λ₁)
  int above = 3;                 // auto: λ* (1 + k above_step), k = 1..above
  double above_step = 0.01;
  int epsilon_probe_steps = 0;   // > 0: walk λ*(1 + k above_step) until the first solution fails
  bool operator==(const LambdaPlan&) const = default;
};

struct SolverSettings {
  double residual_tol = 1e-6;
  double newton_tol = 1e-11;
  double nehari_tol = 1e-6;
  double plateau_tol = 1e-6;
  double face_tol = 1e-7;
  double separation = 1e-2;
  int restarts = 8;
  int star_steps = 8;
  int knots = 16;
  int max_sweeps = 3000;
  int max_climb_sweeps = 10000;
  int geometry_samples = 4;
  unsigned threads = 0;
  std::string kernels = "auto";  // auto, scalar, avx2
  bool operator==(const SolverSettings&) const = default;
};

struct RunConfig {
  int dim = 1;
  double L = 12.0;
  int n = 201;
  double p = 2.0;
  double gamma = 3.0;
  double eps_reg = 1e-10;
  WeightProfile h;
  WeightProfile f;
  LambdaPlan lambda;
  SolverSettings solver;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string format = "csv";    // csv or jsonl
  bool mountain_pass = true;
  bool second_endpoint = false;
  bool operator==(const RunConfig&) const = default;
};

// The localized-h, sign-changing-f 1D preset used by the acceptance suite.
RunConfig preset_config();

nlohmann::json to_json(const RunConfig& c);
// Missing keys take defaults; unknown keys or bad values throw
// std::invalid_argument.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// FNV-1a of the canonical JSON dump without output.dir, as 16 hex digits.
std::string config_hash(const RunConfig& c);

// Nodal values of a profile on every grid node. `base_dir` resolves relative
// file paths.
Vec weight_values(const WeightProfile& profile, const Domain& d, const std::string& base_dir = ".");

}  // namespace plap
