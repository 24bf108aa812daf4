#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plap/functionals.hpp"

namespace plap {

struct EigenResult {
  double lambda1 = 0.0;
  Field phi1;  // nonnegative, ∫h|φ₁|^p = 1
  int iterations = 0;
  double residual = 0.0;  // ‖∇R(φ₁)‖₂
};

struct EigenOptions {
  std::uint64_t seed = 1;
  double jitter = 0.05;
  int max_iter = 5000;
  double grad_tol = 1e-10;
};

// Minimizes ∫|∇u|^p / ∫h|u|^p over fields vanishing outside `mask`
// (interior-node flags). NoAdmissibleField when h <= 0 on the mask.
EigenResult lambda1(const ProblemData& data, const std::vector<char>* mask = nullptr,
                    const EigenOptions& options = {});

enum class Tri { False, True, NotApplicable };
std::string to_string(Tri t);

struct HypothesisReport {
  bool F1 = false;
  Tri F2 = Tri::NotApplicable;
  bool F_inf = false;
  bool F_phi1 = false;
  // Details.
  std::size_t count_f_plus = 0, count_f_minus = 0, count_f_zero = 0;
  double lambda1_plus_zero = 0.0;   // λ₁(Ω_f⁺ ∪ Ω_f⁰), node-set interior
  double lambda1_zero = 0.0;        // λ₁(Ω_f⁰)
  std::optional<double> lambda1_plus_zero_eroded, lambda1_zero_eroded;
  bool eroded_differs = false;       // eroded and plain values differ by > 5%
  double f_shell_max = 0.0;          // max f over the outermost node shell
  double f_phi1_integral = 0.0;      // ∫ f |φ₁|^γ
  std::string notes;
};

// Interior-node mask of a node-level sign set, optionally eroded by one cell.
std::vector<char> interior_mask(const WeightField& w, const std::vector<char>& node_mask,
                                bool erode);

HypothesisReport validate_hypotheses(const ProblemData& data, const EigenResult& full,
                                     const EigenOptions& options = {});

}  // namespace plap
