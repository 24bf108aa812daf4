#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "plap/config.hpp"
#include "plap/functionals.hpp"
#include "plap/sweep.hpp"

namespace plap {

// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;

ProblemData problem_from_config(const RunConfig& c, const std::string& base_dir = ".");

// Explicit grid, or `below` points evenly in [λ₁ + δ, λ* - δ] followed by
// λ*(1 + k above_step), k = 1..above. Sorted.
std::vector<double> lambda_grid(const RunConfig& c, double lambda1, double lambda_star, bool infeasible);

// Column order of branches.csv; the JSON-lines records use the same keys.
const std::vector<std::string>& diagram_columns();

// One CSV or JSON-lines document for the rows; throws std::invalid_argument
// on an empty row list.
std::string emit_diagram(const std::vector<SweepRow>& rows, const std::string& format,
                         const std::string& config_hash, std::uint64_t seed);

// validate -> λ₁ -> λ* -> sweep -> mountain pass, writing hypotheses.json,
// eigen.json, extreme.json, branches.{csv,jsonl} and mountainpass.json into
// c.out. Returns kExitOk, kExitPartial (some rows failed or a hypothesis is
// violated) or kExitConfig.
int run(const RunConfig& c, const std::string& base_dir, std::ostream& log);

}  // namespace plap
