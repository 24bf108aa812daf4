#include "plap/app.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "plap/errors.hpp"
#include "plap/kernels.hpp"

namespace plap {

using nlohmann::json;

namespace {

// Non-finite values become strings; data files never carry NaN or Inf.
json jnum(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::string g17(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

json header(const RunConfig& c) {
  return {{"config_hash", config_hash(c)}, {"seed", c.seed}, {"config", to_json(c)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json report_json(const EnergyReport& r) {
  return {{"lambda", jnum(r.lambda)},     {"H", jnum(r.H)},
          {"F", jnum(r.F)},               {"phi", jnum(r.phi)},
          {"nehari_class", std::string(to_string(r.nehari_class))},
          {"residual", jnum(r.residual)}, {"tail_fraction", jnum(r.tail_fraction)}};
}

json pass_json(const PassReport& p) {
  json j = {{"lambda", jnum(p.lambda)}, {"status", p.status},        {"message", p.message},
            {"mu0", jnum(p.mu0)},       {"mu_lambda", jnum(p.mu_lambda)},
            {"J_mu0", jnum(p.J_mu0)},   {"J_face", jnum(p.J_face)}, {"bisections", p.bisections}};
  const PassResult& r = p.pass;
  json hist = json::array();
  for (double c : r.c_history) hist.push_back(jnum(c));
  static const char* names[6] = {"i", "ii", "iii", "iv", "v", "vi"};
  json items = json::object();
  for (int k = 0; k < 6; ++k) items[names[k]] = to_string(r.geometry_checks.items[static_cast<std::size_t>(k)]);
  j["path"] = {{"knots", r.path.knots.size()},
               {"c_lambda", jnum(r.c_lambda)},
               {"c_descent", jnum(r.c_descent)},
               {"c_history", hist},
               {"sweeps", r.sweeps},
               {"climb_sweeps", r.climb_sweeps},
               {"climb_force", jnum(r.climb_force)},
               {"converged", r.converged},
               {"saddle_knot", r.saddle_knot},
               {"knot_residual", jnum(r.residual)}};
  j["geometry"] = {{"items", items},
                   {"all_pass", r.geometry_checks.all_pass()},
                   {"j_lambda", jnum(r.geometry_checks.j_lambda)},
                   {"j_samples", r.geometry_checks.j_samples},
                   {"max_H_star", jnum(r.geometry_checks.max_H_star)},
                   {"witness", r.geometry_checks.witness}};
  if (p.saddle) {
    j["saddle"] = report_json(p.saddle->report);
    j["saddle"]["distance_to_first"] = jnum(p.saddle_distance);
    j["saddle"]["newton_iterations"] = p.saddle->iterations;
    j["saddle"]["min_value"] = jnum(p.saddle->min_value);
  } else {
    j["saddle"] = nullptr;
  }
  if (p.second_run) {
    j["second_endpoint"] = {{"status", p.second_status},
                            {"c_lambda", jnum(p.c_lambda_second)},
                            {"spread", jnum(std::fabs(p.c_lambda_second - r.c_lambda))},
                            {"endpoint_distance", jnum(p.endpoint_distance)}};
  }
  return j;
}

}  // namespace

ProblemData problem_from_config(const RunConfig& c, const std::string& base_dir) {
  auto d = build_domain(c.dim, c.L, c.n);
  WeightField h(d, weight_values(c.h, *d, base_dir));
  WeightField f(d, weight_values(c.f, *d, base_dir));
  return make_problem(d, c.p, c.gamma, std::move(h), std::move(f), c.eps_reg);
}

std::vector<double> lambda_grid(const RunConfig& c, double lambda1, double lambda_star, bool infeasible) {
  std::vector<double> g;
  if (c.lambda.mode == "grid") {
    g = c.lambda.grid;
  } else if (!infeasible) {
    const double span = lambda_star - lambda1;
    const double delta = c.lambda.delta_fraction * span;
    const double lo = lambda1 + delta, hi = lambda_star - delta;
    for (int k = 0; k < c.lambda.below; ++k) {
      const double t = c.lambda.below == 1 ? 0.5 : static_cast<double>(k) / (c.lambda.below - 1);
      g.push_back(lo + t * (hi - lo));
    }
    for (int k = 1; k <= c.lambda.above; ++k) g.push_back(lambda_star * (1.0 + k * c.lambda.above_step));
  }
  std::sort(g.begin(), g.end());
  return g;
}

const std::vector<std::string>& diagram_columns() {
  static const std::vector<std::string> cols{"lambda",        "branch",     "status",   "phi",
                                             "H",             "F",          "residual", "tail_fraction",
                                             "iterations",    "nehari_class", "J",      "min_value",
                                             "warm_started",  "message"};
  return cols;
}

std::string emit_diagram(const std::vector<SweepRow>& rows, const std::string& format,
                         const std::string& hash, std::uint64_t seed) {
  if (rows.empty()) throw std::invalid_argument("emit_diagram: no rows");
  std::ostringstream out;
  const bool csv = format == "csv";
  if (!csv && format != "jsonl") throw std::invalid_argument("emit_diagram: unknown format " + format);
  if (csv) {
    out << "# config_hash=" << hash << " seed=" << seed << "\n";
    const auto& cols = diagram_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << "\n";
  }
  for (const SweepRow& r : rows) {
    std::vector<std::string> v(diagram_columns().size());
    const bool have = r.point.has_value();
    // Numeric cells; empty (CSV) or null (JSON) when the solve failed.
    auto num = [&](double x) { return have ? g17(x) : std::string(); };
    v[0] = g17(r.lambda);
    v[1] = std::string(to_string(r.branch));
    v[2] = r.status;
    if (have) {
      const EnergyReport& e = r.point->report;
      v[3] = num(e.phi);
      v[4] = num(e.H);
      v[5] = num(e.F);
      v[6] = num(e.residual);
      v[7] = num(e.tail_fraction);
      v[8] = std::to_string(r.point->iterations);
      v[9] = std::string(to_string(e.nehari_class));
      v[10] = num(r.point->J);
      v[11] = num(r.point->min_value);
      v[12] = r.point->warm_started ? "true" : "false";
    }
    v[13] = r.message;
    if (csv) {
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out << ",";
        out << (k == 13 ? csv_quote(v[k]) : v[k]);
      }
      out << "\n";
    } else {
      // Hand-written so numbers keep 17 significant digits.
      const auto& cols = diagram_columns();
      out << "{\"config_hash\":" << json(hash).dump() << ",\"seed\":" << seed;
      for (std::size_t k = 0; k < v.size(); ++k) {
        out << ",\"" << cols[k] << "\":";
        const bool text = k == 1 || k == 2 || k == 9 || k == 13;
        if (k == 12) out << (have ? v[k] : "null");
        else if (text) out << (v[k].empty() && k == 9 ? "null" : json(v[k]).dump());
        else out << (v[k].empty() ? "null" : v[k]);
      }
      out << "}\n";
    }
  }
  return out.str();
}

int run(const RunConfig& c, const std::string& base_dir, std::ostream& log) {
  namespace fs = std::filesystem;
  if (c.solver.kernels == "scalar") kernels::select_backend(kernels::Backend::Scalar);
  else if (c.solver.kernels == "avx2") {
    if (!kernels::avx2_supported()) {
      log << "config error: AVX2 kernels requested but not available\n";
      return kExitConfig;
    }
    kernels::select_backend(kernels::Backend::Avx2);
  }

  ProblemData data;
  try {
    data = problem_from_config(c, base_dir);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const fs::path out = c.out;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    log << "config error: cannot create output directory " << out.string() << "\n";
    return kExitConfig;
  }

  try {
    const std::string hash = config_hash(c);
    EigenOptions eo;
    eo.seed = c.seed;
    log << "lambda1 ...\n";
    EigenResult eig;
    try {
      eig = lambda1(data, nullptr, eo);
    } catch (const SolverError& e) {
      json h = header(c);
      h["error"] = e.what();
      write_file(out / "hypotheses.json", dump(h));
      log << "stopped: " << e.what() << "\n";
      return kExitPartial;
    }
    json ej = header(c);
    ej["kernels"] = kernels::active().name;
    ej["lambda1"] = jnum(eig.lambda1);
    ej["iterations"] = eig.iterations;
    ej["residual"] = jnum(eig.residual);
    ej["phi1_max"] = jnum(eig.phi1.values.maxCoeff());
    ej["phi1_tail_fraction"] = jnum(tail_fraction(eig.phi1.values, 0.8 * c.L, data));
    write_file(out / "eigen.json", dump(ej));

    const HypothesisReport hr = validate_hypotheses(data, eig, eo);
    json hj = header(c);
    hj["F1"] = hr.F1;
    hj["F2"] = to_string(hr.F2);
    hj["F_inf"] = hr.F_inf;
    hj["F_phi1"] = hr.F_phi1;
    hj["count_f_plus"] = hr.count_f_plus;
    hj["count_f_minus"] = hr.count_f_minus;
    hj["count_f_zero"] = hr.count_f_zero;
    hj["lambda1_plus_zero"] = jnum(hr.lambda1_plus_zero);
    hj["lambda1_zero"] = jnum(hr.lambda1_zero);
    hj["lambda1_plus_zero_eroded"] = hr.lambda1_plus_zero_eroded ? jnum(*hr.lambda1_plus_zero_eroded) : json("empty");
    hj["lambda1_zero_eroded"] = hr.lambda1_zero_eroded ? jnum(*hr.lambda1_zero_eroded) : json("empty");
    hj["eroded_differs"] = hr.eroded_differs;
    hj["f_shell_max"] = jnum(hr.f_shell_max);
    hj["f_phi1_integral"] = jnum(hr.f_phi1_integral);
    hj["notes"] = hr.notes;
    write_file(out / "hypotheses.json", dump(hj));
    if (!hr.F1) {
      log << "stopped: hypothesis F1 fails (f must take both signs on the grid)\n";
      return kExitPartial;
    }
    const bool hyp_ok = hr.F_inf && hr.F_phi1 && hr.F2 != Tri::False;
    if (!hyp_ok) log << "warning: a hypothesis fails, results are outside the theory\n";

    log << "lambda* ...\n";
    ExtremalOptions xo;
    xo.restarts = c.solver.restarts;
    xo.seed = c.seed;
    xo.threads = c.solver.threads;
    const SweepContext ctx = prepare_sweep(data, eo, xo, c.solver.star_steps);
    json xj = header(c);
    const ExtremeResult& ex = ctx.extreme;
    xj["infeasible"] = ex.infeasible;
    xj["lambda_star"] = ex.infeasible ? json("infeasible") : jnum(ex.lambda_star);
    xj["lambda1"] = jnum(eig.lambda1);
    if (!ex.infeasible) {
      xj["F_at_min"] = jnum(ex.F_at_min);
      xj["constraint_residual"] = jnum(ex.constraint_residual);
      xj["multiplier"] = jnum(ex.multiplier);
      xj["restarts"] = ex.restarts;
      xj["best_seed"] = ex.best_seed;
      xj["constraint_active"] = ex.constraint_active;
      try {
        const T0Result t0 = t0_rescale(ex.u_star, ex.lambda_star, data);
        xj["t0"] = {{"t0", jnum(t0.t0)},
                    {"closed_form", jnum(t0.closed_form_t0)},
                    {"residual", jnum(t0.residual)},
                    {"nehari_class",
                     std::string(to_string(nehari_test(t0.w.values, ex.lambda_star, data, c.solver.nehari_tol)))}};
      } catch (const SolverError& e) {
        xj["t0"] = {{"error", e.what()}};
      }
      xj["mu0"] = ctx.mu0 ? jnum(*ctx.mu0) : json(ctx.mu0_error);
    }
    if (c.lambda.epsilon_probe_steps > 0 && !ex.infeasible) {
      log << "epsilon probe ...\n";
      BranchOptions bo;
      bo.residual_tol = c.solver.residual_tol;
      bo.newton_tol = c.solver.newton_tol;
      bo.nehari_tol = c.solver.nehari_tol;
      const EpsilonProbe ep = probe_epsilon(ctx, data, c.lambda.above_step, c.lambda.epsilon_probe_steps, bo);
      xj["epsilon_probe"] = {{"step", jnum(ep.step)},           {"steps", ep.steps},
                             {"last_lambda", jnum(ep.last_lambda)}, {"epsilon", jnum(ep.epsilon)},
                             {"exhausted", ep.exhausted},       {"stop_status", ep.stop_status},
                             {"stop_message", ep.stop_message}};
    }
    write_file(out / "extreme.json", dump(xj));

    const std::vector<double> grid = lambda_grid(c, eig.lambda1, ex.lambda_star, ex.infeasible);
    if (grid.empty()) {
      log << "stopped: empty lambda grid (lambda* infeasible and no explicit grid)\n";
      return kExitPartial;
    }
    SweepOptions so;
    so.branch.residual_tol = c.solver.residual_tol;
    so.branch.newton_tol = c.solver.newton_tol;
    so.branch.nehari_tol = c.solver.nehari_tol;
    so.mountain_pass = c.mountain_pass;
    so.threads = c.solver.threads;
    so.second.plateau_tol = c.solver.plateau_tol;
    so.second.face_tol = c.solver.face_tol;
    so.second.separation = c.solver.separation;
    so.second.geometry_samples = c.solver.geometry_samples;
    so.second.seed = c.seed;
    so.second.second_endpoint = c.second_endpoint;
    so.second.path.knots = c.solver.knots;
    so.second.path.max_sweeps = c.solver.max_sweeps;
    so.second.path.max_climb_sweeps = c.solver.max_climb_sweeps;
    so.second.path.threads = c.solver.threads;
    log << "sweep over " << grid.size() << " lambda values ...\n";
    const SweepResult sr = sweep(grid, ctx, data, so);
    write_file(out / ("branches." + c.format), emit_diagram(sr.rows, c.format, hash, c.seed));

    json mj = header(c);
    mj["enabled"] = c.mountain_pass;
    mj["lambda_star"] = ex.infeasible ? json("infeasible") : jnum(ex.lambda_star);
    json passes = json::array();
    for (const PassReport& p : sr.passes) passes.push_back(pass_json(p));
    mj["passes"] = passes;
    write_file(out / "mountainpass.json", dump(mj));

    std::size_t failed = 0;
    for (const auto& r : sr.rows) failed += r.status != "ok";
    log << sr.rows.size() << " rows, " << failed << " failed\n";
    return sr.any_error() || !hyp_ok ? kExitPartial : kExitOk;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitPartial;
  }
}

}  // namespace plap
