#include "plap/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace plap {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) bad(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("bad value for '") + key + "': " + e.what());
  }
}

json weight_json(const WeightProfile& w) { return {{"profile", w.profile}, {"params", w.params}}; }

WeightProfile weight_from(const json& j, const std::string& where) {
  check_keys(j, where, {"profile", "params"});
  WeightProfile w;
  read(j, "profile", w.profile);
  if (j.contains("params")) {
    if (!j.at("params").is_object()) bad(where + ".params must be an object");
    w.params = j.at("params");
  }
  static const std::set<std::string> known{"constant", "plateau", "bump_annulus", "gaussian", "file"};
  if (!known.count(w.profile)) bad("unknown weight profile '" + w.profile + "'");
  return w;
}

double param(const WeightProfile& w, const char* key, double fallback) {
  if (!w.params.contains(key)) return fallback;
  const json& v = w.params.at(key);
  if (!v.is_number()) bad(std::string("weight parameter '") + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> node_point(const Domain& d, std::size_t node) {
  if (d.dim == 1) return {d.coord(static_cast<int>(node))};
  const auto n = static_cast<std::size_t>(d.n);
  return {d.coord(static_cast<int>(node % n)), d.coord(static_cast<int>(node / n))};
}

double dist(const std::vector<double>& x, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double ck = k < c.size() ? c[k] : 0.0;
    s += (x[k] - ck) * (x[k] - ck);
  }
  return std::sqrt(s);
}

Vec read_nodal_file(const std::string& path, std::size_t count) {
  std::ifstream in(path);
  if (!in) bad("cannot read weight file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<double> vals;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      vals = json::parse(text).get<std::vector<double>>();
    } catch (const json::exception& e) {
      bad("weight file '" + path + "': " + e.what());
    }
  } else {
    std::istringstream is(text);
    double v;
    while (is >> v) vals.push_back(v);
    if (!is.eof()) bad("weight file '" + path + "' has a non-numeric entry");
  }
  if (vals.size() != count)
    bad("weight file '" + path + "' has " + std::to_string(vals.size()) + " values, expected " +
        std::to_string(count));
  return Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

RunConfig preset_config() {
  RunConfig c;
  c.h.profile = "plateau";
  c.h.params = {{"inner", 1.0}, {"outer", 0.0}, {"radius", 1.0}, {"taper", 0.5}};
  c.f.profile = "bump_annulus";
  c.f.params = {{"bumps", json::array({{{"center", {0.0}}, {"radius", 0.5}, {"height", 1.0}}})},
                {"zero_width", 0.2},
                {"f_inf", -30.0}};
  return c;
}

json to_json(const RunConfig& c) {
  return {
      {"domain", {{"dim", c.dim}, {"L", c.L}, {"n", c.n}}},
      {"p", c.p},
      {"gamma", c.gamma},
      {"eps_reg", c.eps_reg},
      {"h", weight_json(c.h)},
      {"f", weight_json(c.f)},
      {"lambda",
       {{"mode", c.lambda.mode},
        {"grid", c.lambda.grid},
        {"below", c.lambda.below},
        {"delta_fraction", c.lambda.delta_fraction},
        {"above", c.lambda.above},
        {"above_step", c.lambda.above_step},
        {"epsilon_probe_steps", c.lambda.epsilon_probe_steps}}},
      {"solver",
       {{"residual_tol", c.solver.residual_tol},
        {"newton_tol", c.solver.newton_tol},
        {"nehari_tol", c.solver.nehari_tol},
        {"plateau_tol", c.solver.plateau_tol},
        {"face_tol", c.solver.face_tol},
        {"separation", c.solver.separation},
        {"restarts", c.solver.restarts},
        {"star_steps", c.solver.star_steps},
        {"knots", c.solver.knots},
        {"max_sweeps", c.solver.max_sweeps},
        {"max_climb_sweeps", c.solver.max_climb_sweeps},
        {"geometry_samples", c.solver.geometry_samples},
        {"threads", c.solver.threads},
        {"kernels", c.solver.kernels}}},
      {"seed", c.seed},
      {"output", {{"dir", c.out}, {"format", c.format}}},
      {"mountain_pass", {{"enabled", c.mountain_pass}, {"second_endpoint", c.second_endpoint}}},
  };
}

RunConfig config_from_json(const json& j) {
  check_keys(j, "config",
             {"domain", "p", "gamma", "eps_reg", "h", "f", "lambda", "solver", "seed", "output",
              "mountain_pass"});
  RunConfig c = preset_config();
  if (j.contains("domain")) {
    const json& d = j.at("domain");
    check_keys(d, "domain", {"dim", "L", "n"});
    read(d, "dim", c.dim);
    read(d, "L", c.L);
    read(d, "n", c.n);
  }
  read(j, "p", c.p);
  read(j, "gamma", c.gamma);
  read(j, "eps_reg", c.eps_reg);
  if (j.contains("h")) c.h = weight_from(j.at("h"), "h");
  if (j.contains("f")) c.f = weight_from(j.at("f"), "f");
  if (j.contains("lambda")) {
    const json& l = j.at("lambda");
    check_keys(l, "lambda", {"mode", "grid", "below", "delta_fraction", "above", "above_step",
                                   "epsilon_probe_steps"});
    read(l, "mode", c.lambda.mode);
    read(l, "grid", c.lambda.grid);
    read(l, "below", c.lambda.below);
    read(l, "delta_fraction", c.lambda.delta_fraction);
    read(l, "above", c.lambda.above);
    read(l, "above_step", c.lambda.above_step);
    read(l, "epsilon_probe_steps", c.lambda.epsilon_probe_steps);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, "solver",
               {"residual_tol", "newton_tol", "nehari_tol", "plateau_tol", "face_tol", "separation",
                "restarts", "star_steps", "knots", "max_sweeps", "max_climb_sweeps",
                "geometry_samples", "threads", "kernels"});
    read(s, "residual_tol", c.solver.residual_tol);
    read(s, "newton_tol", c.solver.newton_tol);
    read(s, "nehari_tol", c.solver.nehari_tol);
    read(s, "plateau_tol", c.solver.plateau_tol);
    read(s, "face_tol", c.solver.face_tol);
    read(s, "separation", c.solver.separation);
    read(s, "restarts", c.solver.restarts);
    read(s, "star_steps", c.solver.star_steps);
    read(s, "knots", c.solver.knots);
    read(s, "max_sweeps", c.solver.max_sweeps);
    read(s, "max_climb_sweeps", c.solver.max_climb_sweeps);
    read(s, "geometry_samples", c.solver.geometry_samples);
    read(s, "threads", c.solver.threads);
    read(s, "kernels", c.solver.kernels);
  }
  read(j, "seed", c.seed);
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, "output", {"dir", "format"});
    read(o, "dir", c.out);
    read(o, "format", c.format);
  }
  if (j.contains("mountain_pass")) {
    const json& m = j.at("mountain_pass");
    check_keys(m, "mountain_pass", {"enabled", "second_endpoint"});
    read(m, "enabled", c.mountain_pass);
    read(m, "second_endpoint", c.second_endpoint);
  }

  if (c.dim != 1 && c.dim != 2) bad("domain.dim must be 1 or 2");
  if (!(c.L > 0.0)) bad("domain.L must be positive");
  if (c.n < 3) bad("domain.n must be at least 3");
  if (!(c.p > 1.0)) bad("p must exceed 1");
  if (!(c.gamma > c.p)) bad("gamma must exceed p");
  if (c.lambda.mode != "auto" && c.lambda.mode != "grid") bad("lambda.mode must be auto or grid");
  if (c.lambda.mode == "grid" && c.lambda.grid.empty()) bad("lambda.grid is empty");
  for (double v : c.lambda.grid)
    if (!std::isfinite(v)) bad("lambda.grid has a non-finite entry");
  if (c.lambda.below < 0 || c.lambda.above < 0) bad("lambda sample counts must be >= 0");
  if (!(c.lambda.delta_fraction >= 0.0 && c.lambda.delta_fraction < 0.5))
    bad("lambda.delta_fraction must lie in [0, 0.5)");
  if (!(c.lambda.above_step > 0.0)) bad("lambda.above_step must be positive");
  if (c.lambda.epsilon_probe_steps < 0) bad("lambda.epsilon_probe_steps must be nonnegative");
  if (c.solver.knots < 8) bad("solver.knots must be at least 8");
  if (c.solver.restarts < 1) bad("solver.restarts must be at least 1");
  if (c.solver.kernels != "auto" && c.solver.kernels != "scalar" && c.solver.kernels != "avx2")
    bad("solver.kernels must be auto, scalar or avx2");
  if (c.format != "csv" && c.format != "jsonl") bad("output.format must be csv or jsonl");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    bad("'" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
  // The output directory is excluded so reruns elsewhere hash identically.
  nlohmann::json j = to_json(c);
  j["output"].erase("dir");
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Vec weight_values(const WeightProfile& w, const Domain& d, const std::string& base_dir) {
  const std::size_t count = d.node_count();
  Vec v(static_cast<Eigen::Index>(count));
  if (w.profile == "file") {
    if (!w.params.contains("path") || !w.params.at("path").is_string()) bad("file profile needs a path");
    std::filesystem::path p = w.params.at("path").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return read_nodal_file(p.string(), count);
  }
  if (w.profile == "bump_annulus") {
    struct Bump {
      std::vector<double> center;
      double radius, height;
    };
    std::vector<Bump> bumps;
    if (!w.params.contains("bumps") || !w.params.at("bumps").is_array()) bad("bump_annulus needs bumps");
    for (const json& b : w.params.at("bumps")) {
      Bump bb;
      try {
        bb.center = b.value("center", std::vector<double>{});
        bb.radius = b.at("radius").get<double>();
        bb.height = b.at("height").get<double>();
      } catch (const json::exception& e) {
        bad(std::string("bad bump: ") + e.what());
      }
      if (!(bb.radius > 0.0)) bad("bump radius must be positive");
      bumps.push_back(bb);
    }
    const double zw = param(w, "zero_width", 0.0);
    const double finf = param(w, "f_inf", -1.0);
    for (std::size_t k = 0; k < count; ++k) {
      const auto x = node_point(d, k);
      double val = finf;
      bool in_bump = false, in_zero = false;
      for (const Bump& b : bumps) {
        const double r = dist(x, b.center);
        if (r < b.radius && !in_bump) {
          val = b.height;
          in_bump = true;
        } else if (r < b.radius + zw) {
          in_zero = true;
        }
      }
      v[static_cast<Eigen::Index>(k)] = in_bump ? val : (in_zero ? 0.0 : finf);
    }
    return v;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double r = dist(node_point(d, k), {});
    double val;
    if (w.profile == "constant") {
      val = param(w, "value", 1.0);
    } else if (w.profile == "plateau") {
      const double inner = param(w, "inner", 1.0), outer = param(w, "outer", 0.0);
      const double radius = param(w, "radius", 1.0), taper = param(w, "taper", 0.5);
      if (r <= radius) val = inner;
      else if (taper <= 0.0 || r >= radius + taper) val = outer;
      else val = outer + (inner - outer) * 0.5 * (1.0 + std::cos(std::numbers::pi * (r - radius) / taper));
    } else if (w.profile == "gaussian") {
      const double width = param(w, "width", 1.0);
      if (!(width > 0.0)) bad("gaussian width must be positive");
      val = param(w, "offset", 0.0) + param(w, "amplitude", 1.0) * std::exp(-r * r / (2.0 * width * width));
    } else {
      bad("unknown weight profile '" + w.profile + "'");
    }
    v[static_cast<Eigen::Index>(k)] = val;
  }
  return v;
}

}  // namespace plap
