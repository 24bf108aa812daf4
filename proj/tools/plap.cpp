#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "plap/app.hpp"

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
      throw std::invalid_argument("bad lambda value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty --lambda-grid");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive solutions of -Δp u - λ h|u|^{p-2}u = f|u|^{γ-2}u on a truncated box"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, format, grid, kernels;
  bool skip_mp = false, second_endpoint = false, print_config = false;
  app.add_option("config", config_path, "Run configuration (JSON); omitted means the built-in preset");
  app.add_option("--seed", seed, "Override the RNG seed");
  app.add_option("--out", out, "Output directory");
  app.add_option("--format", format, "Branch table format")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--lambda-grid", grid, "Comma-separated explicit λ values");
  app.add_option("--kernels", kernels, "Kernel variant")->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  app.add_flag("--skip-mountain-pass", skip_mp, "Do not run the mountain pass past λ*");
  app.add_flag("--second-endpoint", second_endpoint,
               "Rerun each pass with a second boundary minimizer and report the spread of c_λ");
  std::optional<int> probe;
  app.add_option("--probe-epsilon", probe, "Walk up to N steps past λ* to measure the working interval")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
  CLI11_PARSE(app, argc, argv);

  plap::RunConfig cfg;
  std::string base_dir = ".";
  try {
    if (config_path.empty()) {
      cfg = plap::preset_config();
    } else {
      cfg = plap::load_config(config_path);
      base_dir = std::filesystem::path(config_path).parent_path().string();
      if (base_dir.empty()) base_dir = ".";
    }
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (format) cfg.format = *format;
    if (kernels) cfg.solver.kernels = *kernels;
    if (grid) {
      cfg.lambda.mode = "grid";
      cfg.lambda.grid = parse_grid(*grid);
    }
    if (probe) cfg.lambda.epsilon_probe_steps = *probe;
    if (skip_mp) cfg.mountain_pass = false;
    if (second_endpoint) cfg.second_endpoint = true;
    // Re-validate after overrides.
    cfg = plap::config_from_json(plap::to_json(cfg));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return plap::kExitConfig;
  }
  if (print_config) {
    std::cout << plap::to_json(cfg).dump(2) << "\n";
    return plap::kExitOk;
  }
  return plap::run(cfg, base_dir, std::cerr);
}
