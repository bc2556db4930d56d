#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "amcmc/error.hpp"
#include "commands.hpp"

using namespace amcmc::cli;

int main(int argc, char** argv) {
  CLI::App app{"Adaptive MCMC ergodicity experiments"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> kernel;

  const char* names[] = {"counterexample", "lln", "clt", "bounds", "waning", "poisson", "kernel-info"};
  const char* help[] = {
      "Alternating two-kernel counterexample where the ergodic average fails",
      "Law of large numbers study over a grid of horizons and seeds",
      "Central limit study: empirical versus Poisson-equation variance",
      "Poisson, Lipschitz and A_n bound checks with fitted (C, rho)",
      "Decomposition ledger and diminishing-adaptation diagnostic",
      "Solve the Poisson equation per family member and write g",
      "Stationary distribution, ergodicity constants and TV curves",
  };
  for (std::size_t i = 0; i < std::size(names); ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Root seed");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Output directory");
    sub->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));
    if (std::string(names[i]) == "kernel-info") {
      sub->add_option("--kernel", kernel, "Kernel JSON file")->check(CLI::ExistingFile);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUnexpected;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    cfg.experiment = name;
    apply_env_overrides(cfg);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (out) cfg.out = *out;
    if (format) cfg.format = *format;
    if (kernel) cfg.family = {{"file", std::filesystem::absolute(*kernel).string()}};
    return run_command(name, cfg).exit_code;
  } catch (const amcmc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnexpected;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnexpected;
  }
}
