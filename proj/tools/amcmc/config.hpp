#pragma once

// Experiment configuration: a single JSON document, overridden by AMCMC_*
// environment variables, overridden in turn by command-line flags.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "amcmc/family.hpp"
#include "amcmc/io.hpp"
#include "amcmc/poisson.hpp"
#include "amcmc/scheme.hpp"

namespace amcmc::cli {

using io::json;

struct RunConfig {
  std::string experiment;
  /// {"builtin": name, ...} or {"file": path} / {"files": [paths]}
  json family = json::object();
  json scheme = json::object();
  /// {"indicator": state} | {"projection": true} | {"table": [...]}
  json phi = json::object();
  std::size_t x0 = 0;
  std::size_t n = 10000;
  std::vector<std::uint64_t> n_grid;
  std::size_t replications = 0;
  std::vector<std::uint64_t> seeds;
  std::uint64_t seed = 2024;
  bool expect_failure = false;
  std::optional<double> tolerance;
  std::filesystem::path out = "amcmc-out";
  unsigned threads = 1;
  std::string format = "csv";
  /// Extra experiment-specific fields (p, horizon, member, ...).
  json extra = json::object();
  /// Directory of the config file, for resolving relative paths.
  std::filesystem::path base_dir = ".";
};

/// Parses a config document. Errors carry the line (for syntax errors) or
/// the dotted field path (for schema errors).
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Applies AMCMC_SEED, AMCMC_THREADS, AMCMC_OUT and AMCMC_FORMAT.
void apply_env_overrides(RunConfig& cfg);

/// Canonical JSON of the fields that determine results (excludes out,
/// threads and format).
json canonical_config(const RunConfig& cfg);
/// FNV-1a 64 of the canonical JSON text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

KernelFamily build_family(const RunConfig& cfg);
TestFunction build_phi(const RunConfig& cfg, const KernelFamily& family);
SchemeSpec build_scheme(const RunConfig& cfg, const KernelFamily& family);
std::size_t initial_member(const RunConfig& cfg, const KernelFamily& family);
/// Explicit seeds, or `count` seeds derived from the root seed.
std::vector<std::uint64_t> chain_seeds(const RunConfig& cfg, std::size_t count);

}  // namespace amcmc::cli
