#pragma once

// File formats: kernel JSON {n, rows, pi?}, target spec JSON, bound reports,
// and the CSV tables emitted by the studies.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "amcmc/kernel.hpp"
#include "amcmc/ledger.hpp"
#include "amcmc/poisson.hpp"
#include "amcmc/rwm.hpp"

namespace amcmc::io {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal representation.
std::string format_double(double v);

struct KernelFile {
  StochasticMatrix kernel;
  std::optional<Distribution> pi;
};

/// `rows` is accepted either flat (row-major, length n*n) or nested.
KernelFile kernel_from_json(const json& j);
json kernel_to_json(const StochasticMatrix& P, const Distribution* pi = nullptr);
KernelFile read_kernel_file(const std::filesystem::path& path);
void write_kernel_file(const std::filesystem::path& path, const StochasticMatrix& P,
                       const Distribution* pi = nullptr);

/// {d, bounds: [[lo, hi], ...], m, density: name | {table: [...]}}.
/// Named densities: uniform, truncated-gaussian, bimodal-mixture.
CompactTarget target_from_json(const json& j);

json report_to_json(const BoundReport& r);

/// Header `s,k,sup_tv`; curves[s][k] = sup_x d_tv(P_s^k(x, .), pi).
void write_tv_curves_csv(std::ostream& os, const std::vector<std::vector<double>>& curves);
/// Header `state,g`.
void write_g_csv(std::ostream& os, const PoissonSolution& sol);
/// Header `k,x,s_index,delta,M,A,R,D,cond_var`; one row per step k >= 1.
void write_ledger_csv(std::ostream& os, const Trajectory& traj, const DecompositionLedger& L);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace amcmc::io
