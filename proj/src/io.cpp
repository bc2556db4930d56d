#include "amcmc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "amcmc/error.hpp"

namespace amcmc::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

KernelFile kernel_from_json(const json& j) {
  require(j.is_object(), ErrorCode::ConfigError, "kernel file must be a JSON object");
  require(j.contains("n") && j.contains("rows"), ErrorCode::ConfigError,
          "kernel file needs fields 'n' and 'rows'");
  const auto n = j.at("n").get<std::size_t>();
  std::vector<double> flat;
  const json& rows = j.at("rows");
  require(rows.is_array(), ErrorCode::ConfigError, "'rows' must be an array");
  if (!rows.empty() && rows.front().is_array()) {
    require(rows.size() == n, ErrorCode::DimensionMismatch, "'rows' must have n rows");
    for (const auto& r : rows) {
      require(r.size() == n, ErrorCode::DimensionMismatch, "each row must have n entries");
      for (const auto& v : r) flat.push_back(v.get<double>());
    }
  } else {
    flat = rows.get<std::vector<double>>();
    require(flat.size() == n * n, ErrorCode::DimensionMismatch,
            "flat 'rows' must have n*n entries");
  }
  KernelFile out{StochasticMatrix(n, std::move(flat), kBoundTol), std::nullopt};
  if (j.contains("pi")) {
    auto w = j.at("pi").get<std::vector<double>>();
    require(w.size() == n, ErrorCode::DimensionMismatch, "'pi' must have n entries");
    out.pi = Distribution(std::move(w), kBoundTol);
  }
  return out;
}

json kernel_to_json(const StochasticMatrix& P, const Distribution* pi) {
  json j;
  j["n"] = P.size();
  j["rows"] = std::vector<double>(P.data().begin(), P.data().end());
  if (pi != nullptr) j["pi"] = std::vector<double>(pi->weights().begin(), pi->weights().end());
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

KernelFile read_kernel_file(const std::filesystem::path& path) {
  return kernel_from_json(read_json_file(path));
}

void write_kernel_file(const std::filesystem::path& path, const StochasticMatrix& P,
                       const Distribution* pi) {
  write_text_file(path, kernel_to_json(P, pi).dump(2) + "\n");
}

CompactTarget target_from_json(const json& j) {
  require(j.contains("d") && j.contains("bounds") && j.contains("m") && j.contains("density"),
          ErrorCode::ConfigError, "target spec needs fields d, bounds, m, density");
  const auto d = j.at("d").get<std::size_t>();
  const auto m = j.at("m").get<std::size_t>();
  const auto bounds = j.at("bounds").get<std::vector<std::vector<double>>>();
  require(bounds.size() == d, ErrorCode::DimensionMismatch, "bounds must list d intervals");
  std::vector<double> lo, hi;
  for (const auto& b : bounds) {
    require(b.size() == 2 && b[0] < b[1], ErrorCode::ConfigError,
            "each bound must be [lo, hi] with lo < hi");
    lo.push_back(b[0]);
    hi.push_back(b[1]);
  }
  const json& dens = j.at("density");
  if (dens.is_string()) {
    const auto name = dens.get<std::string>();
    if (name == "uniform") return CompactTarget::uniform(lo, hi, m);
    if (name == "truncated-gaussian") return CompactTarget::truncated_gaussian(lo, hi, m);
    if (name == "bimodal-mixture") return CompactTarget::bimodal_mixture(lo, hi, m);
    fail(ErrorCode::ConfigError, "unknown density '" + name +
                                     "' (expected uniform, truncated-gaussian, bimodal-mixture)");
  }
  require(dens.is_object() && dens.contains("table"), ErrorCode::ConfigError,
          "density must be a builtin name or {\"table\": [...]}");
  return CompactTarget::table(lo, hi, m, dens.at("table").get<std::vector<double>>());
}

json report_to_json(const BoundReport& r) {
  json j;
  j["quantity"] = r.quantity;
  j["value"] = r.value;
  j["bound"] = r.bound;
  j["pass"] = r.pass;
  j["margin"] = r.margin;
  return j;
}

void write_tv_curves_csv(std::ostream& os, const std::vector<std::vector<double>>& curves) {
  os << "s,k,sup_tv\n";
  for (std::size_t s = 0; s < curves.size(); ++s) {
    for (std::size_t k = 0; k < curves[s].size(); ++k) {
      os << s << ',' << k << ',' << format_double(curves[s][k]) << '\n';
    }
  }
}

void write_g_csv(std::ostream& os, const PoissonSolution& sol) {
  os << "state,g\n";
  for (std::size_t x = 0; x < sol.g.size(); ++x) os << x << ',' << format_double(sol.g[x]) << '\n';
}

void write_ledger_csv(std::ostream& os, const Trajectory& traj, const DecompositionLedger& L) {
  require(L.length() == traj.length(), ErrorCode::DimensionMismatch,
          "ledger and trajectory lengths differ");
  os << "k,x,s_index,delta,M,A,R,D,cond_var\n";
  for (std::size_t i = 0; i < L.length(); ++i) {
    os << i + 1 << ',' << traj.X[i + 1] << ',' << traj.S[i + 1] << ','
       << format_double(L.Delta[i]) << ',' << format_double(L.M[i]) << ','
       << format_double(L.A[i]) << ',' << format_double(L.R[i]) << ','
       << format_double(L.D[i]) << ',' << format_double(L.cond_var[i]) << '\n';
  }
}

}  // namespace amcmc::io
