#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "amcmc/error.hpp"
#include "amcmc/rng.hpp"
#include "amcmc/rwm.hpp"

namespace amcmc::cli {

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigError, "field '" + path + "': " + what);
}

template <class T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    if constexpr (std::is_same_v<T, std::string>) field_error(path, "expected a string");
    else if constexpr (std::is_same_v<T, bool>) field_error(path, "expected a boolean");
    else if constexpr (std::is_arithmetic_v<T>) field_error(path, "expected a number");
    else field_error(path, "has the wrong type");
  }
}

template <class T>
T get_or(const json& obj, const std::string& key, const std::string& prefix, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return get_as<T>(obj.at(key), prefix.empty() ? key : prefix + "." + key);
}

std::size_t get_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) field_error(path, "expected an integer");
  if (j.get<long long>() < 0) field_error(path, "must be non-negative");
  return j.get<std::size_t>();
}

std::vector<std::uint64_t> get_u64_list(const json& j, const std::string& path) {
  if (!j.is_array()) field_error(path, "expected an array of integers");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& v = j[i];
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d < 0 || d != std::floor(d)) field_error(p, "expected a non-negative integer");
      out.push_back(static_cast<std::uint64_t>(d));
    } else {
      out.push_back(get_count(v, p));
    }
  }
  return out;
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, origin + ": syntax error at " + line_col(text, e.byte));
  }
  if (!j.is_object()) fail(ErrorCode::ConfigError, origin + ": top level must be an object");

  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") cfg.experiment = get_as<std::string>(value, key);
    else if (key == "family") {
      if (!value.is_object()) field_error(key, "expected an object");
      cfg.family = value;
    } else if (key == "scheme") {
      if (!value.is_object()) field_error(key, "expected an object");
      cfg.scheme = value;
    } else if (key == "phi") {
      if (!value.is_object()) field_error(key, "expected an object");
      cfg.phi = value;
    } else if (key == "x0") cfg.x0 = get_count(value, key);
    else if (key == "n") {
      cfg.n = get_count(value, key);
      if (cfg.n < 1) field_error(key, "must be >= 1");
    } else if (key == "n_grid") {
      cfg.n_grid = get_u64_list(value, key);
      for (auto v : cfg.n_grid)
        if (v == 0) field_error(key, "entries must be >= 1");
    } else if (key == "replications") cfg.replications = get_count(value, key);
    else if (key == "seeds") {
      cfg.seeds = get_u64_list(value, key);
      if (cfg.seeds.empty()) field_error(key, "must be non-empty");
    } else if (key == "seed") cfg.seed = get_count(value, key);
    else if (key == "expect_failure") cfg.expect_failure = get_as<bool>(value, key);
    else if (key == "tolerance") cfg.tolerance = get_as<double>(value, key);
    else if (key == "out") cfg.out = get_as<std::string>(value, key);
    else if (key == "threads") cfg.threads = static_cast<unsigned>(get_count(value, key));
    else if (key == "format") cfg.format = get_as<std::string>(value, key);
    else cfg.extra[key] = value;
  }
  if (cfg.format != "csv" && cfg.format != "json") field_error("format", "expected csv or json");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ConfigError, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config_text(ss.str(), path.string());
  cfg.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return cfg;
}

void apply_env_overrides(RunConfig& cfg) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  auto parse_u64 = [](const std::string& name, const std::string& v) {
    try {
      std::size_t used = 0;
      const auto r = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<std::uint64_t>(r);
    } catch (const std::exception&) {
      fail(ErrorCode::ConfigError, "environment variable " + name + ": expected an integer");
    }
  };
  if (auto v = env("AMCMC_SEED")) cfg.seed = parse_u64("AMCMC_SEED", *v);
  if (auto v = env("AMCMC_THREADS")) cfg.threads = static_cast<unsigned>(parse_u64("AMCMC_THREADS", *v));
  if (auto v = env("AMCMC_OUT")) cfg.out = *v;
  if (auto v = env("AMCMC_FORMAT")) {
    if (*v != "csv" && *v != "json") {
      fail(ErrorCode::ConfigError, "environment variable AMCMC_FORMAT: expected csv or json");
    }
    cfg.format = *v;
  }
}

json canonical_config(const RunConfig& cfg) {
  // nlohmann::json (unordered) sorts object keys, which makes the dump canonical.
  nlohmann::json j;
  j["experiment"] = cfg.experiment;
  j["family"] = nlohmann::json::parse(cfg.family.dump());
  j["scheme"] = nlohmann::json::parse(cfg.scheme.dump());
  j["phi"] = nlohmann::json::parse(cfg.phi.dump());
  j["x0"] = cfg.x0;
  j["n"] = cfg.n;
  j["n_grid"] = cfg.n_grid;
  j["replications"] = cfg.replications;
  j["seeds"] = cfg.seeds;
  j["seed"] = cfg.seed;
  j["expect_failure"] = cfg.expect_failure;
  j["tolerance"] = cfg.tolerance ? nlohmann::json(*cfg.tolerance) : nlohmann::json(nullptr);
  j["extra"] = nlohmann::json::parse(cfg.extra.dump());
  return json::parse(j.dump());
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = nlohmann::json::parse(canonical_config(cfg).dump()).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

const Distribution& fig1_pi() {
  static const Distribution pi({0.5, 0.25, 0.25});
  return pi;
}

std::vector<double> default_variances() { return {0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4}; }

}  // namespace

KernelFamily build_family(const RunConfig& cfg) {
  const json& f = cfg.family;
  if (f.contains("file") || f.contains("files")) {
    std::vector<std::string> paths;
    if (f.contains("file")) paths.push_back(get_as<std::string>(f.at("file"), "family.file"));
    if (f.contains("files")) {
      if (!f.at("files").is_array()) field_error("family.files", "expected an array of paths");
      for (std::size_t i = 0; i < f.at("files").size(); ++i) {
        paths.push_back(get_as<std::string>(f.at("files")[i], "family.files[" + std::to_string(i) + "]"));
      }
    }
    std::vector<StochasticMatrix> kernels;
    std::optional<Distribution> pi;
    for (const auto& p : paths) {
      std::filesystem::path path(p);
      if (path.is_relative()) path = cfg.base_dir / path;
      if (!std::filesystem::exists(path)) field_error("family.file", "file not found: " + path.string());
      auto kf = io::read_kernel_file(path);
      if (!pi && kf.pi) pi = *kf.pi;
      kernels.push_back(std::move(kf.kernel));
    }
    if (!pi) pi = stationary_distribution(kernels.front());
    std::vector<double> params;
    if (f.contains("parameters")) params = get_as<std::vector<double>>(f.at("parameters"), "family.parameters");
    return KernelFamily(std::move(kernels), *pi, std::move(params));
  }

  const std::string name = get_or<std::string>(f, "builtin", "family", "iid3");
  if (name == "counterexample") return families::cyclic_counterexample();
  if (name == "iid3") {
    if (f.contains("pi")) {
      return families::independent(
          Distribution(get_as<std::vector<double>>(f.at("pi"), "family.pi"), kBoundTol));
    }
    return families::independent(fig1_pi());
  }
  if (name == "positive-pair") {
    return families::smoothed(families::cyclic_counterexample(),
                              get_or<double>(f, "epsilon", "family", 0.2));
  }
  if (name == "mixture") {
    const auto base = families::smoothed(families::cyclic_counterexample(),
                                         get_or<double>(f, "epsilon", "family", 0.2));
    return families::convex_mixture(base[0], base[1], base.pi(),
                                    get_or<std::size_t>(f, "count", "family", 10));
  }
  if (name == "rwm") {
    json target = {{"d", 1}, {"bounds", {{-3.0, 3.0}}}, {"m", 30}, {"density", "truncated-gaussian"}};
    if (f.contains("target")) target = f.at("target");
    std::vector<double> variances = default_variances();
    if (f.contains("variances")) {
      variances = get_as<std::vector<double>>(f.at("variances"), "family.variances");
    }
    try {
      return families::rwm_variances(io::target_from_json(target), variances);
    } catch (const std::invalid_argument& e) {
      field_error("family.target", e.what());
    }
  }
  if (name == "random") {
    const auto states = get_or<std::size_t>(f, "states", "family", 6);
    const auto members = get_or<std::size_t>(f, "members", "family", 3);
    CounterRng rng(get_or<std::uint64_t>(f, "seed", "family", 1));
    const Distribution pi = random_kernels::distribution(states, rng);
    std::vector<StochasticMatrix> ks;
    for (std::size_t i = 0; i < members; ++i) {
      ks.push_back(random_kernels::reversible(pi, rng, get_or<double>(f, "laziness", "family", 0.1)));
    }
    return KernelFamily(std::move(ks), pi);
  }
  field_error("family.builtin", "unknown family '" + name +
                                    "' (expected counterexample, iid3, positive-pair, mixture, rwm, random)");
}

TestFunction build_phi(const RunConfig& cfg, const KernelFamily& family) {
  const json& p = cfg.phi;
  const std::size_t n = family.num_states();
  if (p.empty()) return TestFunction::indicator(0, family.pi());
  if (p.contains("indicator")) {
    const std::size_t s = get_count(p.at("indicator"), "phi.indicator");
    if (s >= n) field_error("phi.indicator", "state out of range");
    return TestFunction::indicator(s, family.pi());
  }
  if (p.contains("projection")) {
    std::vector<double> v(n);
    for (std::size_t x = 0; x < n; ++x) v[x] = family.coordinate(x);
    return TestFunction(std::move(v), family.pi());
  }
  if (p.contains("table")) {
    auto v = get_as<std::vector<double>>(p.at("table"), "phi.table");
    if (v.size() != n) field_error("phi.table", "expected " + std::to_string(n) + " entries");
    return TestFunction(std::move(v), family.pi());
  }
  field_error("phi", "expected one of indicator, projection, table");
}

SchemeSpec build_scheme(const RunConfig& cfg, const KernelFamily& family) {
  const json& s = cfg.scheme;
  SchemeSpec spec;
  try {
    spec.kind = parse_scheme_kind(get_or<std::string>(s, "scheme", "scheme", "constant"));
  } catch (const std::invalid_argument& e) {
    field_error("scheme.scheme", e.what());
  }
  if (s.contains("sequence")) {
    for (auto v : get_u64_list(s.at("sequence"), "scheme.sequence")) {
      if (v >= family.size()) field_error("scheme.sequence", "member index out of range");
      spec.sequence.push_back(static_cast<std::size_t>(v));
    }
  } else if (spec.kind == SchemeSpec::Kind::Cyclic) {
    for (std::size_t i = 0; i < family.size(); ++i) spec.sequence.push_back(i);
  }
  if (s.contains("gamma")) {
    const json& g = s.at("gamma");
    const auto kind = get_or<std::string>(g, "kind", "scheme.gamma", "power");
    if (kind == "harmonic") {
      spec.gamma_c = 1.0;
      spec.gamma_exponent = 1.0;
    } else if (kind == "ram") {
      spec.gamma_c = 1.0;
      spec.gamma_exponent = 2.0 / 3.0;
    } else if (kind == "power") {
      if (g.contains("c")) spec.gamma_c = get_as<double>(g.at("c"), "scheme.gamma.c");
      if (g.contains("exponent")) {
        spec.gamma_exponent = get_as<double>(g.at("exponent"), "scheme.gamma.exponent");
      }
    } else {
      field_error("scheme.gamma.kind", "expected power, harmonic or ram");
    }
  }
  if (s.contains("constraint")) {
    const json& c = s.at("constraint");
    ConstraintSpec cs;
    cs.a = get_or<double>(c, "a", "scheme.constraint", family.parameter(0));
    cs.b = get_or<double>(c, "b", "scheme.constraint", family.parameter(family.size() - 1));
    if (!(cs.a < cs.b)) field_error("scheme.constraint", "requires a < b");
    const auto mode = get_or<std::string>(c, "mode", "scheme.constraint", "project");
    if (mode == "project") cs.mode = ConstraintMode::Project;
    else if (mode == "reject") cs.mode = ConstraintMode::Reject;
    else field_error("scheme.constraint.mode", "expected project or reject");
    spec.constraint = cs;
  }
  if (s.contains("rare")) {
    const json& r = s.at("rare");
    RareSpec rs;
    const auto kind = get_or<std::string>(r, "kind", "scheme.rare", "deterministic");
    if (kind == "deterministic") rs.kind = RareSchedule::Kind::DeterministicTimes;
    else if (kind == "bernoulli") rs.kind = RareSchedule::Kind::BernoulliActivation;
    else field_error("scheme.rare.kind", "expected deterministic or bernoulli");
    rs.c = get_or<double>(r, "c", "scheme.rare", 2.0);
    rs.epsilon = get_or<double>(r, "epsilon", "scheme.rare", 0.1);
    if (!(rs.c > 0.0 && rs.epsilon > 0.0)) field_error("scheme.rare", "c and epsilon must be positive");
    spec.rare = rs;
  }
  spec.alpha_star = get_or<double>(s, "alpha_star", "scheme", spec.alpha_star);
  spec.am_scale = get_or<double>(s, "am_scale", "scheme", spec.am_scale);
  return spec;
}

std::size_t initial_member(const RunConfig& cfg, const KernelFamily& family) {
  if (!cfg.scheme.contains("s0")) return 0;
  const std::size_t s0 = get_count(cfg.scheme.at("s0"), "scheme.s0");
  if (s0 >= family.size()) field_error("scheme.s0", "member index out of range");
  return s0;
}

std::vector<std::uint64_t> chain_seeds(const RunConfig& cfg, std::size_t count) {
  if (!cfg.seeds.empty()) return cfg.seeds;
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(derive_seed(cfg.seed, i));
  return out;
}

}  // namespace amcmc::cli
