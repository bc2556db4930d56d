#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "amcmc/error.hpp"
#include "amcmc/family.hpp"
#include "amcmc/io.hpp"
#include "config.hpp"

using namespace amcmc;
using amcmc::io::json;

namespace {

std::string config_error(const std::string& text) {
  try {
    cli::parse_config_text(text, "cfg.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    return e.what();
  }
  FAIL("expected ConfigError");
  return {};
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("amcmc_io_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("kernel JSON round trip") {
  const KernelFamily fam = families::cyclic_counterexample();
  SUBCASE("flat rows with pi") {
    const json j = io::kernel_to_json(fam[0], &fam.pi());
    const io::KernelFile kf = io::kernel_from_json(j);
    CHECK(kf.kernel == fam[0]);
    REQUIRE(kf.pi.has_value());
    for (std::size_t i = 0; i < 3; ++i) CHECK((*kf.pi)[i] == fam.pi()[i]);
  }
  SUBCASE("nested rows without pi") {
    const json j = json::parse(R"({"n": 2, "rows": [[0.25, 0.75], [0.5, 0.5]]})");
    const io::KernelFile kf = io::kernel_from_json(j);
    CHECK(kf.kernel(0, 1) == 0.75);
    CHECK(kf.kernel(1, 0) == 0.5);
    CHECK_FALSE(kf.pi.has_value());
  }
  SUBCASE("file round trip is exact for random kernels") {
    const auto dir = scratch("roundtrip");
    CounterRng rng(3);
    for (int t = 0; t < 10; ++t) {
      const StochasticMatrix P = random_kernels::positive(7, rng);
      io::write_kernel_file(dir / "k.json", P);
      CHECK(io::read_kernel_file(dir / "k.json").kernel == P);
    }
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(io::kernel_from_json(json::parse(R"({"n": 2, "rows": [1, 0, 0]})")), Error);
    CHECK_THROWS_AS(io::kernel_from_json(json::parse(R"({"rows": [1]})")), Error);
    CHECK_THROWS_AS(io::kernel_from_json(json::parse(R"({"n": 1, "rows": [1], "pi": [0.5, 0.5]})")),
                    Error);
  }
}

TEST_CASE("target spec") {
  const CompactTarget t = io::target_from_json(
      json::parse(R"({"d": 1, "bounds": [[-3, 3]], "m": 20, "density": "truncated-gaussian"})"));
  CHECK(t.resolution() == 20);
  CHECK(t.num_states() == 20);
  CHECK_THROWS_AS(io::target_from_json(json::parse(
                      R"({"d": 1, "bounds": [[3, -3]], "m": 20, "density": "uniform"})")),
                  Error);
  CHECK_THROWS_AS(io::target_from_json(json::parse(
                      R"({"d": 1, "bounds": [[-1, 1]], "m": 5, "density": "cauchy"})")),
                  Error);
}

TEST_CASE("CSV writers") {
  const KernelFamily fam = families::cyclic_counterexample();
  const TestFunction phi = TestFunction::indicator(0, fam.pi());
  std::ostringstream g;
  io::write_g_csv(g, solve_poisson_exact(fam[0], fam.pi(), phi));
  const std::string gs = g.str();
  CHECK(gs.rfind("state,g\n", 0) == 0);
  CHECK(std::count(gs.begin(), gs.end(), '\n') == 4);

  std::ostringstream tv;
  io::write_tv_curves_csv(tv, {{1.0, 0.5}, {1.0, 0.25}});
  CHECK(tv.str() == "s,k,sup_tv\n0,0,1\n0,1,0.5\n1,0,1\n1,1,0.25\n");

  CHECK(io::format_double(0.1) == "0.1");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("config parsing") {
  SUBCASE("fields") {
    const auto cfg = cli::parse_config_text(
        R"({"experiment": "lln", "n_grid": [1000, 10000], "seed": 7, "tolerance": 0.2,
            "family": {"builtin": "iid3"}, "p": 0.5})");
    CHECK(cfg.experiment == "lln");
    CHECK(cfg.n_grid == std::vector<std::uint64_t>{1000, 10000});
    CHECK(cfg.seed == 7);
    CHECK(cfg.tolerance.value() == 0.2);
    CHECK(cfg.extra.at("p").get<double>() == 0.5);
  }
  SUBCASE("syntax errors report line and column") {
    const std::string msg = config_error("{\n  \"n\": 10,\n  \"seed\": ,\n}");
    CHECK(msg.find("cfg.json") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }
  SUBCASE("field errors name the field") {
    CHECK(config_error(R"({"n": "many"})").find("field 'n'") != std::string::npos);
    CHECK(config_error(R"({"n_grid": [10, -1]})").find("field 'n_grid[1]'") != std::string::npos);
    CHECK(config_error(R"({"format": "xml"})").find("field 'format'") != std::string::npos);
    CHECK(config_error(R"({"family": 3})").find("field 'family'") != std::string::npos);
    CHECK(config_error("[1, 2]").find("top level") != std::string::npos);
  }
  SUBCASE("builder errors name the nested field") {
    auto cfg = cli::parse_config_text(R"({"family": {"builtin": "nope"}})");
    try {
      cli::build_family(cfg);
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("family.builtin") != std::string::npos);
    }
    cfg = cli::parse_config_text(R"({"phi": {"indicator": 9}})");
    CHECK_THROWS_AS(cli::build_phi(cfg, families::cyclic_counterexample()), Error);
  }
  SUBCASE("relative kernel paths resolve against the config directory") {
    const auto dir = scratch("relpath");
    const KernelFamily fam = families::cyclic_counterexample();
    io::write_kernel_file(dir / "pa.json", fam[0], &fam.pi());
    io::write_kernel_file(dir / "pb.json", fam[1]);
    io::write_text_file(dir / "cfg.json", R"({"family": {"files": ["pa.json", "pb.json"]}})");
    const auto cfg = cli::load_config(dir / "cfg.json");
    const KernelFamily loaded = cli::build_family(cfg);
    CHECK(loaded.size() == 2);
    CHECK(loaded[1] == fam[1]);
  }
}

TEST_CASE("config hash and overrides") {
  auto a = cli::parse_config_text(R"({"seed": 3, "n": 100})");
  auto b = cli::parse_config_text(R"({"n": 100, "seed": 3, "out": "elsewhere", "threads": 4})");
  CHECK(cli::config_hash(a) == cli::config_hash(b));
  CHECK(cli::config_hash(a).size() == 16);
  b.seed = 4;
  CHECK(cli::config_hash(a) != cli::config_hash(b));

  ::setenv("AMCMC_SEED", "99", 1);
  ::setenv("AMCMC_FORMAT", "json", 1);
  cli::apply_env_overrides(a);
  CHECK(a.seed == 99);
  CHECK(a.format == "json");
  ::setenv("AMCMC_THREADS", "x", 1);
  CHECK_THROWS_AS(cli::apply_env_overrides(a), Error);
  ::unsetenv("AMCMC_SEED");
  ::unsetenv("AMCMC_FORMAT");
  ::unsetenv("AMCMC_THREADS");

  auto c = cli::parse_config_text("{}");
  const auto seeds = cli::chain_seeds(c, 4);
  CHECK(seeds.size() == 4);
  CHECK(seeds[0] == derive_seed(c.seed, 0));
  c.seeds = {5, 6};
  CHECK(cli::chain_seeds(c, 4) == std::vector<std::uint64_t>{5, 6});
}
