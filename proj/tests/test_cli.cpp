#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "exitctl/cli.hpp"
#include "exitctl/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace exitctl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("exitctl_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) ++n;
  return n;
}

std::string config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.pointer() + " | " + e.what();
  }
  return "";
}

const char* kSmall = R"({
  "sim": {"n_traj": 40},
  "basis": {"kind": "gaussian", "counts": [4]},
  "control": {"kind": "basis", "coefficients": [0.1, -0.2, 0.2, -0.1]},
  "descent": {"n_iter": 2, "n_traj": 40, "step": {"h": 0.05}},
  "pde": {"h": 0.01}
})";

}  // namespace

TEST_CASE("empty config resolves to the documented defaults") {
  const auto cfg = parse_config("{}");
  CHECK(cfg.problem.dimension == 1);
  CHECK(cfg.problem.epsilon == 0.5);
  CHECK(cfg.problem.sigma == 1.0);
  CHECK(cfg.problem.start == Point{0.5});
  CHECK(cfg.sim.dt == 1e-3);
  CHECK(cfg.sim.seed == 1);
  CHECK(cfg.n_traj == 1000);
  CHECK(cfg.basis->size() == 8);
  CHECK(cfg.control.kind == "zero");
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.resolved.at("problem").at("epsilon") == 0.5);
  CHECK(cfg.resolved.at("basis").contains("width"));
}

TEST_CASE("schema violations carry a json pointer") {
  CHECK(config_error(R"({"problem": {"epsilon": -1}})").rfind("/problem/epsilon", 0) == 0);
  CHECK(config_error(R"({"sim": {"dt": "fast"}})").rfind("/sim/dt", 0) == 0);
  CHECK(config_error(R"({"verify": {"criteria": [12]}})").rfind("/verify/criteria/0", 0) == 0);
  CHECK(config_error(R"({"problem": {"start": [2.0]}})").rfind("/problem", 0) == 0);
  CHECK_FALSE(config_error("{not json").empty());
}

TEST_CASE("unknown keys suggest the closest name") {
  const auto msg = config_error(R"({"problem": {"temprature": 0.3}})");
  CHECK(msg.find("/problem/temprature") != std::string::npos);
  CHECK(msg.find("did you mean 'epsilon'") != std::string::npos);
  const auto typo = config_error(R"({"sim": {"dtt": 0.01}})");
  CHECK(typo.find("did you mean 'dt'") != std::string::npos);
}

TEST_CASE("edit distance and suggestions") {
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("same", "same") == 0);
  CHECK(suggest_key("epsilom", {"epsilon", "sigma"}) == std::optional<std::string>("epsilon"));
  CHECK_FALSE(suggest_key("zzzzzzzz", {"epsilon", "sigma"}).has_value());
}

TEST_CASE("seed override updates both seeds") {
  auto cfg = parse_config(kSmall);
  override_seed(cfg, 99);
  CHECK(cfg.sim.seed == 99);
  CHECK(cfg.descent.seed == 99);
  CHECK(cfg.resolved.at("sim").at("seed") == 99);
  CHECK(cfg.resolved.at("descent").at("seed") == 99);
}

TEST_CASE("simulate and estimate write their artifacts") {
  auto cfg = parse_config(kSmall);
  const auto dir = scratch("sim");
  override_output_dir(cfg, dir);
  std::ostringstream log;
  REQUIRE(run_command("simulate", cfg, log) == kExitOk);
  CHECK(fs::exists(dir / "config.resolved.json"));
  CHECK(count_lines(dir / "trajectories.csv") == 41);
  REQUIRE(run_command("estimate", cfg, log) == kExitOk);
  std::ifstream in(dir / "estimator.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "quantity,i,j,mean,std_error,n_samples");
  fs::remove_all(dir);
}

TEST_CASE("a resolved config reproduces the run") {
  auto cfg = parse_config(kSmall);
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  override_output_dir(cfg, a);
  std::ostringstream log;
  REQUIRE(run_command("simulate", cfg, log) == kExitOk);
  auto again = parse_config(slurp(a / "config.resolved.json"));
  CHECK(again.resolved.dump() == cfg.resolved.dump());
  override_output_dir(again, b);
  REQUIRE(run_command("simulate", again, log) == kExitOk);
  CHECK(slurp(a / "trajectories.csv") == slurp(b / "trajectories.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("descend writes a trace and a checkpoint") {
  auto cfg = parse_config(kSmall);
  const auto dir = scratch("descend");
  override_output_dir(cfg, dir);
  std::ostringstream log;
  REQUIRE(run_command("descend", cfg, log) == kExitOk);
  CHECK(count_lines(dir / "trace.csv") >= 2);
  CHECK(fs::exists(dir / "checkpoint.json"));
  fs::remove_all(dir);
}

TEST_CASE("pde reports the start value") {
  auto cfg = parse_config(kSmall);
  const auto dir = scratch("pde");
  override_output_dir(cfg, dir);
  std::ostringstream log;
  REQUIRE(run_command("pde", cfg, log) == kExitOk);
  CHECK(fs::exists(dir / "solution.csv"));
  CHECK(slurp(dir / "pde_summary.csv").find("psi_start") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("pde in three dimensions is a config error") {
  auto cfg = parse_config(R"({
    "problem": {"dimension": 3, "domain": {"shape": "box", "lower": [0, 0, 0], "upper": [1, 1, 1]}},
    "basis": {"counts": [2, 2, 2]}
  })");
  const auto dir = scratch("pde3");
  override_output_dir(cfg, dir);
  std::ostringstream log;
  CHECK(run_command("pde", cfg, log) == kExitConfig);
  CHECK(log.str().find("error") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("verify runs the quick criteria") {
  auto cfg = parse_config(R"({"verify": {"criteria": [1, 9, 10]}})");
  const auto dir = scratch("verify");
  override_output_dir(cfg, dir);
  std::ostringstream log;
  CHECK(run_command("verify", cfg, log) == kExitOk);
  const auto report = slurp(dir / "report.txt");
  CHECK(report.find("PASS [1]") != std::string::npos);
  CHECK(report.find("PASS [9]") != std::string::npos);
  CHECK(report.find("PASS [10]") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "verify_scratch"));
  fs::remove_all(dir);
}

TEST_CASE("command line parsing") {
  const auto dir = scratch("argv");
  const auto cfg_path = fs::temp_directory_path() / "exitctl_cli_argv.json";
  {
    std::ofstream f(cfg_path);
    f << kSmall;
  }
  std::string a0 = "exitctl", a1 = "simulate", a2 = "--config", a3 = cfg_path.string(), a4 = "--output",
              a5 = dir.string(), a6 = "--seed", a7 = "5";
  char* argv[] = {a0.data(), a1.data(), a2.data(), a3.data(), a4.data(), a5.data(), a6.data(), a7.data()};
  CHECK(run_cli(8, argv) == kExitOk);
  CHECK(slurp(dir / "config.resolved.json").find("\"seed\": 5") != std::string::npos);

  std::string bad = "bogus";
  char* argv_bad[] = {a0.data(), bad.data()};
  CHECK(run_cli(2, argv_bad) == kExitConfig);

  {
    std::ofstream f(cfg_path);
    f << R"({"problem": {"epsilon": 0}})";
  }
  CHECK(run_cli(4, argv) == kExitConfig);
  fs::remove(cfg_path);
  fs::remove_all(dir);
}
