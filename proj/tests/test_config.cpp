#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "cvcon/config.hpp"

using namespace cvcon;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cvcon_test_config_" + std::to_string(::getpid())) / name;
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code = -1;
  std::string output;
};

Run cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const fs::path log = dir / "cli.log";
  const std::string cmd = env + " \"" + CVCON_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_file(log);
  return r;
}

}  // namespace

TEST_CASE("toml and json configs parse to the same spec") {
  const auto t = parse_spec_toml(
      "learner = \"ridge\"\ndistribution = \"linear_regression\"\nn = 24\nk = [3, 4]\n"
      "delta = [0.1, 0.05]\nscaling_grid = [[20, 2], [40, 4], [80, 8]]\nenvelope_mode = \"sqrt_only\"\n");
  const auto j = parse_spec_json(
      R"({"learner": "ridge", "distribution": "linear_regression", "n": 24, "k": [3, 4],
          "delta": [0.1, 0.05], "scaling_grid": [[20, 2], [40, 4], [80, 8]], "envelope_mode": "sqrt_only"})");
  for (const auto* s : {&t, &j}) {
    CHECK(s->learner == "ridge");
    CHECK(s->n == 24);
    CHECK(s->k == std::vector<std::size_t>{3, 4});
    CHECK(s->delta == std::vector<double>{0.1, 0.05});
    CHECK(s->scaling_grid.size() == 3);
    CHECK(s->envelope_mode == EnvelopeMode::sqrt_only);
  }
  // untouched keys keep their defaults
  CHECK(t.trials == ExperimentSpec{}.trials);
  CHECK(j.seed == ExperimentSpec{}.seed);
}

TEST_CASE("integers are accepted where floats are expected") {
  const auto s = parse_spec_toml("p = 1\ndelta = [0.1]\n");
  CHECK(s.p == 1.0);
}

TEST_CASE("unknown keys and type mismatches are rejected with a line") {
  try {
    parse_spec_toml("n = 12\n\nfolds = 3\n", "bad.toml");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("folds") != std::string::npos);
    CHECK(std::string(e.what()).find("bad.toml:3") != std::string::npos);
  }
  try {
    parse_spec_toml("n = \"twelve\"\n");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(parse_spec_toml("n = -3\n"), ConfigError);
  CHECK(parse_spec_toml("k = 3\n").k == std::vector<std::size_t>{3});
  CHECK_THROWS_AS(parse_spec_toml("q_grid = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_spec_toml("envelope_mode = \"both\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_spec_toml("n = [\n"), ConfigError);
  CHECK_THROWS_AS(parse_spec_json("{\"nn\": 3}"), ConfigError);
  CHECK_THROWS_AS(parse_spec_json("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_spec_json("{"), ConfigError);
  CHECK_THROWS_AS(load_spec("/nonexistent/cvcon.toml"), ConfigError);
}

TEST_CASE("every key has a default that parses") {
  std::string text;
  for (const auto& key : config_keys()) text += key.name + " = " + key.default_value + "\n";
  const auto s = parse_spec_toml(text);
  const ExperimentSpec d;
  CHECK(s.n == d.n);
  CHECK(s.k == d.k);
  CHECK(s.q_grid == d.q_grid);
  CHECK(s.a_max == d.a_max);
  CHECK(s.lambda_grid == d.lambda_grid);
  CHECK(s.scaling_grid == d.scaling_grid);
}

TEST_CASE("cli exit codes and help") {
  const auto dir = scratch("usage");
  CHECK(cli("coverage --config " + (dir / "missing.toml").string(), dir).code == 2);
  write_file(dir / "unknown.toml", "n = 12\nfolds = 3\n");
  const auto unknown = cli("coverage --config " + (dir / "unknown.toml").string(), dir);
  CHECK(unknown.code == 2);
  CHECK(unknown.output.find("folds") != std::string::npos);
  write_file(dir / "indivisible.toml", "n = 10\nk = [3]\n");
  CHECK(cli("coverage --config " + (dir / "indivisible.toml").string(), dir).code == 2);
  CHECK(cli("frobnicate", dir).code == 2);
  CHECK(cli("coverage", dir).code == 2);

  const auto help = cli("--help", dir);
  CHECK(help.code == 0);
  for (const auto& key : config_keys()) {
    INFO(key.name);
    CHECK(help.output.find(key.name) != std::string::npos);
  }
  CHECK(help.output.find("CVCON_SEED") != std::string::npos);
}

TEST_CASE("cli: constant learner profiles give a degenerate bound") {
  const auto dir = scratch("degenerate");
  write_file(dir / "stab.toml",
             "learner = \"constant\"\nn = 12\nk = [3]\ntrials = 200\nbootstrap = 20\nformat = \"json\"\n"
             "output = \"" + (dir / "out").string() + "\"\n");
  REQUIRE(cli("estimate-stability --config " + (dir / "stab.toml").string(), dir).code == 0);
  REQUIRE(fs::exists(dir / "out" / "stability.json"));

  write_file(dir / "bound.toml", "learner = \"constant\"\nn = 12\nk = [3]\ndelta = [0.05]\nprofiles = \"out/stability.json\"\n"
                                 "output = \"" + (dir / "bound").string() + "\"\n");
  const auto r = cli("compute-bound --config " + (dir / "bound.toml").string(), dir);
  INFO(r.output);
  CHECK(r.code == 0);
  CHECK(r.output.find("degenerate") != std::string::npos);
  CHECK(fs::exists(dir / "bound" / "bounds.json"));
  CHECK(fs::exists(dir / "bound" / "bounds.csv"));

  write_file(dir / "noprof.toml", "n = 12\nk = [3]\n");
  CHECK(cli("compute-bound --config " + (dir / "noprof.toml").string(), dir).code == 2);
}

TEST_CASE("cli: seed flag overrides the environment and config") {
  const auto dir = scratch("seed");
  const std::string base = "n = 12\nk = [3]\ntrials = 200\nbootstrap = 10\nformat = \"csv\"\nseed = 5\n";
  write_file(dir / "a.toml", base + "output = \"" + (dir / "a").string() + "\"\n");
  write_file(dir / "b.toml", base + "output = \"" + (dir / "b").string() + "\"\n");
  REQUIRE(cli("estimate-stability --config " + (dir / "a.toml").string() + " --seed 9", dir).code == 0);
  REQUIRE(cli("estimate-stability --config " + (dir / "b.toml").string(), dir).code == 0);
  const auto a = read_file(dir / "a" / "stability.csv");
  const auto b = read_file(dir / "b" / "stability.csv");
  CHECK_FALSE(a.empty());
  CHECK(a != b);
  REQUIRE(cli("estimate-stability --config " + (dir / "b.toml").string() + " --seed 9 --out " +
                  (dir / "c").string(),
              dir)
              .code == 0);
  CHECK(read_file(dir / "c" / "stability.csv") == a);
  REQUIRE(cli("estimate-stability --config " + (dir / "b.toml").string() + " --out " + (dir / "d").string(), dir,
              "CVCON_SEED=9")
              .code == 0);
  CHECK(read_file(dir / "d" / "stability.csv") == a);
  REQUIRE(cli("estimate-stability --config " + (dir / "b.toml").string() + " --seed 5 --out " + (dir / "e").string(),
              dir, "CVCON_SEED=9")
              .code == 0);
  CHECK(read_file(dir / "e" / "stability.csv") == b);
}
