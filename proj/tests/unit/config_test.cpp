#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "liesde/experiment.hpp"

using namespace liesde;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("full key set parses") {
  ExperimentConfig cfg = parse_config_text(
      "# comment\n"
      "experiment=gbm_closed_form\n"
      "seed = 7\n"
      "steps=256\n"
      "t_end=2.0\n"
      "paths=8\n"
      "threads=2\n"
      "out_dir=some/dir\n"
      "dsl_file=fields.dsl\n"
      "dim_cap=12\n"
      "dep_tol=1e-8\n"
      "taylor_degree=2\n"
      "\n");
  CHECK(cfg.experiment == "gbm_closed_form");
  CHECK(cfg.seed == 7);
  CHECK(cfg.steps == 256);
  CHECK(cfg.t_end == 2.0);
  CHECK(cfg.paths == 8);
  CHECK(cfg.threads == 2);
  CHECK(cfg.out_dir == "some/dir");
  CHECK(cfg.dsl_file == "fields.dsl");
  CHECK(cfg.dim_cap == 12);
  CHECK(cfg.dep_tol == 1e-8);
  CHECK(cfg.taylor_degree == 2);
  cfg.validate();
}

TEST_CASE("unknown keys abort with the line number") {
  try {
    parse_config_text("experiment=closure\nwat=1\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("malformed values abort with the line number") {
  try {
    parse_config_text("steps=abc\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(parse_config_text("t_end=\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just-a-word\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("steps=-4\n"), ConfigError);
}

TEST_CASE("range validation") {
  ExperimentConfig cfg;
  cfg.steps = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.t_end = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.paths = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.dep_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ExperimentConfig{};
  cfg.out_dir.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("missing config files are reported") {
  CHECK_THROWS_AS(load_config_file("/definitely/not/here.cfg"), ConfigError);
}

TEST_CASE("experiment catalogue") {
  const std::vector<std::string>& names = experiment_names();
  CHECK(names.size() == 10);
  CHECK(names.front() == "gbm_closed_form");
  CHECK(names.back() == "determinism");
  CHECK(std::find(names.begin(), names.end(), "sphere_reduction") !=
        names.end());

  ExperimentConfig cfg;
  cfg.experiment = "no_such_thing";
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("artifacts are deterministic on disk") {
  namespace fs = std::filesystem;
  const fs::path root = fs::path("config_suite_tmp");
  fs::remove_all(root);

  ExperimentConfig cfg;
  cfg.experiment = "gbm_closed_form";
  cfg.steps = 128;
  cfg.paths = 4;
  cfg.threads = 2;

  cfg.out_dir = (root / "a").string();
  ExperimentOutcome first = run_experiment(cfg);
  cfg.out_dir = (root / "b").string();
  ExperimentOutcome second = run_experiment(cfg);

  CHECK(first.criterion.pass);
  CHECK(first.criterion.id == 1);
  REQUIRE(first.artifacts.size() == 1);
  REQUIRE(second.artifacts.size() == 1);
  CHECK(fs::exists(first.artifacts[0]));
  const std::string bytes_a = slurp(first.artifacts[0]);
  CHECK_FALSE(bytes_a.empty());
  CHECK(bytes_a == slurp(second.artifacts[0]));

  fs::remove_all(root);
}

}  // TEST_SUITE("config")
