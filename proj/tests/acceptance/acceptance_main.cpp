// Acceptance gate: runs every packaged experiment at the reference
// configuration and prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <cstdio>
#include <exception>
#include <string>
#include <thread>

#include "liesde/experiment.hpp"

int main(int argc, char** argv) {
  const std::string out_root = argc > 1 ? argv[1] : "acceptance_out";
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t threads = std::min<unsigned>(8, hw);

  std::size_t passed = 0;
  std::size_t total = 0;
  for (const std::string& name : liesde::experiment_names()) {
    liesde::ExperimentConfig cfg;
    cfg.experiment = name;
    cfg.seed = 42;
    cfg.steps = 1024;
    cfg.t_end = 1.0;
    cfg.paths = name == "taylor_remainder" ? 128 : 64;
    cfg.threads = threads;
    cfg.out_dir = out_root + "/" + name;

    ++total;
    try {
      const liesde::ExperimentOutcome outcome = liesde::run_experiment(cfg);
      const liesde::CriterionResult& c = outcome.criterion;
      if (c.pass) ++passed;
      std::printf("[%s] criterion %d: %s - %s\n", c.pass ? "PASS" : "FAIL",
                  c.id, c.name.c_str(), c.detail.c_str());
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion ?: %s - exception: %s\n", name.c_str(),
                  e.what());
    }
    std::fflush(stdout);
  }

  std::printf("%zu/%zu criteria passed\n", passed, total);
  return passed == total ? 0 : 2;
}
