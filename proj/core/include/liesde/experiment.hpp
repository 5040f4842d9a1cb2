#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace liesde {

// Config rejection (unknown key, malformed value, bad range) with the
// offending 1-based line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Flat key=value experiment configuration.  Unknown keys are rejected before
// any computation starts.
struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 42;
  std::size_t steps = 1024;
  double t_end = 1.0;
  std::size_t paths = 64;
  std::size_t threads = 1;
  std::string out_dir = "out";
  std::string dsl_file;  // optional vector-field input for check runs
  std::size_t dim_cap = 16;
  double dep_tol = 1e-9;
  std::size_t taylor_degree = 1;

  // Throws ConfigError (line 0) when a numeric parameter is out of range.
  void validate() const;
};

// Strict parser: blank lines and '#' comments allowed, everything else must
// be `key=value` with a known key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentOutcome {
  std::string experiment;
  CriterionResult criterion;
  std::vector<std::string> artifacts;  // CSV files written, in write order
};

// Names accepted in ExperimentConfig::experiment, in criterion order.
const std::vector<std::string>& experiment_names();

// Runs one named experiment: writes its CSV artifacts under cfg.out_dir and
// returns the acceptance verdict.  Throws ConfigError for an unknown name,
// std::runtime_error for I/O failures.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

}  // namespace liesde
