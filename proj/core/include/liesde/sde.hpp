#pragma once

#include <functional>
#include <optional>
#include <ostream>

#include "liesde/fields.hpp"
#include "liesde/noise.hpp"

namespace liesde {

// Stratonovich system in separated form: the field multiplying noise
// component j is S_j(x, z) = sum_i coeff[i][j](x) * fields[i](z), where x is
// the current value of the driving path and z the state.
struct StratonovichSystem {
  std::size_t state_dim = 0;  // n
  std::size_t noise_dim = 0;  // l
  std::vector<PolyVectorField> fields;         // Y_i on R^n
  std::vector<std::vector<Polynomial>> coeff;  // coeff[i][j] = b^i_j on R^l

  // Throws std::invalid_argument when shapes disagree.
  void validate() const;
  // b evaluated at a noise point, rows = fields, cols = noise components.
  Eigen::MatrixXd coeff_at(const Eigen::VectorXd& x) const;
};

// S_j = fields[j] with constant unit coefficients (l = fields.size()).
StratonovichSystem system_from_fields(const std::vector<PolyVectorField>& fields);

struct Trajectory {
  TimeGrid grid{1.0, 1};
  std::size_t dim = 0;
  std::vector<Eigen::VectorXd> states;  // one per node
  // First node where a non-finite value or |state|_inf > explosion guard
  // appeared; states from there on are frozen at the last good value.
  std::optional<std::size_t> exit_index;
};

inline constexpr double kExplosionGuard = 1e12;

// Stratonovich-Heun predictor-corrector: Euler predictor with S at
// (X_k, z_k), corrector averages S(X_k, z_k) and S(X_{k+1}, predictor), both
// against the increment X_{k+1} - X_k.  Linear in z for linear fields.
Trajectory integrate_heun(const StratonovichSystem& sys,
                          const DrivingPath& path, const Eigen::VectorXd& z0);

struct StrongErrorStudy {
  std::vector<double> step_sizes;
  std::vector<double> mean_terminal_error;
  std::optional<double> slope;  // nullopt when errors vanish or are non-finite
};

// Mean terminal error against a pathwise oracle at several resolutions; the
// path for (steps, path_index) comes from make_path, so each resolution
// resamples with the same key scheme.  Slope is the log-log least squares
// fit against the step size.
StrongErrorStudy strong_error_slope(
    const StratonovichSystem& sys,
    const std::function<DrivingPath(std::size_t steps,
                                    std::uint64_t path_index)>& make_path,
    const std::function<Eigen::VectorXd(const DrivingPath&)>& terminal_oracle,
    const Eigen::VectorXd& z0, const std::vector<std::size_t>& resolutions,
    std::size_t n_paths);

// Header t,g0,...,g{n-1},exit; exit is 1 from exit_index on, else 0.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace liesde
