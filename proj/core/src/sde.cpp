#include "liesde/sde.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace liesde {

void StratonovichSystem::validate() const {
  if (fields.size() != coeff.size()) {
    throw std::invalid_argument("StratonovichSystem: coeff rows != fields");
  }
  for (const auto& f : fields) {
    if (f.dim() != state_dim) {
      throw std::invalid_argument("StratonovichSystem: field dimension");
    }
  }
  for (const auto& row : coeff) {
    if (row.size() != noise_dim) {
      throw std::invalid_argument("StratonovichSystem: coeff cols != noise_dim");
    }
    for (const auto& b : row) {
      if (b.dim() != noise_dim) {
        throw std::invalid_argument(
            "StratonovichSystem: coefficient polynomial dimension");
      }
    }
  }
}

Eigen::MatrixXd StratonovichSystem::coeff_at(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(fields.size()),
                    static_cast<Eigen::Index>(noise_dim));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = 0; j < noise_dim; ++j) {
      b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          coeff[i][j](x);
    }
  }
  return b;
}

StratonovichSystem system_from_fields(
    const std::vector<PolyVectorField>& fields) {
  if (fields.empty()) {
    throw std::invalid_argument("system_from_fields: no fields");
  }
  StratonovichSystem sys;
  sys.state_dim = fields[0].dim();
  sys.noise_dim = fields.size();
  sys.fields = fields;
  sys.coeff.resize(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = 0; j < fields.size(); ++j) {
      sys.coeff[i].push_back(
          Polynomial::constant(fields.size(), i == j ? 1.0 : 0.0));
    }
  }
  sys.validate();
  return sys;
}

namespace {

bool state_ok(const Eigen::VectorXd& z) {
  return z.allFinite() && z.lpNorm<Eigen::Infinity>() <= kExplosionGuard;
}

Eigen::VectorXd noise_point(const DrivingPath& path, std::size_t node) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(path.dim));
  for (std::size_t c = 0; c < path.dim; ++c) {
    x[static_cast<Eigen::Index>(c)] = path.value(node, c);
  }
  return x;
}

}  // namespace

Trajectory integrate_heun(const StratonovichSystem& sys,
                          const DrivingPath& path, const Eigen::VectorXd& z0) {
  sys.validate();
  if (path.dim != sys.noise_dim) {
    throw std::invalid_argument("integrate_heun: path dimension != noise_dim");
  }
  if (static_cast<std::size_t>(z0.size()) != sys.state_dim) {
    throw std::invalid_argument("integrate_heun: initial state dimension");
  }

  Trajectory traj;
  traj.grid = path.grid;
  traj.dim = sys.state_dim;
  traj.states.assign(path.grid.node_count(), z0);

  const std::size_t r = sys.fields.size();
  Eigen::VectorXd dx(static_cast<Eigen::Index>(path.dim));
  for (std::size_t k = 0; k < path.grid.steps; ++k) {
    const Eigen::VectorXd& z = traj.states[k];
    for (std::size_t c = 0; c < path.dim; ++c) {
      dx[static_cast<Eigen::Index>(c)] = path.increment(k, c);
    }
    const Eigen::VectorXd wl = sys.coeff_at(noise_point(path, k)) * dx;
    Eigen::VectorXd drift_left =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.state_dim));
    for (std::size_t i = 0; i < r; ++i) {
      const double w = wl[static_cast<Eigen::Index>(i)];
      if (w != 0.0) drift_left += w * sys.fields[i](z);
    }
    const Eigen::VectorXd predictor = z + drift_left;

    const Eigen::VectorXd wr = sys.coeff_at(noise_point(path, k + 1)) * dx;
    Eigen::VectorXd drift_right =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.state_dim));
    if (predictor.allFinite()) {
      for (std::size_t i = 0; i < r; ++i) {
        const double w = wr[static_cast<Eigen::Index>(i)];
        if (w != 0.0) drift_right += w * sys.fields[i](predictor);
      }
    } else {
      drift_right.setConstant(std::numeric_limits<double>::quiet_NaN());
    }

    const Eigen::VectorXd next = z + 0.5 * (drift_left + drift_right);
    if (!state_ok(next)) {
      traj.exit_index = k + 1;
      for (std::size_t m = k + 1; m < traj.states.size(); ++m) {
        traj.states[m] = z;
      }
      return traj;
    }
    traj.states[k + 1] = next;
  }
  return traj;
}

StrongErrorStudy strong_error_slope(
    const StratonovichSystem& sys,
    const std::function<DrivingPath(std::size_t steps,
                                    std::uint64_t path_index)>& make_path,
    const std::function<Eigen::VectorXd(const DrivingPath&)>& terminal_oracle,
    const Eigen::VectorXd& z0, const std::vector<std::size_t>& resolutions,
    std::size_t n_paths) {
  if (resolutions.size() < 2) {
    throw std::invalid_argument("strong_error_slope: need >= 2 resolutions");
  }
  if (n_paths == 0) {
    throw std::invalid_argument("strong_error_slope: need >= 1 path");
  }
  StrongErrorStudy study;
  for (std::size_t steps : resolutions) {
    double acc = 0.0;
    double h = 0.0;
    for (std::uint64_t p = 0; p < n_paths; ++p) {
      const DrivingPath path = make_path(steps, p);
      h = path.grid.dt();
      const Trajectory traj = integrate_heun(sys, path, z0);
      const Eigen::VectorXd exact = terminal_oracle(path);
      acc += (traj.states.back() - exact).norm();
    }
    study.step_sizes.push_back(h);
    study.mean_terminal_error.push_back(acc / static_cast<double>(n_paths));
  }
  study.slope = fit_loglog_slope(study.step_sizes, study.mean_terminal_error);
  return study;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (std::size_t i = 0; i < traj.dim; ++i) os << ",g" << i;
  os << ",exit\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << format_double(traj.grid.node(k));
    for (std::size_t i = 0; i < traj.dim; ++i) {
      os << ',' << format_double(traj.states[k][static_cast<Eigen::Index>(i)]);
    }
    const bool exited = traj.exit_index && k >= *traj.exit_index;
    os << ',' << (exited ? 1 : 0) << '\n';
  }
}

}  // namespace liesde
