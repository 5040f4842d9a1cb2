#include "liesde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace liesde {

TimeGrid::TimeGrid(double t_end_, std::size_t steps_)
    : t_end(t_end_), steps(steps_) {
  if (steps == 0) throw std::invalid_argument("TimeGrid: steps must be >= 1");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("TimeGrid: t_end must be positive and finite");
  }
}

DrivingPath::DrivingPath(TimeGrid grid_, std::size_t dim_)
    : grid(grid_),
      dim(dim_),
      roles(dim_, ComponentRole::Custom),
      values(grid_.node_count() * dim_, 0.0) {}

std::vector<double> DrivingPath::component(std::size_t comp) const {
  if (comp >= dim) throw std::out_of_range("DrivingPath: component index");
  std::vector<double> out(grid.node_count());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = value(k, comp);
  return out;
}

void DrivingPath::validate() const {
  if (roles.size() != dim || values.size() != grid.node_count() * dim) {
    throw std::logic_error("DrivingPath: inconsistent storage");
  }
  for (std::size_t c = 0; c < dim; ++c) {
    if (value(0, c) != 0.0) {
      throw std::logic_error("DrivingPath: components must start at zero");
    }
    if (roles[c] == ComponentRole::Time) {
      for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (value(k, c) != grid.node(k)) {
          throw std::logic_error("DrivingPath: time component off the grid");
        }
      }
    }
  }
}

DrivingPath sample_brownian(const TimeGrid& grid, std::size_t dims,
                            std::uint64_t seed, std::uint64_t path_index) {
  if (dims == 0) throw std::invalid_argument("sample_brownian: dims must be >= 1");
  DrivingPath path(grid, dims);
  path.seed = seed;
  path.path_index = path_index;
  std::fill(path.roles.begin(), path.roles.end(), ComponentRole::Brownian);

  std::mt19937_64 engine(substream_key(seed, path_index));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double root_dt = std::sqrt(grid.dt());
  for (std::size_t k = 0; k < grid.steps; ++k) {
    for (std::size_t c = 0; c < dims; ++c) {
      path.value_ref(k + 1, c) = path.value(k, c) + root_dt * gauss(engine);
    }
  }
  return path;
}

DrivingPath with_time_component(const DrivingPath& path) {
  DrivingPath out(path.grid, path.dim + 1);
  out.seed = path.seed;
  out.path_index = path.path_index;
  out.roles[0] = ComponentRole::Time;
  for (std::size_t c = 0; c < path.dim; ++c) out.roles[c + 1] = path.roles[c];
  for (std::size_t k = 0; k < path.grid.node_count(); ++k) {
    out.value_ref(k, 0) = path.grid.node(k);
    for (std::size_t c = 0; c < path.dim; ++c) {
      out.value_ref(k, c + 1) = path.value(k, c);
    }
  }
  return out;
}

DrivingPath subsample(const DrivingPath& path, std::size_t factor) {
  if (factor == 0 || path.grid.steps % factor != 0) {
    throw std::invalid_argument("subsample: factor must divide steps");
  }
  TimeGrid coarse(path.grid.t_end, path.grid.steps / factor);
  DrivingPath out(coarse, path.dim);
  out.seed = path.seed;
  out.path_index = path.path_index;
  out.roles = path.roles;
  for (std::size_t k = 0; k < coarse.node_count(); ++k) {
    for (std::size_t c = 0; c < path.dim; ++c) {
      out.value_ref(k, c) = path.value(k * factor, c);
    }
  }
  return out;
}

std::vector<double> stratonovich_integral(std::span<const double> integrand,
                                          const DrivingPath& path,
                                          std::size_t component) {
  if (component >= path.dim) {
    throw std::out_of_range("stratonovich_integral: component index");
  }
  if (integrand.size() != path.grid.node_count()) {
    throw std::invalid_argument(
        "stratonovich_integral: integrand length must match node count");
  }
  std::vector<double> out(path.grid.node_count(), 0.0);
  for (std::size_t k = 0; k < path.grid.steps; ++k) {
    out[k + 1] = out[k] + 0.5 * (integrand[k] + integrand[k + 1]) *
                              path.increment(k, component);
  }
  return out;
}

std::size_t degree(const MultiIndex& J) {
  std::size_t zeros = 0;
  for (int e : J.entries) {
    if (e == 0) ++zeros;
  }
  return J.size() + zeros;
}

std::string to_string(const MultiIndex& J) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < J.entries.size(); ++i) {
    if (i) os << ',';
    os << J.entries[i];
  }
  os << ')';
  return os.str();
}

const std::vector<double>& IteratedIntegralTable::integral(const MultiIndex& J) {
  if (J.size() == 0) {
    throw std::invalid_argument("IteratedIntegralTable: empty multi-index");
  }
  for (int e : J.entries) {
    if (e < 0 || static_cast<std::size_t>(e) >= path_->dim) {
      throw std::out_of_range("IteratedIntegralTable: component index");
    }
  }
  auto found = cache_.find(J);
  if (found != cache_.end()) return found->second;

  std::vector<double> result;
  if (J.size() == 1) {
    // Single letters are the path components themselves, bit-exact.
    result = path_->component(static_cast<std::size_t>(J.entries[0]));
  } else {
    MultiIndex prefix(std::vector<int>(J.entries.begin(), J.entries.end() - 1));
    const std::vector<double>& inner = integral(prefix);
    result = stratonovich_integral(
        inner, *path_, static_cast<std::size_t>(J.entries.back()));
  }
  return cache_.emplace(J, std::move(result)).first->second;
}

void write_path_csv(std::ostream& os, const DrivingPath& path) {
  os << 't';
  for (std::size_t c = 0; c < path.dim; ++c) os << ",x" << c;
  os << '\n';
  for (std::size_t k = 0; k < path.grid.node_count(); ++k) {
    os << format_double(path.grid.node(k));
    for (std::size_t c = 0; c < path.dim; ++c) {
      os << ',' << format_double(path.value(k, c));
    }
    os << '\n';
  }
}

}  // namespace liesde
