#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "liesde/common.hpp"

namespace liesde {

// Uniform grid 0 = t_0 < t_1 < ... < t_K = t_end with t_k = k * dt().
struct TimeGrid {
  double t_end = 1.0;
  std::size_t steps = 1;  // K >= 1

  TimeGrid(double t_end_, std::size_t steps_);
  double dt() const { return t_end / static_cast<double>(steps); }
  std::size_t node_count() const { return steps + 1; }
  double node(std::size_t k) const { return static_cast<double>(k) * dt(); }
  bool operator==(const TimeGrid&) const = default;
};

enum class ComponentRole { Time, Brownian, Custom };

// Piecewise-linear driving signal X sampled at the grid nodes, node-major.
// Every component starts at zero; components tagged Time hold t_k exactly.
struct DrivingPath {
  TimeGrid grid;
  std::size_t dim = 0;
  std::vector<ComponentRole> roles;
  std::vector<double> values;  // (K+1) * dim, node-major
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;

  DrivingPath(TimeGrid grid_, std::size_t dim_);

  double value(std::size_t node, std::size_t comp) const {
    return values[node * dim + comp];
  }
  double& value_ref(std::size_t node, std::size_t comp) {
    return values[node * dim + comp];
  }
  // X_{k+1} - X_k for one component.
  double increment(std::size_t step, std::size_t comp) const {
    return values[(step + 1) * dim + comp] - values[step * dim + comp];
  }
  std::vector<double> component(std::size_t comp) const;

  // Throws std::logic_error when a structural invariant is broken.
  void validate() const;
};

// Independent Brownian components with increments N(0, dt).  The stream is a
// pure function of (seed, path_index): resampling with the same key is
// bit-identical, regardless of thread placement.
DrivingPath sample_brownian(const TimeGrid& grid, std::size_t dims,
                            std::uint64_t seed, std::uint64_t path_index = 0);

// Prepends component 0 with X^0_{t_k} = t_k (exact at nodes).
DrivingPath with_time_component(const DrivingPath& path);

// Keeps every factor-th node.  grid.steps must be divisible by factor.  Node
// values are copied verbatim, so the coarse path is the exact restriction of
// the fine one (time components stay exact: k*(f*dt) and (k*f)*dt round
// identically because f*dt is computed once from the same quotient).
DrivingPath subsample(const DrivingPath& path, std::size_t factor);

// Cumulative midpoint (trapezoid) rule for \int f dX^comp: increments
// (f_k + f_{k+1})/2 * (X_{k+1} - X_k), entry [k] is the integral up to t_k.
std::vector<double> stratonovich_integral(std::span<const double> integrand,
                                          const DrivingPath& path,
                                          std::size_t component);

// Word over the component alphabet {0, ..., dim-1}; 0 is the time slot.
struct MultiIndex {
  std::vector<int> entries;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> init) : entries(init) {}
  explicit MultiIndex(std::vector<int> e) : entries(std::move(e)) {}

  std::size_t size() const { return entries.size(); }
  bool operator==(const MultiIndex& o) const { return entries == o.entries; }
  bool operator<(const MultiIndex& o) const { return entries < o.entries; }
};

// Scaling degree: length plus the number of zero entries (a time integration
// weighs like two stochastic ones).
std::size_t degree(const MultiIndex& J);

std::string to_string(const MultiIndex& J);

// Lazily computed table of iterated Stratonovich integrals of the path
// against itself.  B^(j) is component j verbatim; B^(J.j) integrates the
// cached B^J against component j.  Cached results make repeated queries
// transparent: the same vector object is returned.
class IteratedIntegralTable {
 public:
  explicit IteratedIntegralTable(const DrivingPath& path) : path_(&path) {}

  const DrivingPath& path() const { return *path_; }

  // Whole-path integral; entry [k] is B^J at node k.  Throws
  // std::invalid_argument for an empty index, std::out_of_range for a bad
  // component.
  const std::vector<double>& integral(const MultiIndex& J);

 private:
  const DrivingPath* path_;
  std::map<MultiIndex, std::vector<double>> cache_;
};

// Header t,x0,x1,...; one row per node; 17 significant digits.
void write_path_csv(std::ostream& os, const DrivingPath& path);

}  // namespace liesde
