#pragma once

#include <optional>
#include <ostream>

#include "liesde/fields.hpp"
#include "liesde/noise.hpp"
#include "liesde/sde.hpp"

namespace liesde {

// All words over the alphabet {0, ..., r} of scaling degree (length plus
// zero count) at most max_degree, ordered by degree then lexicographically.
std::vector<MultiIndex> enumerate_multiindices(std::size_t r,
                                               std::size_t max_degree);

struct BracketCoefficient {
  MultiIndex index;
  PolyVectorField field;
};

// Coefficient field of one word in the logarithm of the stochastic flow:
//   beta_J = sum_{sigma in S_n} (-1)^{e(sigma)} / (n^2 binom(n-1, e(sigma)))
//            * [Y_{j_sigma(1)}, [ ..., Y_{j_sigma(n)}] ... ]
// where e(sigma) counts descents and brackets nest to the right.  fields[s]
// is the generator for alphabet symbol s (slot 0 = drift).  Words longer
// than size_cap are rejected (factorial growth).
PolyVectorField beta_field(const MultiIndex& J,
                           const std::vector<PolyVectorField>& fields,
                           std::size_t size_cap = 5);

// Nonzero beta fields for every word up to max_degree.
std::vector<BracketCoefficient> beta_table(
    const std::vector<PolyVectorField>& fields, std::size_t max_degree,
    std::size_t size_cap = 5);

// Time-1 flow of the field: classical RK4 with ode_steps fixed steps.
// Throws std::runtime_error when the state leaves the finite range.
Eigen::VectorXd flow_exp(const PolyVectorField& field, const Eigen::VectorXd& z,
                         std::size_t ode_steps = 64);

struct TruncatedLogFlow {
  std::size_t max_degree = 0;
  std::size_t node = 0;
  std::vector<std::pair<MultiIndex, double>> loadings;  // (J, B^J at node)
  PolyVectorField zeta;  // sum_J B^J beta_J
};

TruncatedLogFlow truncated_log_flow(const std::vector<BracketCoefficient>& table,
                                    IteratedIntegralTable& integrals,
                                    std::size_t node);

// exp(zeta^N_t)(z): the degree-N stochastic Taylor approximation of the flow
// evaluated at grid node `node` of the table's path.
Eigen::VectorXd taylor_flow(const std::vector<PolyVectorField>& fields,
                            IteratedIntegralTable& integrals,
                            std::size_t max_degree, const Eigen::VectorXd& z,
                            std::size_t node, std::size_t ode_steps = 64);

struct RemainderStudy {
  std::vector<double> times;
  std::vector<double> mean_error;   // |taylor - fine reference|
  std::vector<double> floor_error;  // |coarse integrator - fine reference|
  std::optional<double> slope;      // nullopt when at_floor
  bool at_floor = false;
};

// Strong remainder of the truncated flow against a Heun reference on a
// refine-times finer grid over the same Brownian path (the coarse path is
// the node restriction of the fine one).  When the truncation error is
// indistinguishable from the integrator's own discretization error (within
// floor_factor), the slope is meaningless and at_floor is set instead.
RemainderStudy remainder_slope(const std::vector<PolyVectorField>& fields,
                               const Eigen::VectorXd& z, std::size_t max_degree,
                               const std::vector<double>& t_list,
                               std::size_t n_paths, std::uint64_t seed,
                               std::size_t coarse_steps = 4096,
                               std::size_t refine = 8,
                               double floor_factor = 3.0,
                               std::size_t threads = 1);

// Rows t,N,mean_err,slope (slope column repeats; nan when undefined).
void write_taylor_csv(std::ostream& os, const RemainderStudy& study,
                      std::size_t max_degree);

}  // namespace liesde
