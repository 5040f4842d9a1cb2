#include "liesde/flowtaylor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "liesde/common.hpp"

namespace liesde {

std::vector<MultiIndex> enumerate_multiindices(std::size_t r,
                                               std::size_t max_degree) {
  if (max_degree == 0) {
    throw std::invalid_argument("enumerate_multiindices: max_degree >= 1");
  }
  std::vector<MultiIndex> words;
  // Degree >= length, so lengths beyond max_degree cannot contribute.
  std::vector<int> word;
  auto emit = [&](auto&& self, std::size_t remaining) -> void {
    if (!word.empty()) {
      MultiIndex j(word);
      if (degree(j) <= max_degree) words.push_back(std::move(j));
    }
    if (remaining == 0) return;
    for (int s = 0; s <= static_cast<int>(r); ++s) {
      word.push_back(s);
      // Prune: degree already exceeding the cap cannot recover.
      if (degree(MultiIndex(word)) <= max_degree) {
        self(self, remaining - 1);
      }
      word.pop_back();
    }
  };
  emit(emit, max_degree);
  std::sort(words.begin(), words.end(),
            [](const MultiIndex& a, const MultiIndex& b) {
              const std::size_t da = degree(a);
              const std::size_t db = degree(b);
              if (da != db) return da < db;
              return a.entries < b.entries;
            });
  return words;
}

namespace {

double binom(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return r;
}

std::size_t descent_count(const std::vector<std::size_t>& perm) {
  std::size_t e = 0;
  for (std::size_t i = 0; i + 1 < perm.size(); ++i) {
    if (perm[i] > perm[i + 1]) ++e;
  }
  return e;
}

}  // namespace

PolyVectorField beta_field(const MultiIndex& J,
                           const std::vector<PolyVectorField>& fields,
                           std::size_t size_cap) {
  const std::size_t n = J.size();
  if (n == 0) throw std::invalid_argument("beta_field: empty word");
  if (n > size_cap) {
    throw std::invalid_argument("beta_field: word longer than the size cap");
  }
  if (fields.empty()) throw std::invalid_argument("beta_field: no fields");
  for (int s : J.entries) {
    if (s < 0 || static_cast<std::size_t>(s) >= fields.size()) {
      throw std::out_of_range("beta_field: symbol outside the field list");
    }
  }
  const std::size_t dim = fields[0].dim();
  PolyVectorField acc(dim);
  if (n == 1) {
    acc.add_scaled(fields[static_cast<std::size_t>(J.entries[0])], 1.0);
    return acc;
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  do {
    const std::size_t e = descent_count(perm);
    const double coeff =
        ((e % 2 == 0) ? 1.0 : -1.0) / (n2 * binom(n - 1, e));
    // Right-nested bracket of the permuted word.
    PolyVectorField nest =
        fields[static_cast<std::size_t>(J.entries[perm[n - 1]])];
    for (std::size_t i = n - 1; i-- > 0;) {
      nest = bracket(fields[static_cast<std::size_t>(J.entries[perm[i]])],
                     nest);
    }
    acc.add_scaled(nest, coeff);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc;
}

std::vector<BracketCoefficient> beta_table(
    const std::vector<PolyVectorField>& fields, std::size_t max_degree,
    std::size_t size_cap) {
  if (fields.empty()) throw std::invalid_argument("beta_table: no fields");
  std::vector<BracketCoefficient> table;
  for (const MultiIndex& J :
       enumerate_multiindices(fields.size() - 1, max_degree)) {
    if (J.size() > size_cap) continue;
    PolyVectorField f = beta_field(J, fields, size_cap);
    if (f.is_zero(0.0)) continue;
    table.push_back(BracketCoefficient{J, std::move(f)});
  }
  return table;
}

Eigen::VectorXd flow_exp(const PolyVectorField& field, const Eigen::VectorXd& z,
                         std::size_t ode_steps) {
  if (ode_steps == 0) throw std::invalid_argument("flow_exp: ode_steps >= 1");
  if (static_cast<std::size_t>(z.size()) != field.dim()) {
    throw std::invalid_argument("flow_exp: point dimension");
  }
  const double h = 1.0 / static_cast<double>(ode_steps);
  Eigen::VectorXd y = z;
  for (std::size_t s = 0; s < ode_steps; ++s) {
    const Eigen::VectorXd k1 = field(y);
    const Eigen::VectorXd k2 = field(y + 0.5 * h * k1);
    const Eigen::VectorXd k3 = field(y + 0.5 * h * k2);
    const Eigen::VectorXd k4 = field(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite()) {
      throw std::runtime_error("flow_exp: flow left the finite range");
    }
  }
  return y;
}

TruncatedLogFlow truncated_log_flow(
    const std::vector<BracketCoefficient>& table,
    IteratedIntegralTable& integrals, std::size_t node) {
  if (node >= integrals.path().grid.node_count()) {
    throw std::invalid_argument("truncated_log_flow: node index");
  }
  TruncatedLogFlow out;
  out.node = node;
  std::size_t dim = table.empty() ? 0 : table[0].field.dim();
  out.zeta = PolyVectorField(dim);
  for (const auto& entry : table) {
    out.max_degree = std::max(out.max_degree, degree(entry.index));
    const double b = integrals.integral(entry.index)[node];
    out.loadings.emplace_back(entry.index, b);
    if (b != 0.0) out.zeta.add_scaled(entry.field, b);
  }
  return out;
}

Eigen::VectorXd taylor_flow(const std::vector<PolyVectorField>& fields,
                            IteratedIntegralTable& integrals,
                            std::size_t max_degree, const Eigen::VectorXd& z,
                            std::size_t node, std::size_t ode_steps) {
  if (max_degree == 0) {
    throw std::invalid_argument("taylor_flow: max_degree >= 1");
  }
  if (fields.size() != integrals.path().dim) {
    throw std::invalid_argument(
        "taylor_flow: field count must match path dimension");
  }
  const auto table = beta_table(fields, max_degree);
  const TruncatedLogFlow log_flow = truncated_log_flow(table, integrals, node);
  if (log_flow.zeta.dim() == 0) return z;
  return flow_exp(log_flow.zeta, z, ode_steps);
}

RemainderStudy remainder_slope(const std::vector<PolyVectorField>& fields,
                               const Eigen::VectorXd& z, std::size_t max_degree,
                               const std::vector<double>& t_list,
                               std::size_t n_paths, std::uint64_t seed,
                               std::size_t coarse_steps, std::size_t refine,
                               double floor_factor, std::size_t threads) {
  if (fields.size() < 2) {
    throw std::invalid_argument(
        "remainder_slope: need a drift slot plus one diffusion field");
  }
  if (t_list.size() < 2 || n_paths == 0) {
    throw std::invalid_argument(
        "remainder_slope: need at least two times and one path");
  }
  const std::size_t r = fields.size() - 1;
  const double t_max = *std::max_element(t_list.begin(), t_list.end());
  const TimeGrid coarse_grid(t_max, coarse_steps);
  const TimeGrid fine_grid(t_max, coarse_steps * refine);

  // Evaluation times must land on coarse nodes so the iterated integrals and
  // both integrators are compared at identical path restrictions.
  std::vector<std::size_t> coarse_nodes;
  for (double t : t_list) {
    const double pos = t / coarse_grid.dt();
    const auto node = static_cast<std::size_t>(std::llround(pos));
    if (node == 0 || node > coarse_steps ||
        std::abs(pos - static_cast<double>(node)) > 1e-9) {
      throw std::invalid_argument(
          "remainder_slope: evaluation time off the coarse grid");
    }
    coarse_nodes.push_back(node);
  }

  const StratonovichSystem sys = system_from_fields(fields);
  const auto table = beta_table(fields, max_degree);

  std::vector<std::vector<double>> err(n_paths), floor_rows(n_paths);
  parallel_for_indexed(n_paths, threads, [&](std::size_t p) {
    const DrivingPath fine =
        with_time_component(sample_brownian(fine_grid, r, seed, p));
    const DrivingPath coarse = subsample(fine, refine);
    const Trajectory ref = integrate_heun(sys, fine, z);
    const Trajectory coarse_ref = integrate_heun(sys, coarse, z);
    if (ref.exit_index || coarse_ref.exit_index) {
      throw std::runtime_error("remainder_slope: reference integration exited");
    }
    IteratedIntegralTable integrals(coarse);
    std::vector<double> e_row, f_row;
    for (std::size_t node : coarse_nodes) {
      const TruncatedLogFlow log_flow =
          truncated_log_flow(table, integrals, node);
      const Eigen::VectorXd approx =
          log_flow.zeta.dim() == 0 ? z : flow_exp(log_flow.zeta, z, 64);
      const Eigen::VectorXd& reference = ref.states[node * refine];
      e_row.push_back((approx - reference).norm());
      f_row.push_back((coarse_ref.states[node] - reference).norm());
    }
    err[p] = std::move(e_row);
    floor_rows[p] = std::move(f_row);
  });

  RemainderStudy study;
  study.times = t_list;
  study.mean_error.assign(t_list.size(), 0.0);
  study.floor_error.assign(t_list.size(), 0.0);
  for (std::size_t p = 0; p < n_paths; ++p) {
    for (std::size_t i = 0; i < t_list.size(); ++i) {
      study.mean_error[i] += err[p][i];
      study.floor_error[i] += floor_rows[p][i];
    }
  }
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    study.mean_error[i] /= static_cast<double>(n_paths);
    study.floor_error[i] /= static_cast<double>(n_paths);
  }

  study.at_floor = true;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (study.mean_error[i] > floor_factor * study.floor_error[i]) {
      study.at_floor = false;
      break;
    }
  }
  if (!study.at_floor) {
    study.slope = fit_loglog_slope(study.times, study.mean_error);
  }
  return study;
}

void write_taylor_csv(std::ostream& os, const RemainderStudy& study,
                      std::size_t max_degree) {
  os << "t,N,mean_err,slope\n";
  const double slope = study.slope
                           ? *study.slope
                           : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < study.times.size(); ++i) {
    os << format_double(study.times[i]) << ',' << max_degree << ','
       << format_double(study.mean_error[i]) << ',' << format_double(slope)
       << '\n';
  }
}

}  // namespace liesde
