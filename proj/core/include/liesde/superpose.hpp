#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <tuple>

#include "liesde/sde.hpp"

namespace liesde {

enum class RuleKind { LinearCombination, GroupTranslation, Custom };

// Superposition rule z -> Phi(z; q_1, ..., q_m): reconstructs the solution
// through z from m particular solutions, independently of time and of the
// driving path.
struct SuperpositionRule {
  RuleKind kind = RuleKind::Custom;
  std::size_t state_dim = 0;
  std::size_t inputs = 0;  // m
  std::function<Eigen::VectorXd(const Eigen::VectorXd& z,
                                const std::vector<Eigen::VectorXd>& sols)>
      map;
};

// Phi(z; s_1, ..., s_n, sbar) = sum_j z_j s_j + sbar (m = n + 1).  The s_j
// must be integrated with the homogeneous part of the system and sbar with
// the full system; verify_rule does this when handed this kind.
SuperpositionRule linear_rule(std::size_t n);

// Left multiplication by the identity-started solution in the coordinate
// realizations of the groups (m = 1).
SuperpositionRule affine1_translation_rule();   // coords (a0, a1), a1 > 0
SuperpositionRule pos_diag_translation_rule(std::size_t n);  // componentwise

SuperpositionRule custom_rule(
    std::size_t state_dim, std::size_t inputs,
    std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                  const std::vector<Eigen::VectorXd>&)> map);

// Drops every constant field from the system (the inhomogeneity); remaining
// fields must be linear.  Throws std::invalid_argument otherwise.
StratonovichSystem linear_homogeneous_part(const StratonovichSystem& sys);

struct RuleVerification {
  std::vector<double> deviation_per_initial;
  double max_deviation = 0.0;
  bool pass = false;
};

// Integrates the particular solutions and each test initial condition on the
// same driving path, then compares the rule's reconstruction node-wise
// against direct integration (infinity norm).  Particular starts must be
// pairwise distinct.
RuleVerification verify_rule(const StratonovichSystem& sys,
                             const SuperpositionRule& rule,
                             const std::vector<Eigen::VectorXd>& particular_starts,
                             const std::vector<Eigen::VectorXd>& z_list,
                             const DrivingPath& path, double tol);

struct TangencySample {
  Eigen::VectorXd z;
  std::vector<Eigen::VectorXd> points;  // q_0, ..., q_m; q_0 on the rule graph
};

struct TangencyReport {
  double max_residual = 0.0;
};

// Residual of the joint tangency identity defining superposition rules: for
// each noise slot j and sample,
//   S_j(x, q_0) - sum_{a>=1} dPhi/dq_a (z; q) . S_j(x, q_a)
// with the rule gradient taken by central differences of width fd_step.
TangencyReport tangency_check(const StratonovichSystem& sys,
                              const SuperpositionRule& rule,
                              const std::vector<TangencySample>& samples,
                              const Eigen::VectorXd& noise_point,
                              double fd_step = 1e-6);

// Rows z_index,seed,max_dev,pass.
void write_rule_csv(
    std::ostream& os,
    const std::vector<std::tuple<std::size_t, std::uint64_t, double, bool>>&
        rows);

}  // namespace liesde
