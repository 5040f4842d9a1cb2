#pragma once

#include <optional>
#include <ostream>

#include "liesde/group.hpp"

namespace liesde {

// Coordinate matrix of the product-of-exponentials ansatz
// g = exp(d^0 xi_0) ... exp(d^{l-1} xi_{l-1}): column i holds the algebra
// coordinates of Ad_{exp(d^0 xi_0) ... exp(d^{i-1} xi_{i-1})}(xi_i), so the
// driving coordinates satisfy M(d) delta-d = delta-X.  M(0) = I; for the
// affine group (translation, scaling order) M = [[1, -d^0], [0, 1]];
// for abelian groups M is identically the identity.
Eigen::MatrixXd wn_matrix(const MatrixLieGroup& group,
                          const Eigen::VectorXd& d);

struct WeiNormanResult {
  TimeGrid grid{1.0, 1};
  std::vector<Eigen::VectorXd> coordinates;  // d per node
  // First node whose coordinate matrix was too ill-conditioned to step from
  // (cond > cond_cap); coordinates are frozen there onwards.
  std::optional<std::size_t> singular_index;
  GroupTrajectory reconstructed;

  bool valid_at(std::size_t node) const {
    return !singular_index || node < *singular_index;
  }
};

// Heun predictor-corrector on delta-d = M(d)^{-1} delta-X starting from
// d = 0, with the product of exponentials rebuilt per node.  The path must
// carry one component per basis element.
WeiNormanResult integrate_wei_norman(const MatrixLieGroup& group,
                                     const DrivingPath& path,
                                     double cond_cap = 1e8);

// Closed form for the affine group driven by (X^0, X^1) in the
// (translation, scaling) basis order: d^1 = X^1 verbatim and
// d^0_t = exp(X^1_t) * \int_0^t exp(-X^1_s) dX^0_s with the same midpoint
// quadrature the integrators use.
WeiNormanResult affine_closed_form(const DrivingPath& path);

// Header t,d0,...,valid; valid is 1 before any singularity, else 0.
void write_weinorman_csv(std::ostream& os, const WeiNormanResult& result);

}  // namespace liesde
