#include "liesde/weinorman.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace liesde {

Eigen::MatrixXd wn_matrix(const MatrixLieGroup& group,
                          const Eigen::VectorXd& d) {
  const std::size_t l = group.algebra_dim();
  if (static_cast<std::size_t>(d.size()) != l) {
    throw std::invalid_argument("wn_matrix: coordinate count");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
  Eigen::MatrixXd prod = group.identity();      // exp(d^0 xi_0)...exp(d^{i-1})
  Eigen::MatrixXd prod_inv = group.identity();  // its inverse, accumulated
  for (std::size_t i = 0; i < l; ++i) {
    const Eigen::MatrixXd conj = prod * group.basis()[i] * prod_inv;
    m.col(static_cast<Eigen::Index>(i)) = group.algebra_coordinates(conj);
    const double di = d[static_cast<Eigen::Index>(i)];
    prod = prod * expm(di * group.basis()[i]);
    prod_inv = expm(-di * group.basis()[i]) * prod_inv;
  }
  return m;
}

namespace {

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return std::numeric_limits<double>::infinity();
  const double smin = sv[sv.size() - 1];
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return sv[0] / smin;
}

GroupTrajectory reconstruct(const MatrixLieGroup& group, const TimeGrid& grid,
                            const std::vector<Eigen::VectorXd>& coords) {
  GroupTrajectory traj;
  traj.grid = grid;
  traj.elements.reserve(coords.size());
  traj.node_defects.reserve(coords.size());
  for (const auto& d : coords) {
    Eigen::MatrixXd g = group.identity();
    for (std::size_t i = 0; i < group.algebra_dim(); ++i) {
      g = g * expm(d[static_cast<Eigen::Index>(i)] * group.basis()[i]);
    }
    traj.elements.push_back(g);
    traj.node_defects.push_back(group.membership_defect(g));
    traj.defect = std::max(traj.defect, traj.node_defects.back());
  }
  traj.flagged = !(traj.defect <= 1e-8);
  return traj;
}

}  // namespace

WeiNormanResult integrate_wei_norman(const MatrixLieGroup& group,
                                     const DrivingPath& path,
                                     double cond_cap) {
  const std::size_t l = group.algebra_dim();
  if (path.dim != l) {
    throw std::invalid_argument(
        "integrate_wei_norman: path dimension != algebra dimension");
  }
  WeiNormanResult result;
  result.grid = path.grid;
  result.coordinates.assign(path.grid.node_count(),
                            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l)));

  Eigen::VectorXd dx(static_cast<Eigen::Index>(l));
  for (std::size_t k = 0; k < path.grid.steps; ++k) {
    const Eigen::VectorXd& d = result.coordinates[k];
    const Eigen::MatrixXd m_left = wn_matrix(group, d);
    if (condition_number(m_left) > cond_cap) {
      result.singular_index = k;
      for (std::size_t j = k + 1; j < result.coordinates.size(); ++j) {
        result.coordinates[j] = d;
      }
      break;
    }
    for (std::size_t c = 0; c < l; ++c) {
      dx[static_cast<Eigen::Index>(c)] = path.increment(k, c);
    }
    const Eigen::VectorXd u_left = m_left.partialPivLu().solve(dx);
    const Eigen::VectorXd predictor = d + u_left;
    const Eigen::MatrixXd m_right = wn_matrix(group, predictor);
    if (condition_number(m_right) > cond_cap) {
      result.singular_index = k;
      for (std::size_t j = k + 1; j < result.coordinates.size(); ++j) {
        result.coordinates[j] = d;
      }
      break;
    }
    const Eigen::VectorXd u_right = m_right.partialPivLu().solve(dx);
    result.coordinates[k + 1] = d + 0.5 * (u_left + u_right);
  }

  result.reconstructed = reconstruct(group, path.grid, result.coordinates);
  return result;
}

WeiNormanResult affine_closed_form(const DrivingPath& path) {
  if (path.dim != 2) {
    throw std::invalid_argument("affine_closed_form: expects a 2-component path");
  }
  const std::size_t nodes = path.grid.node_count();
  std::vector<double> integrand(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    integrand[k] = std::exp(-path.value(k, 1));
  }
  const std::vector<double> quad = stratonovich_integral(integrand, path, 0);

  WeiNormanResult result;
  result.grid = path.grid;
  result.coordinates.assign(nodes, Eigen::VectorXd::Zero(2));
  for (std::size_t k = 0; k < nodes; ++k) {
    result.coordinates[k][0] = std::exp(path.value(k, 1)) * quad[k];
    result.coordinates[k][1] = path.value(k, 1);  // verbatim copy
  }
  result.reconstructed =
      reconstruct(MatrixLieGroup::affine1(), path.grid, result.coordinates);
  return result;
}

void write_weinorman_csv(std::ostream& os, const WeiNormanResult& result) {
  const std::size_t l = result.coordinates.empty()
                            ? 0
                            : static_cast<std::size_t>(
                                  result.coordinates[0].size());
  os << 't';
  for (std::size_t i = 0; i < l; ++i) os << ",d" << i;
  os << ",valid\n";
  for (std::size_t k = 0; k < result.coordinates.size(); ++k) {
    os << format_double(result.grid.node(k));
    for (std::size_t i = 0; i < l; ++i) {
      os << ','
         << format_double(result.coordinates[k][static_cast<Eigen::Index>(i)]);
    }
    os << ',' << (result.valid_at(k) ? 1 : 0) << '\n';
  }
}

}  // namespace liesde
