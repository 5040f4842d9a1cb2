#include "liesde/group.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

namespace liesde {

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("expm: square matrix expected");
  }
  return a.exp();
}

namespace {

double affine1_defect(const Eigen::MatrixXd& g) {
  if (g.rows() != 2 || g.cols() != 2) {
    return std::numeric_limits<double>::infinity();
  }
  if (!(g(0, 0) > 0.0)) return std::numeric_limits<double>::infinity();
  return std::max(std::abs(g(1, 0)), std::abs(g(1, 1) - 1.0));
}

double pos_diag_defect(const Eigen::MatrixXd& g) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (i == j) {
        if (!(g(i, i) > 0.0)) return std::numeric_limits<double>::infinity();
      } else {
        d = std::max(d, std::abs(g(i, j)));
      }
    }
  }
  return d;
}

double so3_defect(const Eigen::MatrixXd& g) {
  if (g.rows() != 3 || g.cols() != 3) {
    return std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXd gram = g.transpose() * g - Eigen::MatrixXd::Identity(3, 3);
  return std::max(gram.lpNorm<Eigen::Infinity>(),
                  std::abs(g.determinant() - 1.0));
}

}  // namespace

MatrixLieGroup::MatrixLieGroup(
    GroupKind kind, std::string name, std::size_t matrix_dim,
    std::vector<Eigen::MatrixXd> basis,
    std::function<double(const Eigen::MatrixXd&)> defect)
    : kind_(kind),
      name_(std::move(name)),
      matrix_dim_(matrix_dim),
      basis_(std::move(basis)),
      defect_(std::move(defect)) {
  if (matrix_dim_ == 0) {
    throw std::invalid_argument("MatrixLieGroup: matrix dimension");
  }
  if (basis_.empty()) {
    throw std::invalid_argument("MatrixLieGroup: empty algebra basis");
  }
  for (const auto& b : basis_) {
    if (b.rows() != static_cast<Eigen::Index>(matrix_dim_) ||
        b.cols() != static_cast<Eigen::Index>(matrix_dim_)) {
      throw std::invalid_argument("MatrixLieGroup: basis matrix size");
    }
  }
  validate_basis();
}

void MatrixLieGroup::validate_basis() const {
  const Eigen::Index d2 =
      static_cast<Eigen::Index>(matrix_dim_ * matrix_dim_);
  Eigen::MatrixXd flat(d2, static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    flat.col(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(basis_[i].data(), d2);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(flat);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[sv.size() - 1] <= 1e-12 * sv[0]) {
    throw std::invalid_argument("MatrixLieGroup: basis is not independent");
  }
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    for (std::size_t j = i + 1; j < basis_.size(); ++j) {
      const Eigen::MatrixXd comm =
          basis_[i] * basis_[j] - basis_[j] * basis_[i];
      algebra_coordinates(comm, 1e-12);  // throws when not closed
    }
  }
}

MatrixLieGroup MatrixLieGroup::affine1() {
  Eigen::MatrixXd xi0 = Eigen::MatrixXd::Zero(2, 2);
  xi0(0, 1) = 1.0;  // translation
  Eigen::MatrixXd xi1 = Eigen::MatrixXd::Zero(2, 2);
  xi1(0, 0) = 1.0;  // scaling
  return MatrixLieGroup(GroupKind::Affine1, "affine1", 2, {xi0, xi1},
                        affine1_defect);
}

MatrixLieGroup MatrixLieGroup::pos_diag(std::size_t n) {
  if (n == 0) throw std::invalid_argument("pos_diag: dimension");
  std::vector<Eigen::MatrixXd> basis;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    basis.push_back(e);
  }
  return MatrixLieGroup(GroupKind::PosDiag, "posdiag", n, std::move(basis),
                        pos_diag_defect);
}

MatrixLieGroup MatrixLieGroup::so3() {
  Eigen::MatrixXd lx = Eigen::MatrixXd::Zero(3, 3);
  lx(1, 2) = -1.0;
  lx(2, 1) = 1.0;
  Eigen::MatrixXd ly = Eigen::MatrixXd::Zero(3, 3);
  ly(0, 2) = 1.0;
  ly(2, 0) = -1.0;
  Eigen::MatrixXd lz = Eigen::MatrixXd::Zero(3, 3);
  lz(0, 1) = -1.0;
  lz(1, 0) = 1.0;
  return MatrixLieGroup(GroupKind::SO3, "so3", 3, {lx, ly, lz}, so3_defect);
}

MatrixLieGroup MatrixLieGroup::custom(
    std::string name, std::size_t matrix_dim,
    std::vector<Eigen::MatrixXd> basis,
    std::function<double(const Eigen::MatrixXd&)> defect) {
  return MatrixLieGroup(GroupKind::Custom, std::move(name), matrix_dim,
                        std::move(basis), std::move(defect));
}

Eigen::MatrixXd MatrixLieGroup::identity() const {
  return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(matrix_dim_),
                                   static_cast<Eigen::Index>(matrix_dim_));
}

Eigen::MatrixXd MatrixLieGroup::algebra_element(
    const Eigen::VectorXd& coords) const {
  if (static_cast<std::size_t>(coords.size()) != basis_.size()) {
    throw std::invalid_argument("algebra_element: coordinate count");
  }
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(matrix_dim_),
                            static_cast<Eigen::Index>(matrix_dim_));
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    const double c = coords[static_cast<Eigen::Index>(i)];
    if (c != 0.0) out += c * basis_[i];
  }
  return out;
}

Eigen::VectorXd MatrixLieGroup::algebra_coordinates(const Eigen::MatrixXd& xi,
                                                    double tol) const {
  if (xi.rows() != static_cast<Eigen::Index>(matrix_dim_) ||
      xi.cols() != static_cast<Eigen::Index>(matrix_dim_)) {
    throw std::invalid_argument("algebra_coordinates: matrix size");
  }
  const Eigen::Index d2 =
      static_cast<Eigen::Index>(matrix_dim_ * matrix_dim_);
  Eigen::MatrixXd flat(d2, static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    flat.col(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::VectorXd>(basis_[i].data(), d2);
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(xi.data(), d2);
  const Eigen::VectorXd coords = flat.colPivHouseholderQr().solve(rhs);
  const double resid = (flat * coords - rhs).norm();
  if (resid > tol * std::max(1.0, rhs.norm())) {
    throw std::domain_error(
        "algebra_coordinates: matrix outside the algebra span");
  }
  return coords;
}

double MatrixLieGroup::membership_defect(const Eigen::MatrixXd& g) const {
  if (g.rows() != static_cast<Eigen::Index>(matrix_dim_) ||
      g.cols() != static_cast<Eigen::Index>(matrix_dim_)) {
    return std::numeric_limits<double>::infinity();
  }
  if (!g.allFinite()) return std::numeric_limits<double>::infinity();
  if (defect_) return defect_(g);
  return 0.0;
}

Eigen::MatrixXd adjoint(const MatrixLieGroup& group, const Eigen::MatrixXd& g,
                        const Eigen::MatrixXd& xi, double tol) {
  const Eigen::MatrixXd conj =
      g * xi * g.partialPivLu().solve(group.identity());
  const Eigen::VectorXd coords = group.algebra_coordinates(conj, tol);
  return group.algebra_element(coords);
}

namespace {

GroupTrajectory finish_trajectory(const MatrixLieGroup& group,
                                  GroupTrajectory traj, double defect_tol) {
  traj.node_defects.resize(traj.elements.size());
  traj.defect = 0.0;
  for (std::size_t k = 0; k < traj.elements.size(); ++k) {
    traj.node_defects[k] = group.membership_defect(traj.elements[k]);
    traj.defect = std::max(traj.defect, traj.node_defects[k]);
  }
  traj.flagged = !(traj.defect <= defect_tol);
  return traj;
}

}  // namespace

GroupTrajectory integrate_group_sde(const MatrixLieGroup& group,
                                    const DrivingPath& path,
                                    const Eigen::MatrixXd& g0, FieldSide side,
                                    double defect_tol) {
  if (path.dim != group.algebra_dim()) {
    throw std::invalid_argument(
        "integrate_group_sde: path dimension != algebra dimension");
  }
  if (g0.rows() != static_cast<Eigen::Index>(group.matrix_dim()) ||
      g0.cols() != static_cast<Eigen::Index>(group.matrix_dim())) {
    throw std::invalid_argument("integrate_group_sde: initial element size");
  }
  GroupTrajectory traj;
  traj.grid = path.grid;
  traj.elements.assign(path.grid.node_count(), g0);
  Eigen::VectorXd dx(static_cast<Eigen::Index>(path.dim));
  for (std::size_t k = 0; k < path.grid.steps; ++k) {
    for (std::size_t c = 0; c < path.dim; ++c) {
      dx[static_cast<Eigen::Index>(c)] = path.increment(k, c);
    }
    const Eigen::MatrixXd step = expm(group.algebra_element(dx));
    traj.elements[k + 1] = (side == FieldSide::RightInvariant)
                               ? Eigen::MatrixXd(step * traj.elements[k])
                               : Eigen::MatrixXd(traj.elements[k] * step);
  }
  return finish_trajectory(group, std::move(traj), defect_tol);
}

GroupTrajectory stochastic_exponential(const MatrixLieGroup& group,
                                       const DrivingPath& path,
                                       double defect_tol) {
  return integrate_group_sde(group, path, group.identity(),
                             FieldSide::LeftInvariant, defect_tol);
}

GroupTrajectory translate_solution(const MatrixLieGroup& group,
                                   const GroupTrajectory& identity_traj,
                                   const Eigen::MatrixXd& g,
                                   double defect_tol) {
  if (identity_traj.elements.empty() ||
      (identity_traj.elements.front() - group.identity())
              .lpNorm<Eigen::Infinity>() > 1e-12) {
    throw std::invalid_argument(
        "translate_solution: trajectory must start at the identity");
  }
  if (!(group.membership_defect(g) <= defect_tol)) {
    throw std::invalid_argument("translate_solution: g is not in the group");
  }
  GroupTrajectory traj;
  traj.grid = identity_traj.grid;
  traj.elements.reserve(identity_traj.elements.size());
  for (const auto& e : identity_traj.elements) traj.elements.push_back(e * g);
  return finish_trajectory(group, std::move(traj), defect_tol);
}

Trajectory one_point_motion(
    const GroupTrajectory& traj,
    const std::function<Eigen::VectorXd(const Eigen::MatrixXd&,
                                        const Eigen::VectorXd&)>& action,
    const Eigen::VectorXd& z0) {
  Trajectory out;
  out.grid = traj.grid;
  out.states.reserve(traj.elements.size());
  for (const auto& g : traj.elements) out.states.push_back(action(g, z0));
  out.dim = out.states.empty() ? 0
                               : static_cast<std::size_t>(out.states[0].size());
  for (const auto& s : out.states) {
    if (static_cast<std::size_t>(s.size()) != out.dim) {
      throw std::invalid_argument("one_point_motion: inconsistent action");
    }
  }
  return out;
}

Eigen::VectorXd affine1_action(const Eigen::MatrixXd& g,
                               const Eigen::VectorXd& z) {
  if (g.rows() != 2 || g.cols() != 2 || z.size() != 1) {
    throw std::invalid_argument("affine1_action: shapes");
  }
  Eigen::VectorXd out(1);
  out[0] = g(0, 0) * z[0] + g(0, 1);
  return out;
}

Eigen::VectorXd matrix_vector_action(const Eigen::MatrixXd& g,
                                     const Eigen::VectorXd& z) {
  if (g.cols() != z.size()) {
    throw std::invalid_argument("matrix_vector_action: shapes");
  }
  return g * z;
}

ProjectedTrajectory project_homogeneous(const MatrixLieGroup& group,
                                        const GroupTrajectory& traj,
                                        const Eigen::VectorXd& base_point) {
  if (static_cast<std::size_t>(base_point.size()) != group.matrix_dim()) {
    throw std::invalid_argument("project_homogeneous: base point dimension");
  }
  if (group.kind() == GroupKind::SO3 &&
      std::abs(base_point.norm() - 1.0) > 1e-12) {
    throw std::invalid_argument(
        "project_homogeneous: sphere base point must be unit norm");
  }
  ProjectedTrajectory out;
  out.trajectory = one_point_motion(traj, matrix_vector_action, base_point);
  const double base_norm = base_point.norm();
  for (const auto& s : out.trajectory.states) {
    out.norm_defect = std::max(out.norm_defect,
                               std::abs(s.norm() - base_norm));
  }
  return out;
}

void write_group_csv(std::ostream& os, const GroupTrajectory& traj) {
  const Eigen::Index d =
      traj.elements.empty() ? 0 : traj.elements[0].rows();
  os << 't';
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) os << ",g" << i << j;
  }
  os << ",defect\n";
  for (std::size_t k = 0; k < traj.elements.size(); ++k) {
    os << format_double(traj.grid.node(k));
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        os << ',' << format_double(traj.elements[k](i, j));
      }
    }
    os << ',' << format_double(traj.node_defects.empty() ? 0.0
                                                         : traj.node_defects[k])
       << '\n';
  }
}

}  // namespace liesde
