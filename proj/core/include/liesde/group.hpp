#pragma once

#include <Eigen/Dense>
#include <functional>
#include <ostream>
#include <string>

#include "liesde/noise.hpp"
#include "liesde/sde.hpp"

namespace liesde {

enum class GroupKind { Affine1, PosDiag, SO3, Custom };

// Which invariance the driving generators carry, hence on which side the
// exponential update multiplies:
//   RightInvariant: g_{k+1} = exp(dXi) * g_k   (left group action on spaces)
//   LeftInvariant:  g_{k+1} = g_k * exp(dXi)   (product/development integral)
enum class FieldSide { RightInvariant, LeftInvariant };

// Scaling-and-squaring Pade approximation (Eigen's implementation).
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

// Matrix group with a fixed ordered algebra basis.  Construction validates
// that the basis is independent and commutator-closed (coefficients within
// 1e-12 of the span); membership_defect quantifies how far a matrix is from
// the group's defining constraints.
class MatrixLieGroup {
 public:
  // Matrices [[a1, a0], [0, 1]], a1 > 0; basis order: translation
  // [[0,1],[0,0]] then scaling [[1,0],[0,0]]; their commutator is minus the
  // translation generator.
  static MatrixLieGroup affine1();
  // Positive diagonal matrices; basis E_ii (abelian).
  static MatrixLieGroup pos_diag(std::size_t n);
  // Rotations; basis = generators of rotations about the x, y, z axes.
  static MatrixLieGroup so3();
  static MatrixLieGroup custom(
      std::string name, std::size_t matrix_dim,
      std::vector<Eigen::MatrixXd> basis,
      std::function<double(const Eigen::MatrixXd&)> defect = {});

  GroupKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::size_t matrix_dim() const { return matrix_dim_; }
  std::size_t algebra_dim() const { return basis_.size(); }
  const std::vector<Eigen::MatrixXd>& basis() const { return basis_; }
  Eigen::MatrixXd identity() const;

  Eigen::MatrixXd algebra_element(const Eigen::VectorXd& coords) const;
  // Least-squares coordinates of xi in the basis; throws std::domain_error
  // when the residual exceeds tol * max(1, |xi|_F).
  Eigen::VectorXd algebra_coordinates(const Eigen::MatrixXd& xi,
                                      double tol = 1e-10) const;
  double membership_defect(const Eigen::MatrixXd& g) const;

 private:
  MatrixLieGroup(GroupKind kind, std::string name, std::size_t matrix_dim,
                 std::vector<Eigen::MatrixXd> basis,
                 std::function<double(const Eigen::MatrixXd&)> defect);
  void validate_basis() const;

  GroupKind kind_;
  std::string name_;
  std::size_t matrix_dim_;
  std::vector<Eigen::MatrixXd> basis_;
  std::function<double(const Eigen::MatrixXd&)> defect_;
};

// Ad_g(xi) = g xi g^{-1}, re-expressed in the algebra basis (the result is
// the projection onto the span; re-expression residual must stay below tol).
Eigen::MatrixXd adjoint(const MatrixLieGroup& group, const Eigen::MatrixXd& g,
                        const Eigen::MatrixXd& xi, double tol = 1e-10);

struct GroupTrajectory {
  TimeGrid grid{1.0, 1};
  std::vector<Eigen::MatrixXd> elements;
  std::vector<double> node_defects;
  double defect = 0.0;  // max over nodes
  bool flagged = false;  // defect exceeded the configured tolerance
};

// Exponential-Euler (McKean-Gangolli) update with dXi = sum_i basis_i dX^i:
// multiplies exp(dXi) on the side picked by `side`.  The path must have one
// component per basis element.
GroupTrajectory integrate_group_sde(const MatrixLieGroup& group,
                                    const DrivingPath& path,
                                    const Eigen::MatrixXd& g0,
                                    FieldSide side = FieldSide::RightInvariant,
                                    double defect_tol = 1e-8);

// Development of an algebra-valued path from the identity with
// left-invariant generators: the discrete product of exponentials.
GroupTrajectory stochastic_exponential(const MatrixLieGroup& group,
                                       const DrivingPath& path,
                                       double defect_tol = 1e-8);

// Node-wise right translation h_k = e_k * g of an identity-started
// trajectory.  With right-invariant updates this reproduces the trajectory
// started at g up to matrix-product round-off.
GroupTrajectory translate_solution(const MatrixLieGroup& group,
                                   const GroupTrajectory& identity_traj,
                                   const Eigen::MatrixXd& g,
                                   double defect_tol = 1e-8);

// Applies a group action node-wise to one initial point.
Trajectory one_point_motion(
    const GroupTrajectory& traj,
    const std::function<Eigen::VectorXd(const Eigen::MatrixXd&,
                                        const Eigen::VectorXd&)>& action,
    const Eigen::VectorXd& z0);

// Action of affine1 matrices on the line: x -> a1 x + a0.
Eigen::VectorXd affine1_action(const Eigen::MatrixXd& g,
                               const Eigen::VectorXd& z);
Eigen::VectorXd matrix_vector_action(const Eigen::MatrixXd& g,
                                     const Eigen::VectorXd& z);

struct ProjectedTrajectory {
  Trajectory trajectory;
  double norm_defect = 0.0;  // max deviation of |state| from |base_point|
};

// One-point motion under the matrix-vector action, tracking how well the
// orbit norm is preserved.  For rotations the base point must be unit norm
// (the embedded sphere).
ProjectedTrajectory project_homogeneous(const MatrixLieGroup& group,
                                        const GroupTrajectory& traj,
                                        const Eigen::VectorXd& base_point);

// Header t,g00,g01,...,defect with row-major matrix entries.
void write_group_csv(std::ostream& os, const GroupTrajectory& traj);

}  // namespace liesde
