#pragma once

#include <Eigen/Core>
#include <vector>

#include "mmcert/cones.hpp"
#include "mmcert/expr.hpp"

namespace mmcert::kkt {

// A constrained minimax problem: min over x in {phi <= 0 / == 0} of
// max over y in {psi <= 0 / == 0} of f(x, y).
struct MinimaxProblem {
  int n = 0;
  int m = 0;
  expr::Expr f;
  cones::ConstraintSystem x_constraints;  // block X
  cones::ConstraintSystem y_constraints;  // block Y
  bool assume_mscq = false;  // caller vouches for constraint qualification

  void validate() const;
};

enum class Side { Min, Max };

// First-order multiplier set at a candidate point, in reduced coordinates
// (one entry per active inequality or equality, inactive inequalities pinned
// to zero):
//   Min side: gradients * lambda = -grad_x f,  lambda_i >= 0 on inequalities
//   Max side: gradients * lambda = +grad_y f,  lambda_i >= 0 on inequalities
struct MultiplierPolyhedron {
  Side side = Side::Min;
  Eigen::MatrixXd gradients;           // block_dim x k, one column per multiplier
  Eigen::VectorXd rhs;                 // stationarity right-hand side
  std::vector<int> constraint_index;   // 1-based index into the constraint list
  std::vector<bool> sign_constrained;  // true for inequality multipliers
  bool nonempty = false;
  Eigen::VectorXd witness;             // a feasible multiplier when nonempty

  int count() const { return static_cast<int>(constraint_index.size()); }
};

MultiplierPolyhedron multiplier_polyhedron(const MinimaxProblem& pb, const expr::Point& p,
                                           Side side, double activity_tol = 1e-8,
                                           double stationarity_tol = 1e-8);

// zero-padded multiplier over the full constraint list of that side
Eigen::VectorXd expand_multiplier(const MultiplierPolyhedron& mp, const Eigen::VectorXd& reduced,
                                  int total_constraints);

// Critical cone: tangent cone of the block feasible set intersected with the
// hyperplane where the block gradient of f vanishes.
cones::PolyhedralCone critical_cone(const MinimaxProblem& pb, const expr::Point& p, Side side,
                                    double activity_tol = 1e-8);

// Vertex/ray decomposition of a multiplier polyhedron. Lineality directions
// are folded into `rays` as +/- pairs so a supremum scan can treat every
// unbounded direction uniformly.
struct VertexSet {
  std::vector<Eigen::VectorXd> vertices;  // reduced coordinates
  std::vector<Eigen::VectorXd> rays;
  bool exhaustive = true;
};

VertexSet multiplier_vertices(const MultiplierPolyhedron& mp, int max_enum = 8);

// Curvature blocks of the two Lagrangians at the candidate point, with
// full-length multipliers (one per constraint on the respective side):
//   xx = f_xx + sum_i alpha_i hess(phi_i)   (min-side Lagrangian)
//   yy = f_yy - sum_j beta_j hess(psi_j)    (max-side Lagrangian)
//   xy = f_xy
struct LagrangianHessians {
  Eigen::MatrixXd xx, xy, yy;
};

LagrangianHessians lagrangian_hessians(const MinimaxProblem& pb, const expr::Point& p,
                                       const Eigen::VectorXd& alpha_full,
                                       const Eigen::VectorXd& beta_full);

}  // namespace mmcert::kkt
