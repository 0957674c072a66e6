#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "mmcert/expr.hpp"

namespace mmcert::cones {

enum class ConstraintKind { LessEqual, Equal };

struct Constraint {
  expr::Expr e;
  ConstraintKind kind;
};

// Constraints over a single block of variables: g_i(z) <= 0 or g_i(z) = 0,
// each expression reading only that block.
struct ConstraintSystem {
  expr::Axis block = expr::Axis::X;
  int n = 0;  // ambient x dimension
  int m = 0;  // ambient y dimension
  std::vector<Constraint> constraints;

  int block_dim() const { return block == expr::Axis::X ? n : m; }
  int inequality_count() const;
  int equality_count() const;
  bool empty() const { return constraints.empty(); }
  // All constraint expressions are affine (or there are none).
  bool all_affine() const;

  // Throws DimensionError when a constraint reads the other block or an
  // index beyond the declared dimensions.
  void validate() const;

  // Lift a block point to a full Point (other block zero; constraints never
  // read it).
  expr::Point lift(const Eigen::VectorXd& z) const;

  // Constraint values at block point z, in declaration order.
  Eigen::VectorXd values(const Eigen::VectorXd& z) const;
  // Block-restricted gradient of constraint i (0-based) at z.
  Eigen::VectorXd gradient_row(int i, const Eigen::VectorXd& z) const;
  // Block-restricted hessian of constraint i (0-based) at z.
  Eigen::MatrixXd hessian_block(int i, const Eigen::VectorXd& z) const;
};

// Polyhedral cone {w : A_le w <= 0, A_eq w = 0}. Factory-normalized rows.
struct PolyhedralCone {
  Eigen::MatrixXd A_le;  // may have 0 rows
  Eigen::MatrixXd A_eq;
  int dim = 0;

  bool unconstrained() const { return A_le.rows() == 0 && A_eq.rows() == 0; }
  // No inequality rows: the cone is a linear subspace.
  bool is_subspace() const { return A_le.rows() == 0; }
};

// Rows are unit-normalized and exact-zero rows dropped.
PolyhedralCone make_cone(const Eigen::MatrixXd& A_le, const Eigen::MatrixXd& A_eq, int dim);

// Membership within tol * max(||w||, that row scale); rows are unit.
bool membership(const PolyhedralCone& k, const Eigen::VectorXd& w, double tol = 1e-9);

struct RaySet {
  std::vector<Eigen::VectorXd> rays;       // unit extreme rays of the pointed part
  std::vector<Eigen::VectorXd> lineality;  // orthonormal basis of the lineality space
  bool exhaustive = false;

  bool zero_cone() const { return rays.empty() && lineality.empty(); }
};

// 1-based indices (into the constraint list) of inequality constraints with
// |value| <= tol at z. Throws InfeasiblePoint when z violates the system
// beyond tol.
std::vector<int> active_set(const ConstraintSystem& cs, const Eigen::VectorXd& z, double tol = 1e-8);

// Linearization cone at z: rows are gradients of active inequalities (<=)
// and all equalities (=). Valid as the tangent cone under a constraint
// qualification, which this library asserts rather than verifies.
PolyhedralCone tangent_cone(const ConstraintSystem& cs, const Eigen::VectorXd& z, double tol = 1e-8);

// Complete extreme ray / lineality enumeration by double description.
// Throws DimensionTooLarge above the cap.
RaySet extreme_rays(const PolyhedralCone& k, int max_exhaustive_dim = 6);

// Deterministic unit directions inside the cone: seeded normal draws pushed
// into the cone by cyclic projection (<= 200 sweeps), zero projections
// dropped. The zero cone yields an empty list.
std::vector<Eigen::VectorXd> sample_cone_directions(const PolyhedralCone& k, int count,
                                                    std::uint64_t seed);

struct Bounds {
  double lo;
  double hi;
};

struct LpResult {
  bool feasible = false;
  Eigen::VectorXd point;
};

// Feasibility of A_eq x = b_eq, A_le x <= b_le, bounds.lo <= x <= bounds.hi
// by a phase-one dense simplex with Bland's rule. Limits: 32 variables,
// 64 rows. Throws DimensionTooLarge / NumericalFailure.
LpResult lp_feasible(const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                     const Eigen::MatrixXd& A_le, const Eigen::VectorXd& b_le,
                     const std::vector<Bounds>& bounds);

enum class IndicatorCase {
  WholeSpace,           // unconstrained set
  Polyhedral,           // affine constraints: value 0 on critical directions
  NonlinearPolyhedral,  // smooth constraints with polyhedral range set
};

struct IndicatorData {
  PolyhedralCone tangent;                              // Polyhedral / NonlinearPolyhedral
  std::vector<Eigen::MatrixXd> constraint_hessians;    // NonlinearPolyhedral, multiplier order
  std::vector<Eigen::VectorXd> multiplier_vertices;    // NonlinearPolyhedral
};

struct IndicatorValue {
  bool infinite = false;
  double value = 0.0;  // meaningful when !infinite
};

// Second-order expansion value of the indicator of the feasible set at a
// point with normal vector vbar, in direction w. Finite exactly on critical
// directions (w in the tangent cone with <vbar, w> = 0); the finite value is
// 0 in the affine cases and the multiplier-vertex maximum of
// <lambda, Hg(w,w)> in the nonlinear case.
IndicatorValue indicator_second_sub(IndicatorCase c, const IndicatorData& data,
                                    const Eigen::VectorXd& vbar, const Eigen::VectorXd& w,
                                    double tol = 1e-9);

}  // namespace mmcert::cones
