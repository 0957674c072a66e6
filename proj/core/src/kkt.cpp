#include "mmcert/kkt.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mmcert/errors.hpp"

namespace mmcert::kkt {

namespace {

const cones::ConstraintSystem& block_system(const MinimaxProblem& pb, Side side) {
  return side == Side::Min ? pb.x_constraints : pb.y_constraints;
}

Eigen::VectorXd block_point(const expr::Point& p, Side side) {
  return side == Side::Min ? p.x : p.y;
}

Eigen::VectorXd block_gradient(const MinimaxProblem& pb, const expr::Point& p, Side side) {
  Eigen::VectorXd g = expr::gradient(pb.f, p);
  return side == Side::Min ? g.head(pb.n).eval() : g.tail(pb.m).eval();
}

}  // namespace

void MinimaxProblem::validate() const {
  if (n <= 0 || m <= 0) throw ValidationError("problem dimensions must be positive");
  if (!f) throw ValidationError("objective expression is missing");
  int mx = 0, my = 0;
  expr::max_indices(f, mx, my);
  if (mx > n || my > m) throw DimensionError("objective mentions variables beyond n or m");
  if (x_constraints.block != expr::Axis::X || y_constraints.block != expr::Axis::Y)
    throw ValidationError("constraint systems attached to the wrong blocks");
  if (x_constraints.n != n || x_constraints.m != m || y_constraints.n != n ||
      y_constraints.m != m)
    throw DimensionError("constraint system dimensions disagree with the problem");
  x_constraints.validate();
  y_constraints.validate();
}

MultiplierPolyhedron multiplier_polyhedron(const MinimaxProblem& pb, const expr::Point& p,
                                           Side side, double activity_tol,
                                           double stationarity_tol) {
  const cones::ConstraintSystem& cs = block_system(pb, side);
  Eigen::VectorXd z = block_point(p, side);
  std::vector<int> act = cones::active_set(cs, z, activity_tol);

  MultiplierPolyhedron mp;
  mp.side = side;
  const int dim = cs.block_dim();

  std::vector<Eigen::VectorXd> cols;
  for (int i : act) {
    cols.push_back(cs.gradient_row(i - 1, z));
    mp.constraint_index.push_back(i);
    mp.sign_constrained.push_back(true);
  }
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    if (cs.constraints[i].kind == cones::ConstraintKind::Equal) {
      cols.push_back(cs.gradient_row(static_cast<int>(i), z));
      mp.constraint_index.push_back(static_cast<int>(i) + 1);
      mp.sign_constrained.push_back(false);
    }
  }

  const int k = static_cast<int>(cols.size());
  mp.gradients.resize(dim, k);
  for (int j = 0; j < k; ++j) mp.gradients.col(j) = cols[j];

  Eigen::VectorXd g = block_gradient(pb, p, side);
  mp.rhs = (side == Side::Min) ? (-g).eval() : g;

  // feasibility with an infinity-norm slack of stationarity_tol:
  //   gradients * lambda - s = rhs,  |s_i| <= stationarity_tol
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd A_eq(dim, k + dim);
  A_eq.leftCols(k) = mp.gradients;
  A_eq.rightCols(dim) = -Eigen::MatrixXd::Identity(dim, dim);
  std::vector<cones::Bounds> bounds;
  for (int j = 0; j < k; ++j)
    bounds.push_back(mp.sign_constrained[j] ? cones::Bounds{0.0, inf} : cones::Bounds{-inf, inf});
  for (int i = 0; i < dim; ++i) bounds.push_back({-stationarity_tol, stationarity_tol});

  cones::LpResult lp =
      cones::lp_feasible(A_eq, mp.rhs, Eigen::MatrixXd(0, k + dim), Eigen::VectorXd(0), bounds);
  mp.nonempty = lp.feasible;
  if (lp.feasible) mp.witness = lp.point.head(k);
  return mp;
}

Eigen::VectorXd expand_multiplier(const MultiplierPolyhedron& mp, const Eigen::VectorXd& reduced,
                                  int total_constraints) {
  if (reduced.size() != mp.count())
    throw DimensionError("expand_multiplier: reduced vector has the wrong length");
  Eigen::VectorXd full = Eigen::VectorXd::Zero(total_constraints);
  for (int j = 0; j < mp.count(); ++j) {
    int idx = mp.constraint_index[j] - 1;
    if (idx < 0 || idx >= total_constraints)
      throw DimensionError("expand_multiplier: constraint index out of range");
    full[idx] += reduced[j];
  }
  return full;
}

cones::PolyhedralCone critical_cone(const MinimaxProblem& pb, const expr::Point& p, Side side,
                                    double activity_tol) {
  const cones::ConstraintSystem& cs = block_system(pb, side);
  Eigen::VectorXd z = block_point(p, side);
  const int dim = cs.block_dim();

  cones::PolyhedralCone tangent =
      cs.empty() ? cones::make_cone(Eigen::MatrixXd(0, dim), Eigen::MatrixXd(0, dim), dim)
                 : cones::tangent_cone(cs, z, activity_tol);

  Eigen::VectorXd g = block_gradient(pb, p, side);
  Eigen::MatrixXd A_eq(tangent.A_eq.rows() + 1, dim);
  if (tangent.A_eq.rows()) A_eq.topRows(tangent.A_eq.rows()) = tangent.A_eq;
  A_eq.row(A_eq.rows() - 1) = g.transpose();
  return cones::make_cone(tangent.A_le, A_eq, dim);
}

VertexSet multiplier_vertices(const MultiplierPolyhedron& mp, int max_enum) {
  VertexSet out;
  // Empty polyhedron: both lists stay empty; callers decide how to react.
  if (!mp.nonempty) {
    out.exhaustive = true;
    return out;
  }
  const int k = mp.count();
  if (k == 0) {
    out.vertices.push_back(Eigen::VectorXd(0));
    return out;
  }
  if (k > max_enum)
    throw DimensionTooLarge("multiplier_vertices: " + std::to_string(k) +
                            " multipliers exceed enumeration cap " + std::to_string(max_enum));

  std::vector<int> sign_pos;
  for (int j = 0; j < k; ++j)
    if (mp.sign_constrained[j]) sign_pos.push_back(j);
  const int ns = static_cast<int>(sign_pos.size());

  const double res_tol = 1e-9 * (1.0 + mp.rhs.norm());
  const double sign_tol = 1e-10;

  auto push_unique = [](std::vector<Eigen::VectorXd>& dst, const Eigen::VectorXd& v) {
    for (const auto& u : dst)
      if ((u - v).norm() <= 1e-9 * (1.0 + v.norm())) return;
    dst.push_back(v);
  };

  // vertices: zero out a subset of the sign-constrained coordinates, demand
  // that the remaining system pins the rest down (modulo lineality, which can
  // only live on equality multipliers), and keep sign-feasible solutions
  for (int mask = 0; mask < (1 << ns); ++mask) {
    std::vector<bool> zeroed(k, false);
    for (int b = 0; b < ns; ++b)
      if (mask & (1 << b)) zeroed[sign_pos[b]] = true;

    std::vector<int> free_idx;
    for (int j = 0; j < k; ++j)
      if (!zeroed[j]) free_idx.push_back(j);
    const int nf = static_cast<int>(free_idx.size());

    Eigen::VectorXd lam = Eigen::VectorXd::Zero(k);
    if (nf == 0) {
      if (mp.rhs.norm() > res_tol) continue;
    } else {
      Eigen::MatrixXd GF(mp.gradients.rows(), nf);
      for (int j = 0; j < nf; ++j) GF.col(j) = mp.gradients.col(free_idx[j]);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(GF, Eigen::ComputeThinU | Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      double thr = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
      int rank = 0;
      for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > thr) ++rank;

      // any null direction must stay off the sign-constrained coordinates
      bool minimal = true;
      for (int i = rank; i < nf && minimal; ++i) {
        Eigen::VectorXd nv = svd.matrixV().col(i);
        for (int j = 0; j < nf; ++j) {
          if (mp.sign_constrained[free_idx[j]] && std::abs(nv[j]) > 1e-9) {
            minimal = false;
            break;
          }
        }
      }
      if (!minimal) continue;

      // min-norm solution of GF * u = rhs
      Eigen::VectorXd u = Eigen::VectorXd::Zero(nf);
      Eigen::VectorXd c = svd.matrixU().transpose() * mp.rhs;
      for (int i = 0; i < rank; ++i) u += (c[i] / sv[i]) * svd.matrixV().col(i);
      if ((GF * u - mp.rhs).norm() > res_tol) continue;
      for (int j = 0; j < nf; ++j) lam[free_idx[j]] = u[j];
    }

    bool sign_ok = true;
    for (int j = 0; j < k && sign_ok; ++j)
      if (mp.sign_constrained[j] && lam[j] < -sign_tol) sign_ok = false;
    if (!sign_ok) continue;
    push_unique(out.vertices, lam);
  }

  // recession cone: gradients * v = 0, v_i >= 0 on sign-constrained coords
  std::vector<Eigen::VectorXd> le_rows;
  for (int j : sign_pos) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(k);
    row[j] = -1.0;
    le_rows.push_back(row);
  }
  Eigen::MatrixXd A_le(le_rows.size(), k);
  for (std::size_t i = 0; i < le_rows.size(); ++i) A_le.row(i) = le_rows[i].transpose();
  cones::PolyhedralCone rec = cones::make_cone(A_le, mp.gradients.transpose(), k);
  cones::RaySet rs = cones::extreme_rays(rec, max_enum);
  for (const auto& r : rs.rays) push_unique(out.rays, r);
  for (const auto& l : rs.lineality) {
    push_unique(out.rays, l);
    push_unique(out.rays, (-l).eval());
  }
  out.exhaustive = rs.exhaustive;
  return out;
}

LagrangianHessians lagrangian_hessians(const MinimaxProblem& pb, const expr::Point& p,
                                       const Eigen::VectorXd& alpha_full,
                                       const Eigen::VectorXd& beta_full) {
  if (alpha_full.size() != static_cast<int>(pb.x_constraints.constraints.size()))
    throw DimensionError("lagrangian_hessians: alpha length mismatch");
  if (beta_full.size() != static_cast<int>(pb.y_constraints.constraints.size()))
    throw DimensionError("lagrangian_hessians: beta length mismatch");

  Eigen::MatrixXd H = expr::hessian(pb.f, p);
  LagrangianHessians out;
  out.xx = H.topLeftCorner(pb.n, pb.n);
  out.xy = H.topRightCorner(pb.n, pb.m);
  out.yy = H.bottomRightCorner(pb.m, pb.m);

  for (int i = 0; i < alpha_full.size(); ++i) {
    if (alpha_full[i] == 0.0) continue;
    out.xx += alpha_full[i] * pb.x_constraints.hessian_block(i, p.x);
  }
  for (int j = 0; j < beta_full.size(); ++j) {
    if (beta_full[j] == 0.0) continue;
    out.yy -= beta_full[j] * pb.y_constraints.hessian_block(j, p.y);
  }
  return out;
}

}  // namespace mmcert::kkt
