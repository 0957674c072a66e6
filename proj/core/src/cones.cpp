#include "mmcert/cones.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include "mmcert/errors.hpp"

namespace mmcert::cones {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kTightTol = 1e-10;

// lexicographic comparison for canonical ray ordering
bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - 1e-12) return true;
    if (a[i] > b[i] + 1e-12) return false;
  }
  return false;
}

// flip so the first coordinate with |v_i| > tol is positive
void canonical_sign(Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ConstraintSystem

void ConstraintSystem::validate() const {
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    if (!c.e) throw ValidationError("constraint " + std::to_string(i + 1) + " has no expression");
    int mx = 0, my = 0;
    expr::max_indices(c.e, mx, my);
    if (block == expr::Axis::X) {
      if (my > 0)
        throw DimensionError("x-block constraint " + std::to_string(i + 1) + " mentions y variables");
      if (mx > n) throw DimensionError("constraint " + std::to_string(i + 1) + " exceeds x dimension");
    } else {
      if (mx > 0)
        throw DimensionError("y-block constraint " + std::to_string(i + 1) + " mentions x variables");
      if (my > m) throw DimensionError("constraint " + std::to_string(i + 1) + " exceeds y dimension");
    }
  }
}

expr::Point ConstraintSystem::lift(const Eigen::VectorXd& z) const {
  if (static_cast<int>(z.size()) != block_dim())
    throw DimensionError("lift: point size does not match block dimension");
  expr::Point p;
  if (block == expr::Axis::X) {
    p.x = z;
    p.y = Eigen::VectorXd::Zero(m);
  } else {
    p.x = Eigen::VectorXd::Zero(n);
    p.y = z;
  }
  return p;
}

Eigen::VectorXd ConstraintSystem::values(const Eigen::VectorXd& z) const {
  expr::Point p = lift(z);
  Eigen::VectorXd v(constraints.size());
  for (std::size_t i = 0; i < constraints.size(); ++i) v[i] = expr::evaluate(constraints[i].e, p);
  return v;
}

Eigen::VectorXd ConstraintSystem::gradient_row(int i, const Eigen::VectorXd& z) const {
  expr::Point p = lift(z);
  Eigen::VectorXd g = expr::gradient(constraints[i].e, p);
  return block == expr::Axis::X ? g.head(n) : g.tail(m);
}

Eigen::MatrixXd ConstraintSystem::hessian_block(int i, const Eigen::VectorXd& z) const {
  expr::Point p = lift(z);
  Eigen::MatrixXd h = expr::hessian(constraints[i].e, p);
  return block == expr::Axis::X ? h.topLeftCorner(n, n) : h.bottomRightCorner(m, m);
}

bool ConstraintSystem::all_affine() const {
  for (const auto& c : constraints)
    if (!expr::is_affine(c.e)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// PolyhedralCone

PolyhedralCone make_cone(const Eigen::MatrixXd& A_le, const Eigen::MatrixXd& A_eq, int dim) {
  if (dim <= 0) throw DimensionError("make_cone: dimension must be positive");
  if ((A_le.rows() && A_le.cols() != dim) || (A_eq.rows() && A_eq.cols() != dim))
    throw DimensionError("make_cone: row width does not match dimension");
  PolyhedralCone k;
  k.dim = dim;
  auto keep_normalized = [dim](const Eigen::MatrixXd& src) {
    std::vector<Eigen::VectorXd> rows;
    for (int i = 0; i < src.rows(); ++i) {
      double nrm = src.row(i).norm();
      if (nrm > 1e-14) rows.push_back(src.row(i).transpose() / nrm);
    }
    Eigen::MatrixXd out(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = rows[i].transpose();
    return out;
  };
  k.A_le = keep_normalized(A_le);
  k.A_eq = keep_normalized(A_eq);
  return k;
}

bool membership(const PolyhedralCone& k, const Eigen::VectorXd& w, double tol) {
  if (static_cast<int>(w.size()) != k.dim) throw DimensionError("membership: size mismatch");
  double thr = tol * w.norm();
  if (k.A_le.rows() && (k.A_le * w).maxCoeff() > thr) return false;
  if (k.A_eq.rows() && (k.A_eq * w).cwiseAbs().maxCoeff() > thr) return false;
  return true;
}

// ---------------------------------------------------------------------------
// active set / tangent cone

std::vector<int> active_set(const ConstraintSystem& cs, const Eigen::VectorXd& z, double tol) {
  cs.validate();
  Eigen::VectorXd v = cs.values(z);
  std::vector<int> act;
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    bool eq = cs.constraints[i].kind == ConstraintKind::Equal;
    if (eq) {
      if (std::abs(v[i]) > tol) {
        std::ostringstream os;
        os << "equality constraint " << (i + 1) << " violated: value " << v[i];
        throw InfeasiblePoint(os.str());
      }
    } else {
      if (v[i] > tol) {
        std::ostringstream os;
        os << "inequality constraint " << (i + 1) << " violated: value " << v[i];
        throw InfeasiblePoint(os.str());
      }
      if (std::abs(v[i]) <= tol) act.push_back(static_cast<int>(i) + 1);
    }
  }
  return act;
}

PolyhedralCone tangent_cone(const ConstraintSystem& cs, const Eigen::VectorXd& z, double tol) {
  std::vector<int> act = active_set(cs, z, tol);
  int dim = cs.block_dim();
  std::vector<Eigen::VectorXd> le_rows, eq_rows;
  for (int i : act) le_rows.push_back(cs.gradient_row(i - 1, z));
  for (std::size_t i = 0; i < cs.constraints.size(); ++i)
    if (cs.constraints[i].kind == ConstraintKind::Equal)
      eq_rows.push_back(cs.gradient_row(static_cast<int>(i), z));
  Eigen::MatrixXd A_le(le_rows.size(), dim), A_eq(eq_rows.size(), dim);
  for (std::size_t i = 0; i < le_rows.size(); ++i) A_le.row(i) = le_rows[i].transpose();
  for (std::size_t i = 0; i < eq_rows.size(); ++i) A_eq.row(i) = eq_rows[i].transpose();
  return make_cone(A_le, A_eq, dim);
}

// ---------------------------------------------------------------------------
// extreme rays (double description in the pointed quotient)

namespace {

struct DDRay {
  Eigen::VectorXd v;            // unit direction in quotient coordinates
  std::vector<bool> tight;      // tightness over processed rows
};

std::vector<bool> tight_set(const Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& rows,
                            const std::vector<int>& processed) {
  std::vector<bool> t(rows.size(), false);
  for (int i : processed) t[i] = std::abs(rows[i].dot(v)) <= kTightTol;
  return t;
}

// Fukuda adjacency test: no third ray is tight on the common tight set.
bool adjacent(const std::vector<DDRay>& rays, std::size_t p, std::size_t q) {
  const std::vector<bool>& a = rays[p].tight;
  const std::vector<bool>& b = rays[q].tight;
  for (std::size_t w = 0; w < rays.size(); ++w) {
    if (w == p || w == q) continue;
    bool covers = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] && b[i] && !rays[w].tight[i]) {
        covers = false;
        break;
      }
    }
    if (covers) return false;
  }
  return true;
}

}  // namespace

RaySet extreme_rays(const PolyhedralCone& k, int max_exhaustive_dim) {
  if (k.dim > max_exhaustive_dim)
    throw DimensionTooLarge("extreme_rays: dimension " + std::to_string(k.dim) +
                            " exceeds exhaustive enumeration cap " +
                            std::to_string(max_exhaustive_dim));
  RaySet out;
  out.exhaustive = true;

  const int d = k.dim;
  const int r_le = static_cast<int>(k.A_le.rows());
  const int r_eq = static_cast<int>(k.A_eq.rows());

  Eigen::MatrixXd S(r_le + r_eq, d);
  if (r_le) S.topRows(r_le) = k.A_le;
  if (r_eq) S.bottomRows(r_eq) = k.A_eq;

  // lineality space = null space of all constraint rows
  Eigen::MatrixXd L(d, 0), Q(d, 0);
  if (S.rows() == 0) {
    L = Eigen::MatrixXd::Identity(d, d);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double thr = kRankTol * std::max(1.0, sv.size() ? sv[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > thr) ++rank;
    Q = svd.matrixV().leftCols(rank);
    L = svd.matrixV().rightCols(d - rank);
  }

  for (int i = 0; i < L.cols(); ++i) {
    Eigen::VectorXd v = L.col(i);
    canonical_sign(v);
    out.lineality.push_back(v);
  }
  std::sort(out.lineality.begin(), out.lineality.end(), lex_less);

  const int dq = static_cast<int>(Q.cols());
  if (dq == 0) return out;  // cone is a subspace

  // quotient rows, equalities as +/- pairs; the quotient cone is pointed
  std::vector<Eigen::VectorXd> rows;
  for (int i = 0; i < r_le; ++i) rows.push_back((k.A_le.row(i) * Q).transpose());
  for (int i = 0; i < r_eq; ++i) {
    rows.push_back((k.A_eq.row(i) * Q).transpose());
    rows.push_back(-(k.A_eq.row(i) * Q).transpose());
  }

  // initial simplicial cone from dq independent rows
  Eigen::MatrixXd Rt(dq, rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) Rt.col(i) = rows[i];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Rt);
  qr.setThreshold(kRankTol);
  if (qr.rank() < dq)
    throw NumericalFailure("extreme_rays: quotient cone rows are rank deficient");
  std::vector<int> basis(qr.colsPermutation().indices().data(),
                         qr.colsPermutation().indices().data() + dq);
  std::sort(basis.begin(), basis.end());

  Eigen::MatrixXd HB(dq, dq);
  for (int i = 0; i < dq; ++i) HB.row(i) = rows[basis[i]].transpose();
  Eigen::MatrixXd R0 = -HB.inverse();  // column j satisfies HB * r = -e_j

  std::vector<int> processed = basis;
  std::vector<DDRay> rays;
  for (int j = 0; j < dq; ++j) {
    DDRay r;
    r.v = R0.col(j).normalized();
    r.tight = tight_set(r.v, rows, processed);
    rays.push_back(std::move(r));
  }

  std::vector<bool> in_basis(rows.size(), false);
  for (int b : basis) in_basis[b] = true;

  for (std::size_t ri = 0; ri < rows.size(); ++ri) {
    if (in_basis[ri]) continue;
    const Eigen::VectorXd& a = rows[ri];

    std::vector<std::size_t> plus, minus, zero;
    std::vector<double> s(rays.size());
    for (std::size_t i = 0; i < rays.size(); ++i) {
      s[i] = a.dot(rays[i].v);
      if (s[i] > kTightTol)
        plus.push_back(i);
      else if (s[i] < -kTightTol)
        minus.push_back(i);
      else
        zero.push_back(i);
    }

    if (plus.empty()) {  // row already satisfied everywhere
      processed.push_back(static_cast<int>(ri));
      for (auto& r : rays) r.tight = tight_set(r.v, rows, processed);
      continue;
    }

    std::vector<Eigen::VectorXd> fresh;
    for (std::size_t p : plus) {
      for (std::size_t q : minus) {
        if (!adjacent(rays, p, q)) continue;
        Eigen::VectorXd w = s[p] * rays[q].v - s[q] * rays[p].v;
        double nrm = w.norm();
        if (nrm <= 1e-12) continue;
        fresh.push_back(w / nrm);
      }
    }

    std::vector<DDRay> next;
    for (std::size_t i : zero) next.push_back(rays[i]);
    for (std::size_t i : minus) next.push_back(rays[i]);
    for (const auto& w : fresh) {
      bool dup = false;
      for (const auto& r : next) {
        if ((r.v - w).norm() <= 1e-9 || (r.v + w).norm() <= 1e-9) {
          dup = true;
          break;
        }
      }
      if (!dup) {
        DDRay r;
        r.v = w;
        next.push_back(std::move(r));
      }
    }
    rays = std::move(next);
    processed.push_back(static_cast<int>(ri));
    for (auto& r : rays) r.tight = tight_set(r.v, rows, processed);
  }

  for (const auto& r : rays) {
    Eigen::VectorXd w = (Q * r.v).normalized();
    out.rays.push_back(w);
  }
  std::sort(out.rays.begin(), out.rays.end(), lex_less);
  return out;
}

// ---------------------------------------------------------------------------
// sampling

std::vector<Eigen::VectorXd> sample_cone_directions(const PolyhedralCone& k, int count,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  bool have_spare = false;
  double spare = 0.0;
  auto uniform = [&rng]() {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;  // (0,1)
  };
  auto gauss = [&]() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    constexpr double two_pi = 6.283185307179586;
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double th = two_pi * u2;
    spare = r * std::sin(th);
    have_spare = true;
    return r * std::cos(th);
  };

  std::vector<Eigen::VectorXd> out;
  const int max_draws = 50 * count + 10;
  for (int draw = 0; draw < max_draws && static_cast<int>(out.size()) < count; ++draw) {
    Eigen::VectorXd w(k.dim);
    for (int i = 0; i < k.dim; ++i) w[i] = gauss();

    // cyclic projection onto the half-space/hyperplane intersection
    for (int sweep = 0; sweep < 200; ++sweep) {
      for (int i = 0; i < k.A_eq.rows(); ++i) w -= k.A_eq.row(i).dot(w) * k.A_eq.row(i).transpose();
      for (int i = 0; i < k.A_le.rows(); ++i) {
        double v = k.A_le.row(i).dot(w);
        if (v > 0) w -= v * k.A_le.row(i).transpose();
      }
      if (membership(k, w, 1e-9)) break;
    }
    if (w.norm() <= 1e-12) continue;
    w.normalize();
    if (!membership(k, w, 1e-9)) continue;
    out.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// second subderivative of a feasible-set indicator along a direction

IndicatorValue indicator_second_sub(IndicatorCase c, const IndicatorData& data,
                                    const Eigen::VectorXd& vbar, const Eigen::VectorXd& w,
                                    double tol) {
  if (vbar.size() != w.size()) throw DimensionError("indicator_second_sub: size mismatch");
  const double inf = std::numeric_limits<double>::infinity();
  double scale = std::max(1.0, vbar.norm() * w.norm());
  bool orthogonal = std::abs(vbar.dot(w)) <= tol * scale;

  switch (c) {
    case IndicatorCase::WholeSpace:
      return orthogonal ? IndicatorValue{false, 0.0} : IndicatorValue{true, inf};
    case IndicatorCase::Polyhedral: {
      bool tangent = w.size() == 0 || membership(data.tangent, w, tol);
      if (!tangent || !orthogonal) return {true, inf};
      return {false, 0.0};
    }
    case IndicatorCase::NonlinearPolyhedral: {
      bool tangent = w.size() == 0 || membership(data.tangent, w, tol);
      if (!tangent || !orthogonal) return {true, inf};
      if (data.multiplier_vertices.empty())
        throw EmptyMultiplierSet("indicator_second_sub: no multiplier vertices supplied");
      double best = -inf;
      for (const auto& lam : data.multiplier_vertices) {
        if (static_cast<int>(data.constraint_hessians.size()) != lam.size())
          throw DimensionError("indicator_second_sub: multiplier length mismatch");
        double v = 0.0;
        for (int i = 0; i < lam.size(); ++i) v += lam[i] * w.dot(data.constraint_hessians[i] * w);
        best = std::max(best, v);
      }
      return {false, best};
    }
  }
  throw InternalInconsistency("indicator_second_sub: unknown case");
}

}  // namespace mmcert::cones
