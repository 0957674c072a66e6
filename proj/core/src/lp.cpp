#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "mmcert/cones.hpp"
#include "mmcert/errors.hpp"

namespace mmcert::cones {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;
constexpr int kMaxIters = 20000;

struct VarMap {
  // x_i = offset + sign * u[col] (+ u[col2] for split variables: x = u - u2)
  double offset = 0.0;
  double sign = 1.0;
  int col = -1;
  int col2 = -1;  // negative part of a free variable
};

}  // namespace

// Phase-one simplex on the standard form M u = d, u >= 0 with one artificial
// per row, Bland's rule throughout. Returns a feasible point of the original
// system when the artificial objective reaches ~0.
LpResult lp_feasible(const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                     const Eigen::MatrixXd& A_le, const Eigen::VectorXd& b_le,
                     const std::vector<Bounds>& bounds) {
  const int nv = static_cast<int>(bounds.size());
  const int re = static_cast<int>(A_eq.rows());
  const int rl = static_cast<int>(A_le.rows());
  if ((re && A_eq.cols() != nv) || (rl && A_le.cols() != nv))
    throw DimensionError("lp_feasible: matrix width does not match bounds size");
  if (A_eq.rows() != b_eq.size() || A_le.rows() != b_le.size())
    throw DimensionError("lp_feasible: rhs size mismatch");
  if (nv > 32) throw DimensionTooLarge("lp_feasible: more than 32 variables");
  if (re + rl > 64) throw DimensionTooLarge("lp_feasible: more than 64 rows");

  const double inf = std::numeric_limits<double>::infinity();

  // variable substitution to u >= 0
  std::vector<VarMap> map(nv);
  int ucols = 0;
  int extra_rows = 0;  // upper-bound rows for doubly bounded variables
  for (int i = 0; i < nv; ++i) {
    const Bounds& b = bounds[i];
    if (b.lo > b.hi) return {false, {}};
    if (b.lo > -inf) {
      map[i] = {b.lo, 1.0, ucols++, -1};
      if (b.hi < inf) ++extra_rows;
    } else if (b.hi < inf) {
      map[i] = {b.hi, -1.0, ucols++, -1};
    } else {
      map[i].col = ucols++;
      map[i].col2 = ucols++;
    }
  }

  const int rows = re + rl + extra_rows;
  if (rows == 0) {
    Eigen::VectorXd x(nv);
    for (int i = 0; i < nv; ++i) x[i] = map[i].offset;  // u = 0 is feasible
    return {true, x};
  }
  const int slacks = rl + extra_rows;
  const int cols = ucols + slacks;  // structural + slack, artificials appended after

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(rows);

  auto fill_row = [&](int r, const Eigen::VectorXd& a, double rhs) {
    double shift = rhs;
    for (int i = 0; i < nv; ++i) {
      if (a[i] == 0.0) continue;
      shift -= a[i] * map[i].offset;
      M(r, map[i].col) += a[i] * map[i].sign;
      if (map[i].col2 >= 0) M(r, map[i].col2) -= a[i];
    }
    d[r] = shift;
  };

  for (int r = 0; r < re; ++r) fill_row(r, A_eq.row(r), b_eq[r]);
  int slack = ucols;
  for (int r = 0; r < rl; ++r) {
    fill_row(re + r, A_le.row(r), b_le[r]);
    M(re + r, slack++) = 1.0;
  }
  int r = re + rl;
  for (int i = 0; i < nv; ++i) {
    if (bounds[i].lo > -inf && bounds[i].hi < inf) {
      M(r, map[i].col) = 1.0;
      M(r, slack++) = 1.0;
      d[r] = bounds[i].hi - bounds[i].lo;
      ++r;
    }
  }

  // make rhs nonnegative, append artificial columns
  Eigen::MatrixXd T(rows, cols + rows + 1);
  T.setZero();
  for (int i = 0; i < rows; ++i) {
    double s = d[i] < 0 ? -1.0 : 1.0;
    T.row(i).head(cols) = s * M.row(i);
    T(i, cols + i) = 1.0;
    T(i, cols + rows) = s * d[i];
  }

  std::vector<int> basis(rows);
  for (int i = 0; i < rows; ++i) basis[i] = cols + i;

  // objective row: minimize sum of artificials; reduced costs start as the
  // negated column sums of the constraint rows
  Eigen::VectorXd obj = Eigen::VectorXd::Zero(cols + rows + 1);
  for (int i = 0; i < rows; ++i) obj -= T.row(i);
  for (int i = 0; i < rows; ++i) obj[cols + i] = 0.0;  // basic artificials priced out

  const int total = cols + rows;
  for (int iter = 0; iter < kMaxIters; ++iter) {
    int enter = -1;
    for (int j = 0; j < total; ++j) {
      if (obj[j] < -kPivotTol) {
        enter = j;
        break;  // Bland: smallest index
      }
    }
    if (enter < 0) break;

    int leave = -1;
    double best = inf;
    for (int i = 0; i < rows; ++i) {
      if (T(i, enter) > kPivotTol) {
        double ratio = T(i, total) / T(i, enter);
        if (ratio < best - 1e-12 || (ratio < best + 1e-12 && (leave < 0 || basis[i] < basis[leave]))) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0)
      throw NumericalFailure("lp_feasible: unbounded phase-one objective (inconsistent tableau)");

    double piv = T(leave, enter);
    T.row(leave) /= piv;
    for (int i = 0; i < rows; ++i) {
      if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
    }
    if (obj[enter] != 0.0) obj -= obj[enter] * T.row(leave);
    basis[leave] = enter;
    if (iter == kMaxIters - 1) throw NumericalFailure("lp_feasible: iteration cap reached");
  }

  double objective = -obj[total];  // obj row holds the negated objective value
  double scale = 1.0 + d.cwiseAbs().maxCoeff();
  if (objective > kFeasTol * scale) return {false, {}};

  Eigen::VectorXd u = Eigen::VectorXd::Zero(cols);
  for (int i = 0; i < rows; ++i)
    if (basis[i] < cols) u[basis[i]] = T(i, total);

  Eigen::VectorXd x(nv);
  for (int i = 0; i < nv; ++i) {
    double v = map[i].offset + map[i].sign * u[map[i].col];
    if (map[i].col2 >= 0) v -= u[map[i].col2];
    x[i] = v;
  }
  return {true, x};
}

}  // namespace mmcert::cones
