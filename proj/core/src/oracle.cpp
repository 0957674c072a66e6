#include "mmcert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mmcert/cones.hpp"
#include "mmcert/errors.hpp"

namespace mmcert::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;     // constraint slack for mesh nodes
constexpr double kBallSlack = 1e-12;  // relative slack on the ball filter
constexpr int kRefineMesh = 101;      // nodes per axis in a refinement pass
constexpr int kRefineStages = 3;
constexpr size_t kRefineSeeds = 3;

// a sits meaningfully below b once FP noise on both values is discounted.
bool strictly_below(double a, double b) {
  const double noise =
      64.0 * std::numeric_limits<double>::epsilon() * (std::abs(a) + std::abs(b));
  return a < b - noise;
}

bool feasible(const cones::ConstraintSystem& cs, const Eigen::VectorXd& z) {
  if (cs.empty()) return true;
  const Eigen::VectorXd v = cs.values(z);
  for (int i = 0; i < v.size(); ++i) {
    if (cs.constraints[i].kind == cones::ConstraintKind::Equal) {
      if (std::abs(v[i]) > kFeasTol) return false;
    } else if (v[i] > kFeasTol) {
      return false;
    }
  }
  return true;
}

// Odd node count; node (mesh-1)/2 is exactly c.
std::vector<double> ball_axis(double c, double r, int mesh) {
  std::vector<double> out(mesh);
  const int half = (mesh - 1) / 2;
  for (int i = 0; i < mesh; ++i)
    out[i] = c + r * (static_cast<double>(i - half) / half);
  return out;
}

// Plain linspace plus exact extra nodes (used to keep the candidate and any
// witness coordinates on-grid).
std::vector<double> span_axis(double lo, double hi, int mesh,
                              const std::vector<double>& extra) {
  std::vector<double> out;
  out.reserve(mesh + extra.size());
  for (int i = 0; i < mesh; ++i)
    out.push_back(lo + (hi - lo) * (static_cast<double>(i) / (mesh - 1)));
  for (double e : extra)
    if (e >= lo && e <= hi) out.push_back(e);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Visits every node of the axis product in lexicographic index order; the
// visitor returns false to stop the walk.
template <class Visit>
void for_each_lex(const std::vector<std::vector<double>>& axes, Visit&& visit) {
  const int k = static_cast<int>(axes.size());
  if (k == 0) return;
  std::vector<int> idx(k, 0);
  Eigen::VectorXd z(k);
  for (int j = 0; j < k; ++j) z[j] = axes[j][0];
  for (;;) {
    if (!visit(z, idx)) return;
    int j = k - 1;
    while (j >= 0 && idx[j] + 1 == static_cast<int>(axes[j].size())) {
      idx[j] = 0;
      z[j] = axes[j][0];
      --j;
    }
    if (j < 0) return;
    ++idx[j];
    z[j] = axes[j][idx[j]];
  }
}

// Scan region: per-axis clamp plus an optional Euclidean ball filter.
struct Region {
  std::vector<double> lo, hi;
  const Eigen::VectorXd* center = nullptr;
  double radius = -1.0;  // < 0: no ball filter

  bool inside(const Eigen::VectorXd& z) const {
    if (radius < 0.0 || center == nullptr) return true;
    return (z - *center).squaredNorm() <= radius * radius * (1.0 + kBallSlack);
  }
};

struct Seed {
  double value = -kInf;
  Eigen::VectorXd z;
  std::vector<int> idx;
};

int cheb_index_dist(const std::vector<int>& a, const std::vector<int>& b) {
  int d = 0;
  for (size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

// Keeps up to kRefineSeeds well-separated local leaders; mesh-adjacent
// candidates collapse into the better one.
void offer_seed(std::vector<Seed>& seeds, double v, const Eigen::VectorXd& z,
                const std::vector<int>& idx) {
  for (auto& s : seeds) {
    if (cheb_index_dist(s.idx, idx) <= 1) {
      if (v > s.value) {
        s.value = v;
        s.z = z;
        s.idx = idx;
      }
      return;
    }
  }
  seeds.push_back({v, z, idx});
  std::sort(seeds.begin(), seeds.end(),
            [](const Seed& a, const Seed& b) { return a.value > b.value; });
  if (seeds.size() > kRefineSeeds) seeds.resize(kRefineSeeds);
}

struct ScanOut {
  bool any = false;      // some feasible node was visited
  bool crossed = false;  // threshold reached (threshold scans only)
  double best = -kInf;
  Eigen::VectorXd arg;   // lex-first argmax among visited nodes
  std::vector<Seed> seeds;
};

// Mesh max of f(pt.x, .) over the feasible nodes of the region. When a
// threshold is given the scan exits as soon as it is crossed.
ScanOut scan_region(const kkt::MinimaxProblem& prob, expr::Point& pt,
                    const std::vector<std::vector<double>>& axes,
                    const Region& reg, const double* threshold, bool want_seeds) {
  ScanOut out;
  for_each_lex(axes, [&](const Eigen::VectorXd& z, const std::vector<int>& idx) {
    if (!reg.inside(z)) return true;
    if (!feasible(prob.y_constraints, z)) return true;
    pt.y = z;
    const double v = expr::evaluate(prob.f, pt);
    if (!out.any || v > out.best) {
      out.best = v;
      out.arg = z;
    }
    out.any = true;
    if (threshold != nullptr && v >= *threshold) {
      out.crossed = true;
      return false;
    }
    if (want_seeds) offer_seed(out.seeds, v, z, idx);
    return true;
  });
  return out;
}

// Shrinking passes around a seed, clamped to the region. A coarse mesh
// underestimates the true maximum by O(cell^2); each pass divides the cell
// by (kRefineMesh - 1) / 2, so the residual deficit lands well below
// value_tol for the curvature scales the grids here can resolve.
double refine_value(const kkt::MinimaxProblem& prob, expr::Point& pt,
                    const Region& reg, const Eigen::VectorXd& z0,
                    std::vector<double> halfwidth, const double* threshold,
                    bool* crossed) {
  const int m = static_cast<int>(z0.size());
  Eigen::VectorXd c = z0;
  double best = -kInf;
  for (int stage = 0; stage < kRefineStages; ++stage) {
    std::vector<std::vector<double>> axes(m);
    for (int j = 0; j < m; ++j) {
      const double lo = std::max(reg.lo[j], c[j] - halfwidth[j]);
      const double hi = std::min(reg.hi[j], c[j] + halfwidth[j]);
      axes[j] = span_axis(lo, hi, kRefineMesh, {});
    }
    ScanOut s = scan_region(prob, pt, axes, reg, threshold, false);
    if (s.crossed) {
      if (crossed != nullptr) *crossed = true;
      return s.best;
    }
    if (!s.any) break;  // window fell outside the feasible set
    if (s.best > best) {
      best = s.best;
      c = s.arg;
    }
    for (int j = 0; j < m; ++j)
      halfwidth[j] = 2.0 * halfwidth[j] / (kRefineMesh - 1);
  }
  return best;
}

// True when the refined mesh max of f(x, .) over the region reaches the
// threshold. Refinement only ever raises the mesh max, so a "true" here is
// exactly as trustworthy as the mesh itself, while "false" is robust
// against the coarse grid straddling a sharp interior maximizer.
bool region_max_at_least(const kkt::MinimaxProblem& prob, const Eigen::VectorXd& x,
                         const std::vector<std::vector<double>>& axes,
                         const Region& reg, double threshold) {
  expr::Point pt;
  pt.x = x;
  pt.y = Eigen::VectorXd::Zero(prob.m);
  ScanOut s = scan_region(prob, pt, axes, reg, &threshold, true);
  if (s.crossed) return true;
  if (!s.any)
    throw EmptyFeasibleBall("region scan found no feasible node");
  std::vector<double> cell(prob.m);
  for (int j = 0; j < prob.m; ++j) {
    const auto& a = axes[j];
    cell[j] = a.size() > 1
                  ? (a.back() - a.front()) / static_cast<double>(a.size() - 1)
                  : 0.0;
  }
  for (const auto& seed : s.seeds) {
    bool crossed = false;
    refine_value(prob, pt, reg, seed.z, cell, &threshold, &crossed);
    if (crossed) return true;
  }
  return false;
}

std::string fmt_vec(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i > 0) s += ", ";
    s += expr::format_double(v[i]);
  }
  return s + "]";
}

void check_box(const Box& box, const kkt::MinimaxProblem& prob, const expr::Point& p) {
  if (box.x_lo.size() != prob.n || box.x_hi.size() != prob.n ||
      box.y_lo.size() != prob.m || box.y_hi.size() != prob.m)
    throw ValidationError("box dimensions disagree with the problem");
  for (int i = 0; i < prob.n; ++i) {
    if (!(box.x_lo[i] <= box.x_hi[i]))
      throw ValidationError("box has an empty x range");
    if (!(box.x_lo[i] <= p.x[i] && p.x[i] <= box.x_hi[i]))
      throw ValidationError("candidate x lies outside the declared box");
  }
  for (int j = 0; j < prob.m; ++j) {
    if (!(box.y_lo[j] <= box.y_hi[j]))
      throw ValidationError("box has an empty y range");
    if (!(box.y_lo[j] <= p.y[j] && p.y[j] <= box.y_hi[j]))
      throw ValidationError("candidate y lies outside the declared box");
  }
}

// Distance from ybar to the farthest corner of the y-box: a ball of this
// radius covers everything the box could offer the inner player.
double cover_radius(const Box& box, const Eigen::VectorXd& ybar) {
  double acc = 0.0;
  for (int j = 0; j < ybar.size(); ++j) {
    const double d = std::max(std::abs(box.y_lo[j] - ybar[j]),
                              std::abs(box.y_hi[j] - ybar[j]));
    acc += d * d;
  }
  return std::sqrt(acc);
}

// {0}, then geometric rungs (ratio 2^(1/4)) from the y-cell size of the
// delta-ball up to kappa_max * delta, then on to the y-box cover radius when
// a box is available. capped_count marks how many rungs respect the kappa
// budget.
std::vector<double> radius_ladder(double delta, const GridSpec& grid,
                                  const Box* box, const Eigen::VectorXd& ybar,
                                  size_t* capped_count) {
  const double q = std::pow(2.0, 0.25);
  const double cap = grid.kappa_max * delta;
  const double cell = 2.0 * delta / (grid.mesh_per_axis - 1);
  std::vector<double> rungs;
  rungs.push_back(0.0);
  for (double r = std::min(cell, cap); r < cap * (1.0 - 1e-9); r *= q)
    rungs.push_back(r);
  rungs.push_back(cap);
  *capped_count = rungs.size();
  if (box != nullptr) {
    const double reach = cover_radius(*box, ybar);
    for (double r = cap * q; r < reach * (1.0 - 1e-9); r *= q) rungs.push_back(r);
    if (reach > cap) rungs.push_back(reach);
  }
  return rungs;
}

// Feasible mesh points of the delta-ball around xbar, farthest first so that
// the scan meets the hardest points (and any standing counterexample) early.
std::vector<Eigen::VectorXd> outer_ball_points(const kkt::MinimaxProblem& prob,
                                               const Eigen::VectorXd& xbar,
                                               double delta, int mesh) {
  std::vector<std::vector<double>> ax(prob.n);
  for (int i = 0; i < prob.n; ++i) ax[i] = ball_axis(xbar[i], delta, mesh);
  const double cap = delta * delta * (1.0 + kBallSlack);
  std::vector<Eigen::VectorXd> xs;
  for_each_lex(ax, [&](const Eigen::VectorXd& z, const std::vector<int>&) {
    if ((z - xbar).squaredNorm() > cap) return true;
    if (!feasible(prob.x_constraints, z)) return true;
    xs.push_back(z);
    return true;
  });
  std::stable_sort(xs.begin(), xs.end(),
                   [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
                     return (a - xbar).squaredNorm() > (b - xbar).squaredNorm();
                   });
  return xs;
}

CalmVerdict judge_calmness(const TauProfile& tp, const GridSpec& grid) {
  bool any_inf = false;
  double max_ratio = 0.0;
  for (const auto& r : tp.rows) {
    if (std::isinf(r.tau_min))
      any_inf = true;
    else
      max_ratio = std::max(max_ratio, r.ratio);
  }
  const double e = tp.fitted_exponent;
  if (!any_inf && max_ratio <= grid.kappa_max * (1.0 + 1e-12) &&
      (std::isnan(e) || e >= 0.9))
    return CalmVerdict::Calm;
  // Growth screen: ratios nondecreasing (5% slack) as delta shrinks and at
  // least doubling per decade end to end.
  bool monotone = true;
  double prev = -kInf;
  double first_d = 0.0, first_r = -1.0, last_d = 0.0, last_r = -1.0;
  for (const auto& row : tp.rows) {
    const double ratio = std::isinf(row.tau_min) ? kInf : row.ratio;
    if (ratio < prev * 0.95) monotone = false;
    prev = ratio;
    if (std::isfinite(ratio) && ratio > 0.0) {
      if (first_r < 0.0) {
        first_r = ratio;
        first_d = row.delta;
      }
      last_r = ratio;
      last_d = row.delta;
    }
  }
  if (!std::isnan(e) && e <= 0.9 && monotone && first_r > 0.0 && last_d < first_d) {
    const double decades = std::log10(first_d / last_d);
    if (last_r >= first_r * std::pow(2.0, decades) * 0.9)
      return CalmVerdict::NotCalm;
  }
  return CalmVerdict::Undetermined;
}

}  // namespace

GridSpec GridSpec::defaults() {
  GridSpec g;
  g.delta_values.resize(13);
  for (int i = 0; i < 13; ++i)
    g.delta_values[i] = std::pow(10.0, -1.0 - 0.25 * i);
  return g;
}

void GridSpec::validate() const {
  if (delta_values.empty())
    throw ValidationError("delta_values must be nonempty");
  double prev = kInf;
  for (double d : delta_values) {
    if (!(d > 0.0) || !std::isfinite(d))
      throw ValidationError("delta values must be positive and finite");
    if (!(d < prev))
      throw ValidationError("delta values must be strictly decreasing");
    prev = d;
  }
  if (mesh_per_axis < 3 || mesh_per_axis % 2 == 0)
    throw ValidationError("mesh_per_axis must be odd and at least 3");
  if (!(kappa_max > 0.0) || !std::isfinite(kappa_max))
    throw ValidationError("kappa_max must be positive and finite");
  if (!(value_tol > 0.0))
    throw ValidationError("value_tol must be positive");
}

const char* to_string(CalmVerdict v) {
  switch (v) {
    case CalmVerdict::Calm:
      return "calm";
    case CalmVerdict::NotCalm:
      return "not_calm";
    case CalmVerdict::Undetermined:
      break;
  }
  return "undetermined";
}

const char* to_string(TriState v) {
  switch (v) {
    case TriState::True:
      return "true";
    case TriState::False:
      return "false";
    case TriState::Undetermined:
      break;
  }
  return "undetermined";
}

InnerMaxResult inner_max(const kkt::MinimaxProblem& prob, const Eigen::VectorXd& x,
                         double radius, const Eigen::VectorXd& ybar,
                         int mesh_per_axis) {
  prob.validate();
  if (x.size() != prob.n || ybar.size() != prob.m)
    throw DimensionError("inner_max: point dimensions disagree with the problem");
  if (!(radius >= 0.0) || !std::isfinite(radius))
    throw ValidationError("inner_max: radius must be finite and nonnegative");
  if (mesh_per_axis < 3 || mesh_per_axis % 2 == 0)
    throw ValidationError("inner_max: mesh_per_axis must be odd and at least 3");

  expr::Point pt;
  pt.x = x;
  pt.y = ybar;
  if (radius == 0.0) {
    if (!feasible(prob.y_constraints, ybar))
      throw EmptyFeasibleBall("inner_max: center of the zero-radius ball is infeasible");
    return {expr::evaluate(prob.f, pt), ybar};
  }
  std::vector<std::vector<double>> axes(prob.m);
  for (int j = 0; j < prob.m; ++j)
    axes[j] = ball_axis(ybar[j], radius, mesh_per_axis);
  Region reg;
  reg.center = &ybar;
  reg.radius = radius;
  ScanOut s = scan_region(prob, pt, axes, reg, nullptr, false);
  if (!s.any)
    throw EmptyFeasibleBall("inner_max: no feasible mesh node in the ball around " +
                            fmt_vec(ybar));
  return {s.best, s.arg};
}

TauProfile tau_profile(const kkt::MinimaxProblem& prob, const expr::Point& p,
                       const GridSpec& grid, const Box* box) {
  prob.validate();
  grid.validate();
  if (p.n() != prob.n || p.m() != prob.m)
    throw DimensionError("tau_profile: candidate dimensions disagree with the problem");
  if (!feasible(prob.x_constraints, p.x) || !feasible(prob.y_constraints, p.y))
    throw InfeasiblePoint("tau_profile: candidate violates the constraints");
  if (box != nullptr) check_box(*box, prob, p);

  expr::Point pt = p;
  const double fbar = expr::evaluate(prob.f, pt);
  const double finest = grid.delta_values.back();

  // ybar must already maximize f(xbar, .) on the finest ball.
  {
    std::vector<std::vector<double>> axes(prob.m);
    for (int j = 0; j < prob.m; ++j)
      axes[j] = ball_axis(p.y[j], finest, grid.mesh_per_axis);
    Region reg;
    reg.center = &p.y;
    reg.radius = finest;
    bool bad = false;
    Eigen::VectorXd where;
    for_each_lex(axes, [&](const Eigen::VectorXd& z, const std::vector<int>&) {
      if (!reg.inside(z) || !feasible(prob.y_constraints, z)) return true;
      pt.y = z;
      if (expr::evaluate(prob.f, pt) > fbar + grid.value_tol) {
        bad = true;
        where = z;
        return false;
      }
      return true;
    });
    if (bad)
      throw NotMaxSide("tau_profile: f(xbar, .) exceeds f(xbar, ybar) at y = " +
                       fmt_vec(where));
  }

  const double threshold = fbar - grid.value_tol;
  TauProfile tp;
  bool stress_is_fatal = false;
  for (double delta : grid.delta_values) {
    const std::vector<Eigen::VectorXd> xs =
        outer_ball_points(prob, p.x, delta, grid.mesh_per_axis);
    size_t capped = 0;
    const std::vector<double> rungs =
        radius_ladder(delta, grid, box, p.y, &capped);

    double tau = kInf;
    size_t fail_at = 0;
    Eigen::VectorXd fail_x;
    for (size_t k = 0; k < rungs.size(); ++k) {
      const double r = rungs[k];
      std::vector<std::vector<double>> axes;
      Region reg;
      if (r > 0.0) {
        axes.resize(prob.m);
        reg.lo.resize(prob.m);
        reg.hi.resize(prob.m);
        for (int j = 0; j < prob.m; ++j) {
          axes[j] = ball_axis(p.y[j], r, grid.mesh_per_axis);
          reg.lo[j] = p.y[j] - r;
          reg.hi[j] = p.y[j] + r;
        }
        reg.center = &p.y;
        reg.radius = r;
      }
      bool all_ok = true;
      for (size_t step = 0; step < xs.size(); ++step) {
        const size_t i = (fail_at + step) % xs.size();
        bool ok;
        if (r == 0.0) {
          pt.x = xs[i];
          pt.y = p.y;
          ok = expr::evaluate(prob.f, pt) >= threshold;
        } else {
          ok = region_max_at_least(prob, xs[i], axes, reg, threshold);
        }
        if (!ok) {
          all_ok = false;
          fail_at = i;
          fail_x = xs[i];
          break;
        }
      }
      if (all_ok) {
        tau = r;
        break;
      }
    }

    TauRow row;
    row.delta = delta;
    row.tau_min = tau;
    row.ratio = std::isinf(tau) ? kInf : (tau == 0.0 ? 0.0 : tau / delta);
    tp.rows.push_back(row);
    if (fail_x.size() > 0) {
      if (std::isinf(tau)) {
        tp.stress_x = fail_x;
        stress_is_fatal = true;
      } else if (!stress_is_fatal) {
        tp.stress_x = fail_x;  // point that forced the final passing rung
      }
    }
  }

  {
    std::vector<double> lx, ly;
    for (const auto& row : tp.rows) {
      if (row.tau_min > 0.0 && std::isfinite(row.tau_min)) {
        lx.push_back(std::log(row.delta));
        ly.push_back(std::log(row.tau_min));
      }
    }
    if (lx.size() >= 2) {
      double mx = 0.0, my = 0.0;
      for (size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
      }
      mx /= static_cast<double>(lx.size());
      my /= static_cast<double>(ly.size());
      double cov = 0.0, var = 0.0;
      for (size_t i = 0; i < lx.size(); ++i) {
        cov += (lx[i] - mx) * (ly[i] - my);
        var += (lx[i] - mx) * (lx[i] - mx);
      }
      if (var > 0.0) tp.fitted_exponent = cov / var;
    }
  }

  tp.calm_verdict = judge_calmness(tp, grid);
  switch (tp.calm_verdict) {
    case CalmVerdict::Calm:
      tp.note = "recovery radius stays within kappa_max * delta at every scanned delta";
      break;
    case CalmVerdict::NotCalm:
      tp.note = "required radius outgrows kappa_max * delta as delta shrinks";
      break;
    case CalmVerdict::Undetermined:
      tp.note = "profile neither bounded-ratio nor cleanly growing at this resolution";
      break;
  }
  return tp;
}

std::string tau_profile_csv(const TauProfile& tp) {
  std::string out = "delta,tau_min,ratio\n";
  for (const auto& r : tp.rows) {
    out += expr::format_double(r.delta);
    out += ',';
    out += expr::format_double(r.tau_min);
    out += ',';
    out += expr::format_double(r.ratio);
    out += '\n';
  }
  out += "# exponent=";
  out += expr::format_double(tp.fitted_exponent);
  out += " verdict=";
  out += to_string(tp.calm_verdict);
  out += '\n';
  return out;
}

ClassificationReport classify(const kkt::MinimaxProblem& prob, const expr::Point& p,
                              const GridSpec& grid, const Box* box) {
  prob.validate();
  grid.validate();
  if (p.n() != prob.n || p.m() != prob.m)
    throw DimensionError("classify: candidate dimensions disagree with the problem");
  if (!feasible(prob.x_constraints, p.x) || !feasible(prob.y_constraints, p.y))
    throw InfeasiblePoint("classify: candidate violates the constraints");
  if (box != nullptr) check_box(*box, prob, p);

  ClassificationReport rep;
  rep.mesh_per_axis = grid.mesh_per_axis;
  const double finest = grid.delta_values.back();
  rep.finest_delta = finest;
  const std::string res_note =
      " (mesh " + std::to_string(grid.mesh_per_axis) + " per axis, delta " +
      expr::format_double(finest) + ")";

  expr::Point pt = p;
  const double fbar = expr::evaluate(prob.f, pt);

  // ---- local nash: two-sided sandwich on the finest ball
  std::optional<expr::Point> ln_min_w, ln_max_w;
  {
    std::vector<std::vector<double>> ax(prob.n);
    for (int i = 0; i < prob.n; ++i)
      ax[i] = ball_axis(p.x[i], finest, grid.mesh_per_axis);
    const double cap = finest * finest * (1.0 + kBallSlack);
    pt.y = p.y;
    for_each_lex(ax, [&](const Eigen::VectorXd& z, const std::vector<int>&) {
      if ((z - p.x).squaredNorm() > cap) return true;
      if (!feasible(prob.x_constraints, z)) return true;
      pt.x = z;
      if (strictly_below(expr::evaluate(prob.f, pt), fbar)) {
        ln_min_w = expr::Point{z, p.y};
        return false;
      }
      return true;
    });
    std::vector<std::vector<double>> ay(prob.m);
    for (int j = 0; j < prob.m; ++j)
      ay[j] = ball_axis(p.y[j], finest, grid.mesh_per_axis);
    pt.x = p.x;
    for_each_lex(ay, [&](const Eigen::VectorXd& z, const std::vector<int>&) {
      if ((z - p.y).squaredNorm() > cap) return true;
      if (!feasible(prob.y_constraints, z)) return true;
      pt.y = z;
      if (strictly_below(fbar, expr::evaluate(prob.f, pt))) {
        ln_max_w = expr::Point{p.x, z};
        return false;
      }
      return true;
    });
  }
  if (ln_min_w) {
    rep.local_nash = {TriState::False, ln_min_w,
                      "f(x, ybar) drops below f(xbar, ybar) inside the finest ball"};
  } else if (ln_max_w) {
    rep.local_nash = {TriState::False, ln_max_w,
                      "f(xbar, y) exceeds f(xbar, ybar) inside the finest ball"};
  } else {
    rep.local_nash = {TriState::True, std::nullopt,
                      "no sandwich violation found" + res_note};
  }

  // ---- tau profile: locality and calmness
  TauProfile tp;
  bool have_tp = false;
  try {
    tp = tau_profile(prob, p, grid, box);
    have_tp = true;
  } catch (const NotMaxSide&) {
    // pin down an ascending y for the record
    std::optional<expr::Point> wy;
    std::vector<std::vector<double>> ay(prob.m);
    for (int j = 0; j < prob.m; ++j)
      ay[j] = ball_axis(p.y[j], finest, grid.mesh_per_axis);
    Region reg;
    reg.center = &p.y;
    reg.radius = finest;
    pt.x = p.x;
    for_each_lex(ay, [&](const Eigen::VectorXd& z, const std::vector<int>&) {
      if (!reg.inside(z) || !feasible(prob.y_constraints, z)) return true;
      pt.y = z;
      if (expr::evaluate(prob.f, pt) > fbar + grid.value_tol) {
        wy = expr::Point{p.x, z};
        return false;
      }
      return true;
    });
    rep.local_minimax = {TriState::False, wy,
                         "ybar fails to maximize f(xbar, .) at the finest resolution"};
    rep.calm_local_minimax = {TriState::False, wy,
                              "implied by the max-side failure"};
  }
  if (have_tp) {
    bool all_finite = true;
    for (const auto& row : tp.rows)
      if (std::isinf(row.tau_min)) all_finite = false;
    std::optional<expr::Point> stress_w;
    if (tp.stress_x)
      stress_w = expr::Point{*tp.stress_x, p.y};
    if (all_finite) {
      rep.local_minimax = {TriState::True, std::nullopt,
                           "every scanned delta admits a finite recovery radius" + res_note};
      switch (tp.calm_verdict) {
        case CalmVerdict::Calm:
          rep.calm_local_minimax = {TriState::True, std::nullopt, tp.note + res_note};
          break;
        case CalmVerdict::NotCalm:
          rep.calm_local_minimax = {TriState::False, stress_w, tp.note};
          break;
        case CalmVerdict::Undetermined:
          rep.calm_local_minimax = {TriState::Undetermined, std::nullopt, tp.note};
          break;
      }
    } else {
      rep.local_minimax = {TriState::False, stress_w,
                           "no scanned radius recovers the candidate value at this x"};
      rep.calm_local_minimax = {TriState::False, stress_w,
                                "implied: not locally minimax at this resolution"};
    }
  }

  // ---- box verdicts
  if (box == nullptr) {
    rep.nash = {TriState::Undetermined, std::nullopt, "no bounding box declared"};
    rep.global_minimax_on_box = {TriState::Undetermined, std::nullopt,
                                 "no bounding box declared"};
  } else {
    // The candidate and any finest-ball witness become exact mesh nodes, so
    // the box verdicts can never sit above the local ones.
    std::vector<std::vector<double>> xax(prob.n), yax(prob.m);
    for (int i = 0; i < prob.n; ++i) {
      std::vector<double> extra = {p.x[i]};
      if (ln_min_w) extra.push_back(ln_min_w->x[i]);
      xax[i] = span_axis(box->x_lo[i], box->x_hi[i], grid.mesh_per_axis, extra);
    }
    for (int j = 0; j < prob.m; ++j) {
      std::vector<double> extra = {p.y[j]};
      if (ln_max_w) extra.push_back(ln_max_w->y[j]);
      yax[j] = span_axis(box->y_lo[j], box->y_hi[j], grid.mesh_per_axis, extra);
    }
    std::optional<expr::Point> nash_min_w, nash_max_w;
    pt.y = p.y;
    for_each_lex(xax, [&](const Eigen::VectorXd& z, const std::vector<int>&) {
      if (!feasible(prob.x_constraints, z)) return true;
      pt.x = z;
      if (strictly_below(expr::evaluate(prob.f, pt), fbar)) {
        nash_min_w = expr::Point{z, p.y};
        return false;
      }
      return true;
    });
    pt.x = p.x;
    for_each_lex(yax, [&](const Eigen::VectorXd& z, const std::vector<int>&) {
      if (!feasible(prob.y_constraints, z)) return true;
      pt.y = z;
      if (strictly_below(fbar, expr::evaluate(prob.f, pt))) {
        nash_max_w = expr::Point{p.x, z};
        return false;
      }
      return true;
    });
    if (nash_min_w) {
      rep.nash = {TriState::False, nash_min_w,
                  "f(x, ybar) drops below f(xbar, ybar) on the box mesh"};
    } else if (nash_max_w) {
      rep.nash = {TriState::False, nash_max_w,
                  "f(xbar, y) exceeds f(xbar, ybar) on the box mesh"};
    } else {
      rep.nash = {TriState::True, std::nullopt,
                  "no sandwich violation on the box mesh" + res_note};
    }

    if (nash_max_w) {
      rep.global_minimax_on_box = {TriState::False, nash_max_w,
                                   "f(xbar, y) exceeds f(xbar, ybar) on the box mesh"};
    } else {
      Region ybox;
      ybox.lo.resize(prob.m);
      ybox.hi.resize(prob.m);
      for (int j = 0; j < prob.m; ++j) {
        ybox.lo[j] = box->y_lo[j];
        ybox.hi[j] = box->y_hi[j];
      }
      std::optional<expr::Point> glob_w;
      const double glob_threshold = fbar - grid.value_tol;
      for_each_lex(xax, [&](const Eigen::VectorXd& z, const std::vector<int>&) {
        if (!feasible(prob.x_constraints, z)) return true;
        if (!region_max_at_least(prob, z, yax, ybox, glob_threshold)) {
          glob_w = expr::Point{z, p.y};
          return false;
        }
        return true;
      });
      if (glob_w) {
        rep.global_minimax_on_box = {TriState::False, glob_w,
                                     "inner max over the y-box falls short of the candidate value"};
      } else {
        rep.global_minimax_on_box = {TriState::True, std::nullopt,
                                     "candidate value covered by the inner max at every box x" + res_note};
      }
    }
  }

  auto implies = [](const VerdictEvidence& a, const VerdictEvidence& b,
                    const char* an, const char* bn) {
    if (a.value == TriState::True && b.value == TriState::False)
      throw InternalInconsistency(std::string("implication chain violated: ") + an +
                                  " true but " + bn + " false");
  };
  implies(rep.nash, rep.local_nash, "nash", "local_nash");
  implies(rep.local_nash, rep.calm_local_minimax, "local_nash", "calm_local_minimax");
  implies(rep.calm_local_minimax, rep.local_minimax, "calm_local_minimax",
          "local_minimax");
  return rep;
}

ArgmaxCalmness argmax_calmness(const kkt::MinimaxProblem& prob, const expr::Point& p,
                               const GridSpec& grid, const TauProfile& tp) {
  prob.validate();
  grid.validate();
  if (p.n() != prob.n || p.m() != prob.m)
    throw DimensionError("argmax_calmness: candidate dimensions disagree with the problem");

  ArgmaxCalmness out;
  expr::Point pt = p;
  for (const auto& row : tp.rows) {
    if (!std::isfinite(row.tau_min)) continue;
    ArgmaxCalmnessRow r;
    r.delta = row.delta;
    r.radius = row.tau_min;
    if (row.tau_min > 0.0) {
      std::vector<std::vector<double>> ay(prob.m);
      for (int j = 0; j < prob.m; ++j)
        ay[j] = ball_axis(p.y[j], row.tau_min, grid.mesh_per_axis);
      Region reg;
      reg.center = &p.y;
      reg.radius = row.tau_min;
      const std::vector<Eigen::VectorXd> xs =
          outer_ball_points(prob, p.x, row.delta, grid.mesh_per_axis);
      for (const auto& x : xs) {
        const double dist = (x - p.x).norm();
        if (dist <= row.delta * 1e-9) continue;  // the center itself
        pt.x = x;
        ScanOut s = scan_region(prob, pt, ay, reg, nullptr, false);
        if (!s.any) continue;
        // nearest near-maximizer to ybar
        double best_dist = kInf;
        for_each_lex(ay, [&](const Eigen::VectorXd& z, const std::vector<int>&) {
          if (!reg.inside(z) || !feasible(prob.y_constraints, z)) return true;
          pt.y = z;
          const double v = expr::evaluate(prob.f, pt);
          const double tie =
              grid.value_tol +
              64.0 * std::numeric_limits<double>::epsilon() *
                  (std::abs(v) + std::abs(s.best));
          if (v >= s.best - tie)
            best_dist = std::min(best_dist, (z - p.y).norm());
          return true;
        });
        if (std::isfinite(best_dist))
          r.kappa_hat = std::max(r.kappa_hat, best_dist / dist);
      }
    }
    out.rows.push_back(r);
    out.kappa_hat = std::max(out.kappa_hat, r.kappa_hat);
  }
  return out;
}

}  // namespace mmcert::oracle
