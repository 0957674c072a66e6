// Shared helpers for the test binaries: corpus loading and the seeded
// property suites (reused by the acceptance runner, so they return error
// strings instead of asserting through any particular framework).
#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmcert/certify.hpp"
#include "mmcert/cones.hpp"
#include "mmcert/errors.hpp"
#include "mmcert/expr.hpp"
#include "mmcert/oracle.hpp"
#include "mmcert/problem_io.hpp"

namespace testsupport {

inline mmcert::io::ProblemFile load_corpus(const std::string& name) {
  return mmcert::io::load_problem(std::string(MMCERT_PROBLEM_DIR) + "/" + name + ".json");
}

inline const std::vector<std::string>& corpus_names() {
  static const std::vector<std::string> names = {
      "cubic",  "cubic_m12", "cubic_m14",   "ex3_1",
      "ex5_1",  "ex5_2",     "fair",        "xy_bilinear",
      "quadratic_saddle"};
  return names;
}

// ---------------------------------------------------------------------------
// Random expression trees for the calculus property suite.

inline mmcert::expr::Expr random_expr(std::mt19937_64& rng, int n, int m, int depth) {
  using namespace mmcert::expr;
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> pick_leaf(0, 2);
  std::uniform_int_distribution<int> pick_node(0, 5);
  std::uniform_int_distribution<int> pick_exp(2, 3);
  if (depth <= 0 || pick_node(rng) == 0) {
    switch (pick_leaf(rng)) {
      case 0:
        return make_constant(std::round(coef(rng) * 4.0) / 4.0);
      case 1:
        return make_variable(Axis::X, 1 + static_cast<int>(rng() % n));
      default:
        return make_variable(Axis::Y, 1 + static_cast<int>(rng() % m));
    }
  }
  switch (pick_node(rng)) {
    case 1:
      return make_neg(random_expr(rng, n, m, depth - 1));
    case 2:
      return make_add(random_expr(rng, n, m, depth - 1), random_expr(rng, n, m, depth - 1));
    case 3:
      return make_sub(random_expr(rng, n, m, depth - 1), random_expr(rng, n, m, depth - 1));
    case 4:
      return make_mul(random_expr(rng, n, m, depth - 1), random_expr(rng, n, m, depth - 1));
    default:
      if (rng() % 2)
        return make_abs(random_expr(rng, n, m, depth - 1));
      return make_pow(random_expr(rng, n, m, depth - 1), pick_exp(rng));
  }
}

inline void collect_abs_args(const mmcert::expr::Expr& e,
                             std::vector<mmcert::expr::Expr>& out) {
  if (!e) return;
  if (e->kind == mmcert::expr::NodeKind::Abs) out.push_back(e->a);
  collect_abs_args(e->a, out);
  collect_abs_args(e->b, out);
}

// True when every abs argument keeps a firm, constant sign along
// p + t w for t in [0, t_max]; keeps the finite-difference crosschecks away
// from kink crossings where one-sided derivatives and secants diverge.
inline bool kink_free_segment(const mmcert::expr::Expr& e, const mmcert::expr::Point& p,
                              const Eigen::VectorXd& w, double t_max) {
  std::vector<mmcert::expr::Expr> args;
  collect_abs_args(e, args);
  if (args.empty()) return true;
  const double steps[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (const auto& g : args) {
    double sign = 0.0;
    for (double s : steps) {
      mmcert::expr::Point q = p;
      const double t = s * t_max;
      q.x += t * w.head(p.n());
      q.y += t * w.tail(p.m());
      const double v = mmcert::expr::evaluate(g, q);
      if (std::abs(v) < 1e-3) return false;
      if (sign == 0.0) sign = v > 0 ? 1.0 : -1.0;
      if (v * sign < 0) return false;
    }
  }
  return true;
}

// Criterion: on seeded random expressions, the exact one-sided expansion
// agrees with finite differences (step 1e-6), scales linearly/quadratically
// in the direction, and flips sign with the expression.
inline std::string calculus_property_suite(int cases) {
  using namespace mmcert::expr;
  std::ostringstream err;
  int done = 0;
  std::uint64_t seed = 0;
  while (done < cases) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull ^ seed);
    ++seed;
    const int n = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 3);
    Expr e = random_expr(rng, n, m, 4);

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Point p;
    p.x.resize(n);
    p.y.resize(m);
    Eigen::VectorXd w(n + m);
    bool usable = false;
    for (int tries = 0; tries < 40 && !usable; ++tries) {
      for (int i = 0; i < n; ++i) p.x[i] = unif(rng);
      for (int j = 0; j < m; ++j) p.y[j] = unif(rng);
      for (int k = 0; k < n + m; ++k) w[k] = gauss(rng);
      if (w.norm() < 1e-6) continue;
      w.normalize();
      usable = kink_free_segment(e, p, w, 2e-3);
    }
    if (!usable) continue;  // tree too kink-dense near every sampled segment
    ++done;

    const auto d1 = subderivative(e, p, w);
    const auto d2 = second_subderivative(e, p, w);
    const double f0 = evaluate(e, p);
    const double scale = 1.0 + std::abs(f0) + std::abs(d1.value) + std::abs(d2.value);

    auto phi = [&](double t) {
      Point q = p;
      q.x += t * w.head(n);
      q.y += t * w.tail(m);
      return evaluate(e, q);
    };

    // (a) forward difference at step 1e-6, corrected by the curvature term
    {
      const double t = 1e-6;
      const double fd = (phi(t) - f0) / t;
      const double model = d1.value + 0.5 * t * d2.value;
      if (std::abs(fd - model) > 1e-5 * scale) {
        err << "case " << seed - 1 << " [" << serialize(e) << "]: fd " << fd
            << " vs expansion " << model << "\n";
        continue;
      }
    }
    // (b) Richardson fallback agrees with the exact path
    {
      const auto r = subderivative_numeric(e, p, w, 1e-4);
      const double tol = std::max(1e-6 * scale, 16 * r.error_bound);
      if (std::abs(r.value - d1.value) > tol) {
        err << "case " << seed - 1 << " [" << serialize(e) << "]: numeric " << r.value
            << " vs analytic " << d1.value << " (bound " << r.error_bound << ")\n";
        continue;
      }
    }
    // (c) positive homogeneity: degree 1 in the first order, 2 in the second
    for (double c : {0.5, 2.0, 7.25}) {
      const Eigen::VectorXd cw = c * w;
      const double s1 = subderivative(e, p, cw).value;
      const double s2 = second_subderivative(e, p, cw).value;
      if (std::abs(s1 - c * d1.value) > 1e-9 * scale * c ||
          std::abs(s2 - c * c * d2.value) > 1e-9 * scale * c * c) {
        err << "case " << seed - 1 << " [" << serialize(e) << "]: homogeneity broke at c=" << c
            << "\n";
        break;
      }
    }
    // (d) sign flip is exact
    {
      Expr neg = make_neg(e);
      if (subderivative(neg, p, w).value != -d1.value ||
          second_subderivative(neg, p, w).value != -d2.value) {
        err << "case " << seed - 1 << " [" << serialize(e) << "]: sign flip not exact\n";
        continue;
      }
    }
    // (e) second-order Richardson-extrapolated difference
    {
      const double t = 1e-4;
      auto q_fd = [&](double s) { return 2.0 * (phi(s) - f0 - s * d1.value) / (s * s); };
      const double q = 2.0 * q_fd(t / 2) - q_fd(t);
      if (std::abs(q - d2.value) > 1e-3 * scale) {
        err << "case " << seed - 1 << " [" << serialize(e) << "]: second-order fd " << q
            << " vs " << d2.value << "\n";
        continue;
      }
    }
    // (f) block split: the partial variants match zero-padded joint calls
    {
      Eigen::VectorXd wx = Eigen::VectorXd::Zero(n + m);
      wx.head(n) = w.head(n);
      const double lhs = subderivative_x(e, p, w.head(n)).value;
      const double rhs = subderivative(e, p, wx).value;
      if (lhs != rhs) {
        err << "case " << seed - 1 << ": subderivative_x disagrees with zero-padded joint\n";
      }
    }
  }
  return err.str();
}

// ---------------------------------------------------------------------------
// Random polyhedral cones: extreme-ray enumeration vs LP feasibility.

inline std::string polyhedral_duality_suite(int cases) {
  using namespace mmcert::cones;
  std::ostringstream err;
  for (int case_id = 0; case_id < cases; ++case_id) {
    std::mt19937_64 rng(0xda3e39cb94b95bdbull ^ static_cast<std::uint64_t>(case_id));
    const int dim = 2 + static_cast<int>(rng() % 3);
    const int n_le = 1 + static_cast<int>(rng() % 4);
    const int n_eq = static_cast<int>(rng() % 2);
    std::uniform_int_distribution<int> entry(-2, 2);
    Eigen::MatrixXd A_le(n_le, dim), A_eq(n_eq, dim);
    for (int i = 0; i < n_le; ++i)
      for (int j = 0; j < dim; ++j) A_le(i, j) = entry(rng);
    for (int i = 0; i < n_eq; ++i)
      for (int j = 0; j < dim; ++j) A_eq(i, j) = entry(rng);

    PolyhedralCone k = make_cone(A_le, A_eq, dim);
    RaySet rs = extreme_rays(k);
    if (!rs.exhaustive) {
      err << "case " << case_id << ": enumeration not exhaustive at dim " << dim << "\n";
      continue;
    }
    for (const auto& r : rs.rays)
      if (!membership(k, r, 1e-7)) err << "case " << case_id << ": ray escapes the cone\n";
    for (const auto& l : rs.lineality) {
      if (!membership(k, l, 1e-7) || !membership(k, Eigen::VectorXd(-l), 1e-7))
        err << "case " << case_id << ": lineality direction escapes the cone\n";
    }

    const int gens = static_cast<int>(rs.rays.size() + rs.lineality.size());

    // reconstruction LP: w is in the cone iff it is a conic combination of
    // the enumerated generators (lineality coefficients free)
    auto reconstructible = [&](const Eigen::VectorXd& w) {
      if (gens == 0) return w.norm() == 0.0;
      Eigen::MatrixXd G(dim, gens);
      int c = 0;
      for (const auto& r : rs.rays) G.col(c++) = r;
      for (const auto& l : rs.lineality) G.col(c++) = l;
      std::vector<Bounds> bounds;
      for (size_t i = 0; i < rs.rays.size(); ++i) bounds.push_back({0.0, 1e4});
      for (size_t i = 0; i < rs.lineality.size(); ++i) bounds.push_back({-1e4, 1e4});
      LpResult lp = lp_feasible(G, w, Eigen::MatrixXd(0, gens), Eigen::VectorXd(0), bounds);
      return lp.feasible;
    };

    // (a) conic combinations of the generators reconstruct and stay members
    {
      std::uniform_real_distribution<double> mu(0.0, 3.0);
      Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
      for (const auto& r : rs.rays) w += mu(rng) * r;
      for (const auto& l : rs.lineality) w += (mu(rng) - 1.5) * l;
      if (!membership(k, w, 1e-7))
        err << "case " << case_id << ": generator combination leaves the cone\n";
      if (!reconstructible(w))
        err << "case " << case_id << ": generator combination not reconstructible\n";
    }
    // (b) points clearly outside the cone are not reconstructible
    {
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int probe = 0; probe < 8; ++probe) {
        Eigen::VectorXd w(dim);
        for (int j = 0; j < dim; ++j) w[j] = gauss(rng);
        double defect = 0.0;
        if (k.A_le.rows()) defect = std::max(defect, (k.A_le * w).maxCoeff());
        if (k.A_eq.rows()) defect = std::max(defect, (k.A_eq * w).cwiseAbs().maxCoeff());
        if (defect < 1e-4 * std::max(1.0, w.norm())) continue;  // too close to call
        if (reconstructible(w)) {
          err << "case " << case_id << ": outside point reconstructed (defect " << defect
              << ")\n";
          break;
        }
      }
    }
    // (c) support duality: a positive objective direction exists among the
    // generators iff the boxed LP finds cone points with c.w bounded away
    // from zero
    {
      std::normal_distribution<double> gauss(0.0, 1.0);
      Eigen::VectorXd c(dim);
      for (int j = 0; j < dim; ++j) c[j] = gauss(rng);
      if (c.norm() < 1e-9) continue;
      c.normalize();
      double best = 0.0;
      for (const auto& r : rs.rays) best = std::max(best, c.dot(r));
      for (const auto& l : rs.lineality) best = std::max(best, std::abs(c.dot(l)));

      Eigen::MatrixXd A_le_lp(k.A_le.rows() + 1, dim);
      Eigen::VectorXd b_le_lp(k.A_le.rows() + 1);
      if (k.A_le.rows()) {
        A_le_lp.topRows(k.A_le.rows()) = k.A_le;
        b_le_lp.head(k.A_le.rows()).setZero();
      }
      A_le_lp.row(k.A_le.rows()) = -c.transpose();  // c.w >= 1e-3
      b_le_lp[k.A_le.rows()] = -1e-3;
      std::vector<Bounds> bounds(dim, Bounds{-1.0, 1.0});
      Eigen::VectorXd b_eq = Eigen::VectorXd::Zero(k.A_eq.rows());
      LpResult lp = lp_feasible(k.A_eq, b_eq, A_le_lp, b_le_lp, bounds);
      if (best >= 1e-2 && !lp.feasible)
        err << "case " << case_id << ": generators promise ascent the LP cannot find\n";
      if (best <= 1e-8 && lp.feasible)
        err << "case " << case_id << ": LP found ascent the generators rule out\n";
    }
  }
  return err.str();
}

// ---------------------------------------------------------------------------
// Implication-chain audit over the whole corpus.

inline std::string chain_suite(const std::vector<int>& meshes) {
  using mmcert::oracle::TriState;
  std::ostringstream err;
  for (const auto& name : corpus_names()) {
    mmcert::io::ProblemFile pf = load_corpus(name);
    for (int mesh : meshes) {
      mmcert::oracle::GridSpec grid = mmcert::oracle::GridSpec::defaults();
      grid.mesh_per_axis = mesh;
      try {
        auto rep = mmcert::oracle::classify(pf.problem, pf.candidate, grid,
                                            pf.box ? &*pf.box : nullptr);
        auto broken = [](const mmcert::oracle::VerdictEvidence& a,
                         const mmcert::oracle::VerdictEvidence& b) {
          return a.value == TriState::True && b.value == TriState::False;
        };
        if (broken(rep.nash, rep.local_nash) || broken(rep.local_nash, rep.calm_local_minimax) ||
            broken(rep.calm_local_minimax, rep.local_minimax))
          err << name << " mesh " << mesh << ": implication chain broken in the report\n";
      } catch (const mmcert::InternalInconsistency& e) {
        err << name << " mesh " << mesh << ": " << e.what() << "\n";
      }
    }
  }
  return err.str();
}

// Certificates must not contradict the finest-resolution oracle: a proved
// sufficiency with an oracle refutation of calmness (or a refutation of a
// necessary condition at an oracle-calm point) is a soundness bug.
inline std::string soundness_suite() {
  using mmcert::oracle::TriState;
  std::ostringstream err;
  for (const auto& name : corpus_names()) {
    mmcert::io::ProblemFile pf = load_corpus(name);
    auto cert = mmcert::certify::certify(pf.problem, pf.candidate);
    auto grid = mmcert::oracle::GridSpec::defaults();
    auto cls = mmcert::oracle::classify(pf.problem, pf.candidate, grid,
                                        pf.box ? &*pf.box : nullptr);
    const bool certified = cert.conclusion.rfind("CERTIFIED", 0) == 0;
    const bool refuted = cert.conclusion.rfind("REFUTED", 0) == 0;
    if (certified && cls.calm_local_minimax.value == TriState::False)
      err << name << ": certificate proved but the oracle refutes calm local minimaxity\n";
    if (refuted && cls.calm_local_minimax.value == TriState::True)
      err << name << ": certificate refuted but the oracle confirms calm local minimaxity\n";
  }
  return err.str();
}

}  // namespace testsupport
