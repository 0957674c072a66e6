#include "mmcert/certify.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mmcert/errors.hpp"

namespace mmcert::certify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRaySlopeTol = 1e-10;

const char* side_word(kkt::Side s) { return s == kkt::Side::Min ? "min" : "max"; }

Eigen::MatrixXd sym(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

double qform(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) { return v.dot(M * v); }

std::string fmt(double v) { return expr::format_double(v); }

bool exact(const expr::DerivativeResult& r) { return r.exactness == expr::Exactness::Analytic; }

// ---- direction pools --------------------------------------------------------

struct DirPool {
  std::vector<Eigen::VectorXd> dirs;
  std::vector<Eigen::VectorXd> rays;       // extreme rays when enumerable
  std::vector<Eigen::VectorXd> lineality;  // orthonormal
  bool exhaustive = false;                 // ray description is complete
  bool zero_cone = false;
};

void push_dir(std::vector<Eigen::VectorXd>& dst, const Eigen::VectorXd& v) {
  if (v.norm() <= 1e-12) return;
  Eigen::VectorXd u = v.normalized();
  for (const auto& w : dst)
    if ((w - u).norm() <= 1e-9) return;
  dst.push_back(u);
}

DirPool cone_pool(const cones::PolyhedralCone& k, const Options& opt, int sample_count) {
  DirPool pool;
  try {
    cones::RaySet rs = cones::extreme_rays(k, 6);
    pool.exhaustive = true;
    pool.rays = rs.rays;
    pool.lineality = rs.lineality;
    pool.zero_cone = rs.zero_cone();
    std::vector<Eigen::VectorXd> gen = rs.rays;
    for (const auto& l : rs.lineality) {
      gen.push_back(l);
      gen.push_back(-l);
    }
    for (const auto& g : gen) push_dir(pool.dirs, g);
    if (gen.size() <= 12) {  // interior probes between generator pairs
      for (std::size_t i = 0; i < gen.size(); ++i)
        for (std::size_t j = i + 1; j < gen.size(); ++j) push_dir(pool.dirs, gen[i] + gen[j]);
    }
  } catch (const DimensionTooLarge&) {
  }
  for (const auto& s : cones::sample_cone_directions(k, sample_count, opt.seed))
    push_dir(pool.dirs, s);
  return pool;
}

// a 1-d block has only two directions, so a generator list covers everything
bool pool_covers_all(const DirPool& pool, int dim) {
  return pool.exhaustive && (dim <= 1 || pool.zero_cone);
}

// ---- multiplier-side bundle -------------------------------------------------

struct SideBundle {
  kkt::MultiplierPolyhedron mp;
  kkt::VertexSet vs;               // vertices/rays; may be a witness-only stub
  bool exhaustive = false;         // vs covers the polyhedron exactly
  std::vector<Eigen::MatrixXd> chess;  // constraint Hessian per reduced multiplier
};

SideBundle side_bundle(const kkt::MinimaxProblem& pb, const expr::Point& p, kkt::Side side,
                       const Options& opt) {
  SideBundle b;
  b.mp = kkt::multiplier_polyhedron(pb, p, side, opt.activity_tol, opt.tol);
  if (!b.mp.nonempty) return b;
  try {
    b.vs = kkt::multiplier_vertices(b.mp, opt.max_enum);
    b.exhaustive = b.vs.exhaustive && !b.vs.vertices.empty();
  } catch (const DimensionTooLarge&) {
  }
  if (b.vs.vertices.empty()) {  // fall back to the LP witness
    b.vs.vertices.push_back(b.mp.witness);
    b.vs.rays.clear();
    b.exhaustive = false;
  }
  const cones::ConstraintSystem& cs =
      side == kkt::Side::Min ? pb.x_constraints : pb.y_constraints;
  Eigen::VectorXd z = side == kkt::Side::Min ? p.x : p.y;
  for (int j = 0; j < b.mp.count(); ++j)
    b.chess.push_back(cs.hessian_block(b.mp.constraint_index[j] - 1, z));
  return b;
}

// affine functional base + coef . lambda over the vertex/ray decomposition
struct AffineRange {
  double value = 0.0;
  bool plus_inf = false, minus_inf = false;
};

AffineRange sup_affine(const kkt::VertexSet& vs, double base, const Eigen::VectorXd& coef) {
  AffineRange r;
  r.value = -kInf;
  for (const auto& v : vs.vertices) r.value = std::max(r.value, base + coef.dot(v));
  for (const auto& ray : vs.rays)
    if (coef.dot(ray) > kRaySlopeTol) r.plus_inf = true;
  if (vs.vertices.empty()) throw InternalInconsistency("sup_affine: no vertices");
  return r;
}

AffineRange inf_affine(const kkt::VertexSet& vs, double base, const Eigen::VectorXd& coef) {
  AffineRange r;
  r.value = kInf;
  for (const auto& v : vs.vertices) r.value = std::min(r.value, base + coef.dot(v));
  for (const auto& ray : vs.rays)
    if (coef.dot(ray) < -kRaySlopeTol) r.minus_inf = true;
  if (vs.vertices.empty()) throw InternalInconsistency("inf_affine: no vertices");
  return r;
}

// vertex-only extrema: the existential quantifiers over multiplier sets range
// over the enumerated vertices
double vert_max(const kkt::VertexSet& vs, double base, const Eigen::VectorXd& coef) {
  if (vs.vertices.empty()) throw InternalInconsistency("vert_max: no vertices");
  double m = -kInf;
  for (const auto& v : vs.vertices) m = std::max(m, base + coef.dot(v));
  return m;
}

double vert_min(const kkt::VertexSet& vs, double base, const Eigen::VectorXd& coef) {
  if (vs.vertices.empty()) throw InternalInconsistency("vert_min: no vertices");
  double m = kInf;
  for (const auto& v : vs.vertices) m = std::min(m, base + coef.dot(v));
  return m;
}

// quadratic-form coefficients of the multiplier dependence at direction w:
// min side xx(alpha): +w'chess_j w, max side yy(beta): -w'chess_j w
Eigen::VectorXd hess_coef(const SideBundle& b, const Eigen::VectorXd& w, double sign) {
  Eigen::VectorXd c(b.mp.count());
  for (int j = 0; j < b.mp.count(); ++j) c[j] = sign * qform(b.chess[j], w);
  return c;
}

Eigen::MatrixXd side_hessian(const SideBundle& b, const Eigen::MatrixXd& base,
                             const Eigen::VectorXd& reduced, double sign) {
  Eigen::MatrixXd M = base;
  for (int j = 0; j < b.mp.count(); ++j) M += sign * reduced[j] * b.chess[j];
  return M;
}

// eigen-decomposition bundle for a (symmetrised) yy block
struct CurvatureEig {
  Eigen::MatrixXd pinv, proj;  // pseudo-inverse and range projector
  double max_eig = 0.0;
  bool positive = false;  // has an eigenvalue above eig_tol
  bool negdef = false;    // all eigenvalues below -eig_tol
};

CurvatureEig curvature_eig(const Eigen::MatrixXd& M, double eig_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(M));
  const auto& ev = es.eigenvalues();
  const auto& V = es.eigenvectors();
  CurvatureEig out;
  const int d = static_cast<int>(M.rows());
  out.pinv = Eigen::MatrixXd::Zero(d, d);
  out.proj = Eigen::MatrixXd::Zero(d, d);
  out.negdef = d > 0;
  out.max_eig = d > 0 ? ev[d - 1] : 0.0;
  for (int i = 0; i < d; ++i) {
    if (ev[i] > eig_tol) out.positive = true;
    if (ev[i] > -eig_tol) out.negdef = false;
    if (std::abs(ev[i]) > eig_tol) {
      out.pinv += (1.0 / ev[i]) * V.col(i) * V.col(i).transpose();
      out.proj += V.col(i) * V.col(i).transpose();
    }
  }
  return out;
}

// smallest eigenvalue of M restricted to span(B); empty basis -> nothing to test
std::optional<double> min_eig_on(const Eigen::MatrixXd& M, const Eigen::MatrixXd& B,
                                 Eigen::VectorXd* argmin = nullptr) {
  if (B.cols() == 0) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(B.transpose() * M * B));
  if (argmin) *argmin = (B * es.eigenvectors().col(0)).normalized();
  return es.eigenvalues()[0];
}

Eigen::MatrixXd basis_matrix(const std::vector<Eigen::VectorXd>& cols, int dim) {
  Eigen::MatrixXd B(dim, cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) B.col(i) = cols[i];
  return B;
}

// nonpositivity of q(s,t) = A s^2 + 2 B s t + C t^2 over s,t >= 0
bool copositive_nonpositive(double A, double B, double C, double slack) {
  if (A > slack || C > slack) return false;
  if (B <= slack) return true;
  if (A < -slack) return C - B * B / A <= slack;  // interior critical ratio
  return false;                                   // A ~ 0 with B > 0 escapes
}

CheckOutcome not_applicable(const std::string& why) {
  CheckOutcome c;
  c.verdict = Verdict::Inconclusive;
  c.mode = Mode::Proved;
  c.applicable = false;
  c.note = why;
  return c;
}

CheckOutcome vacuous(const std::string& why) {
  CheckOutcome c;
  c.verdict = Verdict::Vacuous;
  c.mode = Mode::Proved;
  c.note = why;
  return c;
}

bool counts_as_holding(const CheckOutcome& c) {
  return !c.applicable || c.verdict == Verdict::Holds || c.verdict == Verdict::Vacuous;
}

// shared smooth joint-curvature context (both multiplier sides + Hessian blocks)
struct JointContext {
  SideBundle bx, by;
  Eigen::MatrixXd f_xx, f_xy, f_yy, yx;
  cones::PolyhedralCone Cmin, Cmax;
  bool ok = false;  // both multiplier sets nonempty
};

JointContext joint_context(const kkt::MinimaxProblem& pb, const expr::Point& p,
                           const Options& opt) {
  JointContext jc;
  jc.bx = side_bundle(pb, p, kkt::Side::Min, opt);
  jc.by = side_bundle(pb, p, kkt::Side::Max, opt);
  Eigen::MatrixXd H = expr::hessian(pb.f, p);
  jc.f_xx = H.topLeftCorner(pb.n, pb.n);
  jc.f_xy = H.topRightCorner(pb.n, pb.m);
  jc.f_yy = H.bottomRightCorner(pb.m, pb.m);
  jc.yx = jc.f_xy.transpose();
  jc.Cmin = kkt::critical_cone(pb, p, kkt::Side::Min, opt.activity_tol);
  jc.Cmax = kkt::critical_cone(pb, p, kkt::Side::Max, opt.activity_tol);
  jc.ok = jc.bx.mp.nonempty && jc.by.mp.nonempty;
  return jc;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Vacuous: return "vacuous";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(Mode m) { return m == Mode::Proved ? "proved" : "sampled"; }

// ---------------------------------------------------------------------------

CheckOutcome separation_probe(const kkt::MinimaxProblem& pb, const expr::Point& p,
                              const Options& opt) {
  CheckOutcome out;
  if (expr::is_smooth_at(pb.f, p)) {
    out.verdict = Verdict::Holds;
    out.mode = Mode::Proved;
    out.note = "objective differentiable at the candidate; additivity automatic";
    return out;
  }
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> probes;
  for (int i = 0; i < pb.n; ++i) {
    for (int j = 0; j < pb.m; ++j) {
      for (double su : {1.0, -1.0}) {
        for (double sh : {1.0, -1.0}) {
          Eigen::VectorXd u = Eigen::VectorXd::Zero(pb.n);
          Eigen::VectorXd h = Eigen::VectorXd::Zero(pb.m);
          u[i] = su;
          h[j] = sh;
          probes.emplace_back(u, h);
        }
      }
    }
  }
  std::mt19937_64 rng(opt.seed ^ 0x5e9a7a7eULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < 16; ++s) {
    Eigen::VectorXd u(pb.n), h(pb.m);
    for (int i = 0; i < pb.n; ++i) u[i] = gauss(rng);
    for (int j = 0; j < pb.m; ++j) h[j] = gauss(rng);
    if (u.norm() < 1e-9 || h.norm() < 1e-9) continue;
    probes.emplace_back(u.normalized(), h.normalized());
  }
  for (const auto& [u, h] : probes) {
    double defect = expr::separation_defect(pb.f, p, u, h);
    if (std::abs(defect) > opt.tol) {
      out.verdict = Verdict::Fails;
      out.mode = Mode::Proved;
      out.witness = Witness{u, h, defect, "directional derivative additivity defect"};
      out.note = "joint directional derivative does not split across blocks";
      return out;
    }
  }
  out.verdict = Verdict::Holds;
  out.mode = Mode::Sampled;
  out.note = "additivity verified on " + std::to_string(probes.size()) + " direction pairs";
  return out;
}

// ---------------------------------------------------------------------------

CheckOutcome check_first_order_primal(const kkt::MinimaxProblem& pb, const expr::Point& p,
                                      kkt::Side side, const Options& opt) {
  const cones::ConstraintSystem& cs =
      side == kkt::Side::Min ? pb.x_constraints : pb.y_constraints;
  Eigen::VectorXd z = side == kkt::Side::Min ? p.x : p.y;
  cones::PolyhedralCone T = cones::tangent_cone(cs, z, opt.activity_tol);
  DirPool pool = cone_pool(T, opt, opt.samples);

  CheckOutcome out;
  if (pool.zero_cone) return vacuous("tangent cone is trivial");
  bool min_side = side == kkt::Side::Min;
  for (const auto& d : pool.dirs) {
    expr::DerivativeResult r = min_side ? expr::subderivative_x(pb.f, p, d)
                                        : expr::subderivative_y(pb.f, p, d);
    double bad = min_side ? -r.value : r.value;  // positive when the condition breaks
    if (bad > opt.tol) {
      out.verdict = Verdict::Fails;
      out.mode = Mode::Proved;  // the direction itself certifies the violation
      if (min_side)
        out.witness = Witness{d, Eigen::VectorXd(), r.value, "descent direction in the tangent cone"};
      else
        out.witness = Witness{Eigen::VectorXd(), d, r.value, "ascent direction in the tangent cone"};
      out.note = std::string("directional derivative ") + fmt(r.value) + " at a feasible direction";
      return out;
    }
  }
  out.verdict = Verdict::Holds;
  if (expr::is_smooth_at(pb.f, p) && pool.exhaustive) {
    out.mode = Mode::Proved;
    out.note = "linear directional derivative checked on every extreme ray";
  } else {
    out.mode = Mode::Sampled;
    out.note = "nonnegative on " + std::to_string(pool.dirs.size()) + " directions";
  }
  return out;
}

CheckOutcome check_first_order_dual(const kkt::MinimaxProblem& pb, const expr::Point& p,
                                    kkt::Side side, const Options& opt) {
  if (!expr::is_smooth_at(pb.f, p))
    return not_applicable("objective is not differentiable at the candidate");
  const cones::ConstraintSystem& cs =
      side == kkt::Side::Min ? pb.x_constraints : pb.y_constraints;
  kkt::MultiplierPolyhedron mp =
      kkt::multiplier_polyhedron(pb, p, side, opt.activity_tol, opt.tol);
  CheckOutcome out;
  if (mp.nonempty) {
    out.verdict = Verdict::Holds;
    out.mode = Mode::Proved;
    out.witness = Witness{mp.witness, Eigen::VectorXd(), 0.0, "feasible multiplier"};
    out.note = std::string(side_word(side)) + "-side stationarity system is solvable";
    return out;
  }
  if (cs.all_affine() || pb.assume_mscq || cs.empty()) {
    out.verdict = Verdict::Fails;
    out.mode = Mode::Proved;
    out.note = std::string(side_word(side)) + "-side stationarity system is infeasible";
    return out;
  }
  out.verdict = Verdict::Inconclusive;
  out.mode = Mode::Proved;
  out.note = "no multiplier found and no constraint qualification assumed";
  return out;
}

// ---------------------------------------------------------------------------

std::pair<CheckOutcome, CheckOutcome> check_second_order_max(const kkt::MinimaxProblem& pb,
                                                             const expr::Point& p,
                                                             const Options& opt) {
  if (!expr::is_smooth_at(pb.f, p)) {
    auto na = not_applicable("needs a twice differentiable objective; see the expansion-based check");
    return {na, na};
  }
  CheckOutcome nec, suf;
  SideBundle by = side_bundle(pb, p, kkt::Side::Max, opt);
  if (!by.mp.nonempty) {
    nec.note = suf.note = "max-side multiplier set is empty";
    return {nec, suf};
  }
  Eigen::MatrixXd H = expr::hessian(pb.f, p);
  Eigen::MatrixXd f_yy = H.bottomRightCorner(pb.m, pb.m);
  cones::PolyhedralCone C = kkt::critical_cone(pb, p, kkt::Side::Max, opt.activity_tol);
  DirPool pool = cone_pool(C, opt, opt.samples);

  if (pool.zero_cone) {
    nec = suf = vacuous("max-side critical cone is trivial");
    return {nec, suf};
  }

  auto eval_inf = [&](const Eigen::VectorXd& h) {
    return inf_affine(by.vs, qform(f_yy, h), hess_coef(by, h, -1.0));
  };

  // proved routes with one multiplier working for the whole cone
  bool nec_proved = false, suf_proved = false;
  std::string route;
  for (const auto& v : by.vs.vertices) {
    Eigen::MatrixXd yy = side_hessian(by, f_yy, v, -1.0);
    if (C.is_subspace() && pool.exhaustive) {
      Eigen::MatrixXd B = basis_matrix(pool.lineality, C.dim);
      if (auto lam = min_eig_on(-yy, B)) {  // -yy PSD <=> yy nonpositive on span
        double lmax = -*lam;                // largest eigenvalue of yy on the span
        if (lmax <= opt.tol) nec_proved = true;
        if (lmax <= -opt.strict_margin) suf_proved = true;
        route = "largest curvature eigenvalue " + fmt(lmax) + " on the critical subspace";
      }
    } else if (pool.exhaustive && pool.lineality.empty() && pool.rays.size() == 1) {
      double val = qform(yy, pool.rays[0]);
      if (val <= opt.tol) nec_proved = true;
      if (val <= -opt.strict_margin) suf_proved = true;
      route = "curvature " + fmt(val) + " along the single generator";
    } else if (pool.exhaustive && pool.lineality.empty() && pool.rays.size() == 2) {
      double A = qform(yy, pool.rays[0]);
      double Cc = qform(yy, pool.rays[1]);
      double B = pool.rays[0].dot(yy * pool.rays[1]);
      if (copositive_nonpositive(A, B, Cc, opt.tol)) nec_proved = true;
      if (A <= -opt.strict_margin && Cc <= -opt.strict_margin &&
          copositive_nonpositive(A, B, Cc, -opt.strict_margin))
        suf_proved = true;
      route = "two-generator copositivity test";
    }
    if (nec_proved) break;
  }

  // failure scan: a direction whose curvature stays positive for every multiplier
  for (const auto& h : pool.dirs) {
    AffineRange r = eval_inf(h);
    if (r.minus_inf) continue;
    if (r.value > opt.tol) {
      if (by.exhaustive) {
        nec.verdict = Verdict::Fails;
        nec.mode = Mode::Proved;
        nec.witness = Witness{Eigen::VectorXd(), h, r.value,
                              "critical direction with positive curvature for every multiplier"};
        nec.note = "curvature " + fmt(r.value) + " at a max-side critical direction";
        suf.verdict = Verdict::Inconclusive;
        suf.note = "necessary condition already fails";
        return {nec, suf};
      }
      nec.verdict = Verdict::Inconclusive;
      nec.note = "positive curvature sampled but the multiplier set was not fully enumerated";
      suf.verdict = Verdict::Inconclusive;
      suf.note = nec.note;
      return {nec, suf};
    }
  }

  if (nec_proved) {
    nec.verdict = Verdict::Holds;
    nec.mode = Mode::Proved;
    nec.note = route;
  } else {
    nec.verdict = Verdict::Holds;
    nec.mode = Mode::Sampled;
    nec.note = "nonpositive curvature on " + std::to_string(pool.dirs.size()) + " directions";
  }
  if (suf_proved) {
    suf.verdict = Verdict::Holds;
    suf.mode = Mode::Proved;
    suf.note = route;
  } else {
    suf.verdict = Verdict::Inconclusive;
    suf.note = "strict negativity not established";
  }
  return {nec, suf};
}

// ---------------------------------------------------------------------------

std::pair<CheckOutcome, CheckOutcome> check_schur(const kkt::MinimaxProblem& pb,
                                                  const expr::Point& p, const Options& opt) {
  if (!expr::is_smooth_at(pb.f, p)) {
    auto na = not_applicable("needs a twice differentiable objective; see the expansion-based check");
    return {na, na};
  }
  CheckOutcome nec, suf;
  JointContext jc = joint_context(pb, p, opt);
  if (!jc.ok) {
    nec.note = suf.note = "a multiplier set is empty; no Lagrangian curvature available";
    return {nec, suf};
  }

  DirPool pool = cone_pool(jc.Cmin, opt, opt.samples);
  if (pool.zero_cone) {
    nec = suf = vacuous("min-side critical cone is trivial");
    return {nec, suf};
  }

  // gate: every max-side Lagrangian curvature block must be negative definite
  std::vector<Eigen::MatrixXd> yy_inv;
  for (const auto& v : jc.by.vs.vertices) {
    Eigen::MatrixXd yy = side_hessian(jc.by, jc.f_yy, v, -1.0);
    CurvatureEig ce = curvature_eig(yy, opt.eig_tol);
    if (!ce.negdef) {
      auto na = not_applicable("yy-block not negative definite");
      na.note += " (largest eigenvalue " + fmt(ce.max_eig) + ")";
      return {na, na};
    }
    yy_inv.push_back(yy.inverse());
  }

  // Schur complements per multiplier vertex pair
  std::vector<Eigen::MatrixXd> schurs;
  for (const auto& av : jc.bx.vs.vertices) {
    Eigen::MatrixXd xx = side_hessian(jc.bx, jc.f_xx, av, +1.0);
    for (const auto& Yi : yy_inv) schurs.push_back(xx - jc.f_xy * Yi * jc.yx);
  }

  // proved verdicts from the best pair over the whole critical cone
  bool have_eig = false;
  double best_eig = -kInf;
  Eigen::VectorXd best_dir;
  for (const auto& S : schurs) {
    if (jc.Cmin.is_subspace() && pool.exhaustive) {
      Eigen::MatrixXd B = basis_matrix(pool.lineality, jc.Cmin.dim);
      Eigen::VectorXd argmin;
      if (auto lam = min_eig_on(S, B, &argmin)) {
        have_eig = true;
        if (*lam > best_eig) {
          best_eig = *lam;
          best_dir = argmin;
        }
      }
    } else if (pool.exhaustive && pool.lineality.empty() && pool.rays.size() == 1) {
      have_eig = true;
      double val = qform(S, pool.rays[0]);
      if (val > best_eig) {
        best_eig = val;
        best_dir = pool.rays[0];
      }
    }
  }

  // certified refutation: upper-bound the form over every multiplier choice
  if (jc.bx.exhaustive && jc.by.exhaustive) {
    double worst = kInf;
    Eigen::VectorXd worst_dir;
    std::vector<Eigen::VectorXd> cands = pool.dirs;
    if (best_dir.size()) push_dir(cands, best_dir);
    for (const auto& u : cands) {
      if (!cones::membership(jc.Cmin, u, opt.membership_tol)) continue;
      double xpart = vert_max(jc.bx.vs, qform(jc.f_xx, u), hess_coef(jc.bx, u, +1.0));
      double cross = kInf;  // positive term; minimised over the max-side vertices
      for (const auto& Yi : yy_inv) cross = std::min(cross, -u.dot(jc.f_xy * Yi * jc.yx * u));
      double total = xpart + cross;
      if (total < worst) {
        worst = total;
        worst_dir = u;
      }
    }
    if (worst < -opt.tol) {
      nec.verdict = Verdict::Fails;
      nec.mode = Mode::Proved;
      nec.witness = Witness{worst_dir, Eigen::VectorXd(), worst,
                            "reduced curvature is negative at this min-side critical direction"};
      nec.note = "Schur-complement value " + fmt(worst) + " on the critical cone";
      suf.verdict = Verdict::Inconclusive;
      suf.note = "necessary condition already fails";
      return {nec, suf};
    }
  }

  if (have_eig) {
    std::string route = "minimum Schur-complement eigenvalue " + fmt(best_eig) +
                        " on the critical cone";
    Witness w{Eigen::VectorXd(), Eigen::VectorXd(), best_eig,
              "extremal eigenvalue of the reduced curvature"};
    if (best_eig >= -opt.tol) {
      nec.verdict = Verdict::Holds;
      nec.mode = Mode::Proved;
      nec.note = route;
      nec.witness = w;
    } else {
      nec.verdict = Verdict::Inconclusive;
      nec.note = route + "; multiplier sets not fully enumerated";
    }
    if (best_eig >= opt.strict_margin) {
      if (jc.Cmax.unconstrained()) {
        suf.verdict = Verdict::Holds;
        suf.mode = Mode::Proved;
        suf.note = route;
        suf.witness = w;
      } else {
        suf.verdict = Verdict::Inconclusive;
        suf.note = "max-side critical cone is constrained; the closed form may overestimate";
      }
    } else {
      suf.verdict = Verdict::Inconclusive;
      suf.note = route + "; inside the strictness margin";
      suf.witness = w;
    }
    return {nec, suf};
  }

  nec.verdict = Verdict::Inconclusive;
  nec.note = "no exact eigenvalue route for this critical cone";
  suf.verdict = Verdict::Inconclusive;
  suf.note = nec.note;
  return {nec, suf};
}

// ---------------------------------------------------------------------------

std::pair<CheckOutcome, CheckOutcome> check_second_order_joint(const kkt::MinimaxProblem& pb,
                                                               const expr::Point& p,
                                                               const Options& opt) {
  if (!expr::is_smooth_at(pb.f, p)) {
    auto na = not_applicable("needs a twice differentiable objective; see the expansion-based check");
    return {na, na};
  }
  CheckOutcome nec, suf;
  JointContext jc = joint_context(pb, p, opt);
  if (!jc.ok) {
    nec.note = suf.note = "a multiplier set is empty; no Lagrangian curvature available";
    return {nec, suf};
  }

  DirPool upool = cone_pool(jc.Cmin, opt, opt.samples);
  DirPool hpool = cone_pool(jc.Cmax, opt, std::max(16, opt.samples / 8));

  if (upool.zero_cone) {
    nec = suf = vacuous("min-side critical cone is trivial");
    return {nec, suf};
  }

  const bool full_max = jc.Cmax.unconstrained();
  const bool cmax_zero = hpool.zero_cone;

  // pseudo-inverses per max-side vertex give closed-form best responses
  std::vector<CurvatureEig> eigs;
  for (const auto& v : jc.by.vs.vertices)
    eigs.push_back(curvature_eig(side_hessian(jc.by, jc.f_yy, v, -1.0), opt.eig_tol));

  // exact unconstrained supremum over h for one multiplier vertex: +inf when
  // the curvature admits ascent or the cross term escapes its range
  auto inner_sup = [&](const Eigen::VectorXd& u, std::size_t vi) -> double {
    if (eigs[vi].positive) return kInf;
    Eigen::VectorXd b = jc.yx * u;
    if ((b - eigs[vi].proj * b).norm() > opt.eig_tol * (1.0 + b.norm())) return kInf;
    return -b.dot(eigs[vi].pinv * b);
  };

  // proved routes ------------------------------------------------------------
  bool nec_proved = false, suf_proved = false;
  std::string route;
  std::optional<double> route_value;
  std::vector<Eigen::VectorXd> eig_candidates;

  const bool single_beta = jc.by.exhaustive && jc.by.vs.vertices.size() == 1;

  // (a) reduction through the exact inner supremum, exact when the max-side
  //     critical cone is the whole space and one multiplier vertex rules it
  if (full_max && single_beta && jc.Cmin.is_subspace() && upool.exhaustive) {
    if (eigs[0].positive) {
      nec_proved = suf_proved = true;
      route = "max-side curvature admits ascent; the inner supremum is unbounded";
    } else {
      Eigen::MatrixXd B = basis_matrix(upool.lineality, jc.Cmin.dim);
      // directions whose cross term leaves the curvature range escape to +inf
      Eigen::MatrixXd R = jc.yx * B - eigs[0].proj * (jc.yx * B);
      Eigen::MatrixXd B2 = B;
      if (R.norm() > opt.eig_tol * (1.0 + B.norm())) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        double thr = opt.eig_tol * std::max(1.0, sv.size() ? sv[0] : 0.0);
        int rank = 0;
        for (int i = 0; i < sv.size(); ++i)
          if (sv[i] > thr) ++rank;
        B2 = B * svd.matrixV().rightCols(B.cols() - rank);
      }
      double best = -kInf;
      bool all_escape = true;
      for (const auto& av : jc.bx.vs.vertices) {
        Eigen::MatrixXd S =
            side_hessian(jc.bx, jc.f_xx, av, +1.0) - jc.f_xy * eigs[0].pinv * jc.yx;
        Eigen::VectorXd argmin;
        if (auto lam = min_eig_on(S, B2, &argmin)) {
          all_escape = false;
          if (*lam > best) best = *lam;
          eig_candidates.push_back(argmin);
        }
      }
      if (all_escape) best = kInf;
      route_value = best;
      if (best >= -opt.tol) nec_proved = true;
      if (best >= opt.strict_margin) suf_proved = true;
      route = best == kInf
                  ? "every critical direction escapes the curvature range"
                  : "minimum reduced-curvature eigenvalue " + fmt(best) +
                        " on the critical subspace";
    }
  }

  // (b) plain min-side curvature with the max block held fixed (h = 0)
  if (!nec_proved || !suf_proved) {
    bool nb = false, sb = false;
    std::string rb;
    if (jc.Cmin.is_subspace() && upool.exhaustive) {
      Eigen::MatrixXd B = basis_matrix(upool.lineality, jc.Cmin.dim);
      for (const auto& av : jc.bx.vs.vertices) {
        Eigen::MatrixXd xx = side_hessian(jc.bx, jc.f_xx, av, +1.0);
        if (auto lam = min_eig_on(xx, B)) {
          if (*lam >= -opt.tol) nb = true;
          if (*lam >= opt.strict_margin) sb = true;
          rb = "min-side curvature eigenvalue " + fmt(*lam) + " with the max block held fixed";
        }
        if (nb) break;
      }
    } else if (upool.exhaustive && upool.lineality.empty() && !upool.rays.empty() &&
               upool.rays.size() <= 2) {
      for (const auto& av : jc.bx.vs.vertices) {
        Eigen::MatrixXd xx = side_hessian(jc.bx, jc.f_xx, av, +1.0);
        bool ok_nec = true, ok_suf = true;
        if (upool.rays.size() == 1) {
          double val = qform(xx, upool.rays[0]);
          ok_nec = val >= -opt.tol;
          ok_suf = val >= opt.strict_margin;
          rb = "min-side curvature " + fmt(val) + " along the single generator";
        } else {
          double A = qform(xx, upool.rays[0]);
          double C = qform(xx, upool.rays[1]);
          double B = upool.rays[0].dot(xx * upool.rays[1]);
          ok_nec = copositive_nonpositive(-A, -B, -C, opt.tol);
          ok_suf = A >= opt.strict_margin && C >= opt.strict_margin &&
                   copositive_nonpositive(-A, -B, -C, -opt.strict_margin);
          rb = "two-generator copositivity of the min-side curvature";
        }
        if (ok_nec) nb = true;
        if (ok_suf) sb = true;
        if (nb) break;
      }
    }
    if (nb && !nec_proved) {
      nec_proved = true;
      route = rb;
    }
    if (sb) suf_proved = true;
  }

  // refutation scan: certified upper bound per min-side direction ------------
  if (jc.bx.exhaustive && jc.by.exhaustive) {
    double worst = kInf;
    Eigen::VectorXd worst_dir;
    std::vector<Eigen::VectorXd> ucands = upool.dirs;
    for (const auto& c : eig_candidates) push_dir(ucands, c);
    for (const auto& u : ucands) {
      if (!cones::membership(jc.Cmin, u, opt.membership_tol)) continue;
      double xpart = vert_max(jc.bx.vs, qform(jc.f_xx, u), hess_coef(jc.bx, u, +1.0));
      double upper = kInf;  // over h in the whole space, min over max-side vertices
      for (std::size_t vi = 0; vi < eigs.size(); ++vi)
        upper = std::min(upper, inner_sup(u, vi));
      if (upper == kInf) continue;
      double total = xpart + upper;
      if (total < worst) {
        worst = total;
        worst_dir = u;
      }
    }
    if (worst < -opt.tol) {
      nec.verdict = Verdict::Fails;
      nec.mode = Mode::Proved;
      nec.witness = Witness{worst_dir, Eigen::VectorXd(), worst,
                            "joint curvature supremum is negative at this min-side direction"};
      nec.note = "certified upper bound " + fmt(worst) + " on the inner supremum";
      suf.verdict = Verdict::Inconclusive;
      suf.note = "necessary condition already fails";
      return {nec, suf};
    }
  }

  // sampled search: per min-side direction look for a recovering max direction
  auto direction_best = [&](const Eigen::VectorXd& u, double c0) {
    double best = c0;  // h = 0
    auto consider = [&](const Eigen::VectorXd& hdir) {
      if (hdir.norm() <= 1e-12) return;
      Eigen::VectorXd hd = hdir.normalized();
      double b = u.dot(jc.f_xy * hd);
      double a = vert_min(jc.by.vs, qform(jc.f_yy, hd), hess_coef(jc.by, hd, -1.0));
      if (a > opt.tol) {
        best = kInf;  // the worst multiplier still curves upward along h
        return;
      }
      if (std::abs(a) <= opt.tol) {
        if (b > opt.tol) best = kInf;
        return;
      }
      if (b > 0) best = std::max(best, c0 + b * b / (-a));
    };
    for (const auto& hd : hpool.dirs) consider(hd);
    for (std::size_t vi = 0; vi < eigs.size(); ++vi) {
      Eigen::VectorXd hstar = -(eigs[vi].pinv * (jc.yx * u));
      if (hstar.norm() > 1e-12 && cones::membership(jc.Cmax, hstar, opt.membership_tol))
        consider(hstar);
    }
    return best;
  };

  int pass_count = 0;
  for (const auto& u : upool.dirs) {
    double xpart = vert_max(jc.bx.vs, qform(jc.f_xx, u), hess_coef(jc.bx, u, +1.0));
    if (full_max && jc.by.exhaustive) {
      // the closed form is the exact supremum here
      double upper = kInf;
      for (std::size_t vi = 0; vi < eigs.size(); ++vi)
        upper = std::min(upper, inner_sup(u, vi));
      if (upper == kInf || xpart + upper >= -opt.tol) {
        ++pass_count;
        continue;
      }
    }
    double best = cmax_zero ? xpart : direction_best(u, xpart);
    if (best >= -opt.tol) {
      ++pass_count;
      continue;
    }
    // no recovering direction found for this u
    if (jc.bx.exhaustive && jc.by.exhaustive) {
      nec.verdict = Verdict::Fails;
      nec.mode = cmax_zero ? Mode::Proved : Mode::Sampled;
      nec.witness = Witness{u, Eigen::VectorXd(), best,
                            "no max-side direction recovers the joint curvature"};
      nec.note = cmax_zero
                     ? "joint curvature " + fmt(best) + " with a trivial max-side cone"
                     : "joint form stayed at " + fmt(best) + " over " +
                           std::to_string(hpool.dirs.size()) + " max-side directions";
      suf.verdict = Verdict::Inconclusive;
      suf.note = "necessary condition already fails";
      return {nec, suf};
    }
    nec.verdict = Verdict::Inconclusive;
    nec.note = "joint form stayed negative at a sampled direction; multiplier sets not fully enumerated";
    suf.verdict = Verdict::Inconclusive;
    suf.note = nec.note;
    return {nec, suf};
  }

  nec.verdict = Verdict::Holds;
  if (nec_proved) {
    nec.mode = Mode::Proved;
    nec.note = route;
    if (route_value && *route_value != kInf)
      nec.witness = Witness{Eigen::VectorXd(), Eigen::VectorXd(), *route_value,
                            "extremal eigenvalue of the reduced curvature"};
  } else {
    nec.mode = Mode::Sampled;
    nec.note = "joint form nonnegative at " + std::to_string(pass_count) +
               " min-side directions";
  }
  if (suf_proved) {
    suf.verdict = Verdict::Holds;
    suf.mode = Mode::Proved;
    suf.note = route_value && *route_value != kInf
                   ? "minimum reduced-curvature eigenvalue " + fmt(*route_value) +
                         " on the critical subspace"
                   : route;
    if (route_value && *route_value != kInf)
      suf.witness = Witness{Eigen::VectorXd(), Eigen::VectorXd(), *route_value,
                            "extremal eigenvalue of the reduced curvature"};
  } else {
    suf.verdict = Verdict::Inconclusive;
    suf.note = "strict positivity not established";
  }
  return {nec, suf};
}

// ---------------------------------------------------------------------------

std::pair<CheckOutcome, CheckOutcome> check_nonsmooth_necessary(const kkt::MinimaxProblem& pb,
                                                                const expr::Point& p,
                                                                const Options& opt) {
  CheckOutcome mx, jt;
  const bool smooth = expr::is_smooth_at(pb.f, p);
  const bool x_affine = pb.x_constraints.empty() || pb.x_constraints.all_affine();
  const bool y_affine = pb.y_constraints.empty() || pb.y_constraints.all_affine();

  if ((!x_affine || !y_affine) && !smooth) {
    auto na = not_applicable(
        "curvature correction for nonlinear constraints needs a differentiable objective");
    return {na, na};
  }

  cones::PolyhedralCone Tx = cones::tangent_cone(pb.x_constraints, p.x, opt.activity_tol);
  cones::PolyhedralCone Ty = cones::tangent_cone(pb.y_constraints, p.y, opt.activity_tol);
  DirPool xpool = cone_pool(Tx, opt, opt.samples);
  DirPool ypool = cone_pool(Ty, opt, opt.samples);

  SideBundle bx, by;
  bool bx_ok = true, by_ok = true;
  if (!x_affine) {
    bx = side_bundle(pb, p, kkt::Side::Min, opt);
    bx_ok = bx.mp.nonempty;
  }
  if (!y_affine) {
    by = side_bundle(pb, p, kkt::Side::Max, opt);
    by_ok = by.mp.nonempty;
  }

  // ---- max side: along critical directions the one-sided expansion must not
  //      exceed the constraint-set curvature term
  if (ypool.zero_cone) {
    mx = vacuous("max-side tangent cone is trivial");
  } else if (!by_ok) {
    mx.verdict = Verdict::Inconclusive;
    mx.note = "max-side multiplier set is empty; no curvature correction available";
  } else {
    int crit = 0;
    bool failed = false, all_exact = true;
    for (const auto& h : ypool.dirs) {
      expr::DerivativeResult d1 = expr::subderivative_y(pb.f, p, h);
      if (std::abs(d1.value) > opt.tol) continue;  // not a critical direction
      ++crit;
      expr::DerivativeResult d2 = expr::second_subderivative_y(pb.f, p, h);
      double set_term = 0.0;
      bool term_exact = true;
      if (!y_affine) {
        AffineRange ar = sup_affine(by.vs, 0.0, hess_coef(by, h, +1.0));
        if (ar.plus_inf) continue;  // the set term dominates: direction passes
        set_term = ar.value;
        term_exact = by.exhaustive;
      }
      if (!exact(d2) || !term_exact) all_exact = false;
      double total = d2.value - set_term;  // must stay <= tol
      if (total > opt.tol) {
        if (!exact(d2) || !term_exact) {
          mx.verdict = Verdict::Inconclusive;
          mx.note = "positive expansion estimated, but not by the exact path";
          failed = true;
          break;
        }
        mx.verdict = Verdict::Fails;
        mx.mode = Mode::Proved;
        mx.witness = Witness{Eigen::VectorXd(), h, total,
                             "one-sided expansion exceeds the set curvature term"};
        mx.note = "second-order expansion " + fmt(total) + " at a max-side critical direction";
        failed = true;
        break;
      }
    }
    if (!failed) {
      mx.verdict = Verdict::Holds;
      mx.mode = (pool_covers_all(ypool, pb.m) && all_exact) ? Mode::Proved : Mode::Sampled;
      mx.note = "expansion bounded at " + std::to_string(crit) + " of " +
                std::to_string(ypool.dirs.size()) + " probed directions";
    }
  }

  // ---- joint: every critical min-side direction admits a max-side direction
  //      keeping the joint expansion (with set terms) nonnegative
  if (xpool.zero_cone) {
    jt = vacuous("min-side tangent cone is trivial");
    return {mx, jt};
  }
  if (!bx_ok || !by_ok) {
    jt.verdict = Verdict::Inconclusive;
    jt.note = "a multiplier set is empty; no curvature correction available";
    return {mx, jt};
  }

  // recovery candidates: the zero direction plus critical max-side directions
  std::vector<Eigen::VectorXd> hcands;
  hcands.push_back(Eigen::VectorXd::Zero(pb.m));
  for (const auto& h : ypool.dirs) {
    expr::DerivativeResult d1 = expr::subderivative_y(pb.f, p, h);
    if (std::abs(d1.value) <= opt.tol) hcands.push_back(h);
  }

  int crit = 0;
  bool all_exact = true;
  Eigen::VectorXd w(pb.n + pb.m);
  for (const auto& u : xpool.dirs) {
    expr::DerivativeResult d1 = expr::subderivative_x(pb.f, p, u);
    if (std::abs(d1.value) > opt.tol) continue;
    ++crit;
    double xterm = 0.0;
    if (!x_affine) {
      xterm = vert_max(bx.vs, 0.0, hess_coef(bx, u, +1.0));
      if (!bx.exhaustive) all_exact = false;
    }
    double best = -kInf;
    for (const auto& h : hcands) {
      double yterm = 0.0;
      if (!y_affine && h.norm() > 1e-12) {
        yterm = vert_max(by.vs, 0.0, hess_coef(by, h, +1.0));
        if (!by.exhaustive) all_exact = false;
      }
      w.head(pb.n) = u;
      w.tail(pb.m) = h;
      expr::DerivativeResult d2 = expr::second_subderivative(pb.f, p, w);
      if (!exact(d2)) all_exact = false;
      best = std::max(best, d2.value + xterm - yterm);
      if (best >= -opt.tol) break;
    }
    if (best < -opt.tol) {
      jt.verdict = Verdict::Fails;
      jt.mode = Mode::Sampled;
      jt.witness = Witness{u, Eigen::VectorXd(), best,
                           "no max-side direction recovers the joint expansion"};
      jt.note = "joint expansion stayed at " + fmt(best) + " over " +
                std::to_string(hcands.size()) + " recovery directions";
      return {mx, jt};
    }
  }
  jt.verdict = Verdict::Holds;
  jt.mode = (pool_covers_all(xpool, pb.n) && all_exact) ? Mode::Proved : Mode::Sampled;
  jt.note = "recovery direction found at " + std::to_string(crit) + " of " +
            std::to_string(xpool.dirs.size()) + " probed directions";
  return {mx, jt};
}

// ---------------------------------------------------------------------------

CheckOutcome check_weak_sufficient(const kkt::MinimaxProblem& pb, const expr::Point& p,
                                   const Options& opt) {
  if (!expr::is_smooth_at(pb.f, p))
    return not_applicable("needs a twice differentiable objective");
  SideBundle by = side_bundle(pb, p, kkt::Side::Max, opt);
  CheckOutcome out;
  if (!by.mp.nonempty) {
    out.note = "max-side multiplier set is empty";
    return out;
  }
  Eigen::MatrixXd H = expr::hessian(pb.f, p);
  Eigen::MatrixXd f_yy = H.bottomRightCorner(pb.m, pb.m);
  cones::PolyhedralCone C = kkt::critical_cone(pb, p, kkt::Side::Max, opt.activity_tol);
  DirPool pool = cone_pool(C, opt, opt.samples);
  if (pool.zero_cone) return vacuous("max-side critical cone is trivial");

  for (const auto& h : pool.dirs) {
    AffineRange r = inf_affine(by.vs, qform(f_yy, h), hess_coef(by, h, -1.0));
    if (r.minus_inf) continue;  // some far multiplier turns the curvature negative
    if (r.value >= 0.0) {
      if (by.exhaustive) {
        out.verdict = Verdict::Fails;
        out.mode = Mode::Proved;
        out.witness = Witness{Eigen::VectorXd(), h, r.value,
                              "critical direction without strictly negative curvature"};
        out.note = "best curvature " + fmt(r.value) + " at a max-side critical direction";
        return out;
      }
      out.verdict = Verdict::Inconclusive;
      out.note = "nonnegative curvature sampled but the multiplier set was not fully enumerated";
      return out;
    }
  }
  out.verdict = Verdict::Holds;
  out.mode = pool_covers_all(pool, pb.m) ? Mode::Proved : Mode::Sampled;
  out.note = "strictly negative curvature on " + std::to_string(pool.dirs.size()) +
             " critical directions";
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, const CheckOutcome*>> CertificateReport::necessary_checks()
    const {
  return {
      {"first_order_primal_min", &first_order_primal_min},
      {"first_order_primal_max", &first_order_primal_max},
      {"first_order_dual_min", &first_order_dual_min},
      {"first_order_dual_max", &first_order_dual_max},
      {"so_necessary_max", &so_necessary_max},
      {"schur_necessary", &schur_necessary},
      {"so_necessary_joint", &so_necessary_joint},
      {"nonsmooth_necessary_max", &nonsmooth_necessary_max},
      {"nonsmooth_necessary_joint", &nonsmooth_necessary_joint},
  };
}

CertificateReport certify(const kkt::MinimaxProblem& pb, const expr::Point& candidate,
                          const Options& opt) {
  pb.validate();
  if (candidate.n() != pb.n || candidate.m() != pb.m)
    throw DimensionError("certify: candidate dimensions disagree with the problem");
  // feasibility gate (throws InfeasiblePoint with the offending constraint)
  cones::active_set(pb.x_constraints, candidate.x, opt.activity_tol);
  cones::active_set(pb.y_constraints, candidate.y, opt.activity_tol);

  CertificateReport rep;
  rep.separation = separation_probe(pb, candidate, opt);
  rep.first_order_primal_min = check_first_order_primal(pb, candidate, kkt::Side::Min, opt);
  rep.first_order_primal_max = check_first_order_primal(pb, candidate, kkt::Side::Max, opt);
  rep.first_order_dual_min = check_first_order_dual(pb, candidate, kkt::Side::Min, opt);
  rep.first_order_dual_max = check_first_order_dual(pb, candidate, kkt::Side::Max, opt);
  std::tie(rep.so_necessary_max, rep.so_sufficient_max) = check_second_order_max(pb, candidate, opt);
  std::tie(rep.schur_necessary, rep.schur_sufficient) = check_schur(pb, candidate, opt);
  std::tie(rep.so_necessary_joint, rep.so_sufficient_joint) =
      check_second_order_joint(pb, candidate, opt);
  std::tie(rep.nonsmooth_necessary_max, rep.nonsmooth_necessary_joint) =
      check_nonsmooth_necessary(pb, candidate, opt);
  rep.weak_sufficient = check_weak_sufficient(pb, candidate, opt);

  const bool constrained = !pb.x_constraints.empty() || !pb.y_constraints.empty();
  rep.assumptions.push_back(
      "objective local Lipschitz continuity near the candidate assumed, not verified");
  if (!pb.y_constraints.empty())
    rep.assumptions.push_back(
        "second-order regularity of the max-side constraint set assumed, not verified");
  if (pb.assume_mscq && constrained)
    rep.assumptions.push_back(
        "constraint qualification (metric subregularity) assumed by the problem data");
  if (rep.weak_sufficient.verdict == Verdict::Holds)
    rep.assumptions.push_back(
        "max-side curvature strictly negative on the critical cone: local minimax and calm "
        "local minimax coincide at this point");

  if (rep.separation.verdict == Verdict::Fails) {
    rep.conclusion = "INCONCLUSIVE (separation hypothesis fails)";
    return rep;
  }
  for (const auto& [name, chk] : rep.necessary_checks()) {
    if (chk->applicable && chk->verdict == Verdict::Fails) {
      rep.conclusion = "REFUTED (necessary condition fails: " + name + ")";
      return rep;
    }
  }
  bool first_order_ok =
      counts_as_holding(rep.first_order_primal_min) &&
      counts_as_holding(rep.first_order_primal_max) &&
      counts_as_holding(rep.first_order_dual_min) && counts_as_holding(rep.first_order_dual_max);
  auto sufficient_proved = [](const CheckOutcome& c) {
    return c.applicable && c.mode == Mode::Proved &&
           (c.verdict == Verdict::Holds || c.verdict == Verdict::Vacuous);
  };
  if (first_order_ok && sufficient_proved(rep.so_sufficient_max) &&
      sufficient_proved(rep.so_sufficient_joint)) {
    rep.conclusion = "CERTIFIED (sufficient conditions proved)";
    return rep;
  }
  bool all_hold = true;
  std::string first_undetermined;
  for (const auto& [name, chk] : rep.necessary_checks()) {
    if (counts_as_holding(*chk)) continue;
    all_hold = false;
    if (first_undetermined.empty())
      first_undetermined = name + (chk->note.empty() ? "" : ": " + chk->note);
  }
  if (all_hold)
    rep.conclusion = "CONSISTENT (necessary hold; sufficiency not established)";
  else
    rep.conclusion = "INCONCLUSIVE (" + first_undetermined + ")";
  return rep;
}

}  // namespace mmcert::certify
