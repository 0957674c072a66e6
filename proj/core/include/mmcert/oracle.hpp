#pragma once

#include <Eigen/Core>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mmcert/expr.hpp"
#include "mmcert/kkt.hpp"

namespace mmcert::oracle {

// Grid controls shared by every brute-force routine. delta_values must be
// positive and strictly decreasing; mesh_per_axis must be odd so the center
// of a ball is always a node.
struct GridSpec {
  std::vector<double> delta_values;
  int mesh_per_axis = 201;
  double kappa_max = 64.0;
  double value_tol = 1e-12;

  // 13 radii, geometric from 1e-1 down to 1e-4.
  static GridSpec defaults();
  void validate() const;
};

// Axis-aligned bounding box. Required for the global verdicts; also caps the
// radius ladder when a recovery radius beyond kappa_max * delta is needed.
struct Box {
  Eigen::VectorXd x_lo, x_hi;
  Eigen::VectorXd y_lo, y_hi;
};

struct InnerMaxResult {
  double value = 0.0;
  Eigen::VectorXd argmax;
};

// Max of f(x, .) over the mesh of the feasible ball of the given radius
// around ybar. Infeasible nodes are skipped; ties go to the
// lexicographically smallest grid index; radius == 0 evaluates the center
// only. Throws EmptyFeasibleBall when no mesh node is feasible.
InnerMaxResult inner_max(const kkt::MinimaxProblem& prob, const Eigen::VectorXd& x,
                         double radius, const Eigen::VectorXd& ybar,
                         int mesh_per_axis);

enum class CalmVerdict { Calm, NotCalm, Undetermined };
const char* to_string(CalmVerdict v);

struct TauRow {
  double delta = 0.0;
  double tau_min = 0.0;  // +inf when no scanned radius recovers the value
  double ratio = 0.0;    // tau_min / delta
};

struct TauProfile {
  std::vector<TauRow> rows;  // one per delta, largest delta first
  // Least-squares slope of log(tau_min) against log(delta) over the rows
  // with 0 < tau_min < +inf; NaN when fewer than two such rows exist.
  double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  CalmVerdict calm_verdict = CalmVerdict::Undetermined;
  // Min-side mesh point that resisted the largest scanned radius, kept as
  // refutation evidence when the profile rules out calmness or locality.
  std::optional<Eigen::VectorXd> stress_x;
  std::string note;
};

// Smallest recovery radius per delta: tau_min(delta) is the first rung r of
// a radius ladder such that every feasible mesh x with |x - xbar| <= delta
// keeps max f(x, .) over the feasible r-ball around ybar above
// f(xbar, ybar) - value_tol. The ladder is {0} followed by a geometric run
// (ratio 2^(1/4)) from the y-mesh cell size up to kappa_max * delta,
// extended to the y-box cover radius when a box is declared. Throws
// NotMaxSide when ybar fails to maximize f(xbar, .) on the finest ball.
TauProfile tau_profile(const kkt::MinimaxProblem& prob, const expr::Point& p,
                       const GridSpec& grid, const Box* box = nullptr);

// "delta,tau_min,ratio" header, one row per delta, then a trailing
// "# exponent=<v> verdict=<calm|not_calm|undetermined>" line.
std::string tau_profile_csv(const TauProfile& tp);

enum class TriState { True, False, Undetermined };
const char* to_string(TriState v);

struct VerdictEvidence {
  TriState value = TriState::Undetermined;
  std::optional<expr::Point> witness;  // violating grid point, when false
  std::string note;
};

struct ClassificationReport {
  VerdictEvidence nash;                   // two-sided sandwich on the box mesh
  VerdictEvidence local_nash;             // two-sided sandwich on the finest ball
  VerdictEvidence local_minimax;          // every tau_min finite
  VerdictEvidence calm_local_minimax;     // tau profile with bounded ratios
  VerdictEvidence global_minimax_on_box;  // inner-max comparison over the box
  int mesh_per_axis = 0;
  double finest_delta = 0.0;
};

// Grid classification of the candidate. All verdicts are
// resolution-qualified: "true" records that no violation was found on the
// scanned meshes, "false" always carries a witness. Enforces
// nash => local_nash => calm => local on the computed verdicts and throws
// InternalInconsistency when they break the chain.
ClassificationReport classify(const kkt::MinimaxProblem& prob, const expr::Point& p,
                              const GridSpec& grid, const Box* box = nullptr);

struct ArgmaxCalmnessRow {
  double delta = 0.0;
  double radius = 0.0;     // tau_min(delta)
  double kappa_hat = 0.0;  // worst dist(ybar, nearest maximizer) / |x - xbar|
};

// Sensitivity of the inner argmax set, one row per finite-radius delta: how
// far the maximizer of f(x, .) over the tau_min(delta)-ball can sit from
// ybar relative to the outer displacement. A calm value function does not
// bound this quantity, so it is reported separately from the tau profile.
struct ArgmaxCalmness {
  std::vector<ArgmaxCalmnessRow> rows;
  double kappa_hat = 0.0;  // max over rows
};

ArgmaxCalmness argmax_calmness(const kkt::MinimaxProblem& prob, const expr::Point& p,
                               const GridSpec& grid, const TauProfile& tp);

}  // namespace mmcert::oracle
