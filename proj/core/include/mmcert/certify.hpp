#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmcert/kkt.hpp"

namespace mmcert::certify {

enum class Verdict { Holds, Fails, Vacuous, Inconclusive };
enum class Mode { Proved, Sampled };

const char* to_string(Verdict v);
const char* to_string(Mode m);

struct Witness {
  Eigen::VectorXd u;  // min-block direction (may be empty)
  Eigen::VectorXd h;  // max-block direction (may be empty)
  double value = 0.0;
  std::string detail;
};

struct CheckOutcome {
  Verdict verdict = Verdict::Inconclusive;
  Mode mode = Mode::Sampled;
  bool applicable = true;  // false: the check's hypotheses do not apply here
  std::optional<Witness> witness;
  std::string note;
};

struct Options {
  double tol = 1e-8;            // slack for non-strict (necessary) comparisons
  double strict_margin = 1e-6;  // required margin for strict (sufficient) claims
  double activity_tol = 1e-8;
  double membership_tol = 1e-9;
  double eig_tol = 1e-9;  // rank/range threshold for curvature eigenvalues
  int samples = 512;
  std::uint64_t seed = 0;
  int max_enum = 8;  // multiplier/ray enumeration cap
};

// Directional-derivative additivity probe: checks that joint first-order
// behaviour splits across the two blocks on a battery of direction pairs.
CheckOutcome separation_probe(const kkt::MinimaxProblem& pb, const expr::Point& p,
                              const Options& opt = {});

// d_x f >= 0 on the min-side tangent cone / d_y f <= 0 on the max side
CheckOutcome check_first_order_primal(const kkt::MinimaxProblem& pb, const expr::Point& p,
                                      kkt::Side side, const Options& opt = {});

// multiplier polyhedron nonemptiness (stationarity of the block Lagrangian)
CheckOutcome check_first_order_dual(const kkt::MinimaxProblem& pb, const expr::Point& p,
                                    kkt::Side side, const Options& opt = {});

// max-side curvature: for every critical direction h there is a multiplier
// beta with h' yy(beta) h <= 0 (necessary) resp. strictly negative (sufficient)
std::pair<CheckOutcome, CheckOutcome> check_second_order_max(const kkt::MinimaxProblem& pb,
                                                             const expr::Point& p,
                                                             const Options& opt = {});

// joint curvature through the closed-form inner supremum (Schur complement
// with a pseudo-inverse and range test); exact when the max-side critical
// cone is the whole space, still sound for refutation otherwise
std::pair<CheckOutcome, CheckOutcome> check_schur(const kkt::MinimaxProblem& pb,
                                                  const expr::Point& p, const Options& opt = {});

// joint curvature by direct search over direction pairs; per-direction the
// one-dimensional supremum over the scale of h is solved in closed form
std::pair<CheckOutcome, CheckOutcome> check_second_order_joint(const kkt::MinimaxProblem& pb,
                                                               const expr::Point& p,
                                                               const Options& opt = {});

// one-sided second-order expansion tests; exact for the expression class, so
// they also cover candidates where the Hessian does not exist.  First element:
// max-side curvature along critical h (expansion coefficient minus the
// constraint-set second-order term must be <= 0).  Second element: joint
// curvature — for each critical u some h keeps the joint expansion plus the
// set terms >= 0.
std::pair<CheckOutcome, CheckOutcome> check_nonsmooth_necessary(const kkt::MinimaxProblem& pb,
                                                                const expr::Point& p,
                                                                const Options& opt = {});

// directionwise strict negativity of the max-side Lagrangian curvature on the
// critical cone; when it holds, plain local optimality and the calm variant
// coincide at the candidate
CheckOutcome check_weak_sufficient(const kkt::MinimaxProblem& pb, const expr::Point& p,
                                   const Options& opt = {});

struct CertificateReport {
  CheckOutcome separation;
  CheckOutcome first_order_primal_min, first_order_primal_max;
  CheckOutcome first_order_dual_min, first_order_dual_max;
  CheckOutcome so_necessary_max, so_sufficient_max;
  CheckOutcome schur_necessary, schur_sufficient;
  CheckOutcome so_necessary_joint, so_sufficient_joint;
  CheckOutcome nonsmooth_necessary_max, nonsmooth_necessary_joint;
  CheckOutcome weak_sufficient;
  std::vector<std::string> assumptions;
  std::string conclusion;

  // scan order used for refutation reporting
  std::vector<std::pair<std::string, const CheckOutcome*>> necessary_checks() const;
};

CertificateReport certify(const kkt::MinimaxProblem& pb, const expr::Point& candidate,
                          const Options& opt = {});

}  // namespace mmcert::certify
