#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "support.hpp"

using namespace mmcert;
using oracle::CalmVerdict;
using oracle::TriState;

namespace {
const double kInf = std::numeric_limits<double>::infinity();

oracle::TauProfile tau_of(const std::string& name) {
  auto pf = testsupport::load_corpus(name);
  return oracle::tau_profile(pf.problem, pf.candidate, oracle::GridSpec::defaults(),
                             pf.box ? &*pf.box : nullptr);
}

oracle::ClassificationReport classify_of(const std::string& name) {
  auto pf = testsupport::load_corpus(name);
  return oracle::classify(pf.problem, pf.candidate, oracle::GridSpec::defaults(),
                          pf.box ? &*pf.box : nullptr);
}
}  // namespace

TEST_CASE("grid spec validation") {
  auto g = oracle::GridSpec::defaults();
  CHECK_NOTHROW(g.validate());
  CHECK(g.delta_values.size() == 13);
  CHECK(g.delta_values.front() == doctest::Approx(1e-1));
  CHECK(g.delta_values.back() == doctest::Approx(1e-4));
  CHECK(g.mesh_per_axis == 201);

  auto bad = g;
  bad.mesh_per_axis = 200;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = g;
  bad.delta_values = {0.1, 0.1};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = g;
  bad.delta_values = {0.1, -0.01};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = g;
  bad.kappa_max = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("inner max on reference balls") {
  auto ex31 = testsupport::load_corpus("ex3_1");
  Eigen::VectorXd x(1), ybar(1);
  x << 0.001;
  ybar << 0.0;
  // max of -x^2 + 2x y^3 - y^6 over |y| <= 0.2 sits at y^3 = x, i.e. the
  // on-grid node y = 0.1, where the value is exactly zero
  auto r = oracle::inner_max(ex31.problem, x, 0.2, ybar, 201);
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.argmax[0] == doctest::Approx(0.1));

  auto ex52 = testsupport::load_corpus("ex5_2");
  Eigen::VectorXd x2(1);
  x2 << 0.1;
  auto r2 = oracle::inner_max(ex52.problem, x2, std::sqrt(2.0) * 0.1, ybar, 201);
  CHECK(r2.value == doctest::Approx(3e-4).epsilon(1e-7));

  // radius zero collapses to the center
  auto r0 = oracle::inner_max(ex52.problem, x2, 0.0, ybar, 201);
  CHECK(r0.value == doctest::Approx(-1e-4));
  CHECK(r0.argmax[0] == 0.0);
}

TEST_CASE("inner max: center node is always present, finer meshes never lose value") {
  auto pf = testsupport::load_corpus("ex5_2");
  Eigen::VectorXd x(1), ybar(1);
  x << 0.07;
  ybar << 0.0;
  double v0 = oracle::inner_max(pf.problem, x, 0.0, ybar, 201).value;
  for (double radius : {0.01, 0.05, 0.2}) {
    double v = oracle::inner_max(pf.problem, x, radius, ybar, 201).value;
    CHECK(v >= v0);  // the center is a node of every ball
  }
  // doubling the mesh keeps all old nodes, so the max cannot drop
  for (double radius : {0.01, 0.2}) {
    double coarse = oracle::inner_max(pf.problem, x, radius, ybar, 101).value;
    double fine = oracle::inner_max(pf.problem, x, radius, ybar, 201).value;
    CHECK(fine >= coarse);
  }
}

TEST_CASE("inner max over an infeasible ball throws") {
  io::ProblemFile pf = io::parse_problem_text(R"({
    "n": 1, "m": 1,
    "objective": "x1*y1",
    "y_constraints": [{"expr": "1 - y1", "kind": "le"}],
    "candidate": {"x": [0.0], "y": [1.0]}
  })");
  Eigen::VectorXd x(1), far(1);
  x << 0.0;
  far << 0.0;  // feasible set starts at y = 1, the ball around 0 misses it
  CHECK_THROWS_AS(oracle::inner_max(pf.problem, x, 0.5, far, 201), EmptyFeasibleBall);
}

TEST_CASE("tau profile: linear recovery on the quartic cross term") {
  auto tp = tau_of("ex5_2");
  REQUIRE(tp.rows.size() == 13);
  CHECK(tp.calm_verdict == CalmVerdict::Calm);
  for (const auto& row : tp.rows) {
    CHECK(std::isfinite(row.tau_min));
    CHECK(row.ratio <= 1.5);
  }
  CHECK(tp.fitted_exponent == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tp.rows[0].ratio == doctest::Approx(0.538173705762377).epsilon(1e-9));
}

TEST_CASE("tau profile: cube-root growth is flagged as not calm") {
  auto tp = tau_of("ex3_1");
  REQUIRE(tp.rows.size() == 13);
  CHECK(tp.calm_verdict == CalmVerdict::NotCalm);
  CHECK(tp.fitted_exponent == doctest::Approx(1.0 / 3.0).epsilon(0.15));
  CHECK(tp.fitted_exponent > 0.28);
  CHECK(tp.fitted_exponent < 0.38);
  CHECK(tp.rows.back().ratio > 64.0);  // outgrows every admissible modulus
  CHECK(tp.rows.front().ratio < tp.rows.back().ratio);
  CHECK(tp.stress_x.has_value());
}

TEST_CASE("tau profile: recovery radius vanishing relative to delta") {
  auto tp = tau_of("ex5_1");
  CHECK(tp.calm_verdict == CalmVerdict::Calm);
  CHECK(tp.rows.front().ratio < 0.14);
  CHECK(tp.rows.back().tau_min == 0.0);  // the deficit dives under value_tol

  auto fair = tau_of("fair");
  CHECK(fair.calm_verdict == CalmVerdict::Calm);
  for (const auto& row : fair.rows) CHECK(row.ratio <= 0.12);
}

TEST_CASE("tau profile: genuine refutations exhaust the radius ladder") {
  auto tp = tau_of("cubic_m14");
  REQUIRE(tp.rows.size() == 13);
  for (const auto& row : tp.rows) {
    CHECK(row.tau_min == kInf);
    CHECK(row.ratio == kInf);
  }
  CHECK(std::isnan(tp.fitted_exponent));
  CHECK(tp.calm_verdict == CalmVerdict::Undetermined);
  REQUIRE(tp.stress_x.has_value());
  CHECK((*tp.stress_x)[0] == doctest::Approx(-0.2501));
}

TEST_CASE("tau profile rejects non-maximizing candidates") {
  auto pf = testsupport::load_corpus("cubic");
  expr::Point off = pf.candidate;
  off.y[0] = 0.5;  // f(0, y) = -y^2 prefers y near 0
  CHECK_THROWS_AS(
      oracle::tau_profile(pf.problem, off, oracle::GridSpec::defaults(), &*pf.box),
      NotMaxSide);
}

TEST_CASE("csv rendering is stable") {
  oracle::TauProfile tp;
  tp.rows.push_back({0.1, 0.05, 0.5});
  tp.rows.push_back({0.01, kInf, kInf});
  tp.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  tp.calm_verdict = CalmVerdict::Undetermined;
  CHECK(oracle::tau_profile_csv(tp) ==
        "delta,tau_min,ratio\n"
        "0.1,0.05,0.5\n"
        "0.01,inf,inf\n"
        "# exponent=nan verdict=undetermined\n");
}

TEST_CASE("classification matches the corpus ground truth") {
  struct Expected {
    const char* name;
    TriState nash, local_nash, local, calm, global;
  };
  const Expected table[] = {
      {"cubic", TriState::False, TriState::False, TriState::True, TriState::True,
       TriState::True},
      {"cubic_m12", TriState::False, TriState::False, TriState::True, TriState::True,
       TriState::True},
      {"cubic_m14", TriState::False, TriState::False, TriState::False, TriState::False,
       TriState::False},
      {"ex3_1", TriState::False, TriState::False, TriState::True, TriState::False,
       TriState::True},
      {"ex5_1", TriState::Undetermined, TriState::False, TriState::True, TriState::True,
       TriState::Undetermined},
      {"ex5_2", TriState::False, TriState::False, TriState::True, TriState::True,
       TriState::True},
      {"fair", TriState::False, TriState::False, TriState::True, TriState::True,
       TriState::True},
      {"xy_bilinear", TriState::True, TriState::True, TriState::True, TriState::True,
       TriState::True},
      {"quadratic_saddle", TriState::True, TriState::True, TriState::True, TriState::True,
       TriState::True},
  };
  for (const auto& row : table) {
    CAPTURE(row.name);
    auto rep = classify_of(row.name);
    CHECK(rep.nash.value == row.nash);
    CHECK(rep.local_nash.value == row.local_nash);
    CHECK(rep.local_minimax.value == row.local);
    CHECK(rep.calm_local_minimax.value == row.calm);
    CHECK(rep.global_minimax_on_box.value == row.global);
    // every refutation carries a witness
    for (const auto* v : {&rep.nash, &rep.local_nash, &rep.local_minimax,
                          &rep.calm_local_minimax, &rep.global_minimax_on_box})
      if (v->value == TriState::False) CHECK(v->witness.has_value());
  }
}

TEST_CASE("classification of a non-maximizing candidate refutes with a witness") {
  auto pf = testsupport::load_corpus("cubic");
  expr::Point off = pf.candidate;
  off.y[0] = 0.5;
  auto rep = oracle::classify(pf.problem, off, oracle::GridSpec::defaults(), &*pf.box);
  CHECK(rep.local_minimax.value == TriState::False);
  CHECK(rep.calm_local_minimax.value == TriState::False);
  REQUIRE(rep.local_minimax.witness.has_value());
  // witness y strictly improves the inner value at xbar
  const auto& w = *rep.local_minimax.witness;
  expr::Point probe = off;
  probe.y = w.y;
  CHECK(expr::evaluate(pf.problem.f, probe) > expr::evaluate(pf.problem.f, off));
}

TEST_CASE("argmax sensitivity on the quartic cross term") {
  auto pf = testsupport::load_corpus("ex5_2");
  auto grid = oracle::GridSpec::defaults();
  auto tp = oracle::tau_profile(pf.problem, pf.candidate, grid, &*pf.box);
  auto ac = oracle::argmax_calmness(pf.problem, pf.candidate, grid, tp);
  REQUIRE(ac.rows.size() == 13);
  // the inner argmax drifts like sqrt(2) * |x| while tau stays ~ 0.54 |x|
  CHECK(ac.kappa_hat == doctest::Approx(std::sqrt(2.0)).epsilon(0.03));
  for (const auto& row : ac.rows) CHECK(row.kappa_hat <= ac.kappa_hat);
}

TEST_CASE("argmax sensitivity skips exhausted profiles") {
  auto pf = testsupport::load_corpus("cubic_m14");
  auto grid = oracle::GridSpec::defaults();
  auto tp = oracle::tau_profile(pf.problem, pf.candidate, grid, &*pf.box);
  auto ac = oracle::argmax_calmness(pf.problem, pf.candidate, grid, tp);
  CHECK(ac.rows.empty());
  CHECK(ac.kappa_hat == 0.0);
}

TEST_CASE("classification without a box leaves box verdicts undetermined") {
  auto rep = classify_of("ex5_1");
  CHECK(rep.nash.value == TriState::Undetermined);
  CHECK(rep.global_minimax_on_box.value == TriState::Undetermined);
  CHECK(rep.nash.note.find("no bounding box") != std::string::npos);
}

TEST_CASE("implication chain holds across meshes") {
  const std::string failures = testsupport::chain_suite({41, 101, 201});
  CHECK_MESSAGE(failures.empty(), failures);
}
