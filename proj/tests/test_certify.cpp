#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

using namespace mmcert;
using certify::Verdict;

namespace {
certify::CertificateReport run(const std::string& name) {
  auto pf = testsupport::load_corpus(name);
  return certify::certify(pf.problem, pf.candidate);
}

bool holds(const certify::CheckOutcome& c) {
  return c.applicable && c.verdict == Verdict::Holds;
}
}  // namespace

TEST_CASE("cubic saddle family: certified at the two optima, refuted between them") {
  auto origin = run("cubic");
  CHECK(origin.conclusion == "CERTIFIED (sufficient conditions proved)");
  REQUIRE(origin.schur_sufficient.witness.has_value());
  CHECK(origin.schur_sufficient.witness->value == doctest::Approx(0.5).epsilon(1e-9));

  auto m12 = run("cubic_m12");
  CHECK(m12.conclusion == "CERTIFIED (sufficient conditions proved)");
  REQUIRE(m12.schur_sufficient.witness.has_value());
  CHECK(m12.schur_sufficient.witness->value == doctest::Approx(0.5).epsilon(1e-9));

  auto m14 = run("cubic_m14");
  CHECK(m14.conclusion == "REFUTED (necessary condition fails: schur_necessary)");
  CHECK(m14.schur_necessary.verdict == Verdict::Fails);
  CHECK(m14.schur_necessary.mode == certify::Mode::Proved);
  REQUIRE(m14.schur_necessary.witness.has_value());
  CHECK(m14.schur_necessary.witness->value == doctest::Approx(-0.25).epsilon(1e-9));
}

TEST_CASE("degenerate max block: joint second-order necessary condition refutes") {
  auto rep = run("ex3_1");
  CHECK(rep.conclusion == "REFUTED (necessary condition fails: so_necessary_joint)");
  CHECK(rep.so_necessary_joint.verdict == Verdict::Fails);
  CHECK(rep.so_necessary_joint.mode == certify::Mode::Proved);
  REQUIRE(rep.so_necessary_joint.witness.has_value());
  const auto& w = *rep.so_necessary_joint.witness;
  CHECK(w.value == doctest::Approx(-2.0).epsilon(1e-9));
  REQUIRE(w.u.size() == 1);
  CHECK(std::abs(w.u[0]) == doctest::Approx(1.0).epsilon(1e-9));
  // the yy block is singular, so the Schur route must decline rather than lie
  CHECK(!rep.schur_necessary.applicable);
  // first-order conditions hold: the refutation is genuinely second-order
  CHECK(holds(rep.first_order_primal_min));
  CHECK(holds(rep.first_order_primal_max));
  CHECK(holds(rep.first_order_dual_min));
  CHECK(holds(rep.first_order_dual_max));
}

TEST_CASE("quartic cross term: necessary conditions hold, sufficiency stays open") {
  auto rep = run("ex5_2");
  CHECK(rep.conclusion == "CONSISTENT (necessary hold; sufficiency not established)");
  CHECK(!rep.schur_necessary.applicable);
  CHECK(rep.schur_necessary.note.find("not negative definite") != std::string::npos);
  CHECK(holds(rep.so_necessary_max));
  CHECK(holds(rep.so_necessary_joint));
  CHECK(holds(rep.nonsmooth_necessary_max));
  CHECK(holds(rep.nonsmooth_necessary_joint));
}

TEST_CASE("boxed mixture weights: first-order theory holds at the origin") {
  auto rep = run("fair");
  CHECK(rep.conclusion == "CONSISTENT (necessary hold; sufficiency not established)");
  CHECK(holds(rep.first_order_primal_min));
  CHECK(holds(rep.first_order_primal_max));
  CHECK(holds(rep.first_order_dual_min));
  CHECK(holds(rep.first_order_dual_max));
}

TEST_CASE("odd-power scale driver: exact expansion checks carry the verdict") {
  auto rep = run("ex5_1");
  CHECK(rep.conclusion == "CONSISTENT (necessary hold; sufficiency not established)");
  CHECK(holds(rep.nonsmooth_necessary_max));
  CHECK(holds(rep.nonsmooth_necessary_joint));
  CHECK(rep.nonsmooth_necessary_max.mode == certify::Mode::Proved);
  // eigenvalue-based machinery must decline at a kink instead of guessing
  CHECK(!rep.so_necessary_max.applicable);
  CHECK(!rep.schur_necessary.applicable);
}

TEST_CASE("pure saddles certify or stay consistent") {
  auto saddle = run("quadratic_saddle");
  CHECK(saddle.conclusion == "CERTIFIED (sufficient conditions proved)");
  auto bilinear = run("xy_bilinear");
  CHECK(bilinear.conclusion == "CONSISTENT (necessary hold; sufficiency not established)");
}

TEST_CASE("exact expansion checks agree with smooth curvature on smooth problems") {
  // the cubic family is smooth, so the expansion-based route must match the
  // eigenvalue-based one on both the holding and the failing candidate
  for (const char* name : {"cubic", "cubic_m12"}) {
    auto rep = run(name);
    CHECK(holds(rep.so_necessary_max));
    CHECK(holds(rep.nonsmooth_necessary_max));
    CHECK(holds(rep.so_necessary_joint));
    CHECK(holds(rep.nonsmooth_necessary_joint));
  }
  auto m14 = run("cubic_m14");
  CHECK(m14.so_necessary_joint.verdict == Verdict::Fails);
  CHECK(m14.nonsmooth_necessary_joint.verdict == Verdict::Fails);
}

TEST_CASE("assumption ledger is always present") {
  for (const auto& name : testsupport::corpus_names()) {
    auto rep = run(name);
    REQUIRE(!rep.assumptions.empty());
    CHECK(rep.assumptions.front().find("Lipschitz") != std::string::npos);
  }
}

TEST_CASE("weak sufficiency annotates coincidence of the two notions") {
  auto rep = run("cubic");
  CHECK(holds(rep.weak_sufficient));
  bool found = false;
  for (const auto& a : rep.assumptions)
    if (a.find("coincide") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("separation failure forces an inconclusive run") {
  // f = |x + y| couples the blocks at the origin along mixed directions
  kkt::MinimaxProblem pb;
  pb.n = 1;
  pb.m = 1;
  pb.f = expr::parse_expression("abs(x1 + y1)", 1, 1);
  pb.x_constraints.block = expr::Axis::X;
  pb.x_constraints.n = 1;
  pb.x_constraints.m = 1;
  pb.y_constraints.block = expr::Axis::Y;
  pb.y_constraints.n = 1;
  pb.y_constraints.m = 1;
  pb.validate();
  expr::Point origin;
  origin.x = Eigen::VectorXd::Zero(1);
  origin.y = Eigen::VectorXd::Zero(1);
  auto rep = certify::certify(pb, origin);
  CHECK(rep.separation.verdict == Verdict::Fails);
  CHECK(rep.conclusion.rfind("INCONCLUSIVE", 0) == 0);
  CHECK(rep.conclusion.find("separation") != std::string::npos);
}

TEST_CASE("deterministic across repeated runs") {
  auto a = run("ex5_2");
  auto b = run("ex5_2");
  CHECK(a.conclusion == b.conclusion);
  auto dump = [](const certify::CertificateReport& r) {
    return mmcert::io::to_json(r).dump();
  };
  CHECK(dump(a) == dump(b));
}
