#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mmcert/cones.hpp"
#include "mmcert/errors.hpp"
#include "mmcert/expr.hpp"

using namespace mmcert;
using namespace mmcert::cones;

namespace {
ConstraintSystem interval_y() {  // 0 <= y1 <= 1
  ConstraintSystem cs;
  cs.block = expr::Axis::Y;
  cs.n = 1;
  cs.m = 1;
  cs.constraints.push_back({expr::parse_expression("y1 - 1", 1, 1), ConstraintKind::LessEqual});
  cs.constraints.push_back({expr::parse_expression("-y1", 1, 1), ConstraintKind::LessEqual});
  return cs;
}

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v[0] = a;
  return v;
}
}  // namespace

TEST_CASE("active sets and tangent cones on an interval") {
  ConstraintSystem cs = interval_y();
  CHECK(active_set(cs, vec1(0.0)) == std::vector<int>{2});
  CHECK(active_set(cs, vec1(1.0)) == std::vector<int>{1});
  CHECK(active_set(cs, vec1(0.5)).empty());
  CHECK_THROWS_AS(active_set(cs, vec1(2.0)), InfeasiblePoint);

  PolyhedralCone at_zero = tangent_cone(cs, vec1(0.0));
  CHECK(membership(at_zero, vec1(1.0)));
  CHECK(!membership(at_zero, vec1(-1.0)));
  PolyhedralCone inside = tangent_cone(cs, vec1(0.5));
  CHECK(inside.unconstrained());
}

TEST_CASE("extreme rays of canonical cones") {
  // nonnegative orthant in R^2
  Eigen::MatrixXd A = -Eigen::MatrixXd::Identity(2, 2);
  RaySet rs = extreme_rays(make_cone(A, Eigen::MatrixXd(0, 2), 2));
  CHECK(rs.exhaustive);
  CHECK(rs.lineality.empty());
  REQUIRE(rs.rays.size() == 2);
  // rays are unit and axis-aligned in some order
  for (const auto& r : rs.rays) {
    CHECK(r.norm() == doctest::Approx(1.0));
    CHECK(r.minCoeff() >= -1e-12);
    CHECK(r.maxCoeff() == doctest::Approx(1.0));
  }

  // halfspace {w : w_1 <= 0}: one ray, one lineality direction
  Eigen::MatrixXd H(1, 2);
  H << 1.0, 0.0;
  RaySet hs = extreme_rays(make_cone(H, Eigen::MatrixXd(0, 2), 2));
  CHECK(hs.exhaustive);
  CHECK(hs.rays.size() == 1);
  CHECK(hs.lineality.size() == 1);
  CHECK(std::abs(hs.lineality[0][1]) == doctest::Approx(1.0));

  // subspace {w : w_1 = w_2}
  Eigen::MatrixXd E(1, 2);
  E << 1.0, -1.0;
  RaySet sp = extreme_rays(make_cone(Eigen::MatrixXd(0, 2), E, 2));
  CHECK(sp.exhaustive);
  CHECK(sp.rays.empty());
  REQUIRE(sp.lineality.size() == 1);
  CHECK(std::abs(sp.lineality[0][0] - sp.lineality[0][1]) < 1e-12);

  // {w : w <= 0, w >= 0} in R^1 is the zero cone
  Eigen::MatrixXd Z(2, 1);
  Z << 1.0, -1.0;
  CHECK(extreme_rays(make_cone(Z, Eigen::MatrixXd(0, 1), 1)).zero_cone());
}

TEST_CASE("sampled directions stay inside the cone") {
  Eigen::MatrixXd A(2, 3);
  A << -1, 0, 0, 1, -1, 2;
  PolyhedralCone k = make_cone(A, Eigen::MatrixXd(0, 3), 3);
  auto dirs = sample_cone_directions(k, 32, 7);
  CHECK(!dirs.empty());
  for (const auto& d : dirs) {
    CHECK(d.norm() == doctest::Approx(1.0));
    CHECK(membership(k, d, 1e-7));
  }
  // deterministic for a fixed seed
  auto again = sample_cone_directions(k, 32, 7);
  REQUIRE(again.size() == dirs.size());
  for (size_t i = 0; i < dirs.size(); ++i) CHECK((again[i] - dirs[i]).norm() == 0.0);
}

TEST_CASE("phase-one simplex answers tiny systems") {
  // x = 1 within [0, 2]
  Eigen::MatrixXd A_eq(1, 1);
  A_eq << 1.0;
  LpResult r = lp_feasible(A_eq, vec1(1.0), Eigen::MatrixXd(0, 1), Eigen::VectorXd(0),
                           {Bounds{0.0, 2.0}});
  CHECK(r.feasible);
  CHECK(r.point[0] == doctest::Approx(1.0));

  // x >= 1 and x <= -1 cannot hold together
  Eigen::MatrixXd A_le(2, 1);
  A_le << -1.0, 1.0;
  Eigen::VectorXd b_le(2);
  b_le << -1.0, -1.0;
  CHECK(!lp_feasible(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), A_le, b_le,
                     {Bounds{-10.0, 10.0}})
             .feasible);

  CHECK_THROWS_AS(lp_feasible(Eigen::MatrixXd(0, 40), Eigen::VectorXd(0),
                              Eigen::MatrixXd(0, 40), Eigen::VectorXd(0),
                              std::vector<Bounds>(40, Bounds{0, 1})),
                  DimensionTooLarge);
}

TEST_CASE("indicator second-order term") {
  IndicatorData whole;
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd w0(2);
  w0 << 1.0, 0.5;
  auto iv = indicator_second_sub(IndicatorCase::WholeSpace, whole, v0, w0);
  CHECK(!iv.infinite);
  CHECK(iv.value == 0.0);

  // polyhedral: finite exactly on critical directions
  IndicatorData poly;
  Eigen::MatrixXd A(1, 2);
  A << 0.0, -1.0;  // w_2 >= 0
  poly.tangent = make_cone(A, Eigen::MatrixXd(0, 2), 2);
  Eigen::VectorXd vbar(2);
  vbar << 0.0, -1.0;  // normal at the active face
  Eigen::VectorXd along(2), out(2), uncritical(2);
  along << 1.0, 0.0;       // tangent and orthogonal to vbar
  out << 0.0, -1.0;        // leaves the tangent cone
  uncritical << 0.0, 1.0;  // tangent but <vbar, w> != 0
  CHECK(!indicator_second_sub(IndicatorCase::Polyhedral, poly, vbar, along).infinite);
  CHECK(indicator_second_sub(IndicatorCase::Polyhedral, poly, vbar, along).value == 0.0);
  CHECK(indicator_second_sub(IndicatorCase::Polyhedral, poly, vbar, out).infinite);
  CHECK(indicator_second_sub(IndicatorCase::Polyhedral, poly, vbar, uncritical).infinite);

  // curved boundary: the multiplier-weighted constraint hessian appears
  IndicatorData curved;
  Eigen::MatrixXd G(1, 2);
  G << 1.0, 0.0;  // gradient of g(z) = z_1^2 + z_2^2 - 1 at (1, 0), scaled
  curved.tangent = make_cone(G, Eigen::MatrixXd(0, 2), 2);
  curved.constraint_hessians.push_back(2.0 * Eigen::MatrixXd::Identity(2, 2));
  Eigen::VectorXd lambda(1);
  lambda << 0.75;
  curved.multiplier_vertices.push_back(lambda);
  Eigen::VectorXd tang(2);
  tang << 0.0, 1.0;
  Eigen::VectorXd normal(2);
  normal << 1.0, 0.0;
  auto val = indicator_second_sub(IndicatorCase::NonlinearPolyhedral, curved, normal, tang);
  CHECK(!val.infinite);
  CHECK(val.value == doctest::Approx(0.75 * 2.0));
}
