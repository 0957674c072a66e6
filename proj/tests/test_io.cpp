#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "support.hpp"

using namespace mmcert;

namespace {
std::string wrap(const std::string& body) {
  return "{\"n\":1,\"m\":1,\"objective\":\"x1*y1\",\"candidate\":{\"x\":[0],\"y\":[0]}" +
         body + "}";
}
}  // namespace

TEST_CASE("well-formed problems parse with defaults") {
  auto pf = io::parse_problem_text(wrap(""));
  CHECK(pf.problem.n == 1);
  CHECK(pf.problem.m == 1);
  CHECK(pf.problem.x_constraints.constraints.empty());
  CHECK(!pf.box.has_value());
  CHECK(!pf.options.tol.has_value());
  CHECK(!pf.problem.assume_mscq);
}

TEST_CASE("schema violations are rejected with input errors") {
  // unknown top-level field
  CHECK_THROWS_AS(io::parse_problem_text(wrap(",\"extra\":1")), ValidationError);
  // unknown option
  CHECK_THROWS_AS(io::parse_problem_text(wrap(",\"options\":{\"bogus\":1}")), ValidationError);
  // candidate length mismatch
  CHECK_THROWS_AS(io::parse_problem_text(
                      "{\"n\":2,\"m\":1,\"objective\":\"x1\",\"candidate\":{\"x\":[0],\"y\":[0]}}"),
                  ValidationError);
  // bad constraint kind
  CHECK_THROWS_AS(io::parse_problem_text(
                      wrap(",\"y_constraints\":[{\"expr\":\"y1\",\"kind\":\"lt\"}]")),
                  ValidationError);
  // malformed box
  CHECK_THROWS_AS(io::parse_problem_text(wrap(",\"box\":{\"x\":[[0,1],[0,1]],\"y\":[[0,1]]}")),
                  ValidationError);
  // non-JSON and non-object roots
  CHECK_THROWS_AS(io::parse_problem_text("not json"), ValidationError);
  CHECK_THROWS_AS(io::parse_problem_text("[1,2]"), ValidationError);
  // n or m below 1
  CHECK_THROWS_AS(io::parse_problem_text(
                      "{\"n\":0,\"m\":1,\"objective\":\"y1\",\"candidate\":{\"x\":[],\"y\":[0]}}"),
                  ValidationError);
}

TEST_CASE("infeasible candidates are rejected at load time") {
  CHECK_THROWS_AS(io::parse_problem_text(
                      wrap(",\"y_constraints\":[{\"expr\":\"1 - y1\",\"kind\":\"le\"}]")),
                  ValidationError);
  // equality constraints are enforced both ways
  CHECK_THROWS_AS(io::parse_problem_text(
                      wrap(",\"x_constraints\":[{\"expr\":\"x1 - 1\",\"kind\":\"eq\"}]")),
                  ValidationError);
  CHECK_NOTHROW(io::parse_problem_text(
      wrap(",\"x_constraints\":[{\"expr\":\"x1\",\"kind\":\"eq\"}]")));
}

TEST_CASE("missing files surface as input errors") {
  CHECK_THROWS_AS(io::load_problem("/nonexistent/path/problem.json"), ValidationError);
}

TEST_CASE("input digest is a stable content fingerprint") {
  CHECK(io::input_digest("") == "cbf29ce484222325");       // FNV-1a offset basis
  CHECK(io::input_digest("abc") == "e71fa2190541574b");
  CHECK(io::input_digest("abc") == io::input_digest("abc"));
  CHECK(io::input_digest("abc") != io::input_digest("abd"));
  // digest covers raw bytes, before parsing
  auto pf = testsupport::load_corpus("cubic");
  CHECK(io::input_digest(pf.source_text).size() == 16);
}

TEST_CASE("certificate reports round-trip through JSON") {
  auto pf = testsupport::load_corpus("cubic_m14");
  auto rep = certify::certify(pf.problem, pf.candidate);
  auto j = io::to_json(rep);
  auto back = io::certificate_from_json(nlohmann::json::parse(j.dump()));
  CHECK(io::to_json(back).dump() == j.dump());
  CHECK(back.conclusion == rep.conclusion);
  REQUIRE(back.schur_necessary.witness.has_value());
  CHECK(back.schur_necessary.witness->value ==
        doctest::Approx(rep.schur_necessary.witness->value).epsilon(1e-15));
}

TEST_CASE("classification reports round-trip through JSON") {
  auto pf = testsupport::load_corpus("cubic_m14");
  auto rep = oracle::classify(pf.problem, pf.candidate, oracle::GridSpec::defaults(),
                              &*pf.box);
  auto j = io::to_json(rep);
  auto back = io::classification_from_json(nlohmann::json::parse(j.dump()));
  CHECK(io::to_json(back).dump() == j.dump());
  CHECK(back.local_minimax.value == rep.local_minimax.value);
  REQUIRE(back.local_minimax.witness.has_value());
}

TEST_CASE("non-finite doubles survive the JSON round trip as tagged strings") {
  auto pf = testsupport::load_corpus("cubic_m14");
  auto tp = oracle::tau_profile(pf.problem, pf.candidate, oracle::GridSpec::defaults(),
                                &*pf.box);
  auto j = io::to_json(tp);
  CHECK(j["rows"][0]["tau_min"] == "inf");
  CHECK(j["fitted_exponent"] == "nan");
  auto back = io::tau_profile_from_json(nlohmann::json::parse(j.dump()));
  CHECK(io::to_json(back).dump() == j.dump());
  CHECK(back.rows[0].tau_min == std::numeric_limits<double>::infinity());
  CHECK(std::isnan(back.fitted_exponent));
}

TEST_CASE("file options land in the overrides struct") {
  auto pf = io::parse_problem_text(wrap(
      ",\"options\":{\"tol\":1e-7,\"samples\":64,\"mesh_per_axis\":41,"
      "\"delta_values\":[0.1,0.01]}"));
  REQUIRE(pf.options.tol.has_value());
  CHECK(*pf.options.tol == 1e-7);
  CHECK(*pf.options.samples == 64);
  CHECK(*pf.options.mesh_per_axis == 41);
  REQUIRE(pf.options.delta_values.has_value());
  CHECK(pf.options.delta_values->size() == 2);
}
