#include <benchmark/benchmark.h>

#include <Eigen/Core>

#include "mmcert/certify.hpp"
#include "mmcert/cones.hpp"
#include "mmcert/expr.hpp"
#include "mmcert/kkt.hpp"
#include "mmcert/oracle.hpp"

using namespace mmcert;

namespace {

kkt::MinimaxProblem quartic_problem() {
  kkt::MinimaxProblem pb;
  pb.n = 1;
  pb.m = 1;
  pb.f = expr::parse_expression("-x1^4 + 4*x1^2*y1^2 - y1^4", 1, 1);
  pb.x_constraints.block = expr::Axis::X;
  pb.x_constraints.n = 1;
  pb.x_constraints.m = 1;
  pb.y_constraints.block = expr::Axis::Y;
  pb.y_constraints.n = 1;
  pb.y_constraints.m = 1;
  return pb;
}

void bench_parse_and_expand(benchmark::State& state) {
  const std::string text = "-abs(x1)^9 + 0.6*abs(x1)^3*abs(y1)^3 - abs(y1)^5";
  expr::Point p;
  p.x = Eigen::VectorXd::Zero(1);
  p.y = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd w(2);
  w << -0.3, 0.7;
  for (auto _ : state) {
    auto e = expr::parse_expression(text, 1, 1);
    benchmark::DoNotOptimize(expr::subderivative(e, p, w).value);
    benchmark::DoNotOptimize(expr::second_subderivative(e, p, w).value);
  }
}
BENCHMARK(bench_parse_and_expand);

void bench_extreme_rays(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Eigen::MatrixXd A(dim + 1, dim);
  A.setZero();
  for (int i = 0; i < dim; ++i) A(i, i) = -1.0;     // orthant
  A.row(dim).setOnes();                             // capped by a diagonal face
  for (auto _ : state) {
    auto rs = cones::extreme_rays(cones::make_cone(A, Eigen::MatrixXd(0, dim), dim));
    benchmark::DoNotOptimize(rs.rays.size());
  }
}
BENCHMARK(bench_extreme_rays)->Arg(3)->Arg(4)->Arg(5);

void bench_lp_feasible(benchmark::State& state) {
  const int dim = 8;
  Eigen::MatrixXd A_le(2 * dim, dim);
  Eigen::VectorXd b_le(2 * dim);
  for (int i = 0; i < dim; ++i) {
    A_le.row(2 * i).setZero();
    A_le(2 * i, i) = 1.0;
    b_le[2 * i] = 1.0;
    A_le.row(2 * i + 1).setZero();
    A_le(2 * i + 1, i) = -1.0;
    b_le[2 * i + 1] = 0.5;
  }
  std::vector<cones::Bounds> bounds(dim, cones::Bounds{-2.0, 2.0});
  for (auto _ : state) {
    auto r = cones::lp_feasible(Eigen::MatrixXd(0, dim), Eigen::VectorXd(0), A_le, b_le, bounds);
    benchmark::DoNotOptimize(r.feasible);
  }
}
BENCHMARK(bench_lp_feasible);

void bench_certify(benchmark::State& state) {
  auto pb = quartic_problem();
  expr::Point p;
  p.x = Eigen::VectorXd::Zero(1);
  p.y = Eigen::VectorXd::Zero(1);
  for (auto _ : state) {
    auto rep = certify::certify(pb, p);
    benchmark::DoNotOptimize(rep.conclusion.size());
  }
}
BENCHMARK(bench_certify);

void bench_inner_max(benchmark::State& state) {
  auto pb = quartic_problem();
  Eigen::VectorXd x(1), ybar(1);
  x << 0.1;
  ybar << 0.0;
  const int mesh = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto r = oracle::inner_max(pb, x, 0.2, ybar, mesh);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(bench_inner_max)->Arg(201)->Arg(801);

}  // namespace

BENCHMARK_MAIN();
