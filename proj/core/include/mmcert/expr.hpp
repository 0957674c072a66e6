#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mmcert/errors.hpp"

namespace mmcert::expr {

enum class Axis { X, Y };

// A point of the joint space R^n x R^m.
struct Point {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  int n() const { return static_cast<int>(x.size()); }
  int m() const { return static_cast<int>(y.size()); }
  int dim() const { return n() + m(); }

  // Stacked [x; y].
  Eigen::VectorXd joint() const;
  static Point from_joint(const Eigen::VectorXd& z, int n);
};

enum class NodeKind { Constant, Variable, Neg, Add, Sub, Mul, Pow, Abs };

struct ExprNode;
// Immutable, shareable expression tree. Safe to read from many threads.
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  double value = 0.0;      // Constant
  Axis axis = Axis::X;     // Variable
  int index = 0;           // Variable, 1-based within its block
  int exponent = 0;        // Pow
  Expr a;                  // first child
  Expr b;                  // second child (Add/Sub/Mul)
};

// Node constructors. They validate payloads (finite constants, index >= 1,
// exponent >= 1) and never mutate their arguments.
Expr make_constant(double v);
Expr make_variable(Axis axis, int index);
Expr make_neg(Expr a);
Expr make_add(Expr a, Expr b);
Expr make_sub(Expr a, Expr b);
Expr make_mul(Expr a, Expr b);
Expr make_pow(Expr base, int exponent);
Expr make_abs(Expr a);

// Grammar: sums of products of signed powers of atoms; atoms are decimal
// literals, x<i>, y<j>, abs(expr), and parenthesized expressions.
// Precedence: ^  >  unary -  >  *  >  binary + -.  '^' takes a positive
// integer literal only. Variable indices are checked against n and m.
Expr parse_expression(const std::string& text, int n, int m);

// Canonical text form. parse(serialize(parse(t))) == parse(t) for all valid t.
std::string serialize(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

// Largest variable index referenced per block (0 when absent).
void max_indices(const Expr& e, int& max_x, int& max_y);

// True when the expression uses only the given block's variables.
bool pure_block(const Expr& e, Axis axis);

// True for polynomials of total degree <= 1 with no abs of a non-constant.
bool is_affine(const Expr& e);

// Plain evaluation. Throws NonFiniteValue if any node value is inf/nan,
// DimensionError if a variable index exceeds the point's block size.
double evaluate(const Expr& e, const Point& p);

// Serialized abs subtrees whose argument is exactly zero at p.
std::vector<std::string> active_kinks(const Expr& e, const Point& p);
bool is_smooth_at(const Expr& e, const Point& p);

// Exact first derivatives, x block first then y block. Throws
// NonsmoothAtPoint when any abs argument vanishes at p.
Eigen::VectorXd gradient(const Expr& e, const Point& p);
Eigen::MatrixXd hessian(const Expr& e, const Point& p);

enum class Exactness { Analytic, Numeric };

struct DerivativeResult {
  double value = 0.0;
  Exactness exactness = Exactness::Analytic;
  double error_bound = 0.0;  // 0 for the analytic path
};

// One-sided directional expansion values of t |-> f(p + t w) at t -> 0+.
// Computed symbolically: the substitution turns the tree into a univariate
// polynomial once each abs resolves to a sign via its lowest-order nonzero
// coefficient, so the values are exact for this expression class (which is
// semidifferentiable, making lim = liminf).
DerivativeResult subderivative(const Expr& e, const Point& p, const Eigen::VectorXd& w);
// Coefficient of t^2/2 in the same expansion.
DerivativeResult second_subderivative(const Expr& e, const Point& p, const Eigen::VectorXd& w);

// Partial variants: the other block's displacement is zero-padded.
DerivativeResult subderivative_x(const Expr& e, const Point& p, const Eigen::VectorXd& u);
DerivativeResult subderivative_y(const Expr& e, const Point& p, const Eigen::VectorXd& h);
DerivativeResult second_subderivative_x(const Expr& e, const Point& p, const Eigen::VectorXd& u);
DerivativeResult second_subderivative_y(const Expr& e, const Point& p, const Eigen::VectorXd& h);

// |d f(p)(u,h) - d_x f(p)(u) - d_y f(p)(h)|. Zero when the joint directional
// derivative splits into its block parts (smooth points; single-block kinks).
double separation_defect(const Expr& e, const Point& p, const Eigen::VectorXd& u,
                         const Eigen::VectorXd& h);

// Richardson-extrapolated numeric fallback (independent of the exact path;
// off the main code path, used behind an explicit call). t0 is the largest
// step of the extrapolation table.
DerivativeResult subderivative_numeric(const Expr& e, const Point& p,
                                       const Eigen::VectorXd& w, double t0 = 1e-3);
DerivativeResult second_subderivative_numeric(const Expr& e, const Point& p,
                                              const Eigen::VectorXd& w, double t0 = 1e-3);

// Shortest round-trip decimal form of a double (locale independent).
std::string format_double(double v);

}  // namespace mmcert::expr
