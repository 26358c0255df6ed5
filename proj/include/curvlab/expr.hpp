// Expression DSL for scalar and matrix fields of base coordinates z1..zn,
// affine fiber coordinates w1..wr and homogeneous fiber coordinates Z0..Zr.
//
// Conjugation enters only through abs2() and conj(); all other primitives
// are holomorphic in their arguments, which keeps Wirtinger differentiation
// well-defined per subtree.
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "curvlab/types.hpp"

namespace curvlab {

enum class varfam { base, chart, homog };  // z, w, Z

enum class exprkind { number, var, neg, add, sub, mul, div, pow, call };

enum class callfn { exp_fn, log_fn, pow_fn, abs2_fn, conj_fn, sum_fn };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  exprkind kind{};
  complex value{};      // number
  varfam fam{};         // var
  int index = 0;        // var: 1-based for z/w, 0-based for Z
  callfn fn{};          // call
  std::vector<ExprPtr> kids;
  int line = 0, col = 0;
};

// A parsed field: either a scalar tree or a matrix literal of scalar trees.
struct FieldExpr {
  ExprPtr scalar;
  int rows = 0, cols = 0;
  std::vector<ExprPtr> entries;  // row-major when matrix
  bool is_matrix() const { return !entries.empty(); }
};

FieldExpr parse_field(const std::string& source);
ExprPtr parse_scalar(const std::string& source);

std::string print_expr(const ExprPtr& e);
std::string print_field(const FieldExpr& f);

bool equal(const ExprPtr& a, const ExprPtr& b);
bool equal(const FieldExpr& a, const FieldExpr& b);

struct Bindings {
  std::span<const complex> z;  // base
  std::span<const complex> w;  // affine fiber
  std::span<const complex> Z;  // homogeneous fiber
};

complex eval_scalar(const ExprPtr& e, const Bindings& b);
cmat eval_matrix(const FieldExpr& f, const Bindings& b);

// Checks that every variable index fits the declared dimensions; negative
// limit disables the family entirely.
void check_vars(const ExprPtr& e, int n_base, int n_chart, int n_homog);
void check_vars(const FieldExpr& f, int n_base, int n_chart, int n_homog);

// First-order Wirtinger forward value: value and derivatives with respect
// to one active variable and its conjugate.
struct WDual {
  complex v{}, dz{}, dzb{};
};

// Forward-mode evaluation with (fam, index) active. Throws errkind::domain
// where the tree is not differentiable at the point (e.g. pow of a
// vanishing abs2).
WDual eval_wdual(const ExprPtr& e, const Bindings& b, varfam fam, int index);

}  // namespace curvlab
