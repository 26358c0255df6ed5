// Scene: the declarative description every analysis starts from. Holds the
// base/bundle dimensions, a Hermitian metric expression and/or a chart
// weight expression, sample points and tolerances.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curvlab/expr.hpp"
#include "curvlab/types.hpp"

namespace curvlab {

// Parameters of the rank-(r+1) model metric h^{1/(r+1)} I with base weight
// log_coeff*log|z|^2 + smooth_coeff*|z|^2 over a curve.
struct StableModelInfo {
  double log_coeff = 0.5;
  double smooth_coeff = 0.0;
};

struct Scene {
  int n = 1;
  int rank = 2;  // r + 1
  int chart = 0;
  std::optional<FieldExpr> metric;  // matrix expression in z only
  std::optional<ExprPtr> weight;    // scalar expression in (z, w)
  std::vector<std::vector<complex>> samples;
  double tol = 1e-8;          // positivity tolerance (pre-normalization)
  int resolution = 0;         // 0 = per-rank default
  double domain_radius = 1.2;
  double punctured_radius = 0.0;
  std::optional<StableModelInfo> stable;
  std::string name = "scene";
  std::string digest;  // fnv-1a hex of the defining text

  int r() const { return rank - 1; }
  void validate() const;  // dimension/variable/sample checks
};

// Builtin families: "trivial", "fubini-study" (alias "product", parameter c),
// "diagonal-exponential" (parameters c_0..c_r), "stable-model" (parameters
// c [, smooth]).
Scene builtin_scene(const std::string& name, int n, int r,
                    const std::vector<double>& params = {});

Scene load_scene(const std::string& path);
Scene parse_scene(const std::string& text, const std::string& origin = "<string>");

// Grid resolution used when the scene does not pin one.
int default_resolution(int r);

// 25 deterministic base points inside the scene domain (respecting a
// punctured radius); used when the scene file gives no samples.
std::vector<std::vector<complex>> default_samples(int n, double domain_radius,
                                                  double punctured_radius);

// Homogeneous lift of the trivial weight, sum_a abs2(Za); used by the
// homogeneity self-test.
ExprPtr trivial_homogeneous_form(int r);

}  // namespace curvlab
