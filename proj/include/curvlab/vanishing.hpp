// Threshold arithmetic, logarithmic-singularity order estimation and the
// integrability classification behind the vanishing-hypothesis report.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curvlab/finsler.hpp"
#include "curvlab/scene.hpp"

namespace curvlab {

// Base weight c log|z|^2 + smooth(z, zbar) over a curve.
struct SingularBaseWeight {
  double log_coeff = 0;
  ExprPtr smooth;  // optional, in z1 only
  double eval(complex z) const;

  static SingularBaseWeight from_scene(const Scene& sc);
};

// Rank of the (r+2)-th symmetric power of a rank-(r+1) space:
// binomial(2r+2, r+2). Guarded up to r = 30.
std::int64_t symmetric_rank(int r);

struct ThresholdReport {
  int r = 1;
  std::int64_t big_r = 0;       // binomial(2r+2, r+2)
  double threshold = 0;         // 2R / ((r+2)(r+3))
  bool gt_one = false;
};

ThresholdReport vanishing_threshold(int r);

struct LelongReport {
  double nu = 0;
  double fit_residual = 0;  // max deviation of the circle maxima from the fit
  bool confident = true;    // false when no logarithmic slope is detected
  std::string note;
};

// Least-squares slope of max_{|z-p| = rho} phi against log rho^2, so that
// nu(c log|z|^2) = c. Radii default to a geometric ladder 1e-2 .. 1e-5.
LelongReport lelong_estimate(const SingularBaseWeight& phi, complex point = {0, 0},
                             std::vector<double> radii = {});

enum class integrability { integrable, divergent, inconclusive };

std::string to_string(integrability c);

struct IntegrabilityReport {
  integrability cls = integrability::inconclusive;
  std::vector<double> partial_sums;  // per annulus-depth refinement
  std::vector<double> growth;
};

// Classifies the integral of e^{-t phi} over a small punctured disc by
// nested annulus quadrature with the divergence proxy.
IntegrabilityReport integrability_classify(const SingularBaseWeight& phi, double t,
                                           double outer_radius = 0.1, int base_depth = 40);

struct StableModelReport {
  double max_mixed_block = 0;       // expected ~0
  double base_block_deviation = 0;  // vs Hess(phi_base)/(r+1)
  double fiber_block_deviation = 0; // vs the Fubini-Study fiber metric
  int samples = 0;
};

// Verifies the model decomposition: base block (1/(r+1)) Hess(phi_base),
// Fubini-Study fiber block, vanishing mixed blocks.
StableModelReport stable_model_check(const Scene& sc,
                                     const std::vector<std::vector<complex>>& samples,
                                     const std::vector<std::vector<complex>>& fiber_points);

struct VanishingReport {
  int r = 1;
  ThresholdReport threshold;
  LelongReport lelong;
  bool nu_below_threshold = false;
  bool nu_below_one = false;   // the stricter comparison criterion
  double t_used = 0;           // (r+2)(r+3)/(2R)
  IntegrabilityReport integrability;
  bool curvature_positive = false;  // strict-positivity proxy at the samples
  std::string conclusion;           // "satisfied" / "not-satisfied" / "inconclusive"
  std::string statement;            // what is and is not computed
};

VanishingReport vanishing_report(const Scene& sc, int r);

}  // namespace curvlab
