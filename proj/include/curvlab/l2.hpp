// Section correspondence, the fiber-integral metric, and the descent
// identities tying it back to the inducing metric: round-trip
// proportionality, the fiberwise complex Monge-Ampere residual, curvature
// duality, and the determinant pushforward.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "curvlab/hermitian.hpp"
#include "curvlab/quadrature.hpp"

namespace curvlab {

// Section of the tautological line: coefficients (s_0..s_r) evaluate in
// chart A as xi_A(w) = s_A + sum_{a != A} s_a w^a_A.
struct SectionXi {
  cvec s;
  complex xi(int chart, std::span<const complex> w) const;
};

// xi of the basis section e_a in a chart.
complex basis_xi(int a, int chart, std::span<const complex> w);

struct L2Matrix {
  cmat m;
  bool positive_definite = true;
  bool divergence_flagged = false;
  double refinement_growth = 0;  // relative change on one resolution doubling
};

// H_ab = integral of xi_a conj(xi_b) e^{-phi} against the fiber measure.
// When check_tail is set the integral is recomputed at doubled resolution
// and flagged when it grows by more than 10%.
L2Matrix l2_metric(const ChartWeight& phi, std::span<const complex> z, const FiberGrid& grid,
                   const QuadOpts& opts = {}, bool check_tail = false);

// Matrix-valued field z -> l2_metric(phi, z); memoized per point.
MatrixField l2_metric_field(const ChartWeight& phi, const FiberGrid& grid,
                            const QuadOpts& opts = {});

struct RoundtripReport {
  double lambda = 0;          // best-fit L2 = lambda * H
  double residual = 0;        // relative Frobenius residual of the fit
  double fiber_volume = 0;    // independent quadrature of the measure mass
  int moment_factor = 1;      // rank: lambda * rank should equal the volume
  double volume_match = 0;    // |lambda * rank - volume| / volume
};

RoundtripReport roundtrip_check(const HermitianField& h, std::span<const complex> z,
                                const FiberGrid& grid, const QuadOpts& opts = {});

// Pointwise fiber Monge-Ampere check: det(ddbar_w phi) versus
// C e^{-(r+1) phi} / det H at probe nodes. Residual is relative to the
// larger side; ke_fit picks the least-squares C.
double ke_residual(const ChartWeight& phi, const std::function<complex(std::span<const complex>)>& det_h,
                   std::span<const complex> z, double c,
                   const std::vector<std::vector<complex>>& probes_per_chart);

struct KeFit {
  double c_fit = 0;
  double residual = 0;
};

KeFit ke_fit(const ChartWeight& phi, const std::function<complex(std::span<const complex>)>& det_h,
             std::span<const complex> z, const std::vector<std::vector<complex>>& probes);

struct NormalizationReport {
  double c_mean = 0;
  double coefficient_of_variation = 0;
  double paper_value = 0;  // ((r+1)!)^-r, the reference this is compared to
  double ratio = 0;        // c_mean / paper_value: the convention factor
  int base_points = 0;
};

NormalizationReport normalization_constant_estimate(int r, int probe_resolution = 8);

struct DualityReport {
  double lambda = 0;         // best fit between the two curvature routes
  double rel_deviation = 0;  // max |T1 - lambda T2| / max |T1|
  double scale = 0;
};

// Compares the curvature of the quadrature-built metric field with the
// bundle-transposed Kobayashi tensor of the dual quadratic form, in an
// orthonormal frame at z.
DualityReport duality_check(const HermitianField& h, std::span<const complex> z,
                            const FiberGrid& grid, const QuadOpts& opts = {},
                            double l2_curvature_step = 5e-4);

struct PushforwardReport {
  cmat lhs;                  // det-curvature of the fiber-integral metric
  cmat rhs;                  // (r+1) * integral of the geodesic curvature
  double rel_deviation = 0;
  int convention_factor = 1; // r+1 under the unit-mass measure
};

PushforwardReport det_pushforward_check(const HermitianField& h, std::span<const complex> z,
                                        const FiberGrid& grid, const QuadOpts& opts = {},
                                        double l2_curvature_step = 5e-4);

}  // namespace curvlab
