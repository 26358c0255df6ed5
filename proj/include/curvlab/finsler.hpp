// Chart weights on the projectivized bundle, the Kobayashi tensor,
// geodesic curvature and the decomposition / membership / equivalence
// checks built on them.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "curvlab/hermitian.hpp"
#include "curvlab/jet.hpp"
#include "curvlab/tensor.hpp"

namespace curvlab {

// Scalar weight phi(z, w) on U x W_A, evaluable in every affine chart
// W_B = {Z*_B != 0} with w^a_B = Z*_a / Z*_B.
class ChartWeight {
 public:
  ChartWeight() = default;
  ChartWeight(int n, int r, int chart,
              std::function<complex(int, std::span<const complex>, std::span<const complex>)> f,
              double domain_radius = 1.2, double punctured_radius = 0.0)
      : n_(n), r_(r), chart_(chart), f_(std::move(f)), domain_radius_(domain_radius),
        punctured_radius_(punctured_radius) {}

  // Expression weight declared in one chart; other charts go through the
  // tautological transform phi_B = phi_A + log|Z*_A|^2.
  static ChartWeight from_expr(ExprPtr e, int n, int r, int declared_chart,
                               double domain_radius = 1.2, double punctured_radius = 0.0);
  static ChartWeight from_scene(const Scene& sc);

  int n() const { return n_; }
  int r() const { return r_; }
  int chart() const { return chart_; }
  double domain_radius() const { return domain_radius_; }
  double punctured_radius() const { return punctured_radius_; }

  complex eval(int chart, std::span<const complex> z, std::span<const complex> w) const;
  complex eval(std::span<const complex> z, std::span<const complex> w) const {
    return eval(chart_, z, w);
  }

  // Weights with a known fiber Hessian (the induced weights) expose it so
  // the quadrature density avoids per-node stencils. The binder runs once
  // per base point; the bound evaluator is pure and allocation-light.
  using HessAtFn = std::function<void(int chart, std::span<const complex> w, cmat& out)>;
  using HessBind = std::function<HessAtFn(std::span<const complex> z)>;
  void set_fiber_hessian(HessBind f) { hess_ = std::move(f); }
  bool has_analytic_fiber_hessian() const { return (bool)hess_; }
  HessAtFn bind_fiber_hessian(std::span<const complex> z) const { return hess_(z); }
  cmat analytic_fiber_hessian(int chart, std::span<const complex> z,
                              std::span<const complex> w) const {
    cmat out(r_, r_);
    hess_(z)(chart, w, out);
    return out;
  }

  // Fiber restriction at fixed z as a field of the w variables only.
  ScalarField fiber_field(int chart, std::vector<complex> z) const;
  // Combined field of (z, w), layout [z(n), w(r)].
  ScalarField full_field(int chart) const;

  ChartWeight shifted(double constant) const;  // phi + c

 private:
  int n_ = 1, r_ = 1, chart_ = 0;
  std::function<complex(int, std::span<const complex>, std::span<const complex>)> f_;
  HessBind hess_;
  double domain_radius_ = 1.2, punctured_radius_ = 0.0;
};

// log of the dual pairing sum H*_{ab} Z*_a conj(Z*_b) with Z*_chart = 1:
// the tautological weight induced by a Hermitian metric.
ChartWeight induced_weight(const HermitianField& h, int chart = 0);

// i ddbar phi at a point, as an (n+r) x (n+r) Hermitian coefficient matrix
// in the (dz, dw) coordinate coframe.
struct FiberForm {
  int n = 1, r = 1;
  cmat full;       // hermitized
  double defect = 0;  // Hermitian defect before symmetrization
  cmat base() const { return full.topLeftCorner(n, n); }
  cmat base_fiber() const { return full.topRightCorner(n, r); }
  cmat fiber_base() const { return full.bottomLeftCorner(r, n); }
  cmat fiber() const { return full.bottomRightCorner(r, r); }
};

FiberForm fiber_form(const ChartWeight& phi, std::span<const complex> z,
                     std::span<const complex> w, int chart = -1, double step = 0);

// Schur complement of the fiber block: c(phi)_ij = g_ij - g_ib g^{ba} g_aj.
cmat geodesic_curvature(const ChartWeight& phi, std::span<const complex> z,
                        std::span<const complex> w, int chart = -1, double step = 0);

// Reassembles the horizontal + fiber split from blocks computed at an
// independent step and returns the max-abs deviation from fiber_form.
double decomposition_residual(const ChartWeight& phi, std::span<const complex> z,
                              std::span<const complex> w, int chart = -1, double step = 0);

// Homogeneous Finsler-type form G(z, Z) on a rank-(r+1) space.
struct FinslerForm {
  int n = 1, rp1 = 2;
  std::function<complex(std::span<const complex>, std::span<const complex>)> g;

  static FinslerForm from_expr(ExprPtr e, int n, int rp1);
  // Fiber-quadratic form sum H_ab(z) Z_a conj(Z_b) of a Hermitian field.
  static FinslerForm quadratic(const HermitianField& h);
  // Quadratic form of the dual metric, in the dual fiber coordinates.
  static FinslerForm dual_quadratic(const HermitianField& h);
};

// K[a][b][i][j] = -G_ab,ij + (d_i Gff * Gff^{-1} * dbar_j Gff)[a][b] where
// Gff is the fiber Hessian of G at (z, Z); reduces to chern_curvature when
// G is fiber-quadratic.
CurvatureTensor kobayashi_tensor(const FinslerForm& g, std::span<const complex> z,
                                 std::span<const complex> Z, double fiber_step = 1e-2,
                                 double base_step = 1e-2);

struct FinslerAxiomReport {
  bool positivity_ok = true;
  std::vector<complex> positivity_witness;  // Z where G <= 0
  double homogeneity_defect = 0;            // max |G(l Z) - |l|^2 G(Z)|
  double min_fiber_hessian_eig = 0;         // over samples
  bool strongly_pseudoconvex = true;
  int samples_checked = 0;
};

FinslerAxiomReport validate_finsler(const FinslerForm& g,
                                    const std::vector<std::vector<complex>>& z_samples,
                                    const std::vector<std::vector<complex>>& Z_samples,
                                    double tol, std::uint64_t seed = 0);

struct MembershipReport {
  // "fiber-positive": fiber Hessian of the total weight positive-definite
  // on the sampled fibers; "semi-positive current": the full (n+r) form is
  // PSD at the samples.
  bool fiber_positive = true;      // membership in the smooth fiber class
  bool current_semi_positive = true;
  double min_fiber_eig = 0, min_full_eig = 0;
  int fiber_samples = 0;
  std::vector<std::string> failures;  // per-fiber evaluation failures
};

MembershipReport hx_membership(const ChartWeight& phi,
                               const std::vector<std::vector<complex>>& z_samples,
                               int fiber_resolution, double tol);

struct EquivalenceSample {
  posclass griffiths;
  posclass full_form;      // sign of the full i ddbar of the induced weight
  posclass kobayashi_dual; // expected opposite class
  bool consistent = false;
};

struct EquivalenceReport {
  std::vector<EquivalenceSample> samples;
  bool all_consistent = true;
};

// Compares (a) the Griffiths verdict of the curvature, (b) positivity of
// the full induced-weight form, (c) the Kobayashi verdict of the dual
// Finsler form, at each base sample.
EquivalenceReport positivity_equivalence_check(const HermitianField& h,
                                               const std::vector<std::vector<complex>>& samples,
                                               double tol, std::uint64_t seed = 0);

// Deterministic fiber probe points for one chart (stratified radial-angular).
std::vector<std::vector<complex>> fiber_probes(int r, int per_axis);

}  // namespace curvlab
