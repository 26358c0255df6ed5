// Chern curvature, connection coefficients, normal frames and positivity
// verdicts of a Hermitian metric field H(z) on a local chart.
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "curvlab/jet.hpp"
#include "curvlab/scene.hpp"
#include "curvlab/tensor.hpp"

namespace curvlab {

class HermitianField {
 public:
  HermitianField() = default;
  HermitianField(int n, int rank, MatrixField field, double domain_radius = 1.2,
                 double punctured_radius = 0.0)
      : n_(n), rank_(rank), field_(std::move(field)), domain_radius_(domain_radius),
        punctured_radius_(punctured_radius) {}

  static HermitianField from_expr(const FieldExpr& m, int n, double domain_radius = 1.2,
                                  double punctured_radius = 0.0);
  static HermitianField from_scene(const Scene& sc);
  static HermitianField constant(const cmat& m, int n);

  int n() const { return n_; }
  int rank() const { return rank_; }
  double domain_radius() const { return domain_radius_; }
  double punctured_radius() const { return punctured_radius_; }

  // Hermitized value; checks the entrywise Hermitian invariant (1e-12
  // relative) and the punctured-domain guard.
  cmat value(std::span<const complex> z) const;

  // Positive-definite value or a degenerate-metric error.
  cmat value_pd(std::span<const complex> z) const;

  // Entries (H^{-1})_{beta alpha}: the metric induced on the dual frame.
  cmat dual_value(std::span<const complex> z) const;

  HermitianField dual() const;
  HermitianField twist_with_det() const;  // H(z) * det H(z) on E tensor det E
  // Constant change of frame u'_a = sum_g S[g][a] u_g.
  HermitianField reframed(const cmat& s) const;

 private:
  int n_ = 1, rank_ = 1;
  MatrixField field_;
  double domain_radius_ = 1.2, punctured_radius_ = 0.0;
};

// Theta[a][b][i][j] = -H_ab,ij + (d_i H * H^{-1} * dbar_j H)[a][b].
CurvatureTensor chern_curvature(const HermitianField& h, std::span<const complex> z,
                                double step = 0);

struct ConnectionCoeffs {
  int rank = 1, n = 1;
  std::vector<cmat> gamma;  // gamma[i](a,b) = Gamma^a_{b i} = (d_i H * H^{-1})(a,b)
};

ConnectionCoeffs connection_coeffs(const HermitianField& h, std::span<const complex> z,
                                   double step = 0);

// Degree-1 holomorphic section s(z) = v + C (z - z0) with the covariant
// derivative vanishing at z0.
struct PolySection {
  std::vector<complex> z0;
  cvec v;   // value at z0
  cmat c;   // c(a, k) multiplies (z_k - z0_k)
  cvec eval(std::span<const complex> z) const;
};

std::vector<PolySection> normal_frame(const HermitianField& h, std::span<const complex> z0,
                                      const std::vector<cvec>& directions = {});

// Max residual of d_k s_a + Gamma^a_{b k} s_b over the frame, with the
// connection recomputed at half step.
double normal_frame_residual(const HermitianField& h, std::span<const complex> z0,
                             const std::vector<PolySection>& frame);

// Extremal of sum T[a][b][i][j] s_a conj(s_b) v_i conj(v_j) over unit s, v
// by alternating eigen-iteration; heuristic, restart count recorded.
Verdict griffiths_verdict(const CurvatureTensor& t, double tol, int restarts = 20,
                          std::uint64_t seed = 0);

// Eigen-classification of nakano_flatten(t, h); exact.
Verdict nakano_verdict(const CurvatureTensor& t, const cmat& h_at_z, double tol);

// n x n mixed Hessian of log sum H_ab u_a conj(u_b) for a holomorphic
// section given by component expressions in z.
cmat log_pairing_hessian(const HermitianField& h, const std::vector<ExprPtr>& u,
                         std::span<const complex> z, double step = 0);

struct PairingHessianReport {
  double max_deviation = 0;  // Hessian of H(s^k, s^l) vs curvature contraction
  double scale = 0;
};

PairingHessianReport pairing_hessian_check(const HermitianField& h,
                                           std::span<const complex> z0, double step = 0);

// -d_i dbar_j log det H; agrees with the metric trace of the curvature.
cmat det_curvature(const HermitianField& h, std::span<const complex> z, double step = 0);

struct DemaillySkodaReport {
  bool precondition_ok = true;   // Griffiths-positive at every sample
  std::string skip_note;
  int samples_checked = 0;
  double min_eig_normalized = 0;  // min over samples of min-eig / scale
  bool all_nakano_psd = false;
};

DemaillySkodaReport demailly_skoda_check(const HermitianField& h,
                                         const std::vector<std::vector<complex>>& samples,
                                         double tol);

}  // namespace curvlab
