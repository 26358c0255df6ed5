// Numerical Wirtinger derivatives of scalar and matrix fields.
//
// First derivatives use the central stencil
//   df/dz = ((f(z+h)-f(z-h)) - i(f(z+ih)-f(z-ih)))/(4h)
// and the conjugate combination for df/dzbar. Mixed seconds d^2/dz_i dzbar_j
// compose stencils for i != j and use the 5-point Laplacian for i == j.
// Every jet is the Richardson extrapolation of the (h, h/2) pair and carries
// est_error = max |result(h) - result(h/2)| over the derivative components.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "curvlab/expr.hpp"
#include "curvlab/types.hpp"

namespace curvlab {

using ScalarField = std::function<complex(std::span<const complex>)>;
using MatrixField = std::function<cmat(std::span<const complex>)>;

// Flat variable layout [z1..zn, w1..wr, Z0..Zr] used to bind expressions.
struct VarLayout {
  int nz = 0, nw = 0, nZ = 0;
  int total() const { return nz + nw + nZ; }
  Bindings bind(std::span<const complex> p) const {
    return Bindings{p.subspan(0, nz), p.subspan(nz, nw), p.subspan(nz + nw, nZ)};
  }
  // Maps a flat slot to the (family, index) naming of the DSL.
  std::pair<varfam, int> var_of(int slot) const;
};

ScalarField make_field(ExprPtr e, VarLayout lay);

struct Jet2 {
  complex value{};
  std::vector<complex> d, dbar;        // per requested direction
  std::vector<std::vector<complex>> dd;  // dd[i][j] = d^2 f / dxi_i dxibar_j
  double est_error = 0;

  cmat dd_matrix() const;
};

struct MatrixJet2 {
  cmat value;
  std::vector<cmat> d, dbar;
  std::vector<std::vector<cmat>> dd;
  double est_error = 0;
};

double default_step(std::span<const complex> point);

Jet2 jet2(const ScalarField& f, std::span<const complex> point, std::span<const int> dirs,
          double h = 0);

MatrixJet2 matrix_jet2(const MatrixField& f, std::span<const complex> point,
                       std::span<const int> dirs, double h = 0);

struct JetCheckReport {
  double est_error = 0;
  double fd_disagreement = 0;  // max |jet(h) - jet(h/2)| over components
  double ad_disagreement = 0;  // first derivatives vs dual-number forward mode
  bool ad_used = false;
  bool flagged = false;        // disagreement > 50 x est_error
};

// Gradient self-check of an expression field at a point.
JetCheckReport jet_check(const ExprPtr& e, VarLayout lay, std::span<const complex> point,
                         std::span<const int> dirs, double h = 0);

}  // namespace curvlab
