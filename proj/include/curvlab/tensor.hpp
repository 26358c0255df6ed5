// Complex matrix / 4-index tensor arithmetic, Hermitian eigen-analysis and
// positivity classification shared by the geometry modules.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "curvlab/types.hpp"

namespace curvlab {

// Curvature-type tensor T[a][b][i][j], bundle indices a,b in [0, rank),
// base indices i,j in [0, n). Pair symmetry means
// T[a][b][i][j] == conj(T[b][a][j][i]).
class CurvatureTensor {
 public:
  CurvatureTensor() = default;
  CurvatureTensor(int rank, int n)
      : rank_(rank), n_(n), t_((std::size_t)rank * rank * n * n, complex(0, 0)) {}

  int rank() const { return rank_; }
  int base_dim() const { return n_; }

  complex& at(int a, int b, int i, int j) { return t_[idx(a, b, i, j)]; }
  complex at(int a, int b, int i, int j) const { return t_[idx(a, b, i, j)]; }

  // (a,b)-slice as an n x n matrix in the base indices.
  cmat base_block(int a, int b) const;
  // (i,j)-slice as a rank x rank matrix in the bundle indices.
  cmat bundle_block(int i, int j) const;

  double max_abs() const;
  // Max |T[a][b][i][j] - conj(T[b][a][j][i])|.
  double pair_defect() const;

  CurvatureTensor scaled(complex s) const;
  CurvatureTensor transposed_bundle() const;  // swap a,b (no conjugation)

 private:
  std::size_t idx(int a, int b, int i, int j) const {
    return (((std::size_t)a * rank_ + b) * n_ + i) * n_ + j;
  }
  int rank_ = 0, n_ = 0;
  std::vector<complex> t_;
};

enum class posclass {
  strictly_positive,
  semi_positive,
  indefinite,
  semi_negative,
  strictly_negative,
};

std::string to_string(posclass c);

struct Verdict {
  posclass cls = posclass::semi_positive;
  double extremal = 0;           // extremal value of the form, unnormalized
  double max_value = 0;          // opposite extreme
  double tol_used = 0;           // tolerance after scale normalization
  std::vector<cvec> witness;     // vector(s) achieving the extremal value
  std::string note;              // e.g. "also semi-negative", "heuristic"
  int restarts = 0;              // for heuristic searches

  bool nonneg() const {
    return cls == posclass::strictly_positive || cls == posclass::semi_positive;
  }
  bool nonpos() const {
    return cls == posclass::strictly_negative || cls == posclass::semi_negative ||
           (cls == posclass::semi_positive && note.find("also semi-negative") != std::string::npos);
  }
};

struct EigenResult {
  rvec values;   // ascending
  cmat vectors;  // columns, orthonormal
};

// Hermitian eigendecomposition. Requires a Hermitian matrix (checked to
// 1e-12 relative); eigenvalues ascending, eigenvectors orthonormal.
EigenResult hermitian_eigen(const cmat& m);

// Classification of a spectrum {min,max} against an absolute tolerance.
// The zero form classifies as semi-positive with note "also semi-negative".
Verdict classify(double min_value, double max_value, double tol);

// Flatten a pair-symmetric tensor against the fiber metric H into the
// Hermitian form M[(a,i)][(b,j)] = T[a][b][i][j] * H[a][b] on C^{n*rank}.
cmat nakano_flatten(const CurvatureTensor& t, const cmat& h);

// Endomorphism-valued version of a lowered tensor: E[g][b][i][j] =
// sum_a T[a][b'...]  -- precisely E_{ij} = (T_{ij} H^{-1})^T-free form
// E[g][a][i][j] = sum_b T[a][b][i][j] * (H^{-1})[b][g], the bundle index g
// raised with the metric. Used by duality and trace identities.
CurvatureTensor raise_first_index(const CurvatureTensor& t, const cmat& h);

// tr_H of the (i,j) bundle blocks: n x n matrix sum_a (raised T)[a][a][i][j].
cmat metric_trace(const CurvatureTensor& t, const cmat& h);

}  // namespace curvlab
