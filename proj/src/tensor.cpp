#include "curvlab/tensor.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace curvlab {

cmat CurvatureTensor::base_block(int a, int b) const {
  cmat m(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m(i, j) = at(a, b, i, j);
  return m;
}

cmat CurvatureTensor::bundle_block(int i, int j) const {
  cmat m(rank_, rank_);
  for (int a = 0; a < rank_; ++a)
    for (int b = 0; b < rank_; ++b) m(a, b) = at(a, b, i, j);
  return m;
}

double CurvatureTensor::max_abs() const {
  double s = 0;
  for (const complex& v : t_) s = std::max(s, std::abs(v));
  return s;
}

double CurvatureTensor::pair_defect() const {
  double d = 0;
  for (int a = 0; a < rank_; ++a)
    for (int b = 0; b < rank_; ++b)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
          d = std::max(d, std::abs(at(a, b, i, j) - std::conj(at(b, a, j, i))));
  return d;
}

CurvatureTensor CurvatureTensor::scaled(complex s) const {
  CurvatureTensor out = *this;
  for (complex& v : out.t_) v *= s;
  return out;
}

CurvatureTensor CurvatureTensor::transposed_bundle() const {
  CurvatureTensor out(rank_, n_);
  for (int a = 0; a < rank_; ++a)
    for (int b = 0; b < rank_; ++b)
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) out.at(a, b, i, j) = at(b, a, i, j);
  return out;
}

std::string to_string(posclass c) {
  switch (c) {
    case posclass::strictly_positive: return "strictly-positive";
    case posclass::semi_positive: return "semi-positive";
    case posclass::indefinite: return "indefinite";
    case posclass::semi_negative: return "semi-negative";
    case posclass::strictly_negative: return "strictly-negative";
  }
  return "?";
}

EigenResult hermitian_eigen(const cmat& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw error(errkind::input, "hermitian_eigen: matrix must be square, dim >= 1");
  if (!all_finite(m))
    throw error(errkind::input, "hermitian_eigen: non-finite entries");
  if (!is_hermitian(m))
    throw error(errkind::input, "hermitian_eigen: matrix not Hermitian within 1e-12");
  Eigen::SelfAdjointEigenSolver<cmat> solver(hermitize(m));
  if (solver.info() != Eigen::Success)
    throw error(errkind::numerical,
                "hermitian_eigen: no convergence after " +
                    std::to_string(30 * m.rows()) + " implicit QL iterations");
  return EigenResult{solver.eigenvalues(), solver.eigenvectors()};
}

Verdict classify(double min_value, double max_value, double tol) {
  if (!(tol > 0)) throw error(errkind::input, "classify: tol must be > 0");
  if (!std::isfinite(min_value) || !std::isfinite(max_value))
    throw error(errkind::input, "classify: empty or non-finite spectrum");
  Verdict v;
  v.extremal = min_value;
  v.max_value = max_value;
  v.tol_used = tol;
  bool min_pos = min_value > tol, min_zero = std::abs(min_value) <= tol;
  bool max_neg = max_value < -tol, max_zero = std::abs(max_value) <= tol;
  if (min_pos) {
    v.cls = posclass::strictly_positive;
  } else if (min_zero && max_zero) {
    v.cls = posclass::semi_positive;
    v.note = "also semi-negative";
  } else if (min_zero) {
    v.cls = posclass::semi_positive;
  } else if (max_neg) {
    v.cls = posclass::strictly_negative;
  } else if (max_zero) {
    v.cls = posclass::semi_negative;
  } else {
    v.cls = posclass::indefinite;
  }
  return v;
}

cmat nakano_flatten(const CurvatureTensor& t, const cmat& h) {
  const int rank = t.rank(), n = t.base_dim();
  if (h.rows() != rank || h.cols() != rank)
    throw error(errkind::input, "nakano_flatten: fiber metric dimension mismatch");
  cmat m(n * rank, n * rank);
  for (int a = 0; a < rank; ++a)
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < rank; ++b)
        for (int j = 0; j < n; ++j)
          m(a * n + i, b * n + j) = t.at(a, b, i, j) * h(a, b);
  return hermitize(m);
}

CurvatureTensor raise_first_index(const CurvatureTensor& t, const cmat& h) {
  const int rank = t.rank(), n = t.base_dim();
  cmat hinv = h.inverse();
  CurvatureTensor out(rank, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // (i,j)-block: E = T * H^{-1}, E[a][g] = sum_b T[a][b] Hinv[b][g].
      cmat e = t.bundle_block(i, j) * hinv;
      for (int a = 0; a < rank; ++a)
        for (int g = 0; g < rank; ++g) out.at(a, g, i, j) = e(a, g);
    }
  return out;
}

cmat metric_trace(const CurvatureTensor& t, const cmat& h) {
  const int n = t.base_dim();
  CurvatureTensor raised = raise_first_index(t, h);
  cmat m = cmat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < t.rank(); ++a) m(i, j) += raised.at(a, a, i, j);
  return m;
}

}  // namespace curvlab
