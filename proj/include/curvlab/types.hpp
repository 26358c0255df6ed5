// Shared scalar/matrix aliases, error taxonomy and small numeric utilities.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace curvlab {

inline constexpr const char* kVersion = "0.1.0";

using complex = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Error kinds follow the failure modes the library distinguishes at its
// public surface. CLI maps input/parse to exit 1.
enum class errkind {
  input,
  parse,
  domain,
  numerical,
  capability,
  degenerate_metric,
  measure_degeneracy,
  fiber_degeneracy,
};

class error : public std::runtime_error {
 public:
  error(errkind k, std::string msg) : std::runtime_error(std::move(msg)), kind_(k) {}
  errkind kind() const { return kind_; }

 private:
  errkind kind_;
};

class parse_error : public error {
 public:
  parse_error(int line, int col, const std::string& msg)
      : error(errkind::parse,
              std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_, col_;
};

inline bool finite(complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

inline bool all_finite(const cmat& m) {
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b)
      if (!finite(m(a, b))) return false;
  return true;
}

// Max |entry| over a matrix.
inline double max_abs(const cmat& m) {
  double s = 0;
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = 0; b < m.cols(); ++b) s = std::max(s, std::abs(m(a, b)));
  return s;
}

inline double hermitian_defect(const cmat& m) {
  return max_abs(cmat(m - m.adjoint()));
}

inline bool is_hermitian(const cmat& m, double rel_tol = 1e-12) {
  double scale = std::max(1e-300, max_abs(m));
  return hermitian_defect(m) <= rel_tol * scale;
}

// Exact entrywise symmetrization; evaluation paths use this so that
// downstream conjugation identities hold to rounding.
inline cmat hermitize(const cmat& m) { return 0.5 * (m + m.adjoint()); }

// Pairwise (recursive) summation: deterministic and better conditioned than
// a running sum. Used for all quadrature reductions.
template <class T>
T pairwise_sum(std::span<const T> v) {
  if (v.empty()) return T{};
  if (v.size() == 1) return v[0];
  if (v.size() <= 8) {
    T s = v[0];
    for (std::size_t k = 1; k < v.size(); ++k) s += v[k];
    return s;
  }
  std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

template <class T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(std::span<const T>(v));
}

// FNV-1a, used for scene digests.
inline std::uint64_t fnv1a(std::span<const unsigned char> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) {
  return fnv1a(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

// Minimal deterministic PRNG (splitmix64 core). Distribution code is an
// implementation detail of this library so that seeded runs are stable
// across standard library versions.
class rng {
 public:
  explicit rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Approximately normal via sum of uniforms; adequate for restart seeding.
  double normal() {
    double s = 0;
    for (int k = 0; k < 12; ++k) s += uniform();
    return s - 6.0;
  }

  complex cnormal() { return complex(normal(), normal()); }

  cvec unit_cvec(int dim) {
    cvec v(dim);
    double nrm = 0;
    do {
      for (int k = 0; k < dim; ++k) v[k] = cnormal();
      nrm = v.norm();
    } while (nrm < 1e-8);
    return v / nrm;
  }

 private:
  std::uint64_t state_;
};

}  // namespace curvlab
