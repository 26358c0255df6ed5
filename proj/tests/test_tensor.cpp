#include <doctest.h>

#include "curvlab/tensor.hpp"

using namespace curvlab;

namespace {

cmat random_hermitian(rng& gen, int dim) {
  cmat m(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) m(a, b) = gen.cnormal();
  return hermitize(m);
}

}  // namespace

TEST_CASE("hermitian_eigen on the identity") {
  EigenResult e = hermitian_eigen(cmat::Identity(2, 2));
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hermitian_eigen sorts a diagonal spectrum ascending") {
  cmat m = cmat::Zero(2, 2);
  m(0, 0) = 3;
  m(1, 1) = -1;
  EigenResult e = hermitian_eigen(m);
  CHECK(e.values[0] == doctest::Approx(-1.0));
  CHECK(e.values[1] == doctest::Approx(3.0));
}

TEST_CASE("hermitian_eigen of [[2, i], [-i, 2]]") {
  // characteristic polynomial (2-x)^2 - 1: roots 1 and 3
  cmat m(2, 2);
  m << complex(2, 0), complex(0, 1), complex(0, -1), complex(2, 0);
  EigenResult e = hermitian_eigen(m);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-12));
  // residual and orthonormality contracts
  for (int k = 0; k < 2; ++k) {
    cvec resid = m * e.vectors.col(k) - e.values[k] * e.vectors.col(k);
    CHECK(resid.norm() <= 1e-10 * max_abs(m));
  }
  CHECK(max_abs(cmat(e.vectors.adjoint() * e.vectors - cmat::Identity(2, 2))) <= 1e-10);
}

TEST_CASE("hermitian_eigen rejects bad input") {
  cmat m(2, 2);
  m << complex(1, 0), complex(2, 0), complex(0, 0), complex(1, 0);
  CHECK_THROWS_AS(hermitian_eigen(m), error);
  cmat bad = cmat::Identity(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(hermitian_eigen(bad), error);
}

TEST_CASE("eigendecomposition reconstructs random Hermitian matrices") {
  rng gen(7);
  for (int dim = 2; dim <= 12; dim += 5) {
    cmat m = random_hermitian(gen, dim);
    EigenResult e = hermitian_eigen(m);
    cmat rebuilt = cmat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k)
      rebuilt += e.values[k] * (e.vectors.col(k) * e.vectors.col(k).adjoint());
    CHECK(max_abs(cmat(rebuilt - m)) <= 1e-9 * std::max(1.0, max_abs(m)));
  }
}

TEST_CASE("classify") {
  CHECK(classify(0.5, 0.9, 1e-8).cls == posclass::strictly_positive);
  Verdict zero = classify(0.0, 0.0, 1e-8);
  CHECK(zero.cls == posclass::semi_positive);
  CHECK(zero.note == "also semi-negative");
  CHECK(classify(-0.3, 0.7, 1e-8).cls == posclass::indefinite);
  CHECK(classify(-0.7, -0.3, 1e-8).cls == posclass::strictly_negative);
  CHECK(classify(-0.7, 0.0, 1e-8).cls == posclass::semi_negative);
  CHECK(classify(0.0, 0.7, 1e-8).cls == posclass::semi_positive);
  CHECK_THROWS_AS(classify(0.1, 0.2, 0.0), error);
  CHECK_THROWS_AS(classify(std::nan(""), 0.2, 1e-8), error);
}

TEST_CASE("classify is monotone under spectral shifts") {
  auto rank_of = [](posclass c) {
    switch (c) {
      case posclass::strictly_negative: return 0;
      case posclass::semi_negative: return 1;
      case posclass::indefinite: return 2;
      case posclass::semi_positive: return 3;
      case posclass::strictly_positive: return 4;
    }
    return 2;
  };
  rng gen(3);
  for (int trial = 0; trial < 40; ++trial) {
    double lo = gen.uniform(-1, 1), hi = lo + gen.uniform(0, 2);
    double t = gen.uniform(0, 2);
    Verdict before = classify(lo, hi, 1e-8);
    Verdict after = classify(lo + t, hi + t, 1e-8);
    CHECK(rank_of(after.cls) >= rank_of(before.cls));
  }
}

TEST_CASE("nakano_flatten") {
  SUBCASE("zero tensor") {
    CurvatureTensor t(2, 2);
    cmat m = nakano_flatten(t, cmat::Identity(2, 2));
    CHECK(max_abs(m) == 0.0);
    CHECK(m.rows() == 4);
  }
  SUBCASE("rank 1, n = 1 scalar case") {
    CurvatureTensor t(1, 1);
    t.at(0, 0, 0, 0) = complex(0.7, 0);
    cmat h = cmat::Constant(1, 1, complex(0.5, 0));
    cmat m = nakano_flatten(t, h);
    CHECK(m(0, 0).real() == doctest::Approx(0.35));
  }
  SUBCASE("product tensor with identity metric is diagonal") {
    int rank = 3, n = 2;
    CurvatureTensor t(rank, n);
    double cs[3] = {1.0, 2.0, 3.0};
    for (int a = 0; a < rank; ++a)
      for (int i = 0; i < n; ++i) t.at(a, a, i, i) = cs[a];
    cmat m = nakano_flatten(t, cmat::Identity(rank, rank));
    for (int a = 0; a < rank; ++a)
      for (int i = 0; i < n; ++i) CHECK(m(a * n + i, a * n + i).real() == doctest::Approx(cs[a]));
    CHECK(max_abs(cmat(m - cmat(m.diagonal().asDiagonal()))) == 0.0);
  }
  SUBCASE("pair-symmetric input gives an exactly Hermitian matrix") {
    rng gen(11);
    CurvatureTensor t(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            complex v = gen.cnormal();
            t.at(a, b, i, j) = v;
            t.at(b, a, j, i) = std::conj(v);
          }
    cmat h = random_hermitian(gen, 2) + 5 * cmat::Identity(2, 2);
    CHECK(hermitian_defect(nakano_flatten(t, h)) <= 1e-15);
  }
  SUBCASE("dimension mismatch") {
    CurvatureTensor t(2, 1);
    CHECK_THROWS_AS(nakano_flatten(t, cmat::Identity(3, 3)), error);
  }
}

TEST_CASE("metric trace matches the raised-index diagonal") {
  rng gen(5);
  CurvatureTensor t(2, 1);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      complex v = gen.cnormal();
      t.at(a, b, 0, 0) = v;
      t.at(b, a, 0, 0) = std::conj(v);
    }
  cmat h = random_hermitian(gen, 2) + 4 * cmat::Identity(2, 2);
  cmat tr = metric_trace(t, h);
  complex expect = (t.bundle_block(0, 0) * h.inverse()).trace();
  CHECK(std::abs(tr(0, 0) - expect) <= 1e-12);
}
