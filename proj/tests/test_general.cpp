// General-position coverage: non-diagonal complex metrics and base
// dimension 2, through the whole descent stack.
#include <doctest.h>

#include "curvlab/l2.hpp"

using namespace curvlab;

namespace {

cmat nondiag() {
  cmat m(2, 2);
  m << complex(2.0, 0), complex(0.6, 0.4), complex(0.6, -0.4), complex(1.5, 0);
  return m;
}

}  // namespace

TEST_CASE("non-diagonal conformal metric through the descent identities") {
  cmat m = nondiag();
  HermitianField h(1, 2, [m](std::span<const complex> z) {
    return cmat(m * std::exp(-std::norm(z[0])));
  });
  FiberGrid grid = build_grid(1, 48);
  std::vector<complex> z{complex(0.3, -0.15)};

  RoundtripReport rt = roundtrip_check(h, z, grid);
  CHECK(rt.residual <= 1e-12);
  CHECK(rt.volume_match <= 1e-12);

  DualityReport d = duality_check(h, z, grid);
  CHECK(d.rel_deviation <= 1e-6);
  CHECK(d.lambda == doctest::Approx(0.5).epsilon(1e-5));

  PushforwardReport p = det_pushforward_check(h, z, grid);
  CHECK(p.rel_deviation <= 1e-6);
  // conformal factor contributes rank * c to the det curvature
  CHECK(p.lhs(0, 0).real() == doctest::Approx(2.0).epsilon(1e-6));

  EquivalenceReport eq = positivity_equivalence_check(h, {z}, 1e-8);
  CHECK(eq.all_consistent);
  CHECK(eq.samples[0].griffiths == posclass::strictly_positive);
}

TEST_CASE("base dimension 2 through curvature, pairing and decomposition") {
  Scene sc = builtin_scene("diagonal-exponential", 2, 1, {1, 2});
  HermitianField h = HermitianField::from_scene(sc);
  std::vector<complex> z{complex(0.3, 0.1), complex(-0.2, 0.25)};

  CurvatureTensor t = chern_curvature(h, z);
  CHECK(t.base_dim() == 2);
  CHECK(t.pair_defect() <= 1e-10 * t.max_abs());

  PairingHessianReport pr = pairing_hessian_check(h, z);
  CHECK(pr.max_deviation <= 1e-5);

  ChartWeight phi = induced_weight(h);
  CHECK(decomposition_residual(phi, z, std::vector<complex>{complex(0.4, -0.6)}) <= 1e-5);

  Verdict nk = nakano_verdict(t, h.value_pd(z), 1e-8);
  CHECK(nk.cls == posclass::strictly_positive);

  DualityReport d = duality_check(h, z, build_grid(1, 48));
  CHECK(d.rel_deviation <= 1e-3);
  CHECK(d.lambda == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("flat non-diagonal metric has exactly zero curvature routes") {
  HermitianField h = HermitianField::constant(nondiag(), 1);
  std::vector<complex> z{complex(0.2, 0.1)};
  CHECK(chern_curvature(h, z).max_abs() <= 1e-12);
  DualityReport d = duality_check(h, z, build_grid(1, 32));
  CHECK(d.scale <= 1e-8);
}
