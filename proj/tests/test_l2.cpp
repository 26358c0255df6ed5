#include <doctest.h>

#include "curvlab/l2.hpp"
#include "oracles.hpp"

using namespace curvlab;

namespace {

std::vector<complex> pt(double re, double im = 0) { return {complex(re, im)}; }

}  // namespace

TEST_CASE("section correspondence in charts") {
  std::vector<complex> w{complex(0.4, -0.7)};
  CHECK(basis_xi(0, 0, w) == complex(1, 0));
  CHECK(basis_xi(1, 0, w) == w[0]);
  CHECK(basis_xi(1, 1, w) == complex(1, 0));
  SectionXi s{cvec(2)};
  s.s << complex(2, 0), complex(0, 1);
  CHECK(std::abs(s.xi(0, w) - (complex(2, 0) + complex(0, 1) * w[0])) <= 1e-15);
}

TEST_CASE("|xi|^2 e^{-phi} glues across charts for random sections") {
  Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
  ChartWeight phi = ChartWeight::from_scene(sc);
  rng gen(5);
  int checked = 0;
  for (int trial = 0; trial < 120 && checked < 100; ++trial) {
    SectionXi s{cvec(2)};
    s.s << gen.cnormal(), gen.cnormal();
    std::vector<complex> z = pt(gen.uniform(-0.4, 0.4), gen.uniform(-0.4, 0.4));
    complex w0(gen.uniform(-1.5, 1.5), gen.uniform(-1.5, 1.5));
    if (std::abs(w0) < 0.05) continue;
    std::vector<complex> wa{w0}, wb{complex(1, 0) / w0};
    double va = std::norm(s.xi(0, wa)) * std::exp(-phi.eval(0, z, wa).real());
    double vb = std::norm(s.xi(1, wb)) * std::exp(-phi.eval(1, z, wb).real());
    CHECK(std::abs(va - vb) <= 1e-10 * std::max(va, 1e-300));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("cross-chart gluing at fiber dimension 2") {
  Scene sc = builtin_scene("trivial", 1, 2);
  ChartWeight phi = ChartWeight::from_scene(sc);  // expression weight
  rng gen(8);
  for (int trial = 0; trial < 25; ++trial) {
    SectionXi s{cvec(3)};
    s.s << gen.cnormal(), gen.cnormal(), gen.cnormal();
    std::vector<complex> z = pt(gen.uniform(-0.3, 0.3));
    complex w1(gen.uniform(-1.2, 1.2), gen.uniform(-1.2, 1.2));
    complex w2(gen.uniform(-1.2, 1.2), gen.uniform(-1.2, 1.2));
    if (std::abs(w2) < 0.1) continue;
    // chart 0 coordinates (w1, w2) = (Z1/Z0, Z2/Z0); chart 2 sees
    // (Z0/Z2, Z1/Z2).
    std::vector<complex> wa{w1, w2};
    std::vector<complex> wb{complex(1, 0) / w2, w1 / w2};
    double va = std::norm(s.xi(0, wa)) * std::exp(-phi.eval(0, z, wa).real());
    double vb = std::norm(s.xi(2, wb)) * std::exp(-phi.eval(2, z, wb).real());
    CHECK(std::abs(va - vb) <= 1e-10 * std::max(va, 1e-300));
  }
}

TEST_CASE("l2 metric of the standard fiber weight") {
  // The oracle value is volume * second moment: 1 * 1/(r+1) = 1/2 per
  // diagonal entry; off-diagonal entries vanish by phase symmetry.
  Scene sc = builtin_scene("trivial", 1, 1);
  HermitianField h = HermitianField::from_scene(sc);
  ChartWeight phi = induced_weight(h);
  FiberGrid grid = build_grid(1, 64);
  L2Matrix l2 = l2_metric(phi, pt(0.2), grid);
  double expect = oracles::fs_second_moment(1, 0);
  CHECK(expect == doctest::Approx(0.5));
  CHECK(std::abs(l2.m(0, 0).real() - expect) <= 1e-8);
  CHECK(std::abs(l2.m(1, 1).real() - expect) <= 1e-8);
  CHECK(std::abs(l2.m(0, 1)) <= 1e-10);
  CHECK(l2.positive_definite);
}

TEST_CASE("l2 metric of a diagonal scene is proportionally diagonal") {
  Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
  HermitianField h = HermitianField::from_scene(sc);
  ChartWeight phi = induced_weight(h);
  FiberGrid grid = build_grid(1, 64);
  std::vector<complex> z = pt(0.4, -0.1);
  L2Matrix l2 = l2_metric(phi, z, grid);
  cmat hv = h.value_pd(z);
  // proportional to H with the rank factor
  CHECK(std::abs(l2.m(0, 0) / hv(0, 0) - 0.5) <= 1e-9);
  CHECK(std::abs(l2.m(1, 1) / hv(1, 1) - 0.5) <= 1e-9);
  CHECK(std::abs(l2.m(0, 1)) <= 1e-10);
}

TEST_CASE("constant shifts of the weight scale the l2 metric exactly") {
  FiberGrid grid = build_grid(1, 32);
  std::vector<complex> z = pt(0.1, 0.2);
  SUBCASE("closed-form density: identical nodes, rounding-level match") {
    ChartWeight phi = induced_weight(HermitianField::constant(cmat::Identity(2, 2), 1));
    cmat a = l2_metric(phi, z, grid).m;
    cmat b = l2_metric(phi.shifted(0.9), z, grid).m;
    CHECK(max_abs(cmat(b * std::exp(0.9) - a)) <= 1e-12 * max_abs(a));
  }
  SUBCASE("stencil density: the shift rounds through the stencils") {
    ChartWeight phi = ChartWeight::from_scene(builtin_scene("trivial", 1, 1));
    cmat a = l2_metric(phi, z, grid).m;
    cmat b = l2_metric(phi.shifted(0.9), z, grid).m;
    CHECK(max_abs(cmat(b * std::exp(0.9) - a)) <= 1e-8 * max_abs(a));
  }
}

TEST_CASE("rank-1 weights skip the fiber integral") {
  Scene sc = builtin_scene("diagonal-exponential", 1, 0, {1.3});
  HermitianField h = HermitianField::from_scene(sc);
  ChartWeight phi = induced_weight(h);
  FiberGrid grid = build_grid(1, 16);  // unused at r=0
  std::vector<complex> z = pt(0.4, 0.3);
  L2Matrix l2 = l2_metric(phi, z, grid);
  CHECK(std::abs(l2.m(0, 0) - h.value_pd(z)(0, 0)) <= 1e-13);
}

TEST_CASE("roundtrip: the l2 metric is proportional to the inducing metric") {
  FiberGrid grid = build_grid(1, 64);
  SUBCASE("identity metric: residual at rounding level") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    RoundtripReport rep = roundtrip_check(h, pt(0.3), grid);
    CHECK(rep.residual <= 1e-8);
    CHECK(rep.lambda * rep.moment_factor ==
          doctest::Approx(rep.fiber_volume).epsilon(1e-10));
  }
  SUBCASE("diagonal-exponential at z = 0.5") {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    HermitianField h = HermitianField::from_scene(sc);
    RoundtripReport rep = roundtrip_check(h, pt(0.5), grid);
    CHECK(rep.residual <= 1e-4);
    CHECK(rep.volume_match <= 1e-4);
  }
  SUBCASE("random constant positive metric") {
    rng gen(9);
    cmat m(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) m(a, b) = gen.cnormal();
    cmat h0 = hermitize(m * m.adjoint()) + 0.5 * cmat::Identity(2, 2);
    HermitianField h = HermitianField::constant(h0, 1);
    RoundtripReport rep = roundtrip_check(h, pt(0.1, -0.2), grid);
    CHECK(rep.residual <= 1e-6);
    CHECK(rep.volume_match <= 1e-6);
  }
}

TEST_CASE("fiberwise Monge-Ampere residual") {
  auto probes = fiber_probes(1, 12);
  SUBCASE("standard fiber weight solves the equation with C fitted") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    ChartWeight phi = induced_weight(h);
    auto det_one = [](std::span<const complex>) { return complex(1, 0); };
    KeFit fit = ke_fit(phi, det_one, pt(0.0), probes);
    CHECK(fit.residual <= 1e-6);
    CHECK(fit.c_fit == doctest::Approx(1.0).epsilon(1e-7));
  }
  SUBCASE("rescaled fiber weight breaks the equation at order one") {
    // 1.5 log(1+|w|^2) has det(Hess) ~ (1+t)^{-2} against e^{-2 phi} ~
    // (1+t)^{-3}: no single constant fits.
    ExprPtr e = parse_scalar("1.5*log(1 + abs2(w1))");
    ChartWeight phi = ChartWeight::from_expr(e, 1, 1, 0);
    auto det_one = [](std::span<const complex>) { return complex(1, 0); };
    KeFit fit = ke_fit(phi, det_one, pt(0.0), probes);
    CHECK(fit.residual > 0.05);
  }
  SUBCASE("induced weights of constant metrics: one constant across fibers") {
    rng gen(21);
    cmat m(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) m(a, b) = gen.cnormal();
    cmat h0 = hermitize(m * m.adjoint()) + cmat::Identity(2, 2);
    HermitianField h = HermitianField::constant(h0, 1);
    ChartWeight phi = induced_weight(h);
    complex deth = h0.determinant();
    auto det_h = [deth](std::span<const complex>) { return deth; };
    KeFit fit = ke_fit(phi, det_h, pt(0.25, 0.1), probes);
    CHECK(fit.residual <= 1e-6);
    double fixed_residual = ke_residual(phi, det_h, pt(-0.2, 0.3), fit.c_fit, probes);
    CHECK(fixed_residual <= 1e-6);
  }
}

TEST_CASE("normalization constant: fit, stability and the reference ratio") {
  NormalizationReport r1 = normalization_constant_estimate(1);
  CHECK(r1.coefficient_of_variation <= 1e-6);
  CHECK(r1.paper_value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r1.ratio == doctest::Approx(2.0).epsilon(1e-6));
  NormalizationReport r2 = normalization_constant_estimate(2);
  CHECK(r2.coefficient_of_variation <= 1e-6);
  CHECK(r2.paper_value == doctest::Approx(1.0 / 36).epsilon(1e-12));
  CHECK(r2.ratio == doctest::Approx(36.0).epsilon(1e-6));
}

TEST_CASE("duality between the two curvature routes") {
  SUBCASE("flat metric: both routes vanish") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    FiberGrid grid = build_grid(1, 32);
    DualityReport rep = duality_check(h, pt(0.2), grid);
    CHECK(rep.scale <= 1e-7);  // nothing to fit against
  }
  SUBCASE("rank 1: both sides are the line curvature") {
    Scene sc = builtin_scene("diagonal-exponential", 1, 0, {1});
    HermitianField h = HermitianField::from_scene(sc);
    FiberGrid grid = build_grid(1, 16);
    DualityReport rep = duality_check(h, pt(0.3, 0.1), grid);
    CHECK(rep.rel_deviation <= 1e-8);
    CHECK(rep.lambda == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.scale == doctest::Approx(oracles::line_curvature(1, complex(0.3, 0.1)) /
                                       std::exp(-std::norm(complex(0.3, 0.1))))
                           .epsilon(1e-5));
  }
  SUBCASE("diagonal rank 2 over a disc") {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    HermitianField h = HermitianField::from_scene(sc);
    FiberGrid grid = build_grid(1, 48);
    for (auto z : {pt(0.3, 0.1), pt(-0.2, 0.25)}) {
      DualityReport rep = duality_check(h, z, grid);
      CHECK(rep.rel_deviation <= 1e-3);
      // fitted constant 1/(r+1) in the orthonormal frame
      CHECK(rep.lambda == doctest::Approx(0.5).epsilon(1e-5));
    }
  }
}

TEST_CASE("determinant pushforward with the rank constant") {
  FiberGrid grid = build_grid(1, 48);
  SUBCASE("flat metric: both sides vanish") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    PushforwardReport rep = det_pushforward_check(h, pt(0.2), grid);
    CHECK(max_abs(rep.lhs) <= 1e-8);
    CHECK(max_abs(rep.rhs) <= 1e-8);
  }
  SUBCASE("rank 1 reduces to the line-bundle identity") {
    Scene sc = builtin_scene("diagonal-exponential", 1, 0, {0.8});
    HermitianField h = HermitianField::from_scene(sc);
    PushforwardReport rep = det_pushforward_check(h, pt(0.3, -0.1), grid);
    CHECK(rep.convention_factor == 1);
    CHECK(rep.lhs(0, 0).real() == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(rep.rel_deviation <= 1e-6);
  }
  SUBCASE("conformal rank 2: hand value (r+1) c") {
    Scene sc = builtin_scene("product", 1, 1, {0.7});
    HermitianField h = HermitianField::from_scene(sc);
    PushforwardReport rep = det_pushforward_check(h, pt(0.3, -0.2), grid);
    CHECK(rep.lhs(0, 0).real() == doctest::Approx(1.4).epsilon(1e-6));
    CHECK(rep.rel_deviation <= 1e-3);
  }
  SUBCASE("diagonal-exponential: trace value c0 + c1") {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    HermitianField h = HermitianField::from_scene(sc);
    PushforwardReport rep = det_pushforward_check(h, pt(0.3, -0.2), grid);
    CHECK(rep.lhs(0, 0).real() == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(rep.rel_deviation <= 1e-3);
  }
}

TEST_CASE("weights with a fiber log pole are flagged as divergent") {
  // log|w|^2 is fiber-harmonic away from its pole, so the measure stays
  // positive, while e^{-phi} ~ |w|^{-2} makes the entries log-divergent.
  ExprPtr e = parse_scalar("log(abs2(w1)) + log(1 + abs2(w1))");
  ChartWeight phi = ChartWeight::from_expr(e, 1, 1, 0);
  FiberGrid grid = build_grid(1, 16);
  L2Matrix l2 = l2_metric(phi, pt(0.0), grid, {}, true);
  CHECK(l2.divergence_flagged);
}
