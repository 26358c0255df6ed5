#include <doctest.h>

#include "curvlab/hermitian.hpp"
#include "oracles.hpp"

using namespace curvlab;

namespace {

HermitianField diag_exp(std::vector<double> cs, int n = 1) {
  int r = (int)cs.size() - 1;
  return HermitianField::from_scene(builtin_scene("diagonal-exponential", n, r, cs));
}

std::vector<complex> pt(double re, double im = 0) { return {complex(re, im)}; }

}  // namespace

TEST_CASE("chern curvature of a constant metric vanishes") {
  HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
  CurvatureTensor t = chern_curvature(h, pt(0.3, 0.2));
  CHECK(t.max_abs() <= 1e-12);
}

TEST_CASE("chern curvature of the line metric e^{-c|z|^2}") {
  for (double c : {1.0, 0.5}) {
    HermitianField h = diag_exp({c});
    for (double re : {0.0, 0.4}) {
      CurvatureTensor t = chern_curvature(h, pt(re, -0.2));
      double expect = oracles::line_curvature(c, complex(re, -0.2));
      CHECK(std::abs(t.at(0, 0, 0, 0) - expect) <= 1e-8 * std::max(1.0, expect));
    }
  }
}

TEST_CASE("chern curvature of a diagonal-exponential metric is diagonal") {
  HermitianField h = diag_exp({1, 2});
  std::vector<complex> z = pt(0.35, 0.15);
  CurvatureTensor t = chern_curvature(h, z);
  CHECK(std::abs(t.at(0, 0, 0, 0) - oracles::line_curvature(1, z[0])) <= 1e-8);
  CHECK(std::abs(t.at(1, 1, 0, 0) - oracles::line_curvature(2, z[0])) <= 1e-8);
  CHECK(std::abs(t.at(0, 1, 0, 0)) <= 1e-10);
  CHECK(t.pair_defect() <= 1e-10 * std::max(t.max_abs(), 1e-30));
}

TEST_CASE("degenerate metric raises") {
  HermitianField h = HermitianField::constant(cmat::Zero(2, 2), 1);
  CHECK_THROWS_AS(chern_curvature(h, pt(0)), error);
}

TEST_CASE("connection coefficients") {
  SUBCASE("constant metric") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    ConnectionCoeffs g = connection_coeffs(h, pt(0.2, 0.7));
    CHECK(max_abs(g.gamma[0]) <= 1e-11);
  }
  SUBCASE("line metric e^{-|z|^2} gives -conj(z)") {
    HermitianField h = diag_exp({1});
    complex z0(0.4, -0.3);
    ConnectionCoeffs g = connection_coeffs(h, pt(z0.real(), z0.imag()));
    CHECK(std::abs(g.gamma[0](0, 0) - (-std::conj(z0))) <= 1e-9);
  }
  SUBCASE("diagonal-exponential gives diag(-conj z, -2 conj z)") {
    HermitianField h = diag_exp({1, 2});
    complex z0(0.25, 0.1);
    ConnectionCoeffs g = connection_coeffs(h, pt(z0.real(), z0.imag()));
    CHECK(std::abs(g.gamma[0](0, 0) - (-std::conj(z0))) <= 1e-9);
    CHECK(std::abs(g.gamma[0](1, 1) - (-2.0 * std::conj(z0))) <= 1e-9);
    CHECK(std::abs(g.gamma[0](0, 1)) <= 1e-10);
  }
}

TEST_CASE("normal frames") {
  SUBCASE("constant metric gives constant sections") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    auto frame = normal_frame(h, pt(0.3));
    CHECK(frame.size() == 2);
    CHECK(max_abs(frame[0].c) <= 1e-11);
  }
  SUBCASE("line metric closed form s(z) = 1 + conj(a)(z - a)") {
    HermitianField h = diag_exp({1});
    complex a(0.45, 0.2);
    auto frame = normal_frame(h, pt(a.real(), a.imag()));
    CHECK(std::abs(frame[0].c(0, 0) - std::conj(a)) <= 1e-9);
    std::vector<complex> znear{a + complex(0.1, 0.05)};
    complex expect = 1.0 + std::conj(a) * (znear[0] - a);
    CHECK(std::abs(frame[0].eval(znear)[0] - expect) <= 1e-9);
  }
  SUBCASE("defining condition residual is small for builtin metrics") {
    rng gen(23);
    for (int trial = 0; trial < 4; ++trial) {
      HermitianField h = diag_exp({1, 2});
      std::vector<complex> z0 = pt(gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5));
      auto frame = normal_frame(h, z0);
      CHECK(normal_frame_residual(h, z0, frame) <= 1e-8);
    }
  }
}

TEST_CASE("griffiths verdict") {
  SUBCASE("zero tensor is boundary semi-positive") {
    CurvatureTensor t(2, 1);
    Verdict v = griffiths_verdict(t, 1e-8);
    CHECK(v.cls == posclass::semi_positive);
    CHECK(v.note.find("heuristic") != std::string::npos);
  }
  SUBCASE("diagonal-exponential at 0 is strictly positive with extremal 1") {
    HermitianField h = diag_exp({1, 2});
    Verdict v = griffiths_verdict(chern_curvature(h, pt(0)), 1e-8);
    CHECK(v.cls == posclass::strictly_positive);
    CHECK(v.extremal == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(v.restarts >= 20);
  }
  SUBCASE("e^{+|z|^2} I is strictly negative") {
    HermitianField h = diag_exp({-1, -1});
    Verdict v = griffiths_verdict(chern_curvature(h, pt(0.2, 0.1)), 1e-8);
    CHECK(v.cls == posclass::strictly_negative);
  }
}

TEST_CASE("nakano verdict") {
  SUBCASE("zero tensor") {
    CurvatureTensor t(2, 1);
    CHECK(nakano_verdict(t, cmat::Identity(2, 2), 1e-8).cls == posclass::semi_positive);
  }
  SUBCASE("diagonal-exponential at 0: min eigenvalue 1") {
    HermitianField h = diag_exp({1, 2});
    Verdict v = nakano_verdict(chern_curvature(h, pt(0)), h.value_pd(pt(0)), 1e-8);
    CHECK(v.cls == posclass::strictly_positive);
    CHECK(v.extremal == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("rank-1 Griffiths and Nakano verdicts coincide") {
  for (double c : {1.0, -1.0, 0.0}) {
    HermitianField h = diag_exp({c});
    std::vector<complex> z = pt(0.3, -0.1);
    CurvatureTensor t = chern_curvature(h, z);
    Verdict g = griffiths_verdict(t, 1e-8);
    Verdict nk = nakano_verdict(t, h.value_pd(z), 1e-8);
    CHECK(g.cls == nk.cls);
  }
}

TEST_CASE("log pairing Hessian") {
  std::vector<ExprPtr> unit{parse_scalar("1")};
  SUBCASE("e^{+|z|^2}: log pairing is |z|^2, Hessian 1") {
    HermitianField h = diag_exp({-1});
    cmat hess = log_pairing_hessian(h, unit, pt(0.3, 0.4));
    CHECK(hess(0, 0).real() == doctest::Approx(1.0).epsilon(1e-7));
  }
  SUBCASE("constant metric, constant section: zero") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    std::vector<ExprPtr> u{parse_scalar("1"), parse_scalar("0.5")};
    cmat hess = log_pairing_hessian(h, u, pt(0.1, -0.6));
    CHECK(max_abs(hess) <= 1e-10);
  }
  SUBCASE("e^{-|z|^2}: Hessian -1 (positive side, not plurisubharmonic)") {
    HermitianField h = diag_exp({1});
    cmat hess = log_pairing_hessian(h, unit, pt(0.3, 0.4));
    CHECK(hess(0, 0).real() == doctest::Approx(-1.0).epsilon(1e-7));
  }
  SUBCASE("vanishing pairing raises a domain error") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    std::vector<ExprPtr> u{parse_scalar("0"), parse_scalar("0")};
    CHECK_THROWS_AS(log_pairing_hessian(h, u, pt(0)), error);
  }
}

TEST_CASE("Griffiths-negative metrics give PSD log-pairing Hessians") {
  // Hessians of log H(u,u) for holomorphic u should be PSD when the dual
  // side is positive; checked for 10 random sections.
  rng gen(77);
  HermitianField h = diag_exp({-1, -2});
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<ExprPtr> u;
    for (int a = 0; a < 2; ++a) {
      complex c0 = gen.cnormal(), c1 = gen.cnormal();
      char buf[160];
      std::snprintf(buf, sizeof buf, "(%.17g + %.17g*i) + (%.17g + %.17g*i)*z1", c0.real(),
                    c0.imag(), 0.3 * c1.real(), 0.3 * c1.imag());
      u.push_back(parse_scalar(buf));
    }
    cmat hess = log_pairing_hessian(h, u, pt(0.2, -0.3));
    EigenResult eig = hermitian_eigen(hess);
    CHECK(eig.values[0] >= -1e-6);
  }
}

TEST_CASE("pairing Hessian equals the curvature contraction") {
  SUBCASE("constant metric: both sides vanish") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    PairingHessianReport rep = pairing_hessian_check(h, pt(0.4, 0.1));
    CHECK(rep.max_deviation <= 1e-10);
  }
  SUBCASE("line oracle family") {
    HermitianField h = diag_exp({1});
    PairingHessianReport rep = pairing_hessian_check(h, pt(0.2, 0.5));
    CHECK(rep.max_deviation <= 1e-6);
  }
  SUBCASE("diagonal-exponential at 0.3") {
    HermitianField h = diag_exp({1, 2});
    PairingHessianReport rep = pairing_hessian_check(h, pt(0.3));
    CHECK(rep.max_deviation <= 1e-5);
  }
}

TEST_CASE("det curvature") {
  SUBCASE("constant") {
    HermitianField h = HermitianField::constant(cmat::Identity(3, 3), 1);
    CHECK(max_abs(det_curvature(h, pt(0.2))) <= 1e-11);
  }
  SUBCASE("rank 1: det curvature equals the chern curvature over H") {
    HermitianField h = diag_exp({1});
    std::vector<complex> z = pt(0.3, -0.2);
    cmat dc = det_curvature(h, z);
    CurvatureTensor t = chern_curvature(h, z);
    double hval = h.value_pd(z)(0, 0).real();
    CHECK(std::abs(dc(0, 0) - t.at(0, 0, 0, 0) / hval) <= 1e-7);
  }
  SUBCASE("diagonal-exponential: matches the metric trace of the curvature") {
    HermitianField h = diag_exp({1, 2});
    std::vector<complex> z = pt(0.25, 0.35);
    cmat dc = det_curvature(h, z);
    CHECK(dc(0, 0).real() == doctest::Approx(3.0).epsilon(1e-7));
    cmat tr = metric_trace(chern_curvature(h, z), h.value_pd(z));
    CHECK(max_abs(cmat(dc - tr)) <= 1e-6);
  }
}

TEST_CASE("twist with det") {
  SUBCASE("constant twist stays flat") {
    HermitianField h = HermitianField::constant(2 * cmat::Identity(2, 2), 1);
    HermitianField tw = h.twist_with_det();
    CHECK(tw.value(pt(0.3))(0, 0).real() == doctest::Approx(8.0));
    CHECK(chern_curvature(tw, pt(0.3)).max_abs() <= 1e-11);
  }
  SUBCASE("line metric: twist squares the weight, curvature doubles") {
    HermitianField h = diag_exp({1});
    HermitianField tw = h.twist_with_det();
    std::vector<complex> z = pt(0.4, 0.1);
    CHECK(tw.value(z)(0, 0).real() ==
          doctest::Approx(std::exp(-2 * std::norm(z[0]))).epsilon(1e-12));
    CurvatureTensor t = chern_curvature(tw, z);
    CHECK(std::abs(t.at(0, 0, 0, 0) - oracles::line_curvature(2, z[0])) <= 1e-8);
  }
  SUBCASE("endomorphism curvature gains the det curvature times identity") {
    HermitianField h = diag_exp({1, 2});
    HermitianField tw = h.twist_with_det();
    std::vector<complex> z = pt(0.2, -0.4);
    CurvatureTensor raised = raise_first_index(chern_curvature(h, z), h.value_pd(z));
    CurvatureTensor raised_tw = raise_first_index(chern_curvature(tw, z), tw.value_pd(z));
    cmat dc = det_curvature(h, z);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        complex expect = raised.at(a, b, 0, 0) + (a == b ? dc(0, 0) : complex(0, 0));
        CHECK(std::abs(raised_tw.at(a, b, 0, 0) - expect) <= 1e-6);
      }
  }
}

TEST_CASE("demailly-skoda twist check") {
  SUBCASE("diagonal-exponential grid stays Nakano semi-positive") {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    HermitianField h = HermitianField::from_scene(sc);
    DemaillySkodaReport rep = demailly_skoda_check(h, sc.samples, sc.tol);
    CHECK(rep.precondition_ok);
    CHECK(rep.samples_checked == 25);
    CHECK(rep.all_nakano_psd);
    CHECK(rep.min_eig_normalized >= -1e-8);
  }
  SUBCASE("flat metric passes at the boundary") {
    HermitianField h = HermitianField::constant(cmat::Identity(2, 2), 1);
    DemaillySkodaReport rep = demailly_skoda_check(h, {pt(0.1), pt(0.3)}, 1e-8);
    CHECK(rep.precondition_ok);
    CHECK(rep.all_nakano_psd);
  }
  SUBCASE("Griffiths-negative input skips with a note") {
    HermitianField h = diag_exp({-1, -1});
    DemaillySkodaReport rep = demailly_skoda_check(h, {pt(0.2)}, 1e-8);
    CHECK(!rep.precondition_ok);
    CHECK(!rep.skip_note.empty());
  }
}

TEST_CASE("dual metric flips the endomorphism curvature") {
  HermitianField h = diag_exp({1, 2});
  HermitianField hd = h.dual();
  for (auto z : {pt(0.3, -0.2), pt(0.1, 0.45)}) {
    CurvatureTensor raised = raise_first_index(chern_curvature(h, z), h.value_pd(z));
    CurvatureTensor raised_dual = raise_first_index(chern_curvature(hd, z), hd.value_pd(z));
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        CHECK(std::abs(raised_dual.at(a, b, 0, 0) + raised.at(b, a, 0, 0)) <=
              1e-6 * std::max(1.0, raised.max_abs()));
  }
}

TEST_CASE("punctured domain guard") {
  Scene sc = builtin_scene("stable-model", 1, 1, {0.5});
  HermitianField h = HermitianField::from_scene(sc);
  CHECK_THROWS_AS(h.value(pt(0.01)), error);
  CHECK_NOTHROW(h.value(pt(0.5)));
}
