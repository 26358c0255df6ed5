#include "curvlab/selfcheck.hpp"

#include <cmath>

#include "curvlab/l2.hpp"
#include "curvlab/vanishing.hpp"

namespace curvlab {

namespace {

cmat random_hermitian(rng& gen, int dim) {
  cmat m(dim, dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) m(a, b) = gen.cnormal();
  return hermitize(m);
}

std::vector<std::vector<complex>> few_samples(const Scene& sc, int count) {
  std::vector<std::vector<complex>> out;
  for (std::size_t k = 0; k < sc.samples.size() && (int)out.size() < count;
       k += std::max<std::size_t>(1, sc.samples.size() / count))
    out.push_back(sc.samples[k]);
  return out;
}

}  // namespace

jval SelfcheckResult::to_json() const {
  jval arr = jval::array();
  int passed = 0;
  for (const auto& item : items) {
    jval j = jval::object();
    j.set("name", item.name);
    j.set("pass", item.pass);
    j.set("value", item.value);
    j.set("threshold", item.threshold);
    arr.push(std::move(j));
    if (item.pass) ++passed;
  }
  jval out = jval::object();
  out.set("items", std::move(arr));
  out.set("passed", passed);
  out.set("total", (std::int64_t)items.size());
  out.set("all_pass", all_pass);
  // Wall-clock time is printed on stderr so stdout stays byte-stable.
  jval timing = jval::object();
  timing.set("wall_clock", "stderr");
  timing.set("work_items", (std::int64_t)items.size());
  out.set("timing", std::move(timing));
  return out;
}

SelfcheckResult run_selfcheck(std::uint64_t seed) {
  SelfcheckResult res;
  auto add = [&res](const std::string& name, double value, double threshold) {
    SelfcheckItem item{name, value <= threshold, value, threshold};
    res.items.push_back(item);
    res.all_pass = res.all_pass && item.pass;
  };
  auto add_flag = [&res](const std::string& name, bool ok) {
    SelfcheckItem item{name, ok, ok ? 0.0 : 1.0, 0.5};
    res.items.push_back(item);
    res.all_pass = res.all_pass && ok;
  };
  rng gen(seed + 42);

  // tensor: eigendecomposition reconstructs the matrix
  {
    double worst = 0;
    for (int trial = 0; trial < 4; ++trial) {
      cmat m = random_hermitian(gen, 6);
      EigenResult e = hermitian_eigen(m);
      cmat rebuilt = cmat::Zero(6, 6);
      for (int k = 0; k < 6; ++k)
        rebuilt += e.values[k] * (e.vectors.col(k) * e.vectors.col(k).adjoint());
      worst = std::max(worst, max_abs(cmat(rebuilt - m)) / std::max(max_abs(m), 1e-300));
    }
    add("tensor.eigen_reconstruction", worst, 1e-9);
  }

  // tensor: classify is monotone under adding t*I
  {
    bool ok = true;
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
    for (int trial = 0; trial < 5; ++trial) {
      cmat m = random_hermitian(gen, 4);
      EigenResult e0 = hermitian_eigen(m);
      Verdict v0 = classify(e0.values[0], e0.values[3], 1e-8);
      double t = 0.5 + gen.uniform();
      EigenResult e1 = hermitian_eigen(cmat(m + t * cmat::Identity(4, 4)));
      Verdict v1 = classify(e1.values[0], e1.values[3], 1e-8);
      ok = ok && rank_of(v1.cls) >= rank_of(v0.cls);
    }
    add_flag("tensor.classify_monotone", ok);
  }

  // tensor: nakano_flatten is exactly Hermitian
  {
    CurvatureTensor t(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            complex v = gen.cnormal();
            t.at(a, b, i, j) = v;
            t.at(b, a, j, i) = std::conj(v);
          }
    cmat h = random_hermitian(gen, 2) + 4 * cmat::Identity(2, 2);
    add("tensor.flatten_hermitian", hermitian_defect(nakano_flatten(t, h)), 1e-14);
  }

  // expr: print-parse round trip
  {
    const char* sources[] = {
        "log(1 + abs2(w1))", "exp(-abs2(z1)) * (1 + abs2(w1))",
        "-z1^2 + conj(w1)/(2 - w1)", "sum(abs2(Z0), abs2(Z1))",
        "pow(abs2(z1) + 1, 0.5) - 3.25e-2"};
    bool ok = true;
    for (const char* s : sources) {
      FieldExpr e = parse_field(s);
      FieldExpr round = parse_field(print_field(e));
      ok = ok && equal(e, round) && print_field(e) == print_field(round);
    }
    add_flag("expr.print_parse_roundtrip", ok);
  }

  // expr: homogeneity of the trivial homogeneous form
  {
    ExprPtr g = trivial_homogeneous_form(2);
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<complex> Z{gen.cnormal(), gen.cnormal(), gen.cnormal()};
      complex lambda = gen.cnormal();
      std::vector<complex> lz(3);
      for (int k = 0; k < 3; ++k) lz[k] = lambda * Z[k];
      complex base = eval_scalar(g, Bindings{{}, {}, Z});
      complex scaled = eval_scalar(g, Bindings{{}, {}, lz});
      worst = std::max(worst,
                       std::abs(scaled - std::norm(lambda) * base) / std::abs(base));
    }
    add("expr.homogeneity", worst, 1e-12);
  }

  // jets: mixed seconds of real weights are Hermitian within est_error
  {
    double worst_excess = 0;
    for (const char* name : {"trivial", "product", "diagonal-exponential"}) {
      Scene sc = name == std::string("diagonal-exponential")
                     ? builtin_scene(name, 1, 1, {1, 2})
                     : builtin_scene(name, 1, 1);
      ChartWeight phi = ChartWeight::from_scene(sc);
      ScalarField f = phi.full_field(0);
      std::vector<int> dirs{0, 1};
      for (int trial = 0; trial < 7; ++trial) {
        std::vector<complex> p{complex(gen.uniform(-0.5, 0.5), gen.uniform(-0.5, 0.5)),
                               complex(gen.uniform(-1, 1), gen.uniform(-1, 1))};
        Jet2 jet = jet2(f, p, dirs);
        double defect = hermitian_defect(jet.dd_matrix());
        worst_excess = std::max(worst_excess, defect - 50 * (jet.est_error + 1e-14));
      }
    }
    add("jet.hermitian_dd_excess", worst_excess, 0.0);
  }

  // jets: halving the step shrinks the Richardson discrepancy
  {
    ScalarField f = [](std::span<const complex> p) {
      return std::exp(-std::norm(p[0])) * (1.0 + std::norm(p[0]));
    };
    std::vector<complex> p{complex(0.37, -0.21)};
    std::vector<int> dirs{0};
    double e1 = jet2(f, p, dirs, 2e-3).est_error;
    double e2 = jet2(f, p, dirs, 1e-3).est_error;
    add("jet.step_halving_ratio_inverse", e2 > 0 ? e2 / e1 : 0.0, 1.0 / 3.0);
  }

  // curvature: pair symmetry across builtin scenes
  {
    double worst = 0;
    Scene scenes[] = {builtin_scene("trivial", 1, 1), builtin_scene("product", 1, 1),
                      builtin_scene("diagonal-exponential", 1, 1, {1, 2})};
    for (const Scene& sc : scenes) {
      HermitianField h = HermitianField::from_scene(sc);
      for (const auto& z : few_samples(sc, 2)) {
        CurvatureTensor t = chern_curvature(h, z);
        worst = std::max(worst, t.pair_defect() / std::max(t.max_abs(), 1e-12));
      }
    }
    add("hermitian.pair_symmetry", worst, 1e-10);
  }

  // rank 1: Griffiths and Nakano verdicts agree
  {
    bool ok = true;
    for (double c : {1.0, -1.0}) {
      Scene sc = builtin_scene("diagonal-exponential", 1, 0, {c});
      HermitianField h = HermitianField::from_scene(sc);
      std::vector<complex> z{complex(0.2, 0.1)};
      CurvatureTensor t = chern_curvature(h, z);
      Verdict g = griffiths_verdict(t, sc.tol, 8, seed);
      Verdict nk = nakano_verdict(t, h.value_pd(z), sc.tol);
      ok = ok && g.cls == nk.cls;
    }
    add_flag("hermitian.rank1_coincidence", ok);
  }

  // dual metric flips the endomorphism curvature sign (transposed)
  {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    HermitianField h = HermitianField::from_scene(sc);
    HermitianField hd = h.dual();
    std::vector<complex> z{complex(0.3, -0.2)};
    CurvatureTensor raised = raise_first_index(chern_curvature(h, z), h.value_pd(z));
    CurvatureTensor raised_dual =
        raise_first_index(chern_curvature(hd, z), hd.value_pd(z));
    double worst = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        worst = std::max(worst, std::abs(raised_dual.at(a, b, 0, 0) +
                                         raised.at(b, a, 0, 0)));
    add("hermitian.dual_flip", worst / std::max(raised.max_abs(), 1e-300), 1e-5);
  }

  // log-pairing Hessians of a Griffiths-negative metric are PSD
  {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {-1, -1});
    HermitianField h = HermitianField::from_scene(sc);
    std::vector<complex> z{complex(0.25, 0.15)};
    double worst = 0;
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<ExprPtr> u;
      for (int a = 0; a < 2; ++a) {
        complex c = gen.cnormal();
        char buf[96];
        std::snprintf(buf, sizeof buf, "(%.17g + %.17g*i) + (0.1*z1)", c.real(), c.imag());
        u.push_back(parse_scalar(buf));
      }
      cmat hess = log_pairing_hessian(h, u, z);
      EigenResult eig = hermitian_eigen(hess);
      worst = std::max(worst, -eig.values[0]);
    }
    add("hermitian.log_pairing_psd", worst, 1e-6);
  }

  // Demailly-Skoda twist stays Nakano semi-positive
  {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    HermitianField h = HermitianField::from_scene(sc);
    DemaillySkodaReport rep = demailly_skoda_check(h, few_samples(sc, 9), sc.tol);
    add("hermitian.demailly_skoda_min_eig", rep.precondition_ok ? -rep.min_eig_normalized : 1.0,
        1e-8);
  }

  // Kobayashi split reassembles the full form
  {
    double worst = 0;
    Scene scenes[] = {builtin_scene("trivial", 1, 1), builtin_scene("product", 1, 1),
                      builtin_scene("diagonal-exponential", 1, 1, {1, 2})};
    for (const Scene& sc : scenes) {
      ChartWeight phi = ChartWeight::from_scene(sc);
      auto probes = fiber_probes(1, 5);
      for (const auto& z : few_samples(sc, 3))
        for (std::size_t k = 0; k < probes.size(); k += 3)
          worst = std::max(worst, decomposition_residual(phi, z, probes[k]));
    }
    add("finsler.decomposition_residual", worst, 1e-5);
  }

  // fiber-quadratic forms reproduce the metric curvature
  {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    HermitianField h = HermitianField::from_scene(sc);
    FinslerForm q = FinslerForm::quadratic(h);
    double worst = 0;
    for (const auto& z : few_samples(sc, 2)) {
      CurvatureTensor theta = chern_curvature(h, z);
      std::vector<complex> Z{complex(0.8, 0.1), complex(-0.4, 0.55)};
      CurvatureTensor k = kobayashi_tensor(q, z, Z);
      double dev = 0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          dev = std::max(dev, std::abs(k.at(a, b, 0, 0) - theta.at(a, b, 0, 0)));
      worst = std::max(worst, dev / std::max(theta.max_abs(), 1e-300));
    }
    add("finsler.hermitian_collapse", worst, 1e-6);
  }

  // Schur complement two ways
  {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    ChartWeight phi = ChartWeight::from_scene(sc);
    std::vector<complex> z{complex(0.3, 0.0)};
    std::vector<complex> w{complex(0.7, -0.4)};
    FiberForm f = fiber_form(phi, z, w);
    cmat direct = geodesic_curvature(phi, z, w);
    cmat gff_inv = f.fiber().inverse();
    cmat a = -(gff_inv * f.fiber_base());
    cmat via_lift = f.base() + f.base_fiber() * a;
    add("finsler.schur_consistency", max_abs(cmat(direct - via_lift)), 1e-8);
  }

  // positivity equivalences on a positive and a negative scene
  {
    Scene pos = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    Scene neg = builtin_scene("diagonal-exponential", 1, 1, {-1, -1});
    EquivalenceReport a = positivity_equivalence_check(HermitianField::from_scene(pos),
                                                       few_samples(pos, 2), pos.tol, seed);
    EquivalenceReport b = positivity_equivalence_check(HermitianField::from_scene(neg),
                                                       few_samples(neg, 2), neg.tol, seed);
    add_flag("finsler.positivity_equivalence", a.all_consistent && b.all_consistent);
  }

  // quadrature: partition of unity sums to 1
  {
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<complex> Z{gen.cnormal(), gen.cnormal()};
      double total = 0;
      for (int chart = 0; chart < 2; ++chart) {
        if (std::abs(Z[chart]) < 1e-9) continue;
        std::vector<complex> w{Z[1 - chart] / Z[chart]};
        total += FiberGrid::partition_weight(w);
      }
      worst = std::max(worst, std::abs(total - 1.0));
    }
    add("quadrature.partition_unity", worst, 1e-12);
  }

  // quadrature: trivial-weight volume is 1 and stable under refinement
  {
    Scene sc = builtin_scene("trivial", 1, 1);
    ChartWeight phi = ChartWeight::from_scene(sc);
    std::vector<complex> z{complex(0, 0)};
    double v32 = fiber_volume(phi, z, build_grid(1, 32));
    double v64 = fiber_volume(phi, z, build_grid(1, 64));
    add("quadrature.fs_volume_error", std::abs(v64 - 1.0), 1e-9);
    add("quadrature.fs_volume_refinement", std::abs(v64 - v32) / v64, 1e-6);
  }

  // quadrature: moments against the closed forms
  {
    double worst = 0;
    worst = std::max(worst, std::abs(fs_moment(1, {0, 0}, 32) - 0.5));
    worst = std::max(worst, std::abs(fs_moment(1, {0, 1}, 32)));
    worst = std::max(worst, std::abs(fs_moment(1, {0, 0, 1, 1}, 32) - 1.0 / 6));
    worst = std::max(worst, std::abs(fs_moment(1, {0, 0, 0, 0}, 32) - 1.0 / 3));
    add("quadrature.fs_moments", worst, 1e-6);
  }

  // quadrature: same global integrand in either chart
  {
    Scene sc = builtin_scene("trivial", 1, 1);
    ChartWeight phi = ChartWeight::from_scene(sc);
    std::vector<complex> z{complex(0, 0)};
    FiberGrid grid = build_grid(1, 48);
    auto f = [](int chart, std::span<const complex> w) {
      std::vector<complex> Z{chart == 0 ? complex(1, 0) : w[0],
                             chart == 0 ? w[0] : complex(1, 0)};
      double n2 = std::norm(Z[0]) + std::norm(Z[1]);
      return complex(std::norm(Z[0]) / n2, 0);
    };
    complex a = integrate_single_chart(f, phi, z, grid, 0);
    complex b = integrate_single_chart(f, phi, z, grid, 1);
    add("quadrature.chart_independence", std::abs(a - b), 2e-6);
  }

  // quadrature: moments are unitary invariant
  {
    cmat u(2, 2);
    double th = 0.7;
    u << complex(std::cos(th), 0), complex(-std::sin(th), 0.2),
        complex(std::sin(th), 0.2), complex(std::cos(th), 0);
    Eigen::HouseholderQR<cmat> qr(u);
    cmat q = qr.householderQ();
    double dev = std::abs(fs_moment_rotated(1, {0, 0}, q, 32) - 0.5);
    add("quadrature.unitary_invariance", dev, 1e-6);
  }

  // quadrature: sum of second moments equals the mass
  {
    ChartWeight phi = induced_weight(HermitianField::constant(cmat::Identity(2, 2), 1));
    std::vector<complex> z{complex(0, 0)};
    FiberGrid grid = build_grid(1, 32);
    double mass = fiber_volume(phi, z, grid);
    double sum = fs_moment(1, {0, 0}, 32) + fs_moment(1, {1, 1}, 32);
    add("quadrature.mass_consistency", std::abs(sum - mass), 1e-12);
  }

  // l2: cross-chart invariance of |xi|^2 e^{-phi}
  {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    ChartWeight phi = ChartWeight::from_scene(sc);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      SectionXi s{cvec(2)};
      s.s << gen.cnormal(), gen.cnormal();
      std::vector<complex> z{complex(gen.uniform(-0.4, 0.4), gen.uniform(-0.4, 0.4))};
      complex w0(gen.uniform(-1.5, 1.5), gen.uniform(-1.5, 1.5));
      if (std::abs(w0) < 0.1) continue;
      std::vector<complex> wa{w0}, wb{complex(1, 0) / w0};
      double va = std::norm(s.xi(0, wa)) * std::exp(-phi.eval(0, z, wa).real());
      double vb = std::norm(s.xi(1, wb)) * std::exp(-phi.eval(1, z, wb).real());
      worst = std::max(worst, std::abs(va - vb) / std::max(std::abs(va), 1e-300));
    }
    add("l2.xi_cross_chart", worst, 1e-10);
  }

  // l2: shifting the weight by a constant scales the metric exactly
  {
    ChartWeight phi = induced_weight(HermitianField::constant(cmat::Identity(2, 2), 1));
    ChartWeight shifted = phi.shifted(0.7);
    std::vector<complex> z{complex(0.1, 0.2)};
    FiberGrid grid = build_grid(1, 24);
    cmat a = l2_metric(phi, z, grid).m;
    cmat b = l2_metric(shifted, z, grid).m;
    add("l2.constant_equivariance", max_abs(cmat(b * std::exp(0.7) - a)) / max_abs(a), 1e-12);
  }

  // l2: round trip against the inducing metric
  {
    double worst = 0;
    Scene scenes[] = {builtin_scene("trivial", 1, 1),
                      builtin_scene("diagonal-exponential", 1, 1, {1, 2})};
    FiberGrid grid = build_grid(1, 32);
    for (const Scene& sc : scenes) {
      HermitianField h = HermitianField::from_scene(sc);
      for (const auto& z : few_samples(sc, 2)) {
        RoundtripReport rep = roundtrip_check(h, z, grid);
        worst = std::max({worst, rep.residual, rep.volume_match});
      }
    }
    add("l2.roundtrip", worst, 1e-4);
  }

  // l2: fiberwise Monge-Ampere constant is shared across base points
  {
    Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
    HermitianField h = HermitianField::from_scene(sc);
    ChartWeight phi = induced_weight(h);
    auto det_h = [&h](std::span<const complex> z) { return h.value(z).determinant(); };
    auto probes = fiber_probes(1, 12);
    double cmin = 1e300, cmax = -1e300, rworst = 0;
    for (const auto& z : few_samples(sc, 3)) {
      KeFit fit = ke_fit(phi, det_h, z, probes);
      cmin = std::min(cmin, fit.c_fit);
      cmax = std::max(cmax, fit.c_fit);
      rworst = std::max(rworst, fit.residual);
    }
    add("l2.ke_residual", rworst, 1e-6);
    add("l2.ke_constant_spread", (cmax - cmin) / std::abs(cmax), 1e-6);
  }

  // vanishing: binomial symmetry and the threshold flag
  {
    bool ok = true;
    for (int r = 1; r <= 30; ++r) {
      unsigned __int128 direct = 1;
      for (int i = 1; i <= r + 2; ++i) {
        direct = direct * (unsigned __int128)(r + i);
        direct /= (unsigned __int128)i;
      }
      ok = ok && symmetric_rank(r) == (std::int64_t)direct;
      ThresholdReport rep = vanishing_threshold(r);
      ok = ok && rep.gt_one == (r > 1);
    }
    add_flag("vanishing.rank_and_threshold", ok);
  }

  // vanishing: integrability matches the closed-form boundary
  {
    SingularBaseWeight w;
    w.log_coeff = 1.0;
    bool ok = integrability_classify(w, 0.5).cls == integrability::integrable &&
              integrability_classify(w, 1.5).cls == integrability::divergent &&
              integrability_classify(w, 1.0).cls == integrability::divergent;
    add_flag("vanishing.integrability_boundary", ok);
  }

  // vanishing: Lelong slope under a bounded smooth perturbation
  {
    SingularBaseWeight w;
    w.log_coeff = 0.7;
    w.smooth = parse_scalar("0.3*(exp(i*2*(z1+conj(z1))) + exp(-i*2*(z1+conj(z1))))/2");
    add("vanishing.lelong_perturbed", std::abs(lelong_estimate(w).nu - 0.7), 1e-2);
  }

  return res;
}

}  // namespace curvlab
