#include "curvlab/finsler.hpp"

#include <cmath>

namespace curvlab {

namespace {

std::vector<int> iota_dirs(int count, int offset = 0) {
  std::vector<int> d(count);
  for (int i = 0; i < count; ++i) d[i] = offset + i;
  return d;
}

// Homogeneous coordinates of a chart point: Z*_chart = 1, others w in
// ascending index order.
std::vector<complex> homog_of_chart(int r, int chart, std::span<const complex> w) {
  std::vector<complex> Z(r + 1);
  int slot = 0;
  for (int a = 0; a <= r; ++a) Z[a] = (a == chart) ? complex(1, 0) : w[slot++];
  return Z;
}

// Chart-B coordinates of a homogeneous point (requires Z_B != 0).
std::vector<complex> chart_of_homog(int r, int chart, std::span<const complex> Z) {
  if (std::abs(Z[chart]) == 0)
    throw error(errkind::domain, "chart transform: target chart excludes this point");
  std::vector<complex> w;
  w.reserve(r);
  for (int a = 0; a <= r; ++a)
    if (a != chart) w.push_back(Z[a] / Z[chart]);
  return w;
}

}  // namespace

ChartWeight ChartWeight::from_expr(ExprPtr e, int n, int r, int declared_chart,
                                   double domain_radius, double punctured_radius) {
  check_vars(e, n, r, 0);
  auto f = [e, n, r, declared_chart](int chart, std::span<const complex> z,
                                     std::span<const complex> w) -> complex {
    Bindings b;
    if (chart == declared_chart) {
      b = Bindings{z.subspan(0, (std::size_t)n), w, {}};
      return eval_scalar(e, b);
    }
    // phi_B(z, w_B) = phi_A(z, w_A) + log |Z*_A|^2 with Z*_B = 1.
    std::vector<complex> Z = homog_of_chart(r, chart, w);
    std::vector<complex> wa = chart_of_homog(r, declared_chart, Z);
    b = Bindings{z.subspan(0, (std::size_t)n), wa, {}};
    return eval_scalar(e, b) + std::log(std::norm(Z[declared_chart]));
  };
  return ChartWeight(n, r, declared_chart, std::move(f), domain_radius, punctured_radius);
}

ChartWeight ChartWeight::from_scene(const Scene& sc) {
  if (sc.weight)
    return from_expr(*sc.weight, sc.n, sc.r(), sc.chart, sc.domain_radius,
                     sc.punctured_radius);
  if (sc.metric) return induced_weight(HermitianField::from_scene(sc), sc.chart);
  throw error(errkind::input, "scene provides neither weight nor metric");
}

complex ChartWeight::eval(int chart, std::span<const complex> z,
                          std::span<const complex> w) const {
  if (chart < 0 || chart > r_) throw error(errkind::input, "ChartWeight: chart out of range");
  if ((int)w.size() != r_) throw error(errkind::input, "ChartWeight: fiber arity mismatch");
  return f_(chart, z, w);
}

ScalarField ChartWeight::fiber_field(int chart, std::vector<complex> z) const {
  ChartWeight self = *this;
  return [self, chart, z = std::move(z)](std::span<const complex> w) {
    return self.eval(chart, z, w);
  };
}

ScalarField ChartWeight::full_field(int chart) const {
  ChartWeight self = *this;
  int n = n_, r = r_;
  return [self, chart, n, r](std::span<const complex> p) {
    return self.eval(chart, p.subspan(0, (std::size_t)n), p.subspan(n, (std::size_t)r));
  };
}

ChartWeight ChartWeight::shifted(double constant) const {
  ChartWeight out = *this;
  auto base = f_;
  out.f_ = [base, constant](int chart, std::span<const complex> z,
                            std::span<const complex> w) {
    return base(chart, z, w) + constant;
  };
  return out;
}

ChartWeight induced_weight(const HermitianField& h, int chart) {
  int n = h.n(), r = h.rank() - 1;
  HermitianField metric = h;
  auto f = [metric, r](int cha, std::span<const complex> z,
                       std::span<const complex> w) -> complex {
    cmat dual = metric.dual_value(z);
    std::vector<complex> Z = homog_of_chart(r, cha, w);
    complex q = 0;
    for (int a = 0; a <= r; ++a)
      for (int b = 0; b <= r; ++b) q += dual(a, b) * Z[a] * std::conj(Z[b]);
    if (!(q.real() > 0))
      throw error(errkind::degenerate_metric, "induced_weight: non-positive dual pairing");
    return std::log(q.real());
  };
  ChartWeight out(n, r, chart, std::move(f), h.domain_radius(), h.punctured_radius());
  // Fiber Hessian of log(Z^* A Zbar^*) in a chart: A_sub/Q - u v^T / Q^2
  // with u_a = dQ/dw_a and v_b = conj(dQ/dw_b). The dual matrix is bound
  // once per base point.
  out.set_fiber_hessian([metric, r](std::span<const complex> z) -> ChartWeight::HessAtFn {
    cmat a = metric.dual_value(z);
    return [a, r](int cha, std::span<const complex> w, cmat& hess) {
      std::array<complex, 4> Z, u, v;
      int slot = 0;
      for (int p = 0; p <= r; ++p) Z[p] = (p == cha) ? complex(1, 0) : w[slot++];
      complex q = 0;
      for (int p = 0; p <= r; ++p)
        for (int s = 0; s <= r; ++s) q += a(p, s) * Z[p] * std::conj(Z[s]);
      auto hom = [cha](int k) { return k < cha ? k : k + 1; };
      for (int al = 0; al < r; ++al) {
        u[al] = 0;
        v[al] = 0;
        for (int s = 0; s <= r; ++s) {
          u[al] += a(hom(al), s) * std::conj(Z[s]);
          v[al] += a(s, hom(al)) * Z[s];
        }
      }
      complex qinv = complex(1, 0) / q;
      complex qinv2 = qinv * qinv;
      for (int al = 0; al < r; ++al) {
        hess(al, al) = (a(hom(al), hom(al)) * qinv - u[al] * v[al] * qinv2).real();
        for (int be = al + 1; be < r; ++be) {
          complex e = a(hom(al), hom(be)) * qinv - u[al] * v[be] * qinv2;
          hess(al, be) = e;
          hess(be, al) = std::conj(e);
        }
      }
    };
  });
  return out;
}

FiberForm fiber_form(const ChartWeight& phi, std::span<const complex> z,
                     std::span<const complex> w, int chart, double step) {
  const int n = phi.n(), r = phi.r();
  if (chart < 0) chart = phi.chart();
  std::vector<complex> p(z.begin(), z.begin() + n);
  p.insert(p.end(), w.begin(), w.end());
  Jet2 jet = jet2(phi.full_field(chart), p, iota_dirs(n + r), step);
  FiberForm out;
  out.n = n;
  out.r = r;
  cmat raw = jet.dd_matrix();
  out.defect = hermitian_defect(raw);
  out.full = hermitize(raw);
  return out;
}

namespace {

cmat schur_base_block(const FiberForm& f) {
  if (f.r == 0) return f.base();
  cmat gff = f.fiber();
  Eigen::LLT<cmat> llt(gff);
  if (llt.info() != Eigen::Success)
    throw error(errkind::fiber_degeneracy,
                "geodesic_curvature: fiber block not positive-definite");
  return hermitize(cmat(f.base() - f.base_fiber() * llt.solve(f.fiber_base())));
}

}  // namespace

cmat geodesic_curvature(const ChartWeight& phi, std::span<const complex> z,
                        std::span<const complex> w, int chart, double step) {
  return schur_base_block(fiber_form(phi, z, w, chart, step));
}

double decomposition_residual(const ChartWeight& phi, std::span<const complex> z,
                              std::span<const complex> w, int chart, double step) {
  const int n = phi.n(), r = phi.r();
  if (chart < 0) chart = phi.chart();
  FiberForm ref = fiber_form(phi, z, w, chart, step);
  if (r == 0) return 0.0;

  cmat gff = ref.fiber();
  cmat gbf = ref.base_fiber();
  cmat gfb = ref.fiber_base();
  Eigen::LLT<cmat> llt(gff);
  if (llt.info() != Eigen::Success)
    throw error(errkind::fiber_degeneracy,
                "decomposition_residual: fiber block not positive-definite");
  cmat x = llt.solve(gfb);                 // Gff^{-1} Gfb
  cmat horizontal = ref.base() - gbf * x;  // c(phi)
  cmat lift = -x.conjugate();              // delta_i = d_i + lift[a][i] d_{w_a}

  // omega_FS in the delta-w coframe pushed back to (dz, dw):
  //   dz dzbar : A^T Gff Abar,  dz dwbar : -(A^T Gff),  dw dzbar : -(Gff Abar)
  cmat at_gff = lift.transpose() * gff;
  cmat rebuilt(n + r, n + r);
  rebuilt.topLeftCorner(n, n) = horizontal + at_gff * lift.conjugate();
  rebuilt.topRightCorner(n, r) = -at_gff;
  rebuilt.bottomLeftCorner(r, n) = -(gff * lift.conjugate());
  rebuilt.bottomRightCorner(r, r) = gff;

  return max_abs(cmat(rebuilt - ref.full));
}

FinslerForm FinslerForm::from_expr(ExprPtr e, int n, int rp1) {
  check_vars(e, n, 0, rp1);
  FinslerForm out;
  out.n = n;
  out.rp1 = rp1;
  out.g = [e, n](std::span<const complex> z, std::span<const complex> Z) {
    return eval_scalar(e, Bindings{z.subspan(0, (std::size_t)n), {}, Z});
  };
  return out;
}

FinslerForm FinslerForm::quadratic(const HermitianField& h) {
  FinslerForm out;
  out.n = h.n();
  out.rp1 = h.rank();
  HermitianField metric = h;
  out.g = [metric](std::span<const complex> z, std::span<const complex> Z) {
    cmat m = metric.value(z);
    complex q = 0;
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b) q += m(a, b) * Z[a] * std::conj(Z[b]);
    return q;
  };
  return out;
}

FinslerForm FinslerForm::dual_quadratic(const HermitianField& h) {
  FinslerForm out;
  out.n = h.n();
  out.rp1 = h.rank();
  HermitianField metric = h;
  out.g = [metric](std::span<const complex> z, std::span<const complex> Z) {
    cmat m = metric.dual_value(z);
    complex q = 0;
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b) q += m(a, b) * Z[a] * std::conj(Z[b]);
    return q;
  };
  return out;
}

CurvatureTensor kobayashi_tensor(const FinslerForm& g, std::span<const complex> z,
                                 std::span<const complex> Z, double fiber_step,
                                 double base_step) {
  const int n = g.n, rp1 = g.rp1;
  std::vector<complex> Z0(Z.begin(), Z.begin() + rp1);
  auto fiber_dirs = iota_dirs(rp1);

  // Matrix field: z' -> fiber Hessian of G at (z', Z0).
  MatrixField hess = [&g, Z0, fiber_dirs, fiber_step](std::span<const complex> zp) {
    std::vector<complex> zz(zp.begin(), zp.end());
    ScalarField fiber = [&g, &zz](std::span<const complex> Zv) { return g.g(zz, Zv); };
    Jet2 jet = jet2(fiber, Z0, fiber_dirs, fiber_step);
    return hermitize(jet.dd_matrix());
  };

  cmat gff = hess(z.subspan(0, (std::size_t)n));
  Eigen::FullPivLU<cmat> lu(gff);
  if (!lu.isInvertible())
    throw error(errkind::fiber_degeneracy, "kobayashi_tensor: singular fiber Hessian");
  cmat inv = lu.inverse();

  MatrixJet2 jet = matrix_jet2(hess, z.subspan(0, (std::size_t)n), iota_dirs(n), base_step);
  CurvatureTensor k(rp1, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cmat block = -jet.dd[i][j] + jet.d[i] * inv * jet.dbar[j];
      for (int a = 0; a < rp1; ++a)
        for (int b = 0; b < rp1; ++b) k.at(a, b, i, j) = block(a, b);
    }
  return k;
}

FinslerAxiomReport validate_finsler(const FinslerForm& g,
                                    const std::vector<std::vector<complex>>& z_samples,
                                    const std::vector<std::vector<complex>>& Z_samples,
                                    double tol, std::uint64_t seed) {
  FinslerAxiomReport rep;
  rng gen(seed + 1234567);
  rep.min_fiber_hessian_eig = std::numeric_limits<double>::infinity();
  auto fiber_dirs = iota_dirs(g.rp1);
  for (const auto& z : z_samples) {
    for (const auto& Z : Z_samples) {
      complex val = g.g(z, Z);
      if (std::abs(val.imag()) > 1e-9 * std::max(1.0, std::abs(val)) || !(val.real() > 0)) {
        rep.positivity_ok = false;
        if (rep.positivity_witness.empty())
          rep.positivity_witness.assign(Z.begin(), Z.end());
      }
      for (int trial = 0; trial < 3; ++trial) {
        complex lambda(gen.uniform(-2, 2), gen.uniform(-2, 2));
        std::vector<complex> lz(Z.size());
        for (std::size_t k = 0; k < Z.size(); ++k) lz[k] = lambda * Z[k];
        complex scaled = g.g(z, lz);
        rep.homogeneity_defect =
            std::max(rep.homogeneity_defect, std::abs(scaled - std::norm(lambda) * val) /
                                                 std::max(1.0, std::abs(val)));
      }
      std::vector<complex> zz(z.begin(), z.end());
      ScalarField fiber = [&g, &zz](std::span<const complex> Zv) { return g.g(zz, Zv); };
      Jet2 jet = jet2(fiber, Z, fiber_dirs, 1e-3);
      EigenResult eig = hermitian_eigen(hermitize(jet.dd_matrix()));
      rep.min_fiber_hessian_eig = std::min(rep.min_fiber_hessian_eig, eig.values[0]);
      ++rep.samples_checked;
    }
  }
  rep.strongly_pseudoconvex = rep.min_fiber_hessian_eig > tol;
  return rep;
}

std::vector<std::vector<complex>> fiber_probes(int r, int per_axis) {
  std::vector<std::vector<complex>> out;
  if (r == 0) {
    out.push_back({});
    return out;
  }
  // Stratified radial-angular points per coordinate, tensorized.
  std::vector<complex> axis;
  int radii = std::max(2, per_axis / 4);
  int angles = std::max(3, per_axis / radii);
  for (int a = 0; a < radii; ++a) {
    double rho = 0.25 + 1.5 * a / std::max(1, radii - 1);
    for (int t = 0; t < angles; ++t) {
      double th = 2 * kPi * (t + 0.31) / angles;
      axis.push_back(std::polar(rho, th));
    }
  }
  std::vector<int> idx(r, 0);
  while (true) {
    std::vector<complex> w(r);
    for (int k = 0; k < r; ++k) w[k] = axis[idx[k]];
    out.push_back(std::move(w));
    int k = 0;
    for (; k < r; ++k) {
      if (++idx[k] < (int)axis.size()) break;
      idx[k] = 0;
    }
    if (k == r) break;
  }
  return out;
}

MembershipReport hx_membership(const ChartWeight& phi,
                               const std::vector<std::vector<complex>>& z_samples,
                               int fiber_resolution, double tol) {
  MembershipReport rep;
  const int r = phi.r();
  rep.min_fiber_eig = std::numeric_limits<double>::infinity();
  rep.min_full_eig = std::numeric_limits<double>::infinity();
  auto probes = fiber_probes(r, fiber_resolution);
  for (const auto& z : z_samples) {
    for (int chart = 0; chart <= r; ++chart) {
      for (const auto& w : probes) {
        try {
          FiberForm f = fiber_form(phi, z, w, chart);
          if (r > 0) {
            EigenResult fib = hermitian_eigen(f.fiber());
            rep.min_fiber_eig = std::min(rep.min_fiber_eig, fib.values[0]);
          }
          EigenResult full = hermitian_eigen(f.full);
          rep.min_full_eig = std::min(rep.min_full_eig, full.values[0]);
          ++rep.fiber_samples;
        } catch (const error& e) {
          rep.failures.push_back("chart " + std::to_string(chart) + ": " + e.what());
        }
      }
    }
  }
  if (r == 0) rep.min_fiber_eig = 0;
  rep.fiber_positive = r == 0 || rep.min_fiber_eig > tol;
  rep.current_semi_positive = rep.min_full_eig >= -tol;
  return rep;
}

EquivalenceReport positivity_equivalence_check(const HermitianField& h,
                                               const std::vector<std::vector<complex>>& samples,
                                               double tol, std::uint64_t seed) {
  EquivalenceReport rep;
  const int r = h.rank() - 1;
  ChartWeight phi = induced_weight(h);
  FinslerForm dual = FinslerForm::dual_quadratic(h);
  auto probes = fiber_probes(r, 8);
  rng gen(seed + 99);

  for (const auto& z : samples) {
    EquivalenceSample s{};
    Verdict g = griffiths_verdict(chern_curvature(h, z), tol, 20, seed + 5);
    s.griffiths = g.cls;

    // Full form of the induced weight over fiber probes in every chart.
    double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin, fscale = 0;
    for (int chart = 0; chart <= r; ++chart)
      for (const auto& w : probes) {
        FiberForm f = fiber_form(phi, z, w, chart);
        EigenResult eig = hermitian_eigen(f.full);
        fmin = std::min(fmin, eig.values[0]);
        fmax = std::max(fmax, eig.values[eig.values.size() - 1]);
        fscale = std::max(fscale, max_abs(f.full));
      }
    s.full_form = classify(fmin, fmax, tol * std::max(fscale, 1e-300)).cls;

    // Kobayashi verdict of the dual form: sign of K contracted with fiber
    // vectors, over probe fiber points and probe vectors.
    double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin, kscale = 0;
    for (int probe = 0; probe < 3; ++probe) {
      cvec Z = gen.unit_cvec(r + 1);
      std::vector<complex> Zv(Z.data(), Z.data() + r + 1);
      CurvatureTensor k = kobayashi_tensor(dual, z, Zv);
      kscale = std::max(kscale, k.max_abs());
      for (int wtrial = 0; wtrial < 4; ++wtrial) {
        cvec wv = gen.unit_cvec(r + 1);
        cmat m(h.n(), h.n());
        for (int i = 0; i < h.n(); ++i)
          for (int j = 0; j < h.n(); ++j) {
            complex acc = 0;
            for (int a = 0; a <= r; ++a)
              for (int b = 0; b <= r; ++b)
                acc += k.at(a, b, i, j) * wv[a] * std::conj(wv[b]);
            m(i, j) = acc;
          }
        EigenResult eig = hermitian_eigen(hermitize(m));
        kmin = std::min(kmin, eig.values[0]);
        kmax = std::max(kmax, eig.values[eig.values.size() - 1]);
      }
    }
    s.kobayashi_dual = classify(kmin, kmax, tol * std::max(kscale, 1e-300)).cls;

    bool pos_side = s.griffiths == posclass::strictly_positive &&
                    s.full_form == posclass::strictly_positive &&
                    s.kobayashi_dual == posclass::strictly_negative;
    bool neg_side = s.griffiths == posclass::strictly_negative &&
                    (s.full_form == posclass::indefinite ||
                     s.full_form == posclass::strictly_negative ||
                     s.full_form == posclass::semi_negative) &&
                    s.kobayashi_dual == posclass::strictly_positive;
    bool boundary = (s.griffiths == posclass::semi_positive ||
                     s.griffiths == posclass::semi_negative) &&
                    (s.full_form == posclass::semi_positive ||
                     s.full_form == posclass::semi_negative) &&
                    (s.kobayashi_dual == posclass::semi_positive ||
                     s.kobayashi_dual == posclass::semi_negative);
    s.consistent = pos_side || neg_side || boundary;
    rep.all_consistent = rep.all_consistent && s.consistent;
    rep.samples.push_back(s);
  }
  return rep;
}

}  // namespace curvlab
