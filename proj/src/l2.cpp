#include "curvlab/l2.hpp"

#include <bit>
#include <cmath>
#include <map>

namespace curvlab {

complex basis_xi(int a, int chart, std::span<const complex> w) {
  if (a == chart) return complex(1, 0);
  return w[a < chart ? a : a - 1];
}

complex SectionXi::xi(int chart, std::span<const complex> w) const {
  complex acc = 0;
  for (int a = 0; a < (int)s.size(); ++a) acc += s[a] * basis_xi(a, chart, w);
  return acc;
}

L2Matrix l2_metric(const ChartWeight& phi, std::span<const complex> z, const FiberGrid& grid,
                   const QuadOpts& opts, bool check_tail) {
  const int r = phi.r();
  const int rank = r + 1;
  L2Matrix out;

  if (r == 0) {
    // Fiber is a point with unit mass; the metric is e^{-phi}.
    complex val = phi.eval(0, z, {});
    out.m = cmat::Constant(1, 1, std::exp(-val.real()));
    return out;
  }

  auto assemble = [&](const FiberGrid& g) {
    FiberIntegrand entries = [&](int chart, std::span<const complex> w,
                                 std::span<complex> acc) {
      double e = std::exp(-phi.eval(chart, z, w).real());
      for (int a = 0; a < rank; ++a) {
        complex xa = basis_xi(a, chart, w);
        for (int b = 0; b < rank; ++b)
          acc[a * rank + b] = xa * std::conj(basis_xi(b, chart, w)) * e;
      }
    };
    cvec flat = integrate_fiber_multi(rank * rank, phi, z, g, entries, opts);
    cmat m(rank, rank);
    for (int a = 0; a < rank; ++a)
      for (int b = 0; b < rank; ++b) m(a, b) = flat[a * rank + b];
    return hermitize(m);
  };

  out.m = assemble(grid);
  if (check_tail) {
    cmat finer = assemble(build_grid(r, grid.resolution() * 2));
    double growth = max_abs(cmat(finer - out.m)) / std::max(max_abs(out.m), 1e-300);
    out.refinement_growth = growth;
    if (growth > 0.10) out.divergence_flagged = true;
    out.m = finer;
  }
  Eigen::LLT<cmat> llt(out.m);
  out.positive_definite = llt.info() == Eigen::Success;
  return out;
}

MatrixField l2_metric_field(const ChartWeight& phi, const FiberGrid& grid,
                            const QuadOpts& opts) {
  auto cache = std::make_shared<std::map<std::vector<std::uint64_t>, cmat>>();
  ChartWeight w = phi;
  FiberGrid g = grid;
  QuadOpts o = opts;
  return [cache, w, g, o](std::span<const complex> z) {
    std::vector<std::uint64_t> key;
    key.reserve(2 * z.size());
    for (complex c : z) {
      key.push_back(std::bit_cast<std::uint64_t>(c.real()));
      key.push_back(std::bit_cast<std::uint64_t>(c.imag()));
    }
    auto it = cache->find(key);
    if (it != cache->end()) return it->second;
    cmat m = l2_metric(w, z, g, o).m;
    (*cache)[std::move(key)] = m;
    return m;
  };
}

RoundtripReport roundtrip_check(const HermitianField& h, std::span<const complex> z,
                                const FiberGrid& grid, const QuadOpts& opts) {
  RoundtripReport rep;
  rep.moment_factor = h.rank();
  ChartWeight phi = induced_weight(h);
  cmat l2 = l2_metric(phi, z, grid, opts).m;
  cmat hv = h.value_pd(z);

  double hh = 0, hl = 0;
  for (int a = 0; a < hv.rows(); ++a)
    for (int b = 0; b < hv.cols(); ++b) {
      hh += std::norm(hv(a, b));
      hl += (std::conj(hv(a, b)) * l2(a, b)).real();
    }
  rep.lambda = hl / hh;
  rep.residual = std::sqrt(cmat(l2 - rep.lambda * hv).squaredNorm() /
                           std::max(cmat(rep.lambda * hv).squaredNorm(), 1e-300));
  rep.fiber_volume = h.rank() == 1 ? 1.0 : fiber_volume(phi, z, grid, opts);
  rep.volume_match =
      std::abs(rep.lambda * rep.moment_factor - rep.fiber_volume) / rep.fiber_volume;
  return rep;
}

namespace {

struct KeSamples {
  std::vector<double> lhs;  // det of the fiber Hessian
  std::vector<double> rhs;  // e^{-(r+1) phi} / det H
};

KeSamples ke_samples(const ChartWeight& phi,
                     const std::function<complex(std::span<const complex>)>& det_h,
                     std::span<const complex> z,
                     const std::vector<std::vector<complex>>& probes) {
  const int r = phi.r();
  std::vector<int> dirs(r);
  for (int i = 0; i < r; ++i) dirs[i] = i;
  double dh = det_h ? det_h(z).real() : 1.0;
  if (!(dh > 0)) throw error(errkind::degenerate_metric, "ke: non-positive determinant");

  KeSamples out;
  std::vector<complex> zz(z.begin(), z.end());
  for (int chart = 0; chart <= r; ++chart) {
    ScalarField fiber = phi.fiber_field(chart, zz);
    for (const auto& w : probes) {
      double det = 1.0;
      if (r > 0) {
        Jet2 jet = jet2(fiber, w, dirs, 0);
        cmat hess = hermitize(jet.dd_matrix());
        Eigen::LLT<cmat> llt(hess);
        if (llt.info() != Eigen::Success)
          throw error(errkind::measure_degeneracy, "ke: fiber Hessian not positive at probe");
        det = hess.determinant().real();
      }
      double val = phi.eval(chart, z, w).real();
      out.lhs.push_back(det);
      out.rhs.push_back(std::exp(-(r + 1) * val) / dh);
    }
  }
  return out;
}

}  // namespace

double ke_residual(const ChartWeight& phi,
                   const std::function<complex(std::span<const complex>)>& det_h,
                   std::span<const complex> z, double c,
                   const std::vector<std::vector<complex>>& probes) {
  KeSamples s = ke_samples(phi, det_h, z, probes);
  double worst = 0, scale = 0;
  for (std::size_t k = 0; k < s.lhs.size(); ++k) {
    scale = std::max({scale, std::abs(s.lhs[k]), std::abs(c * s.rhs[k])});
    worst = std::max(worst, std::abs(s.lhs[k] - c * s.rhs[k]));
  }
  return worst / std::max(scale, 1e-300);
}

KeFit ke_fit(const ChartWeight& phi,
             const std::function<complex(std::span<const complex>)>& det_h,
             std::span<const complex> z, const std::vector<std::vector<complex>>& probes) {
  KeSamples s = ke_samples(phi, det_h, z, probes);
  double num = 0, den = 0;
  for (std::size_t k = 0; k < s.lhs.size(); ++k) {
    num += s.lhs[k] * s.rhs[k];
    den += s.rhs[k] * s.rhs[k];
  }
  KeFit fit;
  fit.c_fit = den > 0 ? num / den : 0;
  double worst = 0, scale = 0;
  for (std::size_t k = 0; k < s.lhs.size(); ++k) {
    scale = std::max({scale, std::abs(s.lhs[k]), std::abs(fit.c_fit * s.rhs[k])});
    worst = std::max(worst, std::abs(s.lhs[k] - fit.c_fit * s.rhs[k]));
  }
  fit.residual = worst / std::max(scale, 1e-300);
  return fit;
}

NormalizationReport normalization_constant_estimate(int r, int probe_resolution) {
  if (r < 1 || r > 2)
    throw error(errkind::capability, "normalization_constant_estimate: r in {1,2}");
  NormalizationReport rep;
  HermitianField h = HermitianField::constant(cmat::Identity(r + 1, r + 1), 1);
  ChartWeight phi = induced_weight(h);
  auto det_h = [](std::span<const complex>) { return complex(1, 0); };
  auto probes = fiber_probes(r, 4 * probe_resolution);

  std::vector<double> cs;
  for (int k = 0; k < 10; ++k) {
    std::vector<complex> z{complex(-0.45 + 0.1 * k, 0.07 * k - 0.3)};
    cs.push_back(ke_fit(phi, det_h, z, probes).c_fit);
  }
  double mean = 0;
  for (double c : cs) mean += c;
  mean /= cs.size();
  double var = 0;
  for (double c : cs) var += (c - mean) * (c - mean);
  var /= cs.size();
  rep.c_mean = mean;
  rep.coefficient_of_variation = std::sqrt(var) / std::abs(mean);
  double fact = 1;
  for (int i = 2; i <= r + 1; ++i) fact *= i;
  rep.paper_value = std::pow(fact, -r);
  rep.ratio = mean / rep.paper_value;
  rep.base_points = (int)cs.size();
  return rep;
}

namespace {

// Constant frame change making H(z0) the identity: S = conj(U) L^{-1/2}.
cmat orthonormal_frame(const cmat& h_at_z) {
  EigenResult eig = hermitian_eigen(h_at_z);
  cmat lam_isqrt = cmat::Zero(h_at_z.rows(), h_at_z.cols());
  for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
    if (!(eig.values[k] > 0))
      throw error(errkind::degenerate_metric, "orthonormal_frame: metric not positive");
    lam_isqrt(k, k) = 1.0 / std::sqrt(eig.values[k]);
  }
  return eig.vectors.conjugate() * lam_isqrt;
}

CurvatureTensor curvature_of_matrix_field(const MatrixField& f, int rank, int n,
                                          std::span<const complex> z, double step) {
  MatrixJet2 jet;
  std::vector<int> dirs(n);
  for (int i = 0; i < n; ++i) dirs[i] = i;
  jet = matrix_jet2(f, z, dirs, step);
  cmat inv = jet.value.inverse();
  CurvatureTensor theta(rank, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cmat block = -jet.dd[i][j] + jet.d[i] * inv * jet.dbar[j];
      for (int a = 0; a < rank; ++a)
        for (int b = 0; b < rank; ++b) theta.at(a, b, i, j) = block(a, b);
    }
  return theta;
}

}  // namespace

DualityReport duality_check(const HermitianField& h, std::span<const complex> z,
                            const FiberGrid& grid, const QuadOpts& opts,
                            double l2_curvature_step) {
  const int rank = h.rank(), n = h.n();
  cmat s = orthonormal_frame(h.value_pd(z));
  HermitianField hframe = h.reframed(s);

  // Route 1: curvature of the quadrature metric of the induced weight.
  CurvatureTensor t1;
  if (rank == 1) {
    ChartWeight phi = induced_weight(hframe);
    MatrixField f = [phi, n](std::span<const complex> zp) {
      complex val = phi.eval(0, zp.subspan(0, (std::size_t)n), {});
      return cmat::Constant(1, 1, std::exp(-val.real()));
    };
    t1 = curvature_of_matrix_field(f, 1, n, z.subspan(0, (std::size_t)n), l2_curvature_step);
  } else {
    ChartWeight phi = induced_weight(hframe);
    MatrixField f = l2_metric_field(phi, grid, opts);
    t1 = curvature_of_matrix_field(f, rank, n, z.subspan(0, (std::size_t)n),
                                   l2_curvature_step);
  }

  // Route 2: bundle-transposed Kobayashi tensor of the dual quadratic form.
  FinslerForm dual = FinslerForm::dual_quadratic(hframe);
  std::vector<complex> probe(rank, complex(1.0 / std::sqrt((double)rank), 0));
  CurvatureTensor k = kobayashi_tensor(dual, z, probe);
  CurvatureTensor t2 = k.transposed_bundle().scaled(complex(-1, 0));

  DualityReport rep;
  double num = 0, den = 0, t1max = 0;
  for (int a = 0; a < rank; ++a)
    for (int b = 0; b < rank; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          complex v1 = t1.at(a, b, i, j), v2 = t2.at(a, b, i, j);
          num += (std::conj(v2) * v1).real();
          den += std::norm(v2);
          t1max = std::max(t1max, std::abs(v1));
        }
  rep.lambda = den > 0 ? num / den : 0;
  rep.scale = t1max;
  double worst = 0;
  for (int a = 0; a < rank; ++a)
    for (int b = 0; b < rank; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          worst = std::max(worst,
                           std::abs(t1.at(a, b, i, j) - rep.lambda * t2.at(a, b, i, j)));
  rep.rel_deviation = worst / std::max(t1max, 1e-300);
  return rep;
}

PushforwardReport det_pushforward_check(const HermitianField& h, std::span<const complex> z,
                                        const FiberGrid& grid, const QuadOpts& opts,
                                        double l2_curvature_step) {
  const int rank = h.rank(), n = h.n();
  ChartWeight phi = induced_weight(h);
  PushforwardReport rep;
  rep.convention_factor = rank;

  // LHS: det-curvature of the quadrature metric field.
  ScalarField logdet;
  if (rank == 1) {
    ChartWeight p0 = phi;
    logdet = [p0, n](std::span<const complex> zp) {
      return complex(-p0.eval(0, zp.subspan(0, (std::size_t)n), {}).real(), 0);
    };
  } else {
    MatrixField f = l2_metric_field(phi, grid, opts);
    logdet = [f](std::span<const complex> zp) {
      complex det = f(zp).determinant();
      if (!(det.real() > 0))
        throw error(errkind::degenerate_metric, "det_pushforward: non-positive determinant");
      return std::log(det.real());
    };
  }
  std::vector<int> dirs(n);
  for (int i = 0; i < n; ++i) dirs[i] = i;
  Jet2 jet = jet2(logdet, z.subspan(0, (std::size_t)n), dirs, l2_curvature_step);
  rep.lhs = hermitize(cmat(-jet.dd_matrix()));

  // RHS: fiber integral of the geodesic curvature times the rank.
  cmat integral = cmat::Zero(n, n);
  if (rank == 1) {
    std::vector<complex> w0;
    integral = geodesic_curvature(phi, z, w0, 0);
  } else {
    FiberIntegrand f = [&](int chart, std::span<const complex> w, std::span<complex> acc) {
      cmat c = geodesic_curvature(phi, z, w, chart);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc[i * n + j] = c(i, j);
    };
    cvec flat = integrate_fiber_multi(n * n, phi, z, grid, f, opts);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) integral(i, j) = flat[i * n + j];
  }
  rep.rhs = hermitize(cmat(double(rank) * integral));
  rep.rel_deviation =
      max_abs(cmat(rep.lhs - rep.rhs)) / std::max(max_abs(rep.lhs), 1e-300);
  return rep;
}

}  // namespace curvlab
