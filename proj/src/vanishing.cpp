#include "curvlab/vanishing.hpp"

#include <cmath>

namespace curvlab {

double SingularBaseWeight::eval(complex z) const {
  double val = 0;
  if (log_coeff != 0) {
    double n2 = std::norm(z);
    if (n2 == 0) throw error(errkind::domain, "base weight: log singularity at the point");
    val += log_coeff * std::log(n2);
  }
  if (smooth) {
    complex zs[1] = {z};
    val += eval_scalar(smooth, Bindings{std::span<const complex>(zs, 1), {}, {}}).real();
  }
  return val;
}

SingularBaseWeight SingularBaseWeight::from_scene(const Scene& sc) {
  if (!sc.stable)
    throw error(errkind::input, "scene does not define a singular base weight");
  SingularBaseWeight w;
  w.log_coeff = sc.stable->log_coeff;
  if (sc.stable->smooth_coeff != 0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g*abs2(z1)", sc.stable->smooth_coeff);
    w.smooth = parse_scalar(buf);
  }
  return w;
}

std::int64_t symmetric_rank(int r) {
  if (r < 1 || r > 30)
    throw error(errkind::input, "symmetric_rank: r must be in [1, 30] (overflow guard)");
  // binomial(2r+2, r+2) with 128-bit intermediates.
  unsigned __int128 res = 1;
  int n = 2 * r + 2, k = r;  // binomial symmetry: C(2r+2, r+2) = C(2r+2, r)
  for (int i = 1; i <= k; ++i) {
    res = res * (unsigned __int128)(n - k + i);
    res /= (unsigned __int128)i;
  }
  return (std::int64_t)res;
}

ThresholdReport vanishing_threshold(int r) {
  if (r < 1) throw error(errkind::input, "vanishing_threshold: r must be >= 1");
  ThresholdReport rep;
  rep.r = r;
  rep.big_r = symmetric_rank(r);
  rep.threshold = 2.0 * (double)rep.big_r / ((double)(r + 2) * (double)(r + 3));
  rep.gt_one = rep.threshold > 1.0;
  return rep;
}

LelongReport lelong_estimate(const SingularBaseWeight& phi, complex point,
                             std::vector<double> radii) {
  if (radii.empty())
    for (int k = 0; k <= 6; ++k) radii.push_back(std::pow(10.0, -2.0 - 0.5 * k));
  for (double rho : radii)
    if (!(rho > 1e-300)) throw error(errkind::input, "lelong_estimate: radius underflow");

  const int angles = 32;
  std::vector<double> xs, ys;
  for (double rho : radii) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < angles; ++a) {
      complex z = point + std::polar(rho, 2 * kPi * (a + 0.5) / angles);
      mx = std::max(mx, phi.eval(z));
    }
    xs.push_back(std::log(rho * rho));
    ys.push_back(mx);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = (int)xs.size();
  for (int k = 0; k < m; ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  double intercept = (sy - slope * sx) / m;
  LelongReport rep;
  rep.nu = slope;
  for (int k = 0; k < m; ++k)
    rep.fit_residual = std::max(rep.fit_residual, std::abs(ys[k] - slope * xs[k] - intercept));
  if (std::abs(slope) < 0.02) {
    rep.nu = 0;
    rep.confident = false;
    rep.note = "no logarithmic slope detected; treating the weight as locally bounded";
  }
  return rep;
}

std::string to_string(integrability c) {
  switch (c) {
    case integrability::integrable: return "integrable";
    case integrability::divergent: return "divergent";
    case integrability::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

// Integral of e^{-t phi} over the annuli [outer 2^-(k+1), outer 2^-k],
// k < depth, by midpoint quadrature in (radius, angle).
double annulus_sum(const SingularBaseWeight& phi, double t, double outer, int depth) {
  const int rad_nodes = 4, angles = 16;
  double total = 0;
  for (int k = 0; k < depth; ++k) {
    double hi = outer * std::pow(0.5, k);
    double lo = hi / 2;
    double dr = (hi - lo) / rad_nodes;
    double ring = 0;
    for (int ir = 0; ir < rad_nodes; ++ir) {
      double rho = lo + dr * (ir + 0.5);
      double ang_acc = 0;
      for (int ia = 0; ia < angles; ++ia) {
        complex z = std::polar(rho, 2 * kPi * (ia + 0.5) / angles);
        ang_acc += std::exp(-t * phi.eval(z));
      }
      ring += ang_acc * (2 * kPi / angles) * rho * dr;
    }
    total += ring;
    if (!std::isfinite(total) || total > 1e100) return std::numeric_limits<double>::infinity();
  }
  return total;
}

}  // namespace

IntegrabilityReport integrability_classify(const SingularBaseWeight& phi, double t,
                                           double outer_radius, int base_depth) {
  if (!(t > 0)) throw error(errkind::input, "integrability_classify: t must be positive");
  IntegrabilityReport rep;
  int depth = base_depth;
  for (int k = 0; k < 3; ++k) {
    rep.partial_sums.push_back(annulus_sum(phi, t, outer_radius, depth));
    depth *= 2;
    if (!std::isfinite(rep.partial_sums.back())) break;
  }
  if (!std::isfinite(rep.partial_sums.back())) {
    rep.cls = integrability::divergent;
    return rep;
  }
  bool all_big = true, all_small = true;
  for (std::size_t k = 0; k + 1 < rep.partial_sums.size(); ++k) {
    double growth = (rep.partial_sums[k + 1] - rep.partial_sums[k]) /
                    std::max(rep.partial_sums[k], 1e-300);
    rep.growth.push_back(growth);
    all_big = all_big && growth > 0.10;
    all_small = all_small && std::abs(growth) < 0.01;
  }
  rep.cls = all_big       ? integrability::divergent
            : all_small   ? integrability::integrable
                          : integrability::inconclusive;
  return rep;
}

StableModelReport stable_model_check(const Scene& sc,
                                     const std::vector<std::vector<complex>>& samples,
                                     const std::vector<std::vector<complex>>& fiber_points) {
  if (!sc.stable) throw error(errkind::input, "stable_model_check: not a stable-model scene");
  const int r = sc.r();
  ChartWeight phi = ChartWeight::from_scene(sc);
  SingularBaseWeight base = SingularBaseWeight::from_scene(sc);

  StableModelReport rep;
  std::vector<int> zdir{0};
  for (const auto& z : samples) {
    // Hessian of the base weight alone (0 for the pure-log part away from 0).
    ScalarField base_field = [&base](std::span<const complex> p) {
      return complex(base.eval(p[0]), 0);
    };
    Jet2 bjet = jet2(base_field, std::span<const complex>(z.data(), 1), zdir, 0);
    complex base_hess = bjet.dd[0][0];

    for (const auto& w : fiber_points) {
      FiberForm f = fiber_form(phi, z, w);
      rep.max_mixed_block = std::max(rep.max_mixed_block, max_abs(f.base_fiber()));
      rep.base_block_deviation = std::max(
          rep.base_block_deviation, std::abs(f.base()(0, 0) - base_hess / double(r + 1)));
      // Fubini-Study fiber block of log(1 + |w|^2) at w.
      cmat fs(r, r);
      double q = 1;
      for (int k = 0; k < r; ++k) q += std::norm(w[k]);
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
          fs(a, b) = ((a == b ? q : 0.0) - w[a] * std::conj(w[b])) / (q * q);
      rep.fiber_block_deviation =
          std::max(rep.fiber_block_deviation, max_abs(cmat(f.fiber() - fs)));
      ++rep.samples;
    }
  }
  return rep;
}

VanishingReport vanishing_report(const Scene& sc, int r) {
  VanishingReport rep;
  rep.r = r;
  rep.threshold = vanishing_threshold(r);
  SingularBaseWeight base = SingularBaseWeight::from_scene(sc);
  rep.lelong = lelong_estimate(base);
  rep.nu_below_threshold = rep.lelong.nu < rep.threshold.threshold;
  rep.nu_below_one = rep.lelong.nu < 1.0;
  rep.t_used = 1.0 / rep.threshold.threshold;
  rep.integrability = integrability_classify(base, rep.t_used);

  // Strict-positivity proxy of the model weight at the scene samples.
  ChartWeight phi = ChartWeight::from_scene(sc);
  MembershipReport member = hx_membership(phi, sc.samples, 8, sc.tol);
  rep.curvature_positive = member.fiber_positive && member.min_full_eig > -sc.tol;

  bool integ_ok = rep.integrability.cls == integrability::integrable;
  bool integ_bad = rep.integrability.cls == integrability::divergent;
  if (rep.nu_below_threshold && integ_ok && rep.curvature_positive)
    rep.conclusion = "satisfied";
  else if (!rep.nu_below_threshold || integ_bad || !rep.curvature_positive)
    rep.conclusion = "not-satisfied";
  else
    rep.conclusion = "inconclusive";

  rep.statement =
      "hypothesis check only: the cohomology vanishing itself is asserted by the underlying theory, "
      "not computed here; fiber integrals use the top (r-th) power of the fiber form";
  return rep;
}

}  // namespace curvlab
