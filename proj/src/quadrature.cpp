#include "curvlab/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace curvlab {

double& debug_volume_scale() {
  static double s = 1.0;
  return s;
}

namespace {

// Gauss-Legendre nodes on (-1, 1) by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[n - 1 - i] = t;
    w[n - 1 - i] = 2.0 / ((1 - t * t) * dp * dp);
  }
}

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

std::vector<int> fiber_dirs(int r) {
  std::vector<int> d(r);
  for (int i = 0; i < r; ++i) d[i] = i;
  return d;
}

}  // namespace

FiberGrid build_grid(int r, int resolution) {
  if (r < 1 || r > 3)
    throw error(errkind::capability, "build_grid: supported fiber dimensions are r in {1,2,3}");
  if (resolution < 8) throw error(errkind::input, "build_grid: resolution must be >= 8");
  FiberGrid g;
  g.r_ = r;
  g.resolution_ = resolution;
  gauss_legendre(resolution, g.gl_x, g.gl_w);
  g.ang.resize(resolution);
  for (int k = 0; k < resolution; ++k) g.ang[k] = 2 * kPi * (k + 0.5) / resolution;
  g.ang_w.assign(resolution, 2 * kPi / resolution);
  std::size_t per_coord = (std::size_t)resolution * resolution;
  g.nodes_per_chart_ = 1;
  for (int k = 0; k < r; ++k) g.nodes_per_chart_ *= per_coord;
  return g;
}

FiberGrid::Node FiberGrid::node(std::size_t flat) const {
  Node out;
  out.w.resize(r_);
  out.leb_weight = node_into(flat, out.w.data());
  return out;
}

double FiberGrid::node_into(std::size_t flat, complex* w) const {
  double leb = 1.0;
  std::size_t rem = flat;
  for (int k = 0; k < r_; ++k) {
    std::size_t ia = rem % resolution_;
    rem /= resolution_;
    std::size_t ix = rem % resolution_;
    rem /= resolution_;
    double x = gl_x[ix];
    double rho = std::sqrt((1 - x) / (1 + x));  // tan(colatitude/2)
    w[k] = std::polar(rho, ang[ia]);
    // Lebesgue density of the (x, theta) cell: dV = dx dtheta / (1+x)^2.
    leb *= gl_w[ix] * ang_w[ia] / ((1 + x) * (1 + x));
  }
  return leb;
}

double FiberGrid::partition_weight(std::span<const complex> w) {
  double denom = 1;
  for (complex c : w) denom += std::norm(c);
  return 1.0 / denom;
}

namespace {

// Per-chart density evaluator: the fiber Hessian comes from the weight's
// closed form when available, otherwise from stencils. `hess` is reused
// between nodes of one thread.
struct DensityEval {
  int r;
  int chart;
  double norm;  // r!/pi^r with the raw and debug factors folded in
  ChartWeight::HessAtFn analytic;  // either this ...
  ScalarField fiber;               // ... or stencils of this field

  double operator()(std::span<const complex> w, cmat& hess, std::size_t flat) const {
    if (analytic) {
      analytic(chart, w, hess);
    } else {
      Jet2 jet = jet2(fiber, w, fiber_dirs(r), 0);
      hess = hermitize(jet.dd_matrix());
    }
    // Sylvester minors: positive-definiteness and the determinant in one
    // pass for r <= 3; avoids a factorization per node.
    double m1 = hess(0, 0).real();
    double det = m1;
    bool pd = m1 > 0;
    if (r >= 2) {
      double m2 = m1 * hess(1, 1).real() - std::norm(hess(0, 1));
      pd = pd && m2 > 0;
      det = m2;
      if (r == 3) {
        complex c01 = hess(0, 1), c02 = hess(0, 2), c12 = hess(1, 2);
        double d0 = hess(0, 0).real(), d1 = hess(1, 1).real(), d2 = hess(2, 2).real();
        double m3 = d0 * d1 * d2 - d0 * std::norm(c12) - d1 * std::norm(c02) -
                    d2 * std::norm(c01) + 2 * (c01 * c12 * std::conj(c02)).real();
        pd = pd && m3 > 0;
        det = m3;
      }
    }
    if (!pd) {
      std::ostringstream os;
      os << "integrate_fiber: fiber Hessian not positive-definite at chart " << chart
         << " node " << flat << " w = (";
      for (int k = 0; k < r; ++k)
        os << w[k].real() << (w[k].imag() < 0 ? "" : "+") << w[k].imag()
           << (k + 1 < r ? "i, " : "i)");
      throw error(errkind::measure_degeneracy, os.str());
    }
    return det * norm;
  }
};

DensityEval make_density(const ChartWeight& phi, std::span<const complex> z, int chart,
                         const std::vector<complex>& zz, const QuadOpts& opts) {
  DensityEval d;
  d.r = phi.r();
  d.chart = chart;
  d.norm = factorial(phi.r()) / std::pow(kPi, phi.r()) * debug_volume_scale();
  if (opts.raw_measure) d.norm *= std::pow(2 * kPi, phi.r());
  if (phi.has_analytic_fiber_hessian())
    d.analytic = phi.bind_fiber_hessian(z);
  else
    d.fiber = phi.fiber_field(chart, zz);
  return d;
}

}  // namespace

cvec integrate_fiber_multi(int dim, const ChartWeight& phi, std::span<const complex> z,
                           const FiberGrid& grid, const FiberIntegrand& f,
                           const QuadOpts& opts) {
  if (grid.r() != phi.r())
    throw error(errkind::input, "integrate_fiber: grid and weight fiber dimensions differ");
  if (dim > 16) throw error(errkind::input, "integrate_fiber: at most 16 components");
  std::vector<complex> zz(z.begin(), z.end());
  const int r = grid.r();
  cvec total = cvec::Zero(dim);
  std::size_t n = grid.nodes_per_chart();
  std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<std::array<complex, 16>> partial(nblocks);
  for (int chart = 0; chart < grid.charts(); ++chart) {
    DensityEval density = make_density(phi, z, chart, zz, opts);
    parallel_for(nblocks, opts.ex, [&](std::size_t b) {
      std::array<complex, 16> acc{};
      std::array<complex, 16> vals;
      std::array<complex, 3> wbuf;
      cmat hess(r, r);
      std::size_t lo = b * kReduceBlock, hi = std::min(n, lo + kReduceBlock);
      for (std::size_t flat = lo; flat < hi; ++flat) {
        double leb = grid.node_into(flat, wbuf.data());
        std::span<const complex> w(wbuf.data(), (std::size_t)r);
        double den = density(w, hess, flat);
        double pw = FiberGrid::partition_weight(w);
        double scale = den * pw * leb;
        for (int k = 0; k < dim; ++k) vals[k] = complex(0, 0);
        f(chart, w, std::span<complex>(vals.data(), dim));
        for (int k = 0; k < dim; ++k) acc[k] += vals[k] * scale;
      }
      partial[b] = acc;
    });
    for (int k = 0; k < dim; ++k) {
      std::vector<complex> col(nblocks);
      for (std::size_t b = 0; b < nblocks; ++b) col[b] = partial[b][k];
      total[k] += pairwise_sum(col);
    }
  }
  return total;
}

complex integrate_fiber(const std::function<complex(int, std::span<const complex>)>& f,
                        const ChartWeight& phi, std::span<const complex> z,
                        const FiberGrid& grid, const QuadOpts& opts) {
  FiberIntegrand wrap = [&f](int chart, std::span<const complex> w, std::span<complex> out) {
    out[0] = f(chart, w);
  };
  return integrate_fiber_multi(1, phi, z, grid, wrap, opts)[0];
}

double fiber_volume(const ChartWeight& phi, std::span<const complex> z, const FiberGrid& grid,
                    const QuadOpts& opts) {
  auto one = [](int, std::span<const complex>) { return complex(1, 0); };
  return integrate_fiber(one, phi, z, grid, opts).real();
}

complex integrate_single_chart(const std::function<complex(int, std::span<const complex>)>& f,
                               const ChartWeight& phi, std::span<const complex> z,
                               const FiberGrid& grid, int chart, const QuadOpts& opts) {
  std::vector<complex> zz(z.begin(), z.end());
  DensityEval density = make_density(phi, z, chart, zz, opts);
  const int r = grid.r();
  return parallel_sum<complex>(grid.nodes_per_chart(), opts.ex, [&](std::size_t flat) {
    std::array<complex, 3> wbuf;
    cmat hess(r, r);
    double leb = grid.node_into(flat, wbuf.data());
    std::span<const complex> w(wbuf.data(), (std::size_t)r);
    return f(chart, w) * (density(w, hess, flat) * leb);
  });
}

Refinement refine_integral(const std::function<double(int resolution)>& eval,
                           int base_resolution, int doublings) {
  Refinement out;
  int res = base_resolution;
  out.history.push_back(eval(res));
  bool all_big = true, all_small = true;
  for (int k = 0; k < doublings; ++k) {
    res *= 2;
    out.history.push_back(eval(res));
    double prev = std::abs(out.history[k]);
    double growth = prev > 0 ? (out.history[k + 1] - out.history[k]) / prev
                             : std::abs(out.history[k + 1]);
    all_big = all_big && growth > 0.10;
    all_small = all_small && std::abs(growth) < 0.01;
  }
  out.value = out.history.back();
  out.divergent = all_big;
  out.inconclusive = !all_big && !all_small;
  return out;
}

namespace {

complex homog_coord(int a, int chart, std::span<const complex> w) {
  if (a == chart) return complex(1, 0);
  return w[a < chart ? a : a - 1];
}

double moment_impl(int r, const std::vector<int>& pattern, const cmat* u, int resolution,
                   const QuadOpts& opts) {
  if (pattern.size() != 2 && pattern.size() != 4)
    throw error(errkind::input, "fs_moment: pattern must be second or fourth order");
  for (int idx : pattern)
    if (idx < 0 || idx > r) throw error(errkind::input, "fs_moment: index out of range");
  if (resolution <= 0) resolution = r == 1 ? 64 : 36;

  HermitianField id = HermitianField::constant(cmat::Identity(r + 1, r + 1), 1);
  ChartWeight fs = induced_weight(id);
  FiberGrid grid = build_grid(r, resolution);
  std::vector<complex> z(1, complex(0, 0));

  auto f = [&](int chart, std::span<const complex> w) -> complex {
    std::array<complex, 4> Z;
    double n2 = 0;
    for (int a = 0; a <= r; ++a) Z[a] = homog_coord(a, chart, w);
    if (u) {
      std::array<complex, 4> rot{};
      for (int a = 0; a <= r; ++a)
        for (int b = 0; b <= r; ++b) rot[a] += (*u)(a, b) * Z[b];
      Z = rot;
    }
    for (int a = 0; a <= r; ++a) n2 += std::norm(Z[a]);
    if (pattern.size() == 2)
      return Z[pattern[0]] * std::conj(Z[pattern[1]]) / n2;
    return Z[pattern[0]] * std::conj(Z[pattern[1]]) * Z[pattern[2]] *
           std::conj(Z[pattern[3]]) / (n2 * n2);
  };
  return integrate_fiber(f, fs, z, grid, opts).real();
}

}  // namespace

double fs_moment(int r, const std::vector<int>& pattern, int resolution, const QuadOpts& opts) {
  return moment_impl(r, pattern, nullptr, resolution, opts);
}

double fs_moment_rotated(int r, const std::vector<int>& pattern, const cmat& u, int resolution,
                         const QuadOpts& opts) {
  return moment_impl(r, pattern, &u, resolution, opts);
}

double fs_moment_closed_form(int r, const std::vector<int>& pattern) {
  auto kron = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  if (pattern.size() == 2) return kron(pattern[0], pattern[1]) / (r + 1);
  if (pattern.size() == 4) {
    double dd = kron(pattern[0], pattern[1]) * kron(pattern[2], pattern[3]) +
                kron(pattern[0], pattern[3]) * kron(pattern[2], pattern[1]);
    return dd / ((r + 1) * (r + 2));
  }
  throw error(errkind::input, "fs_moment_closed_form: pattern must be second or fourth order");
}

}  // namespace curvlab
