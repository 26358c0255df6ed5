#include <doctest.h>

#include <chrono>

#include "curvlab/l2.hpp"
#include "curvlab/quadrature.hpp"
#include "oracles.hpp"

using namespace curvlab;

namespace {

ChartWeight trivial_weight(int r) {
  return ChartWeight::from_scene(builtin_scene("trivial", 1, r));
}

std::vector<complex> origin{complex(0, 0)};

}  // namespace

TEST_CASE("grid construction") {
  FiberGrid g1 = build_grid(1, 64);
  CHECK(g1.charts() == 2);
  CHECK(g1.nodes_per_chart() == 64 * 64);
  FiberGrid g2 = build_grid(2, 16);
  CHECK(g2.charts() == 3);
  CHECK(g2.nodes_per_chart() == (std::size_t)16 * 16 * 16 * 16);
  CHECK_THROWS_AS(build_grid(4, 64), error);
  CHECK_THROWS_AS(build_grid(0, 64), error);
  CHECK_THROWS_AS(build_grid(1, 4), error);
}

TEST_CASE("partition weights sum to one across charts") {
  rng gen(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<complex> Z{gen.cnormal(), gen.cnormal(), gen.cnormal()};
    double total = 0;
    for (int chart = 0; chart < 3; ++chart) {
      std::vector<complex> w;
      for (int a = 0; a < 3; ++a)
        if (a != chart) w.push_back(Z[a] / Z[chart]);
      total += FiberGrid::partition_weight(w);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("fiber volume of the trivial weight is pinned to 1") {
  // r = 1 through the expression weight (stencil densities), r = 2 through
  // the induced weight (closed-form densities).
  CHECK(fiber_volume(trivial_weight(1), origin, build_grid(1, 64)) ==
        doctest::Approx(1.0).epsilon(1e-8));
  ChartWeight ind = induced_weight(HermitianField::constant(cmat::Identity(3, 3), 1));
  CHECK(fiber_volume(ind, origin, build_grid(2, 24)) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("refining the resolution leaves the volume fixed to 1e-6") {
  ChartWeight phi = trivial_weight(1);
  double v64 = fiber_volume(phi, origin, build_grid(1, 64));
  double v128 = fiber_volume(phi, origin, build_grid(1, 128));
  CHECK(std::abs(v128 - v64) / std::abs(v128) <= 1e-6);
}

TEST_CASE("half-mass integrand by the w <-> 1/w symmetry") {
  ChartWeight phi = trivial_weight(1);
  FiberGrid grid = build_grid(1, 64);
  auto f = [](int chart, std::span<const complex> w) {
    // |w|^2/(1+|w|^2) in chart 0 equals 1/(1+|w|^2) in chart 1: the global
    // function |Z1|^2/|Z|^2.
    double t = std::norm(w[0]);
    return complex(chart == 0 ? t / (1 + t) : 1.0 / (1 + t), 0);
  };
  CHECK(integrate_fiber(f, phi, origin, grid).real() == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("base shift of the weight does not move the fiber measure") {
  Scene sc = builtin_scene("product", 1, 1, {0.8});
  ChartWeight product = ChartWeight::from_scene(sc);
  ChartWeight fs = trivial_weight(1);
  FiberGrid grid = build_grid(1, 48);
  std::vector<complex> z{complex(0.4, -0.2)};
  double a = fiber_volume(product, z, grid);
  double b = fiber_volume(fs, z, grid);
  CHECK(a == doctest::Approx(b).epsilon(1e-8));
}

TEST_CASE("second moments: quadrature against the beta-integral oracle") {
  for (int r : {1, 2}) {
    for (int alpha = 0; alpha <= r; ++alpha) {
      double expect = oracles::fs_second_moment(r, alpha);
      CHECK(expect == doctest::Approx(1.0 / (r + 1)).epsilon(1e-12));
      double got = fs_moment(r, {alpha, alpha});
      CHECK(std::abs(got - expect) <= 1e-6);
    }
    CHECK(std::abs(fs_moment(r, {0, 1})) <= 1e-9);  // phase symmetry
  }
}

TEST_CASE("fourth moments match (dd + dd)/((r+1)(r+2))") {
  // r = 1 values from the radial beta integrals: 1/3 and 1/6.
  CHECK(oracles::fs_fourth_moment_paired(1, 0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(oracles::fs_fourth_moment_paired(1, 0, 1) == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(std::abs(fs_moment(1, {0, 0, 0, 0}) - 1.0 / 3) <= 1e-6);
  CHECK(std::abs(fs_moment(1, {0, 0, 1, 1}) - 1.0 / 6) <= 1e-6);
  CHECK(std::abs(fs_moment(1, {0, 1, 1, 0}) - 1.0 / 6) <= 1e-6);
  // r = 2: 1/((3)(4)) for the unequal pair.
  CHECK(oracles::fs_fourth_moment_paired(2, 0, 1) == doctest::Approx(1.0 / 12).epsilon(1e-12));
  CHECK(std::abs(fs_moment(2, {0, 0, 1, 1}) - 1.0 / 12) <= 1e-6);
  CHECK(std::abs(fs_moment(2, {0, 0, 0, 0}) - 1.0 / 6) <= 1e-6);
  for (int r : {1, 2})
    CHECK(fs_moment_closed_form(r, {0, 0, 1, 1}) ==
          doctest::Approx(1.0 / ((r + 1) * (r + 2))).epsilon(1e-14));
  CHECK_THROWS_AS(fs_moment(1, {0}), error);
  CHECK_THROWS_AS(fs_moment(1, {0, 3}), error);
}

TEST_CASE("moments are invariant under a unitary rotation") {
  rng gen(17);
  cmat m(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) m(a, b) = gen.cnormal();
  Eigen::HouseholderQR<cmat> qr(m);
  cmat q = qr.householderQ();
  CHECK(std::abs(fs_moment_rotated(1, {0, 0}, q) - 0.5) <= 1e-6);
  CHECK(std::abs(fs_moment_rotated(1, {0, 0, 1, 1}, q) - 1.0 / 6) <= 1e-6);
}

TEST_CASE("sum of second moments equals the measure mass") {
  // same induced measure as the moment integrals, so the node densities agree
  ChartWeight phi = induced_weight(HermitianField::constant(cmat::Identity(2, 2), 1));
  FiberGrid grid = build_grid(1, 32);
  double mass = fiber_volume(phi, origin, grid);
  double sum = fs_moment(1, {0, 0}, 32) + fs_moment(1, {1, 1}, 32);
  CHECK(std::abs(sum - mass) <= 1e-12 * std::abs(mass));
}

TEST_CASE("chart independence of a single-chart global integral") {
  ChartWeight phi = trivial_weight(1);
  FiberGrid grid = build_grid(1, 64);
  auto f = [](int chart, std::span<const complex> w) {
    std::vector<complex> Z{chart == 0 ? complex(1, 0) : w[0],
                           chart == 0 ? w[0] : complex(1, 0)};
    double n2 = std::norm(Z[0]) + std::norm(Z[1]);
    return complex(std::norm(Z[0]) * std::norm(Z[1]) / (n2 * n2), 0);
  };
  complex a = integrate_single_chart(f, phi, origin, grid, 0);
  complex b = integrate_single_chart(f, phi, origin, grid, 1);
  CHECK(std::abs(a - b) <= 2e-6);
}

TEST_CASE("degenerate fiber Hessian names the failing node") {
  ExprPtr e = parse_scalar("0 - log(1 + abs2(w1))");
  ChartWeight phi = ChartWeight::from_expr(e, 1, 1, 0);
  FiberGrid grid = build_grid(1, 8);
  auto one = [](int, std::span<const complex>) { return complex(1, 0); };
  CHECK_THROWS_WITH_AS(integrate_fiber(one, phi, origin, grid),
                       doctest::Contains("node"), error);
}

TEST_CASE("raw measure restores the (2 pi)^r factors") {
  ChartWeight phi = trivial_weight(1);
  FiberGrid grid = build_grid(1, 32);
  QuadOpts raw;
  raw.raw_measure = true;
  CHECK(fiber_volume(phi, origin, grid, raw) ==
        doctest::Approx(2 * kPi).epsilon(1e-8));
}

TEST_CASE("divergence proxy on closed-form families") {
  // eval(resolution) models partial sums: convergent, log-divergent, growing.
  Refinement conv = refine_integral([](int res) { return 1.0 - 1.0 / res; }, 64);
  CHECK(!conv.divergent);
  CHECK(!conv.inconclusive);
  Refinement div = refine_integral([](int res) { return (double)res; }, 16);
  CHECK(div.divergent);
  Refinement log_like = refine_integral([](int res) { return std::log((double)res); }, 8);
  CHECK(log_like.divergent);
  Refinement slow =
      refine_integral([](int res) { return 1.0 - 0.3 / std::sqrt((double)res); }, 16);
  CHECK(slow.inconclusive);
}

TEST_CASE("moment runtime stays within budget") {
  for (int r : {1, 2}) {
    auto t0 = std::chrono::steady_clock::now();
    fs_moment(r, {0, 0});
    fs_moment(r, {0, 0, 1, 1});
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 10.0);
  }
}
