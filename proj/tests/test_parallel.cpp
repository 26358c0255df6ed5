#include <doctest.h>

#include "curvlab/l2.hpp"
#include "curvlab/parallel.hpp"

using namespace curvlab;

TEST_CASE("blocked reduction is identical for both execution policies") {
  std::vector<double> values(100000);
  rng gen(1);
  for (double& v : values) v = gen.uniform(-1, 1);
  double serial = parallel_sum<double>(values.size(), exec::serial,
                                       [&](std::size_t i) { return values[i]; });
  double parallel = parallel_sum<double>(values.size(), exec::parallel,
                                         [&](std::size_t i) { return values[i]; });
  CHECK(serial == parallel);  // bitwise
}

TEST_CASE("exceptions escape the parallel region as the first failing index") {
  CHECK_THROWS_AS(parallel_for(10000, exec::parallel,
                               [](std::size_t i) {
                                 if (i >= 5000) throw error(errkind::domain, "boom");
                               }),
                  error);
}

TEST_CASE("fiber integrals agree bitwise between the serial and OpenMP paths") {
  Scene sc = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
  HermitianField h = HermitianField::from_scene(sc);
  ChartWeight phi = induced_weight(h);
  FiberGrid grid = build_grid(1, 48);
  std::vector<complex> z{complex(0.3, 0.1)};
  QuadOpts ser{false, exec::serial, 0}, par{false, exec::parallel, 0};

  double vs = fiber_volume(phi, z, grid, ser);
  double vp = fiber_volume(phi, z, grid, par);
  CHECK(vs == vp);

  cmat ls = l2_metric(phi, z, grid, ser).m;
  cmat lp = l2_metric(phi, z, grid, par).m;
  CHECK(max_abs(cmat(ls - lp)) == 0.0);
}

TEST_CASE("stencil-density integrals agree bitwise as well") {
  Scene sc = builtin_scene("trivial", 1, 1);
  ChartWeight phi = ChartWeight::from_scene(sc);
  FiberGrid grid = build_grid(1, 24);
  std::vector<complex> z{complex(0.1, -0.2)};
  QuadOpts ser{false, exec::serial, 0}, par{false, exec::parallel, 0};
  CHECK(fiber_volume(phi, z, grid, ser) == fiber_volume(phi, z, grid, par));
}
