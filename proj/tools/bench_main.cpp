// Benchmark of the OpenMP kernels against the serial reference path:
// fiber integration, the quadrature metric, and a curvature sweep.
#include <chrono>
#include <cstdio>
#include <vector>

#include "curvlab/l2.hpp"

using namespace curvlab;

namespace {

template <class F>
double time_of(F&& fn, int reps) {
  auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < reps; ++k) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

struct Row {
  const char* name;
  double serial_s;
  double parallel_s;
};

}  // namespace

int main(int argc, char** argv) {
  int scale = argc > 1 ? std::atoi(argv[1]) : 1;
  std::vector<Row> rows;

  Scene diag = builtin_scene("diagonal-exponential", 1, 1, {1, 2});
  HermitianField h = HermitianField::from_scene(diag);
  ChartWeight phi = induced_weight(h);
  Scene trivial = builtin_scene("trivial", 1, 1);
  ChartWeight phi_expr = ChartWeight::from_scene(trivial);
  std::vector<complex> z{complex(0.3, 0.1)};

  {
    FiberGrid grid = build_grid(1, 512 * scale);
    QuadOpts ser{false, exec::serial, 0}, par{false, exec::parallel, 0};
    complex a, b;
    double ts = time_of([&] { a = integrate_fiber([](int, std::span<const complex> w) {
                                return complex(1.0 / (1 + std::norm(w[0])), 0); },
                                phi, z, grid, ser); }, 3);
    double tp = time_of([&] { b = integrate_fiber([](int, std::span<const complex> w) {
                                return complex(1.0 / (1 + std::norm(w[0])), 0); },
                                phi, z, grid, par); }, 3);
    if (a != b) std::printf("!! integrate_fiber: serial and parallel results differ\n");
    rows.push_back({"integrate_fiber (closed-form density, res 512)", ts, tp});
  }
  {
    FiberGrid grid = build_grid(1, 64 * scale);
    QuadOpts ser{false, exec::serial, 0}, par{false, exec::parallel, 0};
    double vs = 0, vp = 0;
    double ts = time_of([&] { vs = fiber_volume(phi_expr, z, grid, ser); }, 2);
    double tp = time_of([&] { vp = fiber_volume(phi_expr, z, grid, par); }, 2);
    if (vs != vp) std::printf("!! fiber_volume: serial and parallel results differ\n");
    rows.push_back({"fiber_volume (stencil density, res 64)", ts, tp});
  }
  {
    FiberGrid grid = build_grid(1, 256 * scale);
    QuadOpts ser{false, exec::serial, 0}, par{false, exec::parallel, 0};
    cmat a, b;
    double ts = time_of([&] { a = l2_metric(phi, z, grid, ser).m; }, 3);
    double tp = time_of([&] { b = l2_metric(phi, z, grid, par).m; }, 3);
    if (max_abs(cmat(a - b)) != 0) std::printf("!! l2_metric: results differ\n");
    rows.push_back({"l2_metric (res 256)", ts, tp});
  }
  {
    FiberGrid grid = build_grid(1, 64 * scale);
    QuadOpts ser{false, exec::serial, 0}, par{false, exec::parallel, 0};
    double ts = time_of([&] { duality_check(h, z, grid, ser); }, 1);
    double tp = time_of([&] { duality_check(h, z, grid, par); }, 1);
    rows.push_back({"duality_check (res 64)", ts, tp});
  }

  std::printf("%-48s %12s %12s %9s\n", "kernel", "serial [s]", "openmp [s]", "speedup");
  for (const Row& r : rows)
    std::printf("%-48s %12.4f %12.4f %8.2fx\n", r.name, r.serial_s, r.parallel_s,
                r.serial_s / r.parallel_s);
  return 0;
}
