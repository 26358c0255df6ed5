// Quadrature over P^r against the fiber measure of a chart weight.
//
// Conventions: the measure of a weight phi is ((i/2pi) ddbar_w phi)^r, i.e.
// det(fiber Hessian) * r!/pi^r against Lebesgue measure in each chart; the
// measure of the trivial weight then has total mass exactly 1. The raw
// option multiplies by (2pi)^r, giving (i ddbar_w phi)^r / r!.
#pragma once

#include <functional>
#include <vector>

#include "curvlab/finsler.hpp"
#include "curvlab/parallel.hpp"
#include "curvlab/types.hpp"

namespace curvlab {

// Test hook: scales the volume normalization; selfcheck's negative control.
double& debug_volume_scale();

// Per-chart tensor grid: Gauss-Legendre in the compactified radial variable
// x = cos(theta) per complex coordinate, midpoint in each angle. Nodes are
// enumerated lazily; the same enumeration serves every chart.
class FiberGrid {
 public:
  FiberGrid() = default;

  int r() const { return r_; }
  int charts() const { return r_ + 1; }
  int resolution() const { return resolution_; }
  std::size_t nodes_per_chart() const { return nodes_per_chart_; }

  struct Node {
    std::vector<complex> w;  // chart coordinates
    double leb_weight;       // Lebesgue weight of the (x, theta) cell
  };
  Node node(std::size_t flat) const;
  // Allocation-free variant for the inner loops: fills w[0..r) and returns
  // the Lebesgue weight.
  double node_into(std::size_t flat, complex* w) const;

  // Partition of unity |Z*_A|^2 / sum_B |Z*_B|^2 evaluated in chart A.
  static double partition_weight(std::span<const complex> w);

  friend FiberGrid build_grid(int r, int resolution);

 private:
  int r_ = 0, resolution_ = 0;
  std::size_t nodes_per_chart_ = 0;
  std::vector<double> gl_x, gl_w;   // radial nodes/weights on (-1, 1)
  std::vector<double> ang, ang_w;   // midpoint angles and weight
};

FiberGrid build_grid(int r, int resolution);

struct QuadOpts {
  bool raw_measure = false;
  exec ex = exec::parallel;
  double hessian_step = 0;  // 0 = per-node default
};

// Integrand values in a chart at a node; fills `out` (zeroed by the caller).
using FiberIntegrand =
    std::function<void(int chart, std::span<const complex> w, std::span<complex> out)>;

// Vector integral sum_nodes pw * measure * f(chart, node). Deterministic for
// both execution policies.
cvec integrate_fiber_multi(int dim, const ChartWeight& phi, std::span<const complex> z,
                           const FiberGrid& grid, const FiberIntegrand& f,
                           const QuadOpts& opts = {});

complex integrate_fiber(const std::function<complex(int, std::span<const complex>)>& f,
                        const ChartWeight& phi, std::span<const complex> z,
                        const FiberGrid& grid, const QuadOpts& opts = {});

double fiber_volume(const ChartWeight& phi, std::span<const complex> z, const FiberGrid& grid,
                    const QuadOpts& opts = {});

// Divergence proxy: an integral is divergent when doubling the resolution
// twice grows the value by more than 10% each time; growth under 1% per
// refinement counts as converged.
struct Refinement {
  double value = 0;            // finest value
  std::vector<double> history;
  bool divergent = false;
  bool inconclusive = false;
};

Refinement refine_integral(const std::function<double(int resolution)>& eval, int base_resolution,
                           int doublings = 2);

// Moments of the unit-mass Fubini-Study measure: pattern (a,b) integrates
// Z_a conj(Z_b) / |Z|^2, pattern (a,b,s,t) integrates the degree-4 ratio.
double fs_moment(int r, const std::vector<int>& pattern, int resolution = 0,
                 const QuadOpts& opts = {});

// Same moments after the homogeneous change of coordinates Z -> U Z.
double fs_moment_rotated(int r, const std::vector<int>& pattern, const cmat& u,
                         int resolution = 0, const QuadOpts& opts = {});

// Closed forms delta/(r+1) and (dd + dd)/((r+1)(r+2)).
double fs_moment_closed_form(int r, const std::vector<int>& pattern);

// Single-chart integration of a global integrand (no partition weights):
// used by the chart-independence check.
complex integrate_single_chart(const std::function<complex(int, std::span<const complex>)>& f,
                               const ChartWeight& phi, std::span<const complex> z,
                               const FiberGrid& grid, int chart, const QuadOpts& opts = {});

}  // namespace curvlab
