#pragma once

#include <cmath>
#include <numbers>

#include "invmed/forward.hpp"
#include "invmed/grid.hpp"
#include "invmed/mesh.hpp"
#include "invmed/operators.hpp"

namespace invmed::test {

inline constexpr double kPi = std::numbers::pi;

/// Nodal samples of a closed-form function.
template <typename F>
Field sample_field(GridPtr grid, F&& f) {
  Field out(grid);
  for (int p = 0; p < grid->n_nodes(); ++p) {
    out[p] = f(grid->node_x(p), grid->node_y(p));
  }
  return out;
}

/// Analytic outward normal derivative sampled on the loop (corner values
/// average the two sides).
template <typename Fx, typename Fy>
BoundaryTrace sample_normal_derivative(GridPtr grid, Fx&& ux, Fy&& uy) {
  BoundaryTrace t(grid);
  for (int k = 0; k < t.size(); ++k) {
    const LoopNode& ln = grid->loop()[k];
    const double x = grid->x(ln.i), y = grid->y(ln.j);
    double sum = 0;
    int count = 0;
    if (ln.sides & kSideLeft) { sum += -ux(x, y); ++count; }
    if (ln.sides & kSideRight) { sum += ux(x, y); ++count; }
    if (ln.sides & kSideBottom) { sum += -uy(x, y); ++count; }
    if (ln.sides & kSideTop) { sum += uy(x, y); ++count; }
    t[k] = sum / count;
  }
  return t;
}

/// The reconstruction phantom used across tests, shrunk to respect the 2h
/// margin on 17x17 grids.
inline Medium small_phantom(double amplitude = 5.0) {
  return Medium{1.0, {DiskInclusion{0.35, 0.65, 0.14, amplitude}}};
}

/// The 33x33 reference phantom: disk r = 0.15 at (0.3, 0.7), amplitude 5.
inline Medium standard_phantom(double amplitude = 5.0) {
  return Medium{1.0, {DiskInclusion{0.3, 0.7, 0.15, amplitude}}};
}

inline CauchyData phantom_data(GridPtr grid, const Medium& medium, double noise = 0.0,
                               std::uint64_t seed = 1) {
  return make_cauchy(grid, medium, constant_trace(grid, 1.0), noise, seed);
}

/// Discrete eigenvalue of the 1-D ghost Neumann second difference for mode
/// cos(k pi x) on n nodes.
inline double neumann_mode_eigenvalue(int k, int n) {
  const double h = 1.0 / (n - 1);
  return (2 - 2 * std::cos(k * kPi * h)) / (h * h);
}

}  // namespace invmed::test
