#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "invmed/grid.hpp"
#include "invmed/operators.hpp"

namespace invmed {

struct DiskInclusion {
  double cx = 0.5, cy = 0.5;
  double radius = 0.1;
  double amplitude = 1.0;
};

struct RectInclusion {
  double x0 = 0.4, y0 = 0.4;  ///< lower-left corner
  double ex = 0.2, ey = 0.2;  ///< extents
  double amplitude = 1.0;
};

using Inclusion = std::variant<DiskInclusion, RectInclusion>;

/// Piecewise-constant medium: background plus indicator inclusions.
/// Inclusion supports must stay at least 2h inside the boundary.
struct Medium {
  double mu_bar = 1.0;
  std::vector<Inclusion> inclusions;
};

/// Nodal coefficient field mu(x) = mu_bar + sum of amplitudes over
/// inclusions containing the node.  Throws if an inclusion reaches the
/// 2h safety margin or if amplitudes/background are out of range.
Field realize_medium(GridPtr grid, const Medium& medium);

/// One pair of boundary Cauchy data.  Noise, when present, was applied to
/// the Dirichlet observation f only.
struct CauchyData {
  BoundaryTrace f;  ///< Dirichlet observation
  BoundaryTrace g;  ///< Neumann input
  double noise_level = 0.0;
};

struct ForwardSolution {
  Field u;
  BoundaryTrace f;
};

/// Neumann forward solve of -lap u + mu u = 0 with flux g; f = trace(u).
ForwardSolution solve_forward(GridPtr grid, const Field& mu, const BoundaryTrace& g,
                              const SolverConfig& cfg = {});

/// Background solve with constant coefficient mu_bar.
Field background_solve(GridPtr grid, double mu_bar, const BoundaryTrace& g,
                       const SolverConfig& cfg = {});

/// Seeded uniform draws in [-1, 1).  mt19937_64 with a fixed 53-bit
/// mapping, so results are identical across platforms and library
/// implementations.
std::vector<double> uniform_symmetric(std::uint64_t seed, std::size_t count);

/// Synthesizes Cauchy data for a medium: f = trace of the forward solution
/// plus noise_level * |f|_inf * uniform[-1,1) per node; g passes through.
/// Deterministic for a fixed seed.
CauchyData make_cauchy(GridPtr grid, const Medium& medium, const BoundaryTrace& g,
                       double noise_level, std::uint64_t seed);

}  // namespace invmed
