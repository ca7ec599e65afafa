#include "invmed/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "invmed/mesh.hpp"

namespace invmed {

namespace {

struct Bounds {
  double xmin, xmax, ymin, ymax;
};

Bounds inclusion_bounds(const Inclusion& inc) {
  if (const auto* d = std::get_if<DiskInclusion>(&inc)) {
    return {d->cx - d->radius, d->cx + d->radius, d->cy - d->radius, d->cy + d->radius};
  }
  const auto& r = std::get<RectInclusion>(inc);
  return {r.x0, r.x0 + r.ex, r.y0, r.y0 + r.ey};
}

double inclusion_amplitude(const Inclusion& inc) {
  if (const auto* d = std::get_if<DiskInclusion>(&inc)) return d->amplitude;
  return std::get<RectInclusion>(inc).amplitude;
}

bool contains(const Inclusion& inc, double x, double y) {
  if (const auto* d = std::get_if<DiskInclusion>(&inc)) {
    const double dx = x - d->cx, dy = y - d->cy;
    return dx * dx + dy * dy <= d->radius * d->radius;
  }
  const auto& r = std::get<RectInclusion>(inc);
  return x >= r.x0 && x <= r.x0 + r.ex && y >= r.y0 && y <= r.y0 + r.ey;
}

}  // namespace

Field realize_medium(GridPtr grid, const Medium& medium) {
  if (!(medium.mu_bar > 0)) {
    throw InvalidArgumentError("background mu_bar must be positive");
  }
  const double mx = 2 * grid->hx(), my = 2 * grid->hy();
  for (const auto& inc : medium.inclusions) {
    if (inclusion_amplitude(inc) < 0) {
      throw InvalidArgumentError("inclusion amplitude must be nonnegative");
    }
    const Bounds b = inclusion_bounds(inc);
    if (b.xmin < mx || b.xmax > 1 - mx || b.ymin < my || b.ymax > 1 - my) {
      throw InvalidArgumentError(
          "inclusion support reaches the 2h boundary margin of the unit square");
    }
  }
  Field mu = constant_field(grid, medium.mu_bar);
  for (int p = 0; p < grid->n_nodes(); ++p) {
    const double x = grid->node_x(p), y = grid->node_y(p);
    for (const auto& inc : medium.inclusions) {
      if (contains(inc, x, y)) mu[p] += inclusion_amplitude(inc);
    }
  }
  return mu;
}

ForwardSolution solve_forward(GridPtr grid, const Field& mu, const BoundaryTrace& g,
                              const SolverConfig& cfg) {
  auto op = EllipticOperator::assemble(grid, mu, BoundaryMode::kNeumann);
  Field u = op.solve(Field(grid), g, cfg);
  BoundaryTrace f = trace(u);
  return {std::move(u), std::move(f)};
}

Field background_solve(GridPtr grid, double mu_bar, const BoundaryTrace& g,
                       const SolverConfig& cfg) {
  auto op = EllipticOperator::assemble(grid, constant_field(grid, mu_bar),
                                       BoundaryMode::kNeumann);
  return op.solve(Field(grid), g, cfg);
}

std::vector<double> uniform_symmetric(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 engine(seed);
  std::vector<double> out(count);
  for (auto& v : out) {
    // top 53 bits -> [0,1); the mapping is pinned so output is portable
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    v = 2.0 * u - 1.0;
  }
  return out;
}

CauchyData make_cauchy(GridPtr grid, const Medium& medium, const BoundaryTrace& g,
                       double noise_level, std::uint64_t seed) {
  if (noise_level < 0) throw InvalidArgumentError("noise level must be >= 0");
  const Field mu = realize_medium(grid, medium);
  ForwardSolution sol = solve_forward(grid, mu, g);
  if (noise_level > 0) {
    const double scale = noise_level * sol.f.values().cwiseAbs().maxCoeff();
    const auto draws = uniform_symmetric(seed, static_cast<std::size_t>(sol.f.size()));
    for (int k = 0; k < sol.f.size(); ++k) sol.f[k] += scale * draws[k];
  }
  return {std::move(sol.f), g, noise_level};
}

}  // namespace invmed
