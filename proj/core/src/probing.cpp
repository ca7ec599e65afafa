#include "invmed/probing.hpp"

#include <cmath>

#include "invmed/mesh.hpp"
#include "invmed/operators.hpp"

namespace invmed {

namespace {

constexpr double kWeightGuard = 1e-14;

void fill_argmax(IndexField& idx) {
  idx.argmax_node = -1;
  idx.argmax_value = 0;
  for (int p : idx.samples) {
    if (idx.argmax_node < 0 || idx.values[p] > idx.argmax_value) {
      idx.argmax_node = p;
      idx.argmax_value = idx.values[p];
    }
  }
  if (idx.argmax_node >= 0) {
    const Grid2D& g = *idx.values.grid();
    idx.argmax_x = g.node_x(idx.argmax_node);
    idx.argmax_y = g.node_y(idx.argmax_node);
  }
}

// Imaging mismatch: background-minus-measured, positive where absorption
// grew.  (u - u0 = -A[(mu - mu_bar) u] for this model, so the measured
// trace dips at inclusions.)
BoundaryTrace imaging_mismatch(const CauchyData& data, const Field& u0) {
  BoundaryTrace m = trace(u0);
  m.values() -= data.f.values();
  return m;
}

double checked_weight(const SurfaceOperator& surf, const BoundaryTrace& eta, double t) {
  const double w = surf.w_seminorm(eta, t);
  if (w < kWeightGuard) {
    throw DegenerateWeightError("probing weight |eta_x|_W below guard threshold");
  }
  return w;
}

}  // namespace

void ProbeConfig::validate() const {
  if (lambda_power < 0) throw InvalidArgumentError("lambda power s must be >= 0");
  if (weight_power < 0) throw InvalidArgumentError("weight power t must be >= 0");
  if (!(epsilon > 0)) throw InvalidArgumentError("epsilon must be positive");
  if (!(mu_bar > 0)) throw InvalidArgumentError("mu_bar must be positive");
}

std::vector<int> default_samples(const Grid2D& grid, int margin) {
  std::vector<int> out;
  for (int j = margin; j < grid.ny() - margin; ++j) {
    for (int i = margin; i < grid.nx() - margin; ++i) {
      out.push_back(grid.node(i, j));
    }
  }
  return out;
}

BoundaryTrace probe_trace(GridPtr grid, int node, double mu_bar) {
  if (grid->is_boundary(node)) {
    throw InvalidArgumentError("probe point must be strictly interior");
  }
  auto op = EllipticOperator::assemble(grid, constant_field(grid, mu_bar),
                                       BoundaryMode::kNeumann);
  Field delta(grid);
  delta[node] = 1.0 / (grid->hx() * grid->hy());  // unit discrete mass
  const Field G = op.solve(delta, BoundaryTrace(grid));
  return trace(G);
}

IndexField index_green(const CauchyData& data, const Field& u0, const ProbeConfig& cfg,
                       std::span<const int> samples, bool normalize) {
  cfg.validate();
  const GridPtr grid = u0.grid();
  require_same_grid(grid, data.f.grid());
  const SurfaceOperator surf(grid);
  auto op = EllipticOperator::assemble(grid, constant_field(grid, cfg.mu_bar),
                                       BoundaryMode::kNeumann);
  const BoundaryTrace mismatch = imaging_mismatch(data, u0);
  const BoundaryTrace filtered = surf.apply_power(mismatch, cfg.lambda_power);

  IndexField idx{Field(grid), {samples.begin(), samples.end()}};
  const double scale = 1.0 / (grid->hx() * grid->hy());
  const BoundaryTrace zero_flux(grid);
  for (int p : samples) {
    if (grid->is_boundary(p)) {
      throw InvalidArgumentError("sample nodes must be strictly interior");
    }
    Field delta(grid);
    delta[p] = scale;
    const BoundaryTrace eta = trace(op.solve(delta, zero_flux));
    double value = boundary_dot(filtered, eta);  // = (P^s eta, m)_Gamma
    if (normalize) value /= checked_weight(surf, eta, cfg.weight_power);
    idx.values[p] = value;
  }
  fill_argmax(idx);
  return idx;
}

IndexField index_green(const CauchyData& data, const Field& u0, const ProbeConfig& cfg,
                       bool normalize) {
  const auto samples = default_samples(*u0.grid());
  return index_green(data, u0, cfg, samples, normalize);
}

IndexField index_adjoint(const CauchyData& data, const Field& u0, const ProbeConfig& cfg,
                         bool normalize) {
  cfg.validate();
  const GridPtr grid = u0.grid();
  require_same_grid(grid, data.f.grid());
  const SurfaceOperator surf(grid);
  auto op = EllipticOperator::assemble(grid, constant_field(grid, cfg.mu_bar),
                                       BoundaryMode::kNeumann);
  const BoundaryTrace mismatch = imaging_mismatch(data, u0);
  const BoundaryTrace flux = surf.apply_power(mismatch, cfg.lambda_power);
  const Field lambda = op.solve(Field(grid), flux);

  IndexField idx{Field(grid), default_samples(*grid)};
  for (int p : idx.samples) idx.values[p] = lambda[p];
  if (normalize) {
    const double scale = 1.0 / (grid->hx() * grid->hy());
    const BoundaryTrace zero_flux(grid);
    for (int p : idx.samples) {
      Field delta(grid);
      delta[p] = scale;
      const BoundaryTrace eta = trace(op.solve(delta, zero_flux));
      idx.values[p] /= checked_weight(surf, eta, cfg.weight_power);
    }
  }
  fill_argmax(idx);
  return idx;
}

KernelMatrices kernel_matrix(GridPtr grid, std::span<const int> samples,
                             const ProbeConfig& cfg) {
  cfg.validate();
  const int ns = static_cast<int>(samples.size());
  for (int a = 0; a < ns; ++a) {
    if (grid->is_boundary(samples[a])) {
      throw InvalidArgumentError("sample nodes must be strictly interior");
    }
    for (int b = a + 1; b < ns; ++b) {
      if (samples[a] == samples[b]) {
        throw InvalidArgumentError("sample nodes must be pairwise distinct");
      }
    }
  }
  const SurfaceOperator surf(grid);
  auto op = EllipticOperator::assemble(grid, constant_field(grid, cfg.mu_bar),
                                       BoundaryMode::kNeumann);
  const double scale = 1.0 / (grid->hx() * grid->hy());
  const BoundaryTrace zero_flux(grid);

  std::vector<BoundaryTrace> etas;
  std::vector<BoundaryTrace> filtered;
  std::vector<double> weights;
  etas.reserve(ns);
  for (int a = 0; a < ns; ++a) {
    Field delta(grid);
    delta[samples[a]] = scale;
    etas.push_back(trace(op.solve(delta, zero_flux)));
    filtered.push_back(surf.apply_power(etas.back(), cfg.lambda_power));
    weights.push_back(checked_weight(surf, etas.back(), cfg.weight_power));
  }

  KernelMatrices km;
  km.one_sided.resize(ns, ns);
  km.symmetric.resize(ns, ns);
  km.dominance.resize(ns);
  for (int a = 0; a < ns; ++a) {
    for (int b = 0; b < ns; ++b) {
      const double form = boundary_dot(filtered[a], etas[b]);
      km.one_sided(a, b) = form / weights[a];
      km.symmetric(a, b) = form / (weights[a] * weights[b]);
    }
  }
  for (int a = 0; a < ns; ++a) {
    double off = 0;
    for (int b = 0; b < ns; ++b) {
      if (b != a) off = std::max(off, std::abs(km.one_sided(a, b)));
    }
    km.dominance[a] = off > 0 ? km.one_sided(a, a) / off
                              : std::numeric_limits<double>::infinity();
  }
  return km;
}

IndexField project_nonnegative(const IndexField& idx) {
  IndexField out = idx;
  out.values.values() = out.values.values().cwiseMax(0.0);
  fill_argmax(out);
  return out;
}

}  // namespace invmed
