#include "invmed/saddle.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>

#include "invmed/mesh.hpp"
#include "invmed/operators.hpp"

namespace invmed {

namespace {

constexpr double kTiny = 1e-300;

double combined_increment(double inc_u, double inc_lambda) {
  return std::hypot(inc_u, inc_lambda);
}

/// Geometric mean of the last (up to) 10 successive increment ratios.
double rho_from_increments(const std::vector<double>& incs) {
  double logsum = 0;
  int count = 0;
  for (std::size_t k = incs.size(); k-- > 1 && count < 10;) {
    if (incs[k - 1] <= kTiny) break;
    logsum += std::log(std::max(incs[k] / incs[k - 1], kTiny));
    ++count;
  }
  return count ? std::exp(logsum / count) : 0.0;
}

/// Shared workspace so that iterating re-uses one factorization.
struct AdiWorkspace {
  AdiWorkspace(GridPtr grid, const SaddleConfig& cfg)
      : op(EllipticOperator::assemble(grid, constant_field(grid, cfg.mu_bar),
                                      BoundaryMode::kNeumann)),
        surf(grid) {}

  SaddleState step(const SaddleState& state, const CauchyData& data,
                   const SaddleConfig& cfg) const {
    Field neg_lambda(state.lambda.grid(), -state.lambda.values());
    Field u = op.solve(neg_lambda, data.g);
    BoundaryTrace mism = data.f;
    mism.values() -= trace(u).values();
    BoundaryTrace flux = surf.apply_power(mism, cfg.mismatch_power);
    flux.values() /= cfg.epsilon;
    Field lambda = op.solve(Field(u.grid()), flux);

    SaddleState next{std::move(u), std::move(lambda), state.iterations + 1, 0, 0};
    next.inc_u = l2_norm(Field(next.u.grid(), next.u.values() - state.u.values()));
    next.inc_lambda =
        l2_norm(Field(next.u.grid(), next.lambda.values() - state.lambda.values()));
    return next;
  }

  EllipticOperator op;
  SurfaceOperator surf;
};

struct CoupledSystem {
  SpMat M;
  SpMat B;    // flux scatter
  SpMat Ps;   // surface power on the loop
};

CoupledSystem assemble_coupled(const Grid2D& g, const SaddleConfig& cfg) {
  const int n = g.n_nodes();
  SpMat A = edge_stiffness(g);
  for (int p = 0; p < n; ++p) {
    A.coeffRef(p, p) += g.area_weights()[p] * cfg.mu_bar;
  }
  const SpMat B = flux_scatter(g);
  const SpMat Tr = trace_selector(g);
  const SpMat Ps = surface_power_matrix(g, cfg.mismatch_power);
  const SpMat C = (B * Ps * Tr) / cfg.epsilon;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * A.nonZeros() + C.nonZeros() + n);
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      trips.emplace_back(it.row(), it.col(), it.value());          // A block
      trips.emplace_back(n + it.row(), n + it.col(), it.value());  // A block
    }
  }
  for (int p = 0; p < n; ++p) {
    trips.emplace_back(p, n + p, g.area_weights()[p]);  // W coupling of lambda
  }
  for (int k = 0; k < C.outerSize(); ++k) {
    for (SpMat::InnerIterator it(C, k); it; ++it) {
      trips.emplace_back(n + it.row(), it.col(), it.value());
    }
  }
  CoupledSystem sys;
  sys.M.resize(2 * n, 2 * n);
  sys.M.setFromTriplets(trips.begin(), trips.end());
  sys.B = B;
  sys.Ps = Ps;
  return sys;
}

Eigen::VectorXd coupled_rhs(const CoupledSystem& sys, const Grid2D& g,
                            const CauchyData& data, const SaddleConfig& cfg) {
  const int n = g.n_nodes();
  Eigen::VectorXd rhs(2 * n);
  rhs.head(n) = sys.B * data.g.values();
  rhs.tail(n) = sys.B * (sys.Ps * data.f.values()) / cfg.epsilon;
  return rhs;
}

}  // namespace

void SaddleConfig::validate() const {
  if (!(epsilon > 0)) throw InvalidArgumentError("epsilon must be positive");
  if (!(mu_bar > 0)) throw InvalidArgumentError("mu_bar must be positive");
  if (mismatch_power < 0) throw InvalidArgumentError("mismatch power s must be >= 0");
  if (max_iterations < 1) throw InvalidArgumentError("max iterations must be >= 1");
  if (!(tolerance > 0 && tolerance < 1)) {
    throw InvalidArgumentError("tolerance must lie in (0, 1)");
  }
}

SaddleState make_initial_state(const CauchyData& data, const SaddleConfig& cfg) {
  cfg.validate();
  const GridPtr grid = data.g.grid();
  Field u0 = background_solve(grid, cfg.mu_bar, data.g);
  return SaddleState{std::move(u0), Field(grid), 0, 0, 0};
}

SaddleState adi_step(const SaddleState& state, const CauchyData& data,
                     const SaddleConfig& cfg) {
  cfg.validate();
  require_same_grid(state.u.grid(), data.g.grid());
  AdiWorkspace ws(state.u.grid(), cfg);
  return ws.step(state, data, cfg);
}

ProbingRun run_iterative_probing(const CauchyData& data, const SaddleConfig& cfg) {
  cfg.validate();
  if (cfg.mode != DataMode::kNeumannData) {
    throw InvalidArgumentError("iterative probing runs on Neumann-data mode");
  }
  const GridPtr grid = data.g.grid();
  AdiWorkspace ws(grid, cfg);
  SaddleState state = make_initial_state(data, cfg);

  std::vector<IterationRecord> history;
  std::vector<double> incs;
  bool converged = false;
  for (int k = 0; k < cfg.max_iterations; ++k) {
    try {
      state = ws.step(state, data, cfg);
    } catch (const Error&) {
      // iterate blew past representable range; report divergence evidence
      break;
    }
    incs.push_back(combined_increment(state.inc_u, state.inc_lambda));
    history.push_back(
        {state.iterations, state.inc_u, state.inc_lambda, rho_from_increments(incs)});

    const double rel_u = state.inc_u / std::max(l2_norm(state.u), kTiny);
    const double rel_l = state.inc_lambda / std::max(l2_norm(state.lambda), kTiny);
    if (std::max(rel_u, rel_l) < cfg.tolerance) {
      converged = true;
      break;
    }
    if (incs.back() > 1e100) break;  // clearly divergent, stop before overflow
  }
  const double rho_hat = history.empty() ? 0.0 : history.back().rho_hat;
  if (!converged) {
    throw NonConvergenceError(
        "iterative probing did not converge in " + std::to_string(cfg.max_iterations) +
            " sweeps (rho_hat = " + std::to_string(rho_hat) +
            "); epsilon is too small for this grid",
        rho_hat);
  }
  return ProbingRun{std::move(state), rho_hat, true, std::move(history)};
}

SaddleState solve_coupled(const CauchyData& data, const SaddleConfig& cfg) {
  cfg.validate();
  if (cfg.mode != DataMode::kNeumannData) {
    throw InvalidArgumentError("solve_coupled expects Neumann-data mode; use dtn_solve");
  }
  const GridPtr grid = data.g.grid();
  const Grid2D& g = *grid;
  const CoupledSystem sys = assemble_coupled(g, cfg);
  Eigen::SparseLU<SpMat> lu(sys.M);
  if (lu.info() != Eigen::Success) {
    throw SingularOperatorError("factorization of the coupled block system failed");
  }
  const Eigen::VectorXd rhs = coupled_rhs(sys, g, data, cfg);
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) {
    throw SingularOperatorError("coupled solve produced non-finite values");
  }
  const int n = g.n_nodes();
  return SaddleState{Field(grid, sol.head(n)), Field(grid, sol.tail(n)), 0, 0, 0};
}

double coupled_residual(const SaddleState& state, const CauchyData& data,
                        const SaddleConfig& cfg) {
  const Grid2D& g = *state.u.grid();
  const CoupledSystem sys = assemble_coupled(g, cfg);
  const Eigen::VectorXd rhs = coupled_rhs(sys, g, data, cfg);
  Eigen::VectorXd x(2 * g.n_nodes());
  x.head(g.n_nodes()) = state.u.values();
  x.tail(g.n_nodes()) = state.lambda.values();
  return (sys.M * x - rhs).norm() / rhs.norm();
}

Field biharmonic_limit(const CauchyData& data, const SaddleConfig& cfg) {
  cfg.validate();
  const GridPtr grid = data.g.grid();
  const Grid2D& g = *grid;
  const int n = g.n_nodes();
  const double cx = 1.0 / (g.hx() * g.hx()), cy = 1.0 / (g.hy() * g.hy());

  // N0 = ghost-eliminated (-lap + mu_bar) with zero flux, unscaled rows.
  SpMat S = edge_stiffness(g);
  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < S.outerSize(); ++k) {
    for (SpMat::InnerIterator it(S, k); it; ++it) {
      trips.emplace_back(it.row(), it.col(),
                         it.value() / g.area_weights()[it.row()]);
    }
  }
  for (int p = 0; p < n; ++p) trips.emplace_back(p, p, cfg.mu_bar);
  // Rows 0..n-1: N0 u - v = flux term of the Neumann data.
  std::vector<Eigen::Triplet<double>> mt;
  for (const auto& t : trips) mt.emplace_back(t.row(), t.col(), t.value());
  for (int p = 0; p < n; ++p) mt.emplace_back(p, n + p, -1.0);
  // Rows n..2n-1: interior 5-point rows on v; boundary rows u = f.
  for (int p = 0; p < n; ++p) {
    if (g.is_boundary(p)) {
      mt.emplace_back(n + p, p, 1.0);
      continue;
    }
    const int i = p % g.nx(), j = p / g.nx();
    mt.emplace_back(n + p, n + p, 2 * cx + 2 * cy + cfg.mu_bar);
    mt.emplace_back(n + p, n + g.node(i - 1, j), -cx);
    mt.emplace_back(n + p, n + g.node(i + 1, j), -cx);
    mt.emplace_back(n + p, n + g.node(i, j - 1), -cy);
    mt.emplace_back(n + p, n + g.node(i, j + 1), -cy);
  }
  SpMat M(2 * n, 2 * n);
  M.setFromTriplets(mt.begin(), mt.end());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
  for (int k = 0; k < g.loop_size(); ++k) {
    const LoopNode& ln = g.loop()[k];
    double w = 0;
    if (ln.sides & (kSideLeft | kSideRight)) w += 2.0 / g.hx();
    if (ln.sides & (kSideBottom | kSideTop)) w += 2.0 / g.hy();
    rhs[ln.node] = w * data.g[k];      // ghost flux contribution
    rhs[n + ln.node] = data.f[k];      // Dirichlet row
  }

  Eigen::SparseLU<SpMat> lu(M);
  if (lu.info() != Eigen::Success) {
    throw SingularOperatorError("factorization of the biharmonic system failed");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) {
    throw SingularOperatorError("biharmonic solve produced non-finite values");
  }
  return Field(grid, sol.head(n));
}

std::vector<SweepRow> epsilon_sweep(const CauchyData& data, const SaddleConfig& cfg,
                                    std::span<const double> epsilons) {
  cfg.validate();
  for (std::size_t q = 0; q < epsilons.size(); ++q) {
    if (!(epsilons[q] > 0)) throw InvalidArgumentError("sweep epsilons must be positive");
    if (q > 0 && epsilons[q] >= epsilons[q - 1]) {
      throw InvalidArgumentError("sweep epsilons must be strictly decreasing");
    }
  }
  const Field ubar = biharmonic_limit(data, cfg);
  std::vector<SweepRow> rows;
  rows.reserve(epsilons.size());
  for (double eps : epsilons) {
    SweepRow row;
    row.epsilon = eps;
    try {
      SaddleConfig c = cfg;
      c.epsilon = eps;
      const SaddleState st = solve_coupled(data, c);
      row.err_u = l2_norm(Field(ubar.grid(), st.u.values() - ubar.values()));
      BoundaryTrace tm = trace(st.u);
      tm.values() -= data.f.values();
      row.err_trace = boundary_l2(tm);
      row.norm_lambda = l2_norm(st.lambda);
    } catch (const Error& e) {
      row.ok = false;
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ConstrainedSolution constrained_solve(const CauchyData& data, const SaddleConfig& cfg,
                                      double damping) {
  cfg.validate();
  if (!(damping > 0 && damping <= 1)) {
    throw InvalidArgumentError("damping theta must lie in (0, 1]");
  }
  const GridPtr grid = data.g.grid();
  AdiWorkspace ws(grid, cfg);

  Field u = ws.op.solve(Field(grid), data.g);  // background start
  Field lambda(grid);
  Field p(grid);
  ConstrainedSolution out{Field(grid), Field(grid), Field(grid), 0, false, {}};
  std::vector<double> incs;

  for (int k = 0; k < cfg.max_iterations; ++k) {
    double inc_u = 0, inc_l = 0;
    try {
      BoundaryTrace mism = data.f;
      mism.values() -= trace(u).values();
      BoundaryTrace flux = ws.surf.apply_power(mism, cfg.mismatch_power);
      flux.values() /= cfg.epsilon;
      p = ws.op.solve(Field(grid), flux);

      Eigen::VectorXd relaxed =
          (1 - damping) * lambda.values() + damping * p.values().cwiseMax(0.0);
      inc_l = l2_norm(Field(grid, relaxed - lambda.values()));
      lambda = Field(grid, std::move(relaxed));

      Field neg_lambda(grid, -lambda.values());
      Field u_new = ws.op.solve(neg_lambda, data.g);
      inc_u = l2_norm(Field(grid, u_new.values() - u.values()));
      u = std::move(u_new);
    } catch (const Error&) {
      break;  // iterate left the representable range
    }

    incs.push_back(combined_increment(inc_u, inc_l));
    out.history.push_back({k + 1, inc_u, inc_l, rho_from_increments(incs)});
    out.iterations = k + 1;

    const double rel_u = inc_u / std::max(l2_norm(u), kTiny);
    const double rel_l = inc_l / std::max(l2_norm(lambda), kTiny);
    if (std::max(rel_u, rel_l) < cfg.tolerance) {
      out.converged = true;
      break;
    }
    if (incs.back() > 1e100) break;  // clearly divergent, stop before overflow
  }
  if (!out.converged) {
    throw NonConvergenceError(
        "constrained saddle iteration did not converge; try a smaller damping theta",
        out.history.empty() ? 0.0 : out.history.back().rho_hat);
  }
  out.u = std::move(u);
  out.lambda = Field(grid, p.values().cwiseMax(0.0));  // exact projection at exit
  out.p = std::move(p);
  return out;
}

MediumRecovery recover_medium(const Field& u, const Field& lambda, double floor_tau) {
  if (!(floor_tau > 0)) throw InvalidArgumentError("floor tau must be positive");
  require_same_grid(u.grid(), lambda.grid());
  MediumRecovery rec{Field(u.grid()), Field(u.grid()), 0, false};
  for (int p = 0; p < u.size(); ++p) {
    if (u[p] >= floor_tau) {
      rec.mu_hat[p] = std::max(0.0, lambda[p]) / u[p];
    } else {
      rec.mask[p] = 1.0;
      ++rec.masked_count;
    }
  }
  rec.all_masked = rec.masked_count == u.size();
  return rec;
}

SaddleState dtn_solve(const CauchyData& data, const SaddleConfig& cfg) {
  cfg.validate();
  if (cfg.mode != DataMode::kDirichletData) {
    throw InvalidArgumentError("dtn_solve expects Dirichlet-data mode");
  }
  const GridPtr grid = data.f.grid();
  const Grid2D& g = *grid;
  const int n = g.n_nodes();

  // Fixed flux mismatch against the Dirichlet background solve for f.
  auto dir_op = EllipticOperator::assemble(grid, constant_field(grid, cfg.mu_bar),
                                           BoundaryMode::kDirichlet);
  const Field u0 = dir_op.solve(Field(grid), data.f);
  BoundaryTrace mism = data.g;
  mism.values() -= normal_derivative(u0).values();
  const SurfaceOperator surf(grid);
  BoundaryTrace flux = surf.apply_power(mism, cfg.mismatch_power);
  flux.values() /= cfg.epsilon;

  // Block system: [ D  E ; 0  A ] with D the row-substitution Dirichlet
  // matrix, E the interior identity coupling of lambda, A the Neumann FV
  // matrix of -lap + mu_bar.
  const SpMat& D = dir_op.dirichlet_matrix();
  auto neu_op = EllipticOperator::assemble(grid, constant_field(grid, cfg.mu_bar),
                                           BoundaryMode::kNeumann);
  const SpMat& A = neu_op.fv_matrix();

  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < D.outerSize(); ++k) {
    for (SpMat::InnerIterator it(D, k); it; ++it) {
      trips.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int p = 0; p < n; ++p) {
    if (!g.is_boundary(p)) trips.emplace_back(p, n + p, 1.0);
  }
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      trips.emplace_back(n + it.row(), n + it.col(), it.value());
    }
  }
  SpMat M(2 * n, 2 * n);
  M.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
  for (int k = 0; k < g.loop_size(); ++k) rhs[g.loop()[k].node] = data.f[k];
  const SpMat B = flux_scatter(g);
  rhs.tail(n) = B * flux.values();

  Eigen::SparseLU<SpMat> lu(M);
  if (lu.info() != Eigen::Success) {
    throw SingularOperatorError("factorization of the DtN block system failed");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) {
    throw SingularOperatorError("DtN solve produced non-finite values");
  }
  return SaddleState{Field(grid, sol.head(n)), Field(grid, sol.tail(n)), 0, 0, 0};
}

}  // namespace invmed
