#include "invmed/evolution.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>

#include "invmed/mesh.hpp"
#include "invmed/operators.hpp"
#include "invmed/probing.hpp"

namespace invmed {

void TimeGrid::validate() const {
  if (!(final_time > 0)) throw InvalidArgumentError("final time must be positive");
  if (steps < 2) throw InvalidArgumentError("time grid needs at least 2 steps");
}

SpaceTimeField::SpaceTimeField(GridPtr grid, const TimeGrid& tg)
    : grid_(std::move(grid)), tg_(tg) {
  tg_.validate();
  fields_.assign(tg_.steps + 1, Field(grid_));
}

TraceSequence constant_flux_sequence(GridPtr grid, const TimeGrid& tg, double value) {
  return TraceSequence(tg.steps + 1, constant_trace(grid, value));
}

namespace {

void check_sequence(const TraceSequence& seq, const TimeGrid& tg, const char* name) {
  if (static_cast<int>(seq.size()) != tg.steps + 1) {
    throw InvalidArgumentError(std::string(name) + " needs one trace per time level");
  }
}

}  // namespace

SpaceTimeField heat_forward(GridPtr grid, const TimeGrid& tg, const Field& mu,
                            const Field& y0, const TraceSequence& flux) {
  tg.validate();
  check_sequence(flux, tg, "flux");
  require_same_grid(grid, y0.grid());
  if (mu.values().minCoeff() < 0) {
    throw InvalidArgumentError("coefficient must be nonnegative");
  }
  const double dt = tg.dt();
  Field c(grid, mu.values().array() + 1.0 / dt);
  auto op = EllipticOperator::assemble(grid, c, BoundaryMode::kNeumann);

  SpaceTimeField y(grid, tg);
  y.level(0) = y0;
  for (int k = 0; k < tg.steps; ++k) {
    Field source(grid, y.level(k).values() / dt);
    y.level(k + 1) = op.solve(source, flux[k + 1]);
  }
  return y;
}

SpaceTimeField heat_forward_varying(GridPtr grid, const TimeGrid& tg,
                                    const std::function<Field(int)>& mu_at,
                                    const Field& y0, const TraceSequence& flux) {
  tg.validate();
  check_sequence(flux, tg, "flux");
  require_same_grid(grid, y0.grid());
  const double dt = tg.dt();

  SpaceTimeField y(grid, tg);
  y.level(0) = y0;
  for (int k = 0; k < tg.steps; ++k) {
    const Field mu = mu_at(k + 1);
    Field c(grid, mu.values().array() + 1.0 / dt);
    auto op = EllipticOperator::assemble(grid, c, BoundaryMode::kNeumann);
    Field source(grid, y.level(k).values() / dt);
    y.level(k + 1) = op.solve(source, flux[k + 1]);
  }
  return y;
}

TimeReversalResult time_reversal_solve(GridPtr grid, const TimeGrid& tg, const Field& z,
                                       const SaddleConfig& cfg, double alpha) {
  tg.validate();
  cfg.validate();
  require_same_grid(grid, z.grid());
  if (alpha < 0) throw InvalidArgumentError("alpha must be >= 0");
  const Grid2D& g = *grid;
  const int n = g.n_nodes();
  const int nt = tg.steps;
  const int nb = nt + 1;
  const double dt = tg.dt();
  const double eps = cfg.epsilon;

  // N0 = ghost zero-flux -lap (unscaled rows); the 1/dt shift keeps every
  // time slice nonsingular, so no background coefficient is needed here.
  const SpMat S = edge_stiffness(g);
  std::vector<Eigen::Triplet<double>> n0t;
  n0t.reserve(S.nonZeros());
  for (int k = 0; k < S.outerSize(); ++k) {
    for (SpMat::InnerIterator it(S, k); it; ++it) {
      n0t.emplace_back(it.row(), it.col(), it.value() / g.area_weights()[it.row()]);
    }
  }
  SpMat N0(n, n);
  N0.setFromTriplets(n0t.begin(), n0t.end());

  // Unknown layout: y^0..y^nt at block rows 0..nt, lambda^0..lambda^nt at
  // nb..nb+nt.
  std::vector<Eigen::Triplet<double>> trips;
  auto put = [&](int br, int bc, const SpMat& Mat, double scale) {
    for (int k = 0; k < Mat.outerSize(); ++k) {
      for (SpMat::InnerIterator it(Mat, k); it; ++it) {
        trips.emplace_back(br * n + it.row(), bc * n + it.col(), scale * it.value());
      }
    }
  };
  auto put_id = [&](int br, int bc, double scale) {
    for (int p = 0; p < n; ++p) trips.emplace_back(br * n + p, bc * n + p, scale);
  };

  // y equations: (y^{k+1} - y^k)/dt + N0 y^{k+1} + lambda^{k+1} = 0.
  for (int k = 0; k < nt; ++k) {
    put(k, k + 1, N0, 1.0);
    put_id(k, k + 1, 1.0 / dt);
    put_id(k, k, -1.0 / dt);
    put_id(k, nb + k + 1, 1.0);
  }
  // lambda equations marched backward: (I + dt N0) lambda^k = lambda^{k+1}.
  for (int k = 0; k < nt; ++k) {
    put(nt + k, nb + k, N0, dt);
    put_id(nt + k, nb + k, 1.0);
    put_id(nt + k, nb + k + 1, -1.0);
  }
  // Terminal coupling lambda^nt - y^nt / eps = -z / eps.
  put_id(2 * nt, nb + nt, 1.0);
  put_id(2 * nt, nt, -1.0 / eps);
  // Initial coupling lambda^0 + alpha N0 y^0 = 0 (gradient-penalty
  // Euler-Lagrange term).
  put_id(2 * nt + 1, nb + 0, 1.0);
  put(2 * nt + 1, 0, N0, alpha);

  SpMat M(2 * nb * n, 2 * nb * n);
  M.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * nb * n);
  rhs.segment(2 * nt * n, n) = -z.values() / eps;

  Eigen::SparseLU<SpMat> lu(M);
  if (lu.info() != Eigen::Success) {
    throw SingularOperatorError("factorization of the space-time system failed");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) {
    throw SingularOperatorError("time reversal solve produced non-finite values");
  }

  TimeReversalResult out{SpaceTimeField(grid, tg), SpaceTimeField(grid, tg),
                         eps < 1e-8};
  for (int k = 0; k <= nt; ++k) {
    out.y.level(k) = Field(grid, sol.segment(k * n, n));
    out.lambda.level(k) = Field(grid, sol.segment((nb + k) * n, n));
  }
  return out;
}

SidewayResult sideway_march(GridPtr grid, const TimeGrid& tg, const TimeCauchyData& data,
                            const SaddleConfig& cfg) {
  tg.validate();
  cfg.validate();
  check_sequence(data.f, tg, "data.f");
  check_sequence(data.g, tg, "data.g");
  const Grid2D& g = *grid;
  const int n = g.n_nodes();
  const double dt = tg.dt();
  const double eps = cfg.epsilon;

  SpMat A = edge_stiffness(g);
  for (int p = 0; p < n; ++p) {
    A.coeffRef(p, p) += g.area_weights()[p] * (cfg.mu_bar + 1.0 / dt);
  }
  const SpMat B = flux_scatter(g);
  const SpMat Tr = trace_selector(g);
  const SpMat Ps = surface_power_matrix(g, cfg.mismatch_power);
  const SpMat C = (B * Ps * Tr) / eps;

  std::vector<Eigen::Triplet<double>> trips;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      trips.emplace_back(it.row(), it.col(), it.value());
      trips.emplace_back(n + it.row(), n + it.col(), it.value());
    }
  }
  for (int p = 0; p < n; ++p) {
    trips.emplace_back(p, n + p, g.area_weights()[p]);
  }
  // flux = P^s (Tr y - f)/eps  ->  lambda rows carry -C y on the left.
  for (int k = 0; k < C.outerSize(); ++k) {
    for (SpMat::InnerIterator it(C, k); it; ++it) {
      trips.emplace_back(n + it.row(), it.col(), -it.value());
    }
  }
  SpMat M(2 * n, 2 * n);
  M.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<SpMat> lu(M);
  if (lu.info() != Eigen::Success) {
    throw SingularOperatorError("factorization of the sideway block system failed");
  }

  SidewayResult out{SpaceTimeField(grid, tg), SpaceTimeField(grid, tg)};
  out.y.level(0) = background_solve(grid, cfg.mu_bar, data.g[0]);
  const Eigen::VectorXd& w = g.area_weights();
  for (int k = 0; k < tg.steps; ++k) {
    Eigen::VectorXd rhs(2 * n);
    rhs.head(n) = w.cwiseProduct(out.y.level(k).values()) / dt + B * data.g[k + 1].values();
    rhs.tail(n) = w.cwiseProduct(out.lambda.level(k).values()) / dt -
                  B * (Ps * data.f[k + 1].values()) / eps;
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite()) {
      throw SingularOperatorError("sideway step produced non-finite values");
    }
    out.y.level(k + 1) = Field(grid, sol.head(n));
    out.lambda.level(k + 1) = Field(grid, sol.tail(n));
  }
  return out;
}

MovingPotentialReport moving_potential_experiment(GridPtr grid, const TimeGrid& tg,
                                                  const LinearDrift& drift, double radius,
                                                  double amplitude,
                                                  const SaddleConfig& cfg) {
  tg.validate();
  cfg.validate();
  if (!(radius > 0)) throw InvalidArgumentError("radius must be positive");
  if (amplitude < 0) throw InvalidArgumentError("amplitude must be >= 0");
  const double T = tg.final_time;
  auto gamma = [&](double t) {
    return std::pair<double, double>{drift.x0 + drift.dx * t / T,
                                     drift.y0 + drift.dy * t / T};
  };

  // Cauchy data: anomaly switched on at t = 0 from the background steady
  // state, unit illumination.
  const TraceSequence flux = constant_flux_sequence(grid, tg, 1.0);
  auto mu_at = [&](int level) {
    const auto [cx, cy] = gamma(level * tg.dt());
    Medium medium{cfg.mu_bar, {DiskInclusion{cx, cy, radius, amplitude}}};
    return realize_medium(grid, medium);  // validates the 2h margin per level
  };
  const Field y_init = background_solve(grid, cfg.mu_bar, flux[0]);
  const SpaceTimeField y_data = heat_forward_varying(grid, tg, mu_at, y_init, flux);

  TimeCauchyData data;
  data.g = flux;
  data.f.reserve(tg.steps + 1);
  for (int k = 0; k <= tg.steps; ++k) data.f.push_back(trace(y_data.level(k)));

  MovingPotentialReport report{{}, sideway_march(grid, tg, data, cfg), 0};

  const auto samples = default_samples(*grid, 2);
  double err_sum = 0;
  int err_count = 0;
  for (int k = 1; k <= tg.steps; ++k) {
    const double t = k * tg.dt();
    const auto [gx, gy] = gamma(t);
    TrajectoryPoint pt;
    pt.t = t;
    pt.gx = gx;
    pt.gy = gy;
    const Field& lam = report.solution.lambda.level(k);
    double mass = 0, mx = 0, my = 0;
    for (int p : samples) {
      const double v = std::max(0.0, lam[p]);
      mass += v;
      mx += v * grid->node_x(p);
      my += v * grid->node_y(p);
    }
    if (mass > 0) {
      pt.detected = true;
      pt.cx = mx / mass;
      pt.cy = my / mass;
      pt.err = std::hypot(pt.cx - gx, pt.cy - gy);
      if (k > tg.steps / 2) {
        err_sum += pt.err;
        ++err_count;
      }
    } else {
      pt.cx = pt.cy = pt.err = std::numeric_limits<double>::quiet_NaN();
    }
    report.points.push_back(pt);
  }
  report.mean_error_after_half =
      err_count ? err_sum / err_count : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace invmed
