#pragma once

#include <functional>
#include <vector>

#include "invmed/grid.hpp"
#include "invmed/saddle.hpp"

namespace invmed {

struct TimeGrid {
  double final_time = 0.1;
  int steps = 20;  ///< nt >= 2

  double dt() const { return final_time / steps; }
  void validate() const;
};

/// Time-indexed sequence of fields on one spatial grid, levels t_0 .. t_nt.
class SpaceTimeField {
 public:
  SpaceTimeField(GridPtr grid, const TimeGrid& tg);

  const GridPtr& grid() const { return grid_; }
  const TimeGrid& time_grid() const { return tg_; }
  int levels() const { return static_cast<int>(fields_.size()); }
  Field& level(int k) { return fields_.at(k); }
  const Field& level(int k) const { return fields_.at(k); }
  double time(int k) const { return k * tg_.dt(); }

 private:
  GridPtr grid_;
  TimeGrid tg_;
  std::vector<Field> fields_;
};

/// One boundary trace per time level t_0 .. t_nt.
using TraceSequence = std::vector<BoundaryTrace>;

TraceSequence constant_flux_sequence(GridPtr grid, const TimeGrid& tg, double value);

/// Time-dependent Cauchy pair (f(t), g(t)).
struct TimeCauchyData {
  TraceSequence f;
  TraceSequence g;
};

/// Implicit-Euler march of y_t - lap y + mu y = 0 with Neumann flux per
/// step; unconditionally stable, first order in time.  With zero flux and
/// mu = 0 the weighted mean of y is conserved exactly per step.
SpaceTimeField heat_forward(GridPtr grid, const TimeGrid& tg, const Field& mu,
                            const Field& y0, const TraceSequence& flux);

/// Same march with a level-dependent coefficient (moving potentials).
/// mu_at(k) is the coefficient on the implicit level t_k, k = 1 .. nt.
SpaceTimeField heat_forward_varying(GridPtr grid, const TimeGrid& tg,
                                    const std::function<Field(int)>& mu_at,
                                    const Field& y0, const TraceSequence& flux);

struct TimeReversalResult {
  SpaceTimeField y;
  SpaceTimeField lambda;
  bool ill_conditioned = false;  ///< epsilon below 1e-8
};

/// Backward-heat recovery: solves the coupled two-point system
///   y_t - lap y + lambda = 0          (zero flux),
///   -lambda_t - lap lambda = 0,
///   lambda(T) = (y(T) - z) / epsilon,
///   lambda(0) + alpha * (-lap_h) y(0) = 0,
/// assembled globally in space-time and factorized once.  The initial
/// coupling is the variational derivative of the |grad y(0)|^2 penalty
/// with weight alpha.  Returns y (level 0 is the recovered initial
/// condition) and lambda.
TimeReversalResult time_reversal_solve(GridPtr grid, const TimeGrid& tg, const Field& z,
                                       const SaddleConfig& cfg, double alpha);

struct SidewayResult {
  SpaceTimeField y;
  SpaceTimeField lambda;
};

/// Joint implicit forward march of
///   y_t - lap y + mu_bar y + lambda = 0,  dy/dnu = g(t),
///   lambda_t - lap lambda + mu_bar lambda = 0,
///     dlambda/dnu = P^s (trace y(t) - f(t)) / epsilon,
/// coupled through the current-step trace and solved as one 2x2 block
/// system per step (factorized once).  The mismatch enters as
/// trace y - f so that lambda images absorbing inclusions with positive
/// values; the march starts from the elliptic background for g(0) with
/// lambda = 0.
SidewayResult sideway_march(GridPtr grid, const TimeGrid& tg, const TimeCauchyData& data,
                            const SaddleConfig& cfg);

/// gamma(t) = (x0 + dx * t/T, y0 + dy * t/T).
struct LinearDrift {
  double x0 = 0.3, y0 = 0.5;
  double dx = 0.4, dy = 0.0;
};

struct TrajectoryPoint {
  double t = 0;
  double cx = 0, cy = 0;  ///< centroid of max(0, lambda) (NaN when undetected)
  double gx = 0, gy = 0;  ///< true inclusion center
  double err = 0;         ///< |c - gamma| (NaN when undetected)
  bool detected = false;
};

struct MovingPotentialReport {
  std::vector<TrajectoryPoint> points;  ///< one per level t_1 .. t_nt
  SidewayResult solution;
  double mean_error_after_half = 0;  ///< NaN if nothing detected there
};

/// Generates Cauchy data for a disk inclusion moving along gamma(t)
/// (switched on at t = 0 from the mu_bar steady state, unit flux), runs
/// sideway_march, and reports the per-level centroid of max(0, lambda)
/// against the true path.
MovingPotentialReport moving_potential_experiment(GridPtr grid, const TimeGrid& tg,
                                                  const LinearDrift& drift, double radius,
                                                  double amplitude,
                                                  const SaddleConfig& cfg);

}  // namespace invmed
