#pragma once

#include <span>
#include <string>
#include <vector>

#include "invmed/forward.hpp"
#include "invmed/grid.hpp"

namespace invmed {

enum class DataMode { kNeumannData, kDirichletData };

/// Parameters of the saddle-point solves.  epsilon is the data-fit weight:
/// the adjoint flux is P^s (f - trace u) / epsilon.
struct SaddleConfig {
  double epsilon = 1e-2;
  double mu_bar = 1.0;
  int mismatch_power = 1;  ///< s, the P power applied to the mismatch
  int max_iterations = 500;
  double tolerance = 1e-10;  ///< relative increment stop, in (0,1)
  DataMode mode = DataMode::kNeumannData;

  void validate() const;
};

/// Paired state (u, lambda) with the increment norms of the last step
/// (h-weighted discrete L2).
struct SaddleState {
  Field u;
  Field lambda;
  int iterations = 0;
  double inc_u = 0;
  double inc_lambda = 0;
};

struct IterationRecord {
  int k = 0;
  double inc_u = 0;
  double inc_lambda = 0;
  double rho_hat = 0;  ///< running geometric-mean increment ratio (last <= 10)
};

/// Initial iterate (u0, 0) with u0 the background solve for data.g.
SaddleState make_initial_state(const CauchyData& data, const SaddleConfig& cfg);

/// One alternating sweep: (a) solve -lap u + mu_bar u + lambda = 0 with
/// flux g, lambda from the incoming state; (b) solve
/// -lap l + mu_bar l = 0 with flux P^s (f - trace u) / epsilon for the new
/// lambda.  The background pair (u0, 0) is a fixed point of consistent
/// data.
SaddleState adi_step(const SaddleState& state, const CauchyData& data,
                     const SaddleConfig& cfg);

struct ProbingRun {
  SaddleState state;
  double rho_hat = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

/// Iterates adi_step from (u0, 0) until the relative increments fall below
/// cfg.tolerance.  Reports the empirical contraction ratio rho_hat (the
/// geometric mean of successive combined increment-norm ratios over the
/// last 10 steps).  Throws NonConvergenceError carrying rho_hat when
/// max_iterations is reached -- the sweeps contract only when epsilon is
/// large enough for the grid, and rho_hat >= 1 is the evidence.
ProbingRun run_iterative_probing(const CauchyData& data, const SaddleConfig& cfg);

/// Solves the full 2x2 block system for (u, lambda) in one shot by sparse
/// LU of the coupled matrix
///   [ A            W  ] [u]        [ B g            ]
///   [ (1/eps)B P^s Tr   A ] [lambda] = [ (1/eps)B P^s f ],
/// where A is the Neumann FV matrix of -lap + mu_bar, W the area weights,
/// B the arclength flux scatter, and Tr the boundary trace selector.
SaddleState solve_coupled(const CauchyData& data, const SaddleConfig& cfg);

/// Relative Euclidean residual of a state in solve_coupled's block system.
double coupled_residual(const SaddleState& state, const CauchyData& data,
                        const SaddleConfig& cfg);

/// The epsilon -> 0 limit: (-lap + mu_bar)^2 ubar = 0 carrying both Cauchy
/// conditions, discretized as the squared second-order operator through an
/// auxiliary variable v = (-lap + mu_bar) u.  Boundary nodes carry two
/// rows: the ghost-flux row of v (with the Neumann data) and the
/// interpolatory Dirichlet row u = f.
Field biharmonic_limit(const CauchyData& data, const SaddleConfig& cfg);

struct SweepRow {
  double epsilon = 0;
  double err_u = 0;       ///< |u_eps - ubar|, h-weighted L2
  double err_trace = 0;   ///< |trace u_eps - f|, arclength L2
  double norm_lambda = 0; ///< |lambda_eps|, h-weighted L2
  bool ok = true;
  std::string message;
};

/// Runs solve_coupled per epsilon against the fixed biharmonic limit.
/// Per-row solver failures are recorded and the sweep continues.
std::vector<SweepRow> epsilon_sweep(const CauchyData& data, const SaddleConfig& cfg,
                                    std::span<const double> epsilons);

struct ConstrainedSolution {
  Field u;
  Field p;
  Field lambda;  ///< max(0, p) exactly at exit
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

/// Damped fixed-point iteration on the nonnegativity-constrained system
///   -lap u + mu_bar u + max(0, p) = 0 (flux g),
///   -lap p + mu_bar p = 0          (flux P^s (f - trace u) / eps):
/// each sweep solves the p-equation, then the u-equation with the relaxed
/// multiplier lambda <- (1-theta) lambda + theta max(0, p).  Throws
/// NonConvergenceError suggesting a smaller damping theta.
ConstrainedSolution constrained_solve(const CauchyData& data, const SaddleConfig& cfg,
                                      double damping);

struct MediumRecovery {
  Field mu_hat;
  Field mask;  ///< 1 where u < tau (value zeroed), 0 elsewhere
  int masked_count = 0;
  bool all_masked = false;
};

/// mu_hat = max(0, lambda) / u where u >= tau; masked to zero elsewhere.
MediumRecovery recover_medium(const Field& u, const Field& lambda, double floor_tau);

/// Dirichlet-to-Neumann variant: imposes u = f on the boundary and fits
/// the flux instead, with the fixed background mismatch
///   dl/dnu = P^s (g - d(u0)/dnu) / eps,
/// u0 the Dirichlet background solve for f.  Assembled and factorized as
/// one block system like solve_coupled.
SaddleState dtn_solve(const CauchyData& data, const SaddleConfig& cfg);

}  // namespace invmed
