#include "invmed/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "invmed/io.hpp"
#include "invmed/probing.hpp"

namespace invmed {

namespace fs = std::filesystem;

namespace {

struct CommandContext {
  const RunConfig& cfg;
  fs::path out;
  std::ostringstream summary;
};

CauchyData synth_data(const RunConfig& cfg, GridPtr grid) {
  const Medium medium = medium_from_config(cfg);
  const BoundaryTrace g = constant_trace(grid, cfg.g_const);
  return make_cauchy(grid, medium, g, cfg.noise, cfg.seed);
}

Field parse_y0(const RunConfig& cfg, GridPtr grid) {
  std::istringstream is(cfg.y0_spec);
  std::string kind;
  is >> kind;
  if (kind == "mode") {
    int kx = 1, ky = 1;
    if (!(is >> kx >> ky) || kx < 0 || ky < 0) {
      throw ConfigError("key 'y0_spec': expected 'mode kx ky'", "y0_spec");
    }
    Field y0(grid);
    for (int p = 0; p < grid->n_nodes(); ++p) {
      y0[p] = std::cos(kx * std::numbers::pi * grid->node_x(p)) *
              std::cos(ky * std::numbers::pi * grid->node_y(p));
    }
    return y0;
  }
  if (kind == "disk") {
    DiskInclusion d;
    if (!(is >> d.cx >> d.cy >> d.radius >> d.amplitude)) {
      throw ConfigError("key 'y0_spec': expected 'disk cx cy r amp'", "y0_spec");
    }
    Field y0(grid);
    for (int p = 0; p < grid->n_nodes(); ++p) {
      const double dx = grid->node_x(p) - d.cx, dy = grid->node_y(p) - d.cy;
      if (dx * dx + dy * dy <= d.radius * d.radius) y0[p] = d.amplitude;
    }
    return y0;
  }
  throw ConfigError("key 'y0_spec': unknown kind '" + kind + "'", "y0_spec");
}

void write_recovery(CommandContext& ctx, const Field& u, const Field& lambda) {
  const MediumRecovery rec = recover_medium(u, lambda, ctx.cfg.tau);
  write_field(ctx.out / "mu_hat.field", rec.mu_hat);
  write_field(ctx.out / "mask.field", rec.mask);
  if (rec.all_masked) {
    ctx.summary << "warning: recovery masked everywhere (u < tau)\n";
  } else if (rec.masked_count > 0) {
    ctx.summary << "recovery masked " << rec.masked_count << " nodes\n";
  }
}

void cmd_forward(CommandContext& ctx) {
  const auto grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
  const Medium medium = medium_from_config(ctx.cfg);
  const Field mu = realize_medium(grid, medium);
  const BoundaryTrace g = constant_trace(grid, ctx.cfg.g_const);
  const SolverConfig scfg = solver_from_config(ctx.cfg);
  const ForwardSolution sol = solve_forward(grid, mu, g, scfg);
  const CauchyData data = synth_data(ctx.cfg, grid);
  const Field u0 = background_solve(grid, ctx.cfg.mu_bar, g, scfg);

  write_field(ctx.out / "mu.field", mu);
  write_field(ctx.out / "u.field", sol.u);
  write_field(ctx.out / "u0.field", u0);
  write_trace(ctx.out / "f.trace", data.f);
  write_trace(ctx.out / "g.trace", data.g);

  BoundaryTrace mismatch = data.f;
  mismatch.values() -= trace(u0).values();
  ctx.summary << "forward solve done; |f - trace(u0)|_Gamma = "
              << format_double(boundary_l2(mismatch)) << "\n";
}

void cmd_probe(CommandContext& ctx) {
  const auto grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
  const CauchyData data = synth_data(ctx.cfg, grid);
  const Field u0 = background_solve(grid, ctx.cfg.mu_bar, data.g);
  ProbeConfig pc;
  pc.lambda_power = ctx.cfg.s;
  pc.weight_power = ctx.cfg.t;
  pc.epsilon = ctx.cfg.epsilon;
  pc.mu_bar = ctx.cfg.mu_bar;

  const IndexField idx = ctx.cfg.probe_method == "green"
                             ? index_green(data, u0, pc, ctx.cfg.normalize)
                             : index_adjoint(data, u0, pc, ctx.cfg.normalize);

  write_field(ctx.out / "index.field", idx.values);
  write_text(ctx.out / "index.argmax",
             "argmax " + format_double(idx.argmax_x) + " " + format_double(idx.argmax_y) +
                 " " + format_double(idx.argmax_value) + "\n");
  ctx.summary << "probing index (" << ctx.cfg.probe_method << ") argmax at ("
              << format_double(idx.argmax_x) << ", " << format_double(idx.argmax_y)
              << ") value " << format_double(idx.argmax_value) << "\n";
}

void cmd_saddle(CommandContext& ctx) {
  const auto grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
  const CauchyData data = synth_data(ctx.cfg, grid);
  const SaddleConfig sc = saddle_from_config(ctx.cfg);

  SaddleState state{Field(grid), Field(grid), 0, 0, 0};
  if (sc.mode == DataMode::kDirichletData) {
    state = dtn_solve(data, sc);
    ctx.summary << "DtN block solve done\n";
  } else if (ctx.cfg.engine == "adi") {
    const ProbingRun run = run_iterative_probing(data, sc);
    state = run.state;
    write_iterations_csv(ctx.out / "iterations.csv", run.history);
    ctx.summary << "iterative probing converged in " << run.state.iterations
                << " sweeps, rho_hat = " << format_double(run.rho_hat)
                << ", coupled residual = "
                << format_double(coupled_residual(run.state, data, sc)) << "\n";
  } else {
    state = solve_coupled(data, sc);
    ctx.summary << "coupled block solve residual = "
                << format_double(coupled_residual(state, data, sc)) << "\n";
  }

  write_field(ctx.out / "u.field", state.u);
  write_field(ctx.out / "lambda.field", state.lambda);
  write_recovery(ctx, state.u, state.lambda);
}

void cmd_constrained(CommandContext& ctx) {
  const auto grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
  const CauchyData data = synth_data(ctx.cfg, grid);
  const SaddleConfig sc = saddle_from_config(ctx.cfg);
  const ConstrainedSolution sol = constrained_solve(data, sc, ctx.cfg.theta);

  write_field(ctx.out / "u.field", sol.u);
  write_field(ctx.out / "p.field", sol.p);
  write_field(ctx.out / "lambda.field", sol.lambda);
  write_iterations_csv(ctx.out / "iterations.csv", sol.history);
  write_recovery(ctx, sol.u, sol.lambda);
  ctx.summary << "constrained iteration converged in " << sol.iterations << " sweeps\n";
}

void cmd_sweep(CommandContext& ctx) {
  const auto grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
  const CauchyData data = synth_data(ctx.cfg, grid);
  const SaddleConfig sc = saddle_from_config(ctx.cfg);
  const auto epsilons = epsilons_from_config(ctx.cfg);

  const Field ubar = biharmonic_limit(data, sc);
  write_field(ctx.out / "ubar.field", ubar);
  const auto rows = epsilon_sweep(data, sc, epsilons);
  write_sweep_csv(ctx.out / "sweep.csv", rows);
  int failed = 0;
  for (const auto& r : rows) failed += r.ok ? 0 : 1;
  ctx.summary << "sweep over " << rows.size() << " epsilons, " << failed << " failures\n";
}

void cmd_heat_reverse(CommandContext& ctx) {
  const auto grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
  const TimeGrid tg{ctx.cfg.T, ctx.cfg.nt};
  const Field y0 = parse_y0(ctx.cfg, grid);
  const TraceSequence zero_flux = constant_flux_sequence(grid, tg, 0.0);
  const SpaceTimeField path = heat_forward(grid, tg, Field(grid), y0, zero_flux);

  Field z = path.level(tg.steps);
  if (ctx.cfg.noise > 0) {
    const double scale = ctx.cfg.noise * linf_norm(z);
    const auto draws = uniform_symmetric(ctx.cfg.seed, static_cast<std::size_t>(z.size()));
    for (int p = 0; p < z.size(); ++p) z[p] += scale * draws[p];
  }

  const SaddleConfig sc = saddle_from_config(ctx.cfg);
  const TimeReversalResult res = time_reversal_solve(grid, tg, z, sc, ctx.cfg.alpha);

  write_field(ctx.out / "y0_true.field", y0);
  write_field(ctx.out / "z.field", z);
  write_field(ctx.out / "y0_recovered.field", res.y.level(0));
  write_space_time(ctx.out, "y", res.y);
  write_space_time(ctx.out, "lambda", res.lambda);

  const double rel =
      l2_norm(Field(grid, res.y.level(0).values() - y0.values())) /
      std::max(l2_norm(y0), 1e-300);
  ctx.summary << "time reversal recovery relative error = " << format_double(rel) << "\n";
  if (res.ill_conditioned) {
    ctx.summary << "warning: epsilon below 1e-8, system is severely ill-conditioned\n";
  }
}

void cmd_sideway(CommandContext& ctx) {
  const auto grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
  const TimeGrid tg{ctx.cfg.T, ctx.cfg.nt};
  const Medium medium = medium_from_config(ctx.cfg);
  const Field mu = realize_medium(grid, medium);
  const TraceSequence flux = constant_flux_sequence(grid, tg, ctx.cfg.g_const);

  // Anomaly switched on at t = 0 from the background steady state.
  const Field y_init = background_solve(grid, ctx.cfg.mu_bar, flux[0]);
  const SpaceTimeField y_data = heat_forward(grid, tg, mu, y_init, flux);
  TimeCauchyData data;
  data.g = flux;
  for (int k = 0; k <= tg.steps; ++k) data.f.push_back(trace(y_data.level(k)));

  const SaddleConfig sc = saddle_from_config(ctx.cfg);
  const SidewayResult res = sideway_march(grid, tg, data, sc);
  write_space_time(ctx.out, "y", res.y);
  write_space_time(ctx.out, "lambda", res.lambda);

  BoundaryTrace mism = trace(res.y.level(tg.steps));
  mism.values() -= data.f[tg.steps].values();
  ctx.summary << "sideway march final |trace y - f|_Gamma = "
              << format_double(boundary_l2(mism)) << "\n";
}

void cmd_moving(CommandContext& ctx) {
  const auto grid = make_grid(ctx.cfg.nx, ctx.cfg.ny);
  const TimeGrid tg{ctx.cfg.T, ctx.cfg.nt};
  const LinearDrift drift = drift_from_config(ctx.cfg);
  const SaddleConfig sc = saddle_from_config(ctx.cfg);
  const MovingPotentialReport report = moving_potential_experiment(
      grid, tg, drift, ctx.cfg.move_radius, ctx.cfg.move_amp, sc);

  write_trajectory_csv(ctx.out / "trajectory.csv", report.points);
  write_space_time(ctx.out, "lambda", report.solution.lambda);

  if (std::isnan(report.mean_error_after_half)) {
    ctx.summary << "no detection: max(0, lambda) carries no mass\n";
  } else {
    ctx.summary << "mean tracking error after T/2 = "
                << format_double(report.mean_error_after_half) << "\n";
  }
}

int classify(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidArgumentError*>(&e)) {
    return kExitUsage;
  }
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  return kExitSolver;
}

}  // namespace

RunOutcome run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome outcome;
  CommandContext ctx{cfg, fs::path(cfg.out), {}};

  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) {
    return {kExitIo, "cannot create output directory " + cfg.out + ": " + ec.message()};
  }

  std::string status = "ok";
  try {
    write_text(ctx.out / "config.resolved", echo_config(cfg));
    if (cfg.command == "forward") {
      cmd_forward(ctx);
    } else if (cfg.command == "probe") {
      cmd_probe(ctx);
    } else if (cfg.command == "saddle") {
      cmd_saddle(ctx);
    } else if (cfg.command == "constrained") {
      cmd_constrained(ctx);
    } else if (cfg.command == "sweep") {
      cmd_sweep(ctx);
    } else if (cfg.command == "heat-reverse") {
      cmd_heat_reverse(ctx);
    } else if (cfg.command == "sideway") {
      cmd_sideway(ctx);
    } else if (cfg.command == "moving") {
      cmd_moving(ctx);
    } else {
      throw ConfigError("unknown command '" + cfg.command + "'", "command");
    }
  } catch (const Error& e) {
    outcome.exit_code = classify(e);
    status = std::string("error: ") + e.what();
    ctx.summary << status << "\n";
  }

  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  outcome.summary = ctx.summary.str();

  std::ostringstream manifest;
  manifest << "command: " << cfg.command << "\n"
           << "status: " << status << "\n"
           << "config: config.resolved\n"
           << outcome.summary << "wall_ms: " << wall_ms << "\n";
  try {
    write_text(ctx.out / "manifest.txt", manifest.str());
  } catch (const Error&) {
    if (outcome.exit_code == kExitOk) outcome.exit_code = kExitIo;
  }
  return outcome;
}

}  // namespace invmed
