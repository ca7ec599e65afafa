#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "invmed/evolution.hpp"
#include "invmed/grid.hpp"
#include "invmed/mesh.hpp"
#include "invmed/saddle.hpp"

namespace invmed {

/// Shortest round-trip-exact decimal form of a double (17 significant
/// digits).
std::string format_double(double v);

/// Text grid format: header `nx ny`, then ny rows of nx space-separated
/// values, row-major with y increasing.
void write_field(const std::filesystem::path& path, const Field& field);
Field read_field(const std::filesystem::path& path);

/// Trace format: `n` on the first line, then the n loop-ordered values on
/// one line.
void write_trace(const std::filesystem::path& path, const BoundaryTrace& t);
std::vector<double> read_trace_values(const std::filesystem::path& path);

/// One grid file per level plus `<stem>.manifest` holding `nt dt`.
void write_space_time(const std::filesystem::path& dir, const std::string& stem,
                      const SpaceTimeField& stf);

/// `epsilon,err_u,err_trace,norm_lambda` rows (failed rows keep the
/// epsilon and carry nan columns).
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

/// `k,inc_u,inc_lambda,rho_hat` rows.
void write_iterations_csv(const std::filesystem::path& path,
                          const std::vector<IterationRecord>& history);

/// `t,cx,cy,gx,gy,err` rows.
void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryPoint>& points);

/// Assembled-matrix debug dump, `row col value` per line.
void dump_matrix(const std::filesystem::path& path, const SpMat& m);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace invmed
