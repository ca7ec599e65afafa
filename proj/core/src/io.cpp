#include "invmed/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace invmed {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_field(const std::filesystem::path& path, const Field& field) {
  auto out = open_out(path);
  const Grid2D& g = *field.grid();
  out << g.nx() << ' ' << g.ny() << '\n';
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i) out << ' ';
      out << format_double(field[g.node(i, j)]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Field read_field(const std::filesystem::path& path) {
  auto in = open_in(path);
  int nx = 0, ny = 0;
  if (!(in >> nx >> ny)) throw IoError("bad field header in " + path.string());
  GridPtr grid;
  try {
    grid = make_grid(nx, ny);
  } catch (const InvalidArgumentError& e) {
    throw IoError("bad field header in " + path.string() + ": " + e.what());
  }
  Eigen::VectorXd v(grid->n_nodes());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!(in >> v[grid->node(i, j)])) {
        throw IoError("truncated field data in " + path.string());
      }
    }
  }
  return Field(grid, std::move(v));
}

void write_trace(const std::filesystem::path& path, const BoundaryTrace& t) {
  auto out = open_out(path);
  out << t.size() << '\n';
  for (int k = 0; k < t.size(); ++k) {
    if (k) out << ' ';
    out << format_double(t[k]);
  }
  out << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> read_trace_values(const std::filesystem::path& path) {
  auto in = open_in(path);
  int n = 0;
  if (!(in >> n) || n < 0) throw IoError("bad trace header in " + path.string());
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) {
    if (!(in >> v[k])) throw IoError("truncated trace data in " + path.string());
  }
  return v;
}

void write_space_time(const std::filesystem::path& dir, const std::string& stem,
                      const SpaceTimeField& stf) {
  {
    auto out = open_out(dir / (stem + ".manifest"));
    out << stf.time_grid().steps << ' ' << format_double(stf.time_grid().dt()) << '\n';
  }
  for (int k = 0; k < stf.levels(); ++k) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%03d.field", stem.c_str(), k);
    write_field(dir / name, stf.level(k));
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "epsilon,err_u,err_trace,norm_lambda\n";
  for (const auto& r : rows) {
    if (r.ok) {
      out << format_double(r.epsilon) << ',' << format_double(r.err_u) << ','
          << format_double(r.err_trace) << ',' << format_double(r.norm_lambda) << '\n';
    } else {
      out << format_double(r.epsilon) << ",nan,nan,nan\n";
    }
  }
}

void write_iterations_csv(const std::filesystem::path& path,
                          const std::vector<IterationRecord>& history) {
  auto out = open_out(path);
  out << "k,inc_u,inc_lambda,rho_hat\n";
  for (const auto& rec : history) {
    out << rec.k << ',' << format_double(rec.inc_u) << ',' << format_double(rec.inc_lambda)
        << ',' << format_double(rec.rho_hat) << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryPoint>& points) {
  auto out = open_out(path);
  out << "t,cx,cy,gx,gy,err\n";
  for (const auto& p : points) {
    out << format_double(p.t) << ',' << format_double(p.cx) << ',' << format_double(p.cy)
        << ',' << format_double(p.gx) << ',' << format_double(p.gy) << ','
        << format_double(p.err) << '\n';
  }
}

void dump_matrix(const std::filesystem::path& path, const SpMat& m) {
  auto out = open_out(path);
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    }
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace invmed
