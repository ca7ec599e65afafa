#include "invmed/grid.hpp"

#include <cmath>

namespace invmed {

Grid2D::Grid2D(int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 3 || ny < 3) {
    throw InvalidArgumentError("grid must have at least 3 nodes per axis, got " +
                               std::to_string(nx) + "x" + std::to_string(ny));
  }
  hx_ = 1.0 / (nx - 1);
  hy_ = 1.0 / (ny - 1);

  // Counterclockwise closed loop from (0,0): bottom, right, top, left.
  loop_.reserve(2 * (nx - 1) + 2 * (ny - 1));
  auto push = [&](int i, int j) {
    LoopNode ln;
    ln.i = i;
    ln.j = j;
    ln.node = node(i, j);
    if (i == 0) ln.sides |= kSideLeft;
    if (i == nx - 1) ln.sides |= kSideRight;
    if (j == 0) ln.sides |= kSideBottom;
    if (j == ny - 1) ln.sides |= kSideTop;
    loop_.push_back(ln);
  };
  for (int i = 0; i < nx; ++i) push(i, 0);
  for (int j = 1; j < ny; ++j) push(nx - 1, j);
  for (int i = nx - 2; i >= 0; --i) push(i, ny - 1);
  for (int j = ny - 2; j >= 1; --j) push(0, j);

  const int m = loop_size();
  for (int k = 0; k < m; ++k) {
    const LoopNode& a = loop_[k];
    const LoopNode& b = loop_[(k + 1) % m];
    loop_[k].seg_next = (a.j == b.j) ? hx_ : hy_;
  }
  for (int k = 0; k < m; ++k) {
    const double prev = loop_[(k + m - 1) % m].seg_next;
    loop_[k].arc_weight = 0.5 * (prev + loop_[k].seg_next);
  }

  node_to_loop_.assign(n_nodes(), -1);
  for (int k = 0; k < m; ++k) node_to_loop_[loop_[k].node] = k;

  area_w_.resize(n_nodes());
  for (int j = 0; j < ny; ++j) {
    const double wy = (j == 0 || j == ny - 1) ? hy_ / 2 : hy_;
    for (int i = 0; i < nx; ++i) {
      const double wx = (i == 0 || i == nx - 1) ? hx_ / 2 : hx_;
      area_w_[node(i, j)] = wx * wy;
    }
  }
}

GridPtr make_grid(int nx, int ny) { return std::make_shared<const Grid2D>(nx, ny); }

Field::Field(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), v_(std::move(values)) {
  if (v_.size() != grid_->n_nodes()) {
    throw InvalidArgumentError("field value count " + std::to_string(v_.size()) +
                               " does not match grid node count " +
                               std::to_string(grid_->n_nodes()));
  }
  if (!v_.allFinite()) throw InvalidArgumentError("field contains non-finite values");
}

BoundaryTrace::BoundaryTrace(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), v_(std::move(values)) {
  if (v_.size() != grid_->loop_size()) {
    throw InvalidArgumentError("trace length " + std::to_string(v_.size()) +
                               " does not match boundary loop length " +
                               std::to_string(grid_->loop_size()));
  }
  if (!v_.allFinite()) throw InvalidArgumentError("trace contains non-finite values");
}

Field constant_field(GridPtr grid, double value) {
  Field f(grid);
  f.values().setConstant(value);
  return f;
}

BoundaryTrace constant_trace(GridPtr grid, double value) {
  BoundaryTrace t(grid);
  t.values().setConstant(value);
  return t;
}

double l2_norm(const Field& f) {
  return std::sqrt(f.grid()->area_weights().cwiseProduct(f.values().cwiseAbs2()).sum());
}

double linf_norm(const Field& f) { return f.values().cwiseAbs().maxCoeff(); }

double boundary_dot(const BoundaryTrace& a, const BoundaryTrace& b) {
  require_same_grid(a.grid(), b.grid());
  const auto& loop = a.grid()->loop();
  double s = 0;
  for (int k = 0; k < a.size(); ++k) s += loop[k].arc_weight * a[k] * b[k];
  return s;
}

double boundary_l2(const BoundaryTrace& a) { return std::sqrt(boundary_dot(a, a)); }

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (a == b) return;
  if (a->nx() != b->nx() || a->ny() != b->ny()) {
    throw InvalidArgumentError("grids do not match");
  }
}

}  // namespace invmed
