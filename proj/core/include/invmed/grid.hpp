#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <vector>

#include "invmed/errors.hpp"

namespace invmed {

/// Sides of the unit square a boundary node touches (corners touch two).
enum Side : unsigned {
  kSideLeft = 1u,
  kSideRight = 2u,
  kSideBottom = 4u,
  kSideTop = 8u,
};

struct LoopNode {
  int i = 0;             ///< x index
  int j = 0;             ///< y index
  int node = 0;          ///< linear node index j*nx + i
  unsigned sides = 0;    ///< Side bitmask
  double arc_weight = 0; ///< nodal arclength weight (trapezoidal)
  double seg_next = 0;   ///< arclength to the next loop node
};

/// Uniform tensor grid on the unit square with a counterclockwise closed
/// boundary loop.  Immutable after construction; share via GridPtr.
class Grid2D {
 public:
  Grid2D(int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  int n_nodes() const { return nx_ * ny_; }
  int loop_size() const { return static_cast<int>(loop_.size()); }

  int node(int i, int j) const { return j * nx_ + i; }
  double x(int i) const { return i * hx_; }
  double y(int j) const { return j * hy_; }
  double node_x(int node) const { return x(node % nx_); }
  double node_y(int node) const { return y(node / nx_); }

  const std::vector<LoopNode>& loop() const { return loop_; }
  /// Loop position of a node, or -1 if interior.
  int loop_index(int node) const { return node_to_loop_[node]; }
  bool is_boundary(int node) const { return node_to_loop_[node] >= 0; }

  /// Finite-volume area weight per node (hx*hy interior, halved on edges,
  /// quartered at corners); sums to 1.
  const Eigen::VectorXd& area_weights() const { return area_w_; }

 private:
  int nx_, ny_;
  double hx_, hy_;
  std::vector<LoopNode> loop_;
  std::vector<int> node_to_loop_;
  Eigen::VectorXd area_w_;
};

using GridPtr = std::shared_ptr<const Grid2D>;

/// Builds a grid; rejects nx or ny below 3 (stencils undefined).
GridPtr make_grid(int nx, int ny);

/// Real-valued function on all grid nodes.
class Field {
 public:
  explicit Field(GridPtr grid)
      : grid_(std::move(grid)), v_(Eigen::VectorXd::Zero(grid_->n_nodes())) {}
  Field(GridPtr grid, Eigen::VectorXd values);

  const GridPtr& grid() const { return grid_; }
  Eigen::VectorXd& values() { return v_; }
  const Eigen::VectorXd& values() const { return v_; }
  double operator[](int node) const { return v_[node]; }
  double& operator[](int node) { return v_[node]; }
  int size() const { return static_cast<int>(v_.size()); }

 private:
  GridPtr grid_;
  Eigen::VectorXd v_;
};

/// Real values on the ordered boundary loop.
class BoundaryTrace {
 public:
  explicit BoundaryTrace(GridPtr grid)
      : grid_(std::move(grid)), v_(Eigen::VectorXd::Zero(grid_->loop_size())) {}
  BoundaryTrace(GridPtr grid, Eigen::VectorXd values);

  const GridPtr& grid() const { return grid_; }
  Eigen::VectorXd& values() { return v_; }
  const Eigen::VectorXd& values() const { return v_; }
  double operator[](int k) const { return v_[k]; }
  double& operator[](int k) { return v_[k]; }
  int size() const { return static_cast<int>(v_.size()); }

 private:
  GridPtr grid_;
  Eigen::VectorXd v_;
};

/// Constant-valued helpers.
Field constant_field(GridPtr grid, double value);
BoundaryTrace constant_trace(GridPtr grid, double value);

/// h-weighted discrete L2 norm: sqrt(sum_i w_i v_i^2) with the FV weights.
double l2_norm(const Field& f);
double linf_norm(const Field& f);
/// Arclength-weighted boundary L2 norm and inner product.
double boundary_l2(const BoundaryTrace& a);
double boundary_dot(const BoundaryTrace& a, const BoundaryTrace& b);

/// Throws InvalidArgumentError unless both live on the same grid object
/// or on grids of identical dimensions.
void require_same_grid(const GridPtr& a, const GridPtr& b);

}  // namespace invmed
