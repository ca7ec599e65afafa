#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <optional>

#include "invmed/grid.hpp"

namespace invmed {

using SpMat = Eigen::SparseMatrix<double>;

/// Boundary-loop-ordered restriction of nodal values.
BoundaryTrace trace(const Field& field);

/// Writes trace values back onto the boundary nodes of a field (interior
/// untouched).  Inverse of trace on boundary values.
void embed_trace(const BoundaryTrace& t, Field& field);

/// Outward normal derivative by second-order one-sided differences
/// (3-point); corners average the two one-sided axis derivatives.
BoundaryTrace normal_derivative(const Field& field);

/// Discrete surface Laplacian P on the closed boundary loop.
///
/// P = W^{-1} L where L is the 1-D stiffness matrix of the loop graph
/// (entries +-1/d per segment of length d) and W the diagonal of nodal
/// arclength weights.  On a uniform loop this is the (-1, 2, -1)/h^2
/// stencil; at corners the nodal weight is the mean of the two adjacent
/// edge spacings.  P is self-adjoint and positive semidefinite in the
/// arclength-weighted inner product, with kernel = constants.
class SurfaceOperator {
 public:
  explicit SurfaceOperator(GridPtr grid);

  const GridPtr& grid() const { return grid_; }

  /// P applied once.
  BoundaryTrace apply(const BoundaryTrace& a) const;
  /// P^s, s >= 0 (s = 0 is the identity).
  BoundaryTrace apply_power(const BoundaryTrace& a, int s) const;

  /// Dirichlet form (P a, b)_Gamma = a^T L b.
  double dirichlet_form(const BoundaryTrace& a, const BoundaryTrace& b) const;

  /// Quadratic form (P^t a, a)_Gamma for real t >= 0; integer t by repeated
  /// application, fractional t through the dense generalized eigensystem
  /// L v = theta W v (computed once per operator and cached).
  double power_quadratic_form(const BoundaryTrace& a, double t) const;

  /// W-seminorm |a|_W = ((P^t a, a)_Gamma)^{1/2}.
  double w_seminorm(const BoundaryTrace& a, double t) const;

  /// Loop stiffness L (m x m, symmetric PSD).
  const SpMat& stiffness() const { return L_; }

 private:
  const Eigen::VectorXd& eigenvalues() const;
  const Eigen::MatrixXd& eigenvectors() const;
  void ensure_spectrum() const;

  GridPtr grid_;
  SpMat L_;
  Eigen::VectorXd arc_w_;
  mutable std::optional<Eigen::VectorXd> eval_;
  mutable std::optional<Eigen::MatrixXd> evec_;  // W-orthonormal columns
};

/// Sparse matrix of P^s acting on loop vectors (m x m); s = 0 gives the
/// identity.
SpMat surface_power_matrix(const Grid2D& grid, int s);

}  // namespace invmed
