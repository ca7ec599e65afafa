#pragma once

#include <Eigen/SparseCholesky>
#include <memory>
#include <mutex>

#include "invmed/grid.hpp"
#include "invmed/mesh.hpp"

namespace invmed {

enum class BoundaryMode { kNeumann, kDirichlet };

struct SolverConfig {
  enum class Method { kDirect, kCg };
  Method method = Method::kDirect;
  double cg_tolerance = 1e-10;  ///< relative residual, in (0,1)
  int max_iterations = 0;       ///< 0 -> 10*nx*ny
};

/// Edge-conductance stiffness matrix S of the 5-point Laplacian in
/// symmetric finite-volume form (Neumann ghost elimination after row
/// scaling by the nodal area weight).  S is symmetric PSD with kernel =
/// constants; S + diag(w .* c) is the Neumann system matrix.
SpMat edge_stiffness(const Grid2D& grid);

/// Scatter of boundary-loop values into nodal right-hand sides with the
/// arclength weights: (B q)_node(k) = s_k q_k.
SpMat flux_scatter(const Grid2D& grid);

/// Selection of boundary-loop values from a nodal vector: (Tr u)_k =
/// u_node(k).
SpMat trace_selector(const Grid2D& grid);

/// Discrete -lap + c(x) on the unit square under Neumann-with-flux or
/// Dirichlet-with-trace boundary handling.  The single linear-algebra
/// gateway: assembled once, factorized lazily on first direct solve and
/// reused (the saddle iterations re-solve with identical operators).
/// Immutable and shareable; concurrent solves against one operator are
/// permitted once factorized.
class EllipticOperator {
 public:
  static EllipticOperator assemble(GridPtr grid, Field c, BoundaryMode mode);

  const GridPtr& grid() const { return grid_; }
  BoundaryMode mode() const { return mode_; }
  const Field& coefficient() const { return c_; }

  /// Solves -lap u + c u = interior_source with du/dnu = boundary_data
  /// (Neumann) or u = boundary_data (Dirichlet).
  Field solve(const Field& interior_source, const BoundaryTrace& boundary_data,
              const SolverConfig& cfg = {}) const;

  /// Direct stencil application of (-lap + c): ghost-eliminated zero-flux
  /// rows in Neumann mode; plain 5-point rows at interior nodes and
  /// identity rows on the boundary in Dirichlet mode.
  Field apply_stencil(const Field& u) const;

  /// Neumann system matrix (symmetric FV form).  Neumann mode only.
  const SpMat& fv_matrix() const;
  /// Full row-substitution Dirichlet matrix (identity boundary rows,
  /// 5-point + c interior rows).  Dirichlet mode only; built on demand.
  const SpMat& dirichlet_matrix() const;

  /// Assembles the right-hand side vector matching the system matrix.
  Eigen::VectorXd assemble_rhs(const Field& interior_source,
                               const BoundaryTrace& boundary_data) const;

 private:
  EllipticOperator(GridPtr grid, Field c, BoundaryMode mode);
  void factorize_neumann() const;
  void factorize_dirichlet() const;

  GridPtr grid_;
  Field c_;
  BoundaryMode mode_;

  SpMat A_;  // Neumann: S + diag(w c).  Dirichlet: interior block A_II.
  SpMat coupling_;             // Dirichlet: A_IB (interior x boundary)
  std::vector<int> interior_;  // Dirichlet: interior node list
  std::vector<int> node_to_interior_;
  mutable SpMat full_dirichlet_;
  mutable bool full_built_ = false;

  mutable std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt_;
  mutable std::unique_ptr<std::once_flag> factor_once_ = std::make_unique<std::once_flag>();
};

}  // namespace invmed
