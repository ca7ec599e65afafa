#pragma once

#include <span>
#include <vector>

#include "invmed/forward.hpp"
#include "invmed/grid.hpp"

namespace invmed {

/// Sobolev scalings of the direct sampling index.  The boundary filter is
/// Lambda = P^s (integer power of the surface Laplacian) and the weight is
/// |eta|_W = ((P^t eta, eta)_Gamma)^{1/2}, P^0 = identity.
struct ProbeConfig {
  int lambda_power = 1;     ///< s >= 0
  double weight_power = 1;  ///< t >= 0 (fractional allowed)
  double epsilon = 1e-2;    ///< flux scale when the index seeds saddle iterations
  double mu_bar = 1.0;

  void validate() const;
};

/// Probing index over interior sample nodes.  Values at non-sample nodes
/// are zero.  The argmax excludes a boundary margin and breaks ties toward
/// the lowest linear node index.
struct IndexField {
  Field values;
  std::vector<int> samples;
  int argmax_node = -1;
  double argmax_x = 0, argmax_y = 0;
  double argmax_value = 0;
};

/// All interior nodes at least `margin` nodes away from the boundary.
std::vector<int> default_samples(const Grid2D& grid, int margin = 2);

/// Boundary trace of the probing function eta_x: the solution of
/// -lap G + mu_bar G = delta_x (unit discrete mass, zero Neumann flux).
BoundaryTrace probe_trace(GridPtr grid, int node, double mu_bar);

/// Direct sampling index in Green's-function form,
///   I(x) = (P^s eta_x, m)_Gamma / |eta_x|_W,
/// with the imaging mismatch m = trace(u0) - f, so inclusions appear as
/// positive peaks (the measured trace dips where absorption grows).
/// `normalize = false` drops the |eta_x|_W division.
IndexField index_green(const CauchyData& data, const Field& u0, const ProbeConfig& cfg,
                       std::span<const int> samples, bool normalize = true);
IndexField index_green(const CauchyData& data, const Field& u0, const ProbeConfig& cfg,
                       bool normalize = true);

/// The same index evaluated without constructing any eta_x: solves the
/// adjoint equation -lap l + mu_bar l = 0 with flux P^s m and reads off
/// the nodal values, which agree with the un-normalized Green form up to
/// solver tolerance (discrete adjoint identity).  Optional
/// post-normalization divides by the per-node |eta_x|_W.
IndexField index_adjoint(const CauchyData& data, const Field& u0, const ProbeConfig& cfg,
                         bool normalize = false);

/// Kernel diagnostics C[i][j] = (P^s eta_i, eta_j)_Gamma / |eta_i|_W, the
/// symmetrically normalized variant, and the per-row diagonal dominance
/// ratio diag / max |offdiag|.
struct KernelMatrices {
  Eigen::MatrixXd one_sided;
  Eigen::MatrixXd symmetric;
  Eigen::VectorXd dominance;
};
KernelMatrices kernel_matrix(GridPtr grid, std::span<const int> samples,
                             const ProbeConfig& cfg);

/// Pointwise max(0, I); argmax metadata recomputed.
IndexField project_nonnegative(const IndexField& idx);

}  // namespace invmed
