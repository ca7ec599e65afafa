#include "invmed/operators.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <vector>

namespace invmed {

SpMat edge_stiffness(const Grid2D& g) {
  const int nx = g.nx(), ny = g.ny();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(8 * g.n_nodes());
  auto wx = [&](int i) { return (i == 0 || i == nx - 1) ? g.hx() / 2 : g.hx(); };
  auto wy = [&](int j) { return (j == 0 || j == ny - 1) ? g.hy() / 2 : g.hy(); };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int p = g.node(i, j);
      if (i + 1 < nx) {
        const int q = g.node(i + 1, j);
        const double c = wy(j) / g.hx();
        trips.emplace_back(p, p, c);
        trips.emplace_back(q, q, c);
        trips.emplace_back(p, q, -c);
        trips.emplace_back(q, p, -c);
      }
      if (j + 1 < ny) {
        const int q = g.node(i, j + 1);
        const double c = wx(i) / g.hy();
        trips.emplace_back(p, p, c);
        trips.emplace_back(q, q, c);
        trips.emplace_back(p, q, -c);
        trips.emplace_back(q, p, -c);
      }
    }
  }
  SpMat S(g.n_nodes(), g.n_nodes());
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

SpMat flux_scatter(const Grid2D& g) {
  SpMat B(g.n_nodes(), g.loop_size());
  B.reserve(Eigen::VectorXi::Constant(g.loop_size(), 1));
  for (int k = 0; k < g.loop_size(); ++k) {
    B.insert(g.loop()[k].node, k) = g.loop()[k].arc_weight;
  }
  B.makeCompressed();
  return B;
}

SpMat trace_selector(const Grid2D& g) {
  SpMat T(g.loop_size(), g.n_nodes());
  T.reserve(Eigen::VectorXi::Constant(g.n_nodes(), 1));
  for (int k = 0; k < g.loop_size(); ++k) T.insert(k, g.loop()[k].node) = 1.0;
  T.makeCompressed();
  return T;
}

EllipticOperator::EllipticOperator(GridPtr grid, Field c, BoundaryMode mode)
    : grid_(std::move(grid)), c_(std::move(c)), mode_(mode) {}

EllipticOperator EllipticOperator::assemble(GridPtr grid, Field c, BoundaryMode mode) {
  require_same_grid(grid, c.grid());
  if (!c.values().allFinite() || c.values().minCoeff() < 0) {
    throw InvalidArgumentError("coefficient must be finite and nonnegative");
  }
  if (mode == BoundaryMode::kNeumann && c.values().maxCoeff() <= 0) {
    throw SingularOperatorError(
        "pure Neumann operator with c == 0 is singular (solution defined only up "
        "to constants); add a background shift");
  }
  EllipticOperator op(grid, std::move(c), mode);
  const Grid2D& g = *grid;

  if (mode == BoundaryMode::kNeumann) {
    op.A_ = edge_stiffness(g);
    SpMat D(g.n_nodes(), g.n_nodes());
    D.reserve(Eigen::VectorXi::Constant(g.n_nodes(), 1));
    for (int p = 0; p < g.n_nodes(); ++p) {
      D.insert(p, p) = g.area_weights()[p] * op.c_[p];
    }
    op.A_ = op.A_ + D;
    return op;
  }

  // Dirichlet: split interior system A_II and boundary coupling A_IB.
  op.interior_.reserve((g.nx() - 2) * (g.ny() - 2));
  op.node_to_interior_.assign(g.n_nodes(), -1);
  for (int j = 1; j < g.ny() - 1; ++j) {
    for (int i = 1; i < g.nx() - 1; ++i) {
      op.node_to_interior_[g.node(i, j)] = static_cast<int>(op.interior_.size());
      op.interior_.push_back(g.node(i, j));
    }
  }
  const int ni = static_cast<int>(op.interior_.size());
  const double cx = 1.0 / (g.hx() * g.hx()), cy = 1.0 / (g.hy() * g.hy());
  std::vector<Eigen::Triplet<double>> ta, tc;
  for (int r = 0; r < ni; ++r) {
    const int p = op.interior_[r];
    const int i = p % g.nx(), j = p / g.nx();
    ta.emplace_back(r, r, 2 * cx + 2 * cy + op.c_[p]);
    const int nbrs[4] = {g.node(i - 1, j), g.node(i + 1, j), g.node(i, j - 1),
                         g.node(i, j + 1)};
    const double coef[4] = {-cx, -cx, -cy, -cy};
    for (int q = 0; q < 4; ++q) {
      const int t = op.node_to_interior_[nbrs[q]];
      if (t >= 0) {
        ta.emplace_back(r, t, coef[q]);
      } else {
        tc.emplace_back(r, g.loop_index(nbrs[q]), coef[q]);
      }
    }
  }
  op.A_.resize(ni, ni);
  op.A_.setFromTriplets(ta.begin(), ta.end());
  op.coupling_.resize(ni, g.loop_size());
  op.coupling_.setFromTriplets(tc.begin(), tc.end());
  return op;
}

const SpMat& EllipticOperator::fv_matrix() const {
  if (mode_ != BoundaryMode::kNeumann) {
    throw InvalidArgumentError("fv_matrix is defined for Neumann mode only");
  }
  return A_;
}

const SpMat& EllipticOperator::dirichlet_matrix() const {
  if (mode_ != BoundaryMode::kDirichlet) {
    throw InvalidArgumentError("dirichlet_matrix is defined for Dirichlet mode only");
  }
  if (!full_built_) {
    const Grid2D& g = *grid_;
    const double cx = 1.0 / (g.hx() * g.hx()), cy = 1.0 / (g.hy() * g.hy());
    std::vector<Eigen::Triplet<double>> trips;
    for (int p = 0; p < g.n_nodes(); ++p) {
      if (g.is_boundary(p)) {
        trips.emplace_back(p, p, 1.0);
        continue;
      }
      const int i = p % g.nx(), j = p / g.nx();
      trips.emplace_back(p, p, 2 * cx + 2 * cy + c_[p]);
      trips.emplace_back(p, g.node(i - 1, j), -cx);
      trips.emplace_back(p, g.node(i + 1, j), -cx);
      trips.emplace_back(p, g.node(i, j - 1), -cy);
      trips.emplace_back(p, g.node(i, j + 1), -cy);
    }
    full_dirichlet_.resize(g.n_nodes(), g.n_nodes());
    full_dirichlet_.setFromTriplets(trips.begin(), trips.end());
    full_built_ = true;
  }
  return full_dirichlet_;
}

Eigen::VectorXd EllipticOperator::assemble_rhs(const Field& source,
                                               const BoundaryTrace& bdata) const {
  require_same_grid(source.grid(), grid_);
  require_same_grid(bdata.grid(), grid_);
  const Grid2D& g = *grid_;
  if (mode_ == BoundaryMode::kNeumann) {
    Eigen::VectorXd b = g.area_weights().cwiseProduct(source.values());
    for (int k = 0; k < g.loop_size(); ++k) {
      b[g.loop()[k].node] += g.loop()[k].arc_weight * bdata[k];
    }
    return b;
  }
  const int ni = static_cast<int>(interior_.size());
  Eigen::VectorXd b(ni);
  for (int r = 0; r < ni; ++r) b[r] = source[interior_[r]];
  b -= coupling_ * bdata.values();
  return b;
}

void EllipticOperator::factorize_neumann() const {
  std::call_once(*factor_once_, [this] {
    auto f = std::make_unique<Eigen::SimplicialLDLT<SpMat>>();
    f->compute(A_);
    if (f->info() != Eigen::Success) {
      throw SingularOperatorError("factorization of the Neumann operator failed");
    }
    ldlt_ = std::move(f);
  });
}

void EllipticOperator::factorize_dirichlet() const {
  std::call_once(*factor_once_, [this] {
    auto f = std::make_unique<Eigen::SimplicialLDLT<SpMat>>();
    f->compute(A_);
    if (f->info() != Eigen::Success) {
      throw SingularOperatorError("factorization of the Dirichlet operator failed");
    }
    ldlt_ = std::move(f);
  });
}

Field EllipticOperator::solve(const Field& source, const BoundaryTrace& bdata,
                              const SolverConfig& cfg) const {
  if (cfg.cg_tolerance <= 0 || cfg.cg_tolerance >= 1) {
    throw InvalidArgumentError("cg tolerance must lie in (0, 1)");
  }
  const Grid2D& g = *grid_;
  const Eigen::VectorXd b = assemble_rhs(source, bdata);

  Eigen::VectorXd x;
  if (cfg.method == SolverConfig::Method::kDirect) {
    if (mode_ == BoundaryMode::kNeumann) {
      factorize_neumann();
    } else {
      factorize_dirichlet();
    }
    x = ldlt_->solve(b);
    if (!x.allFinite()) {
      throw SingularOperatorError("direct solve produced non-finite values");
    }
  } else {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(cfg.cg_tolerance);
    cg.setMaxIterations(cfg.max_iterations > 0 ? cfg.max_iterations
                                               : 10 * g.nx() * g.ny());
    cg.compute(A_);
    x = cg.solve(b);
    if (cg.info() != Eigen::Success) {
      throw NonConvergenceError(
          "conjugate gradient did not reach tolerance; final relative residual " +
              std::to_string(cg.error()),
          cg.error());
    }
  }

  if (mode_ == BoundaryMode::kNeumann) return Field(grid_, std::move(x));

  Field u(grid_);
  for (int r = 0; r < static_cast<int>(interior_.size()); ++r) u[interior_[r]] = x[r];
  for (int k = 0; k < g.loop_size(); ++k) u[g.loop()[k].node] = bdata[k];
  return u;
}

Field EllipticOperator::apply_stencil(const Field& u) const {
  require_same_grid(u.grid(), grid_);
  const Grid2D& g = *grid_;
  const double cx = 1.0 / (g.hx() * g.hx()), cy = 1.0 / (g.hy() * g.hy());
  Field out(grid_);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const int p = g.node(i, j);
      if (mode_ == BoundaryMode::kDirichlet && g.is_boundary(p)) {
        out[p] = u[p];
        continue;
      }
      double v = c_[p] * u[p];
      // ghost elimination with zero flux doubles the one-sided difference
      if (i == 0) {
        v += 2 * cx * (u[p] - u[g.node(1, j)]);
      } else if (i == g.nx() - 1) {
        v += 2 * cx * (u[p] - u[g.node(i - 1, j)]);
      } else {
        v += cx * (2 * u[p] - u[g.node(i - 1, j)] - u[g.node(i + 1, j)]);
      }
      if (j == 0) {
        v += 2 * cy * (u[p] - u[g.node(i, 1)]);
      } else if (j == g.ny() - 1) {
        v += 2 * cy * (u[p] - u[g.node(i, j - 1)]);
      } else {
        v += cy * (2 * u[p] - u[g.node(i, j - 1)] - u[g.node(i, j + 1)]);
      }
      out[p] = v;
    }
  }
  return out;
}

}  // namespace invmed
