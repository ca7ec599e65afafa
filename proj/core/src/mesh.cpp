#include "invmed/mesh.hpp"

#include <cmath>
#include <vector>

namespace invmed {

BoundaryTrace trace(const Field& field) {
  const auto& g = field.grid();
  BoundaryTrace t(g);
  const auto& loop = g->loop();
  for (int k = 0; k < t.size(); ++k) t[k] = field[loop[k].node];
  return t;
}

void embed_trace(const BoundaryTrace& t, Field& field) {
  require_same_grid(t.grid(), field.grid());
  const auto& loop = field.grid()->loop();
  for (int k = 0; k < t.size(); ++k) field[loop[k].node] = t[k];
}

namespace {

// One-sided 3-point outward derivative along one axis at a boundary node.
double one_sided(const Field& f, int i, int j, unsigned side) {
  const Grid2D& g = *f.grid();
  switch (side) {
    case kSideLeft:
      return (3 * f[g.node(0, j)] - 4 * f[g.node(1, j)] + f[g.node(2, j)]) / (2 * g.hx());
    case kSideRight: {
      const int n = g.nx() - 1;
      return (3 * f[g.node(n, j)] - 4 * f[g.node(n - 1, j)] + f[g.node(n - 2, j)]) /
             (2 * g.hx());
    }
    case kSideBottom:
      return (3 * f[g.node(i, 0)] - 4 * f[g.node(i, 1)] + f[g.node(i, 2)]) / (2 * g.hy());
    default: {  // kSideTop
      const int n = g.ny() - 1;
      return (3 * f[g.node(i, n)] - 4 * f[g.node(i, n - 1)] + f[g.node(i, n - 2)]) /
             (2 * g.hy());
    }
  }
}

}  // namespace

BoundaryTrace normal_derivative(const Field& field) {
  const auto& g = field.grid();
  BoundaryTrace t(g);
  for (int k = 0; k < t.size(); ++k) {
    const LoopNode& ln = g->loop()[k];
    double sum = 0;
    int count = 0;
    for (unsigned side : {kSideLeft, kSideRight, kSideBottom, kSideTop}) {
      if (ln.sides & side) {
        sum += one_sided(field, ln.i, ln.j, side);
        ++count;
      }
    }
    t[k] = sum / count;
  }
  return t;
}

SurfaceOperator::SurfaceOperator(GridPtr grid) : grid_(std::move(grid)) {
  const int m = grid_->loop_size();
  const auto& loop = grid_->loop();
  arc_w_.resize(m);
  for (int k = 0; k < m; ++k) arc_w_[k] = loop[k].arc_weight;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * m);
  for (int k = 0; k < m; ++k) {
    const int kp = (k + 1) % m;
    const double c = 1.0 / loop[k].seg_next;
    trips.emplace_back(k, k, c);
    trips.emplace_back(kp, kp, c);
    trips.emplace_back(k, kp, -c);
    trips.emplace_back(kp, k, -c);
  }
  L_.resize(m, m);
  L_.setFromTriplets(trips.begin(), trips.end());
}

BoundaryTrace SurfaceOperator::apply(const BoundaryTrace& a) const {
  require_same_grid(a.grid(), grid_);
  Eigen::VectorXd out = (L_ * a.values()).cwiseQuotient(arc_w_);
  return BoundaryTrace(a.grid(), std::move(out));
}

BoundaryTrace SurfaceOperator::apply_power(const BoundaryTrace& a, int s) const {
  if (s < 0) throw InvalidArgumentError("surface power must be >= 0");
  BoundaryTrace out = a;
  for (int q = 0; q < s; ++q) out = apply(out);
  return out;
}

double SurfaceOperator::dirichlet_form(const BoundaryTrace& a, const BoundaryTrace& b) const {
  return a.values().dot(L_ * b.values());
}

void SurfaceOperator::ensure_spectrum() const {
  if (eval_) return;
  const Eigen::MatrixXd Ld = Eigen::MatrixXd(L_);
  const Eigen::MatrixXd Wd = arc_w_.asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ld, Wd);
  if (es.info() != Eigen::Success) {
    throw SingularOperatorError("surface Laplacian eigendecomposition failed");
  }
  eval_ = es.eigenvalues().cwiseMax(0.0);  // clip -0 round-off
  evec_ = es.eigenvectors();               // W-orthonormal
}

double SurfaceOperator::power_quadratic_form(const BoundaryTrace& a, double t) const {
  if (t < 0) throw InvalidArgumentError("weight power must be >= 0");
  if (t == 0.0) return boundary_dot(a, a);
  const double ti = std::floor(t);
  if (ti == t) {
    // (P^t a, a)_Gamma with integer t via repeated application.
    BoundaryTrace pa = apply_power(a, static_cast<int>(ti));
    return boundary_dot(pa, a);
  }
  ensure_spectrum();
  const Eigen::VectorXd c =
      evec_->transpose() * (arc_w_.cwiseProduct(a.values()));  // W-orthonormal coords
  double sum = 0;
  for (int q = 0; q < c.size(); ++q) {
    const double theta = (*eval_)[q];
    if (theta > 0) sum += std::pow(theta, t) * c[q] * c[q];
  }
  return sum;
}

double SurfaceOperator::w_seminorm(const BoundaryTrace& a, double t) const {
  return std::sqrt(std::max(power_quadratic_form(a, t), 0.0));
}

SpMat surface_power_matrix(const Grid2D& grid, int s) {
  if (s < 0) throw InvalidArgumentError("surface power must be >= 0");
  const int m = grid.loop_size();
  SpMat P(m, m);
  P.setIdentity();
  if (s == 0) return P;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * m);
  for (int k = 0; k < m; ++k) {
    const int kp = (k + 1) % m;
    const double c = 1.0 / grid.loop()[k].seg_next;
    trips.emplace_back(k, k, c);
    trips.emplace_back(kp, kp, c);
    trips.emplace_back(k, kp, -c);
    trips.emplace_back(kp, k, -c);
  }
  SpMat L(m, m);
  L.setFromTriplets(trips.begin(), trips.end());
  SpMat Winv(m, m);
  for (int k = 0; k < m; ++k) Winv.insert(k, k) = 1.0 / grid.loop()[k].arc_weight;
  const SpMat P1 = Winv * L;
  for (int q = 0; q < s; ++q) P = (P1 * P).pruned();
  return P;
}

}  // namespace invmed
