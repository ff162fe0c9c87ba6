#include "robinlab/assembly.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "robinlab/quadrature.hpp"

namespace robinlab {

namespace {

using Triplet = Eigen::Triplet<double>;

// P1 basis values and (constant) gradients on one cell.
struct CellBasis {
  int n = 0;
  std::array<int, 3> idx{};
  std::array<Vec2, 3> grad{};
  std::array<double, 3> value(const Mesh& mesh, int cell, Vec2 p) const {
    const Cell& c = mesh.cells[cell];
    if (mesh.dim == 1) {
      double x0 = mesh.vertices[c.v[0]].x, x1 = mesh.vertices[c.v[1]].x;
      double s = (p.x - x0) / (x1 - x0);
      return {1.0 - s, s, 0.0};
    }
    Vec2 a = mesh.vertices[c.v[0]], b = mesh.vertices[c.v[1]], d = mesh.vertices[c.v[2]];
    double det = cross(b - a, d - a);
    double l1 = cross(p - a, d - a) / det;
    double l2 = cross(b - a, p - a) / det;
    return {1.0 - l1 - l2, l1, l2};
  }
};

CellBasis cell_basis(const Mesh& mesh, int cell) {
  CellBasis basis;
  const Cell& c = mesh.cells[cell];
  basis.n = mesh.nodes_per_cell();
  for (int k = 0; k < basis.n; ++k) basis.idx[k] = c.v[k];
  if (mesh.dim == 1) {
    double len = mesh.vertices[c.v[1]].x - mesh.vertices[c.v[0]].x;
    basis.grad[0] = {-1.0 / len, 0.0};
    basis.grad[1] = {1.0 / len, 0.0};
  } else {
    Vec2 a = mesh.vertices[c.v[0]], b = mesh.vertices[c.v[1]], d = mesh.vertices[c.v[2]];
    double det = cross(b - a, d - a);
    // gradients of barycentric coordinates
    basis.grad[1] = {(d.y - a.y) / det, (a.x - d.x) / det};
    basis.grad[2] = {(a.y - b.y) / det, (b.x - a.x) / det};
    basis.grad[0] = {-basis.grad[1].x - basis.grad[2].x, -basis.grad[1].y - basis.grad[2].y};
  }
  return basis;
}

std::vector<QuadPoint> cell_rule(const Mesh& mesh, int cell, int degree) {
  const Cell& c = mesh.cells[cell];
  if (mesh.dim == 1) return segment_rule(mesh.vertices[c.v[0]], mesh.vertices[c.v[1]], degree);
  return triangle_rule(mesh.vertices[c.v[0]], mesh.vertices[c.v[1]], mesh.vertices[c.v[2]],
                       degree);
}

}  // namespace

AssembledSystem assemble(std::shared_ptr<const Mesh> mesh_ptr, const CoefficientSet& coeffs,
                         int quad_order) {
  if (quad_order < 1) throw std::invalid_argument("assemble: quad_order must be >= 1");
  const Mesh& mesh = *mesh_ptr;
  const int n = mesh.ndof();

  std::vector<Triplet> tM, tMb, tK, tG;
  for (int ci = 0; ci < (int)mesh.cells.size(); ++ci) {
    CellBasis basis = cell_basis(mesh, ci);
    auto rule = cell_rule(mesh, ci, quad_order);
    for (const auto& qp : rule) {
      auto a = coeffs.a(qp.p.x, qp.p.y);
      auto b = coeffs.b(qp.p.x, qp.p.y);
      auto c = coeffs.c(qp.p.x, qp.p.y);
      double d = coeffs.d(qp.p.x, qp.p.y);
      if (!std::isfinite(a[0][0]) || !std::isfinite(a[0][1]) || !std::isfinite(a[1][0]) ||
          !std::isfinite(a[1][1]) || !std::isfinite(b[0]) || !std::isfinite(b[1]) ||
          !std::isfinite(c[0]) || !std::isfinite(c[1]) || !std::isfinite(d))
        throw std::runtime_error("assemble: coefficient evaluation returned non-finite value");
      auto phi = basis.value(mesh, ci, qp.p);
      for (int r = 0; r < basis.n; ++r) {
        for (int s = 0; s < basis.n; ++s) {
          // trial u = phi_s, test v = phi_r
          double flux0 = a[0][0] * basis.grad[s].x + a[0][1] * basis.grad[s].y + b[0] * phi[s];
          double flux1 = a[1][0] * basis.grad[s].x + a[1][1] * basis.grad[s].y + b[1] * phi[s];
          double val = flux0 * basis.grad[r].x + flux1 * basis.grad[r].y;
          val += (c[0] * basis.grad[s].x + c[1] * basis.grad[s].y + d * phi[s]) * phi[r];
          tK.emplace_back(basis.idx[r], basis.idx[s], qp.w * val);
          tM.emplace_back(basis.idx[r], basis.idx[s], qp.w * phi[r] * phi[s]);
          tG.emplace_back(basis.idx[r], basis.idx[s],
                          qp.w * dot(basis.grad[r], basis.grad[s]));
        }
      }
    }
  }

  for (const auto& facet : mesh.boundary) {
    if (mesh.dim == 1) {
      int i = facet.v[0];
      Vec2 p = mesh.vertices[i];
      double beta = coeffs.beta(p.x, p.y, facet.normal);
      tMb.emplace_back(i, i, 1.0);
      tK.emplace_back(i, i, beta);
    } else {
      Vec2 a = mesh.vertices[facet.v[0]], b = mesh.vertices[facet.v[1]];
      auto rule = segment_rule(a, b, quad_order);
      double len = norm(b - a);
      for (const auto& qp : rule) {
        double s = norm(qp.p - a) / len;
        double phi[2] = {1.0 - s, s};
        double beta = coeffs.beta(qp.p.x, qp.p.y, facet.normal);
        if (!std::isfinite(beta))
          throw std::runtime_error("assemble: beta evaluation returned non-finite value");
        for (int r = 0; r < 2; ++r) {
          for (int t = 0; t < 2; ++t) {
            tMb.emplace_back(facet.v[r], facet.v[t], qp.w * phi[r] * phi[t]);
            tK.emplace_back(facet.v[r], facet.v[t], qp.w * beta * phi[r] * phi[t]);
          }
        }
      }
    }
  }

  AssembledSystem sys;
  sys.mesh = std::move(mesh_ptr);
  sys.ndof = n;
  sys.quad_order = quad_order;
  sys.mu = coeffs.mu;
  sys.M.resize(n, n);
  sys.Mb.resize(n, n);
  sys.K.resize(n, n);
  sys.Kgrad.resize(n, n);
  sys.M.setFromTriplets(tM.begin(), tM.end());
  sys.Mb.setFromTriplets(tMb.begin(), tMb.end());
  sys.K.setFromTriplets(tK.begin(), tK.end());
  sys.Kgrad.setFromTriplets(tG.begin(), tG.end());
  return sys;
}

double check_ellipticity(const CoefficientSet& coeffs, const Mesh& mesh,
                         const std::vector<Vec2>& directions, int quad_order) {
  std::vector<Vec2> panel = directions;
  if (panel.empty()) {
    if (mesh.dim == 1) {
      panel = {{1.0, 0.0}, {-1.0, 0.0}};
    } else {
      for (int k = 0; k < 16; ++k) {
        double ang = 2.0 * M_PI * k / 16.0;
        panel.push_back({std::cos(ang), std::sin(ang)});
      }
    }
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int ci = 0; ci < (int)mesh.cells.size(); ++ci) {
    auto rule = cell_rule(mesh, ci, quad_order);
    for (const auto& qp : rule) {
      auto a = coeffs.a(qp.p.x, qp.p.y);
      for (const auto& xi : panel) {
        double quad, len2;
        if (mesh.dim == 1) {
          quad = a[0][0] * xi.x * xi.x;
          len2 = xi.x * xi.x;
        } else {
          quad = a[0][0] * xi.x * xi.x + (a[0][1] + a[1][0]) * xi.x * xi.y +
                 a[1][1] * xi.y * xi.y;
          len2 = dot(xi, xi);
        }
        worst = std::min(worst, quad - coeffs.mu * len2);
      }
    }
  }
  return worst;
}

GardingEstimate estimate_garding(const AssembledSystem& system) {
  if (system.ndof > 3000)
    throw std::runtime_error("estimate_garding: ndof > 3000 (dense eigensolve refused)");
  Eigen::MatrixXd K = Eigen::MatrixXd(system.K);
  Eigen::MatrixXd B = 0.5 * system.mu * Eigen::MatrixXd(system.Kgrad) - 0.5 * (K + K.transpose());
  Eigen::MatrixXd M = Eigen::MatrixXd(system.M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(B, M);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("estimate_garding: eigensolver failed to converge");
  GardingEstimate est;
  est.alpha_grad = 0.5 * system.mu;
  est.omega = eig.eigenvalues().maxCoeff();
  return est;
}

double check_conservation_condition(const AssembledSystem& system) {
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(system.ndof);
  Eigen::VectorXd r = system.K.transpose() * ones;
  double worst = 0.0;
  for (int i = 0; i < system.ndof; ++i) {
    double h1 = std::sqrt(system.M.coeff(i, i) + system.Kgrad.coeff(i, i));
    worst = std::max(worst, std::abs(r[i]) / h1);
  }
  return worst;
}

double check_fixedpoint_condition(const AssembledSystem& system) {
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(system.ndof);
  Eigen::VectorXd r = system.K * ones;
  Eigen::SparseMatrix<double> H = system.M + system.Kgrad;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("check_fixedpoint_condition: H1 Gram factorization failed");
  Eigen::VectorXd z = ldlt.solve(r);
  return std::sqrt(std::max(0.0, r.dot(z)));
}

}  // namespace robinlab
