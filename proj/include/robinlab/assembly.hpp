#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "robinlab/coefficients.hpp"
#include "robinlab/mesh.hpp"

namespace robinlab {

// Discrete operators on P1 elements. K realizes the full form a_b (boundary
// term included); Kgrad the pure gradient stiffness used by the Garding
// estimate and by H1 seminorms. Immutable after assembly.
struct AssembledSystem {
  std::shared_ptr<const Mesh> mesh;
  Eigen::SparseMatrix<double> M;      // int phi_i phi_j
  Eigen::SparseMatrix<double> Mb;     // int_bdry phi_i phi_j
  Eigen::SparseMatrix<double> K;      // a_b(phi_j, phi_i)
  Eigen::SparseMatrix<double> Kgrad;  // int grad phi_i . grad phi_j
  int ndof = 0;
  int quad_order = 4;
  double mu = 1.0;
};

AssembledSystem assemble(std::shared_ptr<const Mesh> mesh, const CoefficientSet& coeffs,
                         int quad_order = 4);

// Min over quadrature points and panel directions of xi.a(x)xi - mu|xi|^2.
// Empty panel selects a default: {+-e1} in 1D, 16 equispaced angles in 2D.
double check_ellipticity(const CoefficientSet& coeffs, const Mesh& mesh,
                         const std::vector<Vec2>& directions = {}, int quad_order = 4);

struct GardingEstimate {
  double alpha_grad = 0.0;  // mu/2
  double omega = 0.0;       // smallest shift making the form gradient-coercive
};

// Solves the generalized symmetric eigenproblem ((mu/2)Kgrad - sym(K)) x = omega M x
// and returns (mu/2, max omega). Densifies; rejects ndof > 3000.
GardingEstimate estimate_garding(const AssembledSystem& system);

// Max over basis functions eta of |a_b(eta, 1)| / ||eta||_H1; certifies the
// conservation condition (constants annihilate the form from the right).
double check_conservation_condition(const AssembledSystem& system);

// ||K 1|| in the discrete dual norm sqrt(r^T (M + Kgrad)^{-1} r); certifies
// that constants are equilibria (fixed-point condition).
double check_fixedpoint_condition(const AssembledSystem& system);

}  // namespace robinlab
