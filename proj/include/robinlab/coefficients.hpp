#pragma once

#include <array>
#include <functional>
#include <string>

#include "robinlab/expression.hpp"
#include "robinlab/geometry.hpp"

namespace robinlab {

using VectorField = std::function<std::array<double, 2>(double, double)>;
using MatrixField = std::function<std::array<std::array<double, 2>, 2>(double, double)>;
// Robin weight on the boundary. Receives the outward unit normal so presets
// that tie beta to the flux direction stay expressible on any domain.
using BoundaryField = std::function<double(double, double, const Vec2&)>;

// Coefficient fields of the operator: for trial u and test v the form reads
//   a_b(u,v) = int sum_j (sum_i a_ij D_i u + b_j u) D_j v
//            + int (sum_i c_i D_i u + d u) v + int_bdry beta u v.
// mu is the claimed ellipticity constant of a.
struct CoefficientSet {
  MatrixField a;
  VectorField b;
  VectorField c;
  ScalarField d;
  BoundaryField beta;
  double mu = 1.0;
};

CoefficientSet laplacian();
CoefficientSet anisotropic(double a11, double a22);
// Pure advection c = (gamma, 0) with beta = -gamma n_x: the conservation
// condition holds exactly (divergence theorem), the fixed-point one does not.
CoefficientSet drift_conserving(double gamma);
CoefficientSet reaction(double d);
CoefficientSet robin(double beta);

// Parses "laplacian", "anisotropic(a11,a22)", "drift_conserving(gamma)",
// "reaction(d)", "robin(beta)".
CoefficientSet parse_coefficient_preset(const std::string& spec);

}  // namespace robinlab
