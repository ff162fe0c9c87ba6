#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <vector>

#include "robinlab/assembly.hpp"
#include "robinlab/signal.hpp"
#include "robinlab/trajectory.hpp"

namespace robinlab {

struct ResolventSolution {
  double lambda = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd f_nodal;  // volume datum as interpolant
  Eigen::VectorXd g_nodal;  // boundary datum, zero off the boundary
  double residual = 0.0;    // ||(lambda M + K)u - rhs|| / max(1, ||rhs||)
};

// Galerkin solve of lambda int u v + a_b(u,v) = int f v + int_bdry g v.
// Fails loudly (throws) when the factorization breaks down or the residual
// is not small, instead of returning garbage near a singular shift.
ResolventSolution solve_resolvent(const AssembledSystem& sys, double lambda, const ScalarField& f,
                                  const ScalarField& g);

// Closed form for the Neumann problem on (0,1) with boundary datum (0, 1):
// u(x) = cosh(sqrt(lambda) x) / (sqrt(lambda) sinh(sqrt(lambda))), arranged
// with e^{-sqrt(lambda)} scaling so large shifts stay finite.
double exact_resolvent_1d(double lambda, double x);
// L2(0,1) norm of that solution, same stable arrangement.
double exact_resolvent_1d_l2(double lambda);

struct GrowthFit {
  double slope_lambda_u = 0.0;  // slope of log ||lambda u_lambda|| vs log lambda
  double slope_u = 0.0;         // slope of log ||u_lambda|| vs log lambda
  bool under_resolved = false;  // h sqrt(max lambda) > 0.1: boundary layer unresolved
};

// Least-squares slopes over a geometric shift grid for the interval problem
// with boundary datum (0, 1); the growth of ||lambda u_lambda|| witnesses the
// failure of the Hille-Yosida resolvent bound.
GrowthFit resolvent_growth_exponent(const AssembledSystem& sys, const std::vector<double>& lambdas);

// Theta-scheme (M + theta dt K)u^{n+1} = (M - (1-theta) dt K)u^n
//   + dt (M f^{n+theta} + Mb g^{n+theta}),
// loads as nodal interpolants sampled at t_n + theta dt. The step count is
// round(T/dt) so the grid lands on T exactly; the matrix is factored once.
Trajectory solve_parabolic(std::shared_ptr<const AssembledSystem> sys, const Eigen::VectorXd& u0,
                           const Signal& f, const Signal& g, double T, double dt,
                           double theta = 1.0);

// Max over n of || M(u^n - u^0) + K Int_n(u) - Int_n(M f + Mb g) ||_2 where
// both time integrals use the trapezoid rule on the trajectory grid. The
// scheme integrates loads by a rectangle rule, so this is O(dt) for theta=1,
// not zero; it vanishes only for zero data.
double mild_residual(const Trajectory& traj, const Signal& f, const Signal& g);

// Max over n of |1^T M u^n - 1^T M u^0 - sum_{m<n} dt (1^T M f^m + 1^T Mb g^m)|
// with loads sampled exactly where the scheme sampled them; exact (up to
// roundoff) whenever constants annihilate the form from the right.
double mass_identity_error(const Trajectory& traj, const Signal& f, const Signal& g);

struct EnergyReport {
  double lhs = 0.0;  // sup_n ||u^n||^2 + sum_n dt ||grad u^n||^2
  double rhs = 0.0;  // ||u0||^2 + sum_n dt (||f^n||^2 + ||g^n||^2_bdry)
  double ratio = 0.0;
};
EnergyReport energy_estimate_check(const Trajectory& traj, const Eigen::VectorXd& u0,
                                   const Signal& f, const Signal& g);

// (i eta M + K) u = M f_nodal + Mb g_nodal, complex data, eta != 0.
Eigen::VectorXcd solve_oscillatory_resolvent(const AssembledSystem& sys, double eta,
                                             const Eigen::VectorXcd& f_nodal,
                                             const Eigen::VectorXcd& g_nodal);

// K w = rhs with the zero-mean constraint 1^T M w = 0, via a bordered system.
// rhs is a dual vector (already multiplied by M / Mb) and must satisfy the
// compatibility 1^T rhs = 0.
Eigen::VectorXd solve_zero_mean_stationary(const AssembledSystem& sys,
                                           const Eigen::VectorXd& rhs);

}  // namespace robinlab
