#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "robinlab/mesh.hpp"
#include "robinlab/signal.hpp"
#include "robinlab/trajectory.hpp"

namespace robinlab {

// Constants of the geometric iteration lemma; d and lambda are derived:
//   d = min{delta, eps/(1+eps)},
//   lambda = min{(2c)^(-1/delta) b^(-1/(delta d)), (2c)^(-(1+eps)/eps) b^(-1/(eps d))}.
// lambda is rounded toward zero so that the stored double never exceeds the
// extended-precision value.
struct IterationParams {
  double c = 1.0;      // >= 0
  double b = 2.0;      // >= 1
  double eps = 1.0;    // > 0
  double delta = 1.0;  // > 0
  double d = 0.0;
  double lambda = 0.0;
};

IterationParams iteration_params(double c, double b, double eps, double delta);

// Result of running the saturated recurrence
//   y_{n+1} = c b^n (y_n^{1+delta} + z_n^{1+eps} y_n^delta),
//   z_{n+1} = c b^n (y_n + z_n^{1+eps})
// against the envelope y_n <= lambda b^{-n/d}, z_n <= (lambda b^{-n/d})^{1/(1+eps)}.
// Any sequences satisfying the lemma's inequalities are dominated by the
// saturated run, so envelope margins of this run verify the general claim.
// margin_y[n] = 1 - y_n / (lambda b^{-n/d}) and likewise margin_z; the
// recurrence is evaluated in 128-bit arithmetic on the scaled variables
// y_n / (lambda b^{-n/d}), which stay in [0,1] under the hypothesis, so b^n
// never overflows and margins keep full relative accuracy.
struct IterationCheck {
  IterationParams params;
  bool applicable = false;  // y0 <= lambda and z0 <= lambda^{1/(1+eps)}
  std::vector<double> margin_y;
  std::vector<double> margin_z;
  double min_margin = 0.0;
  int n_max = 0;
};

// General starting point. The hypothesis test allows 1e-14 relative slack so
// that double-rounded boundary values are not rejected; a violation beyond
// that is reported as not applicable and the diagnostic run may diverge.
IterationCheck iteration_lemma_verify(const IterationParams& params, double y0,
                                      double z0, int n_max);

// Starts exactly at y0 = lambda, z0 = lambda^{1/(1+eps)} in extended
// precision (margins are exactly zero at n = 0). This is the extremal
// admissible start and the sharpest test of the envelope.
IterationCheck iteration_boundary_verify(const IterationParams& params, int n_max);

// CSV rows: c, b, eps, delta, lambda, min_margin, n_max.
void save_iteration_report(const std::vector<IterationCheck>& checks,
                           const std::string& path);

// Exact level-set geometry of the P1 interpolant: every cell is clipped by
// the plane u = k (linear crossing), never classified by vertex counting.
double level_measure(const Mesh& mesh, const Eigen::VectorXd& u, double k);
// In 1D the boundary carries counting measure; in 2D facet traces are linear.
double boundary_level_measure(const Mesh& mesh, const Eigen::VectorXd& u, double k);
// int ((u-k)^+)^2 and int |grad u|^2 1_{u>k}, exact per clipped cell.
double truncation_l2sq(const Mesh& mesh, const Eigen::VectorXd& u, double k);
double truncation_h1sq(const Mesh& mesh, const Eigen::VectorXd& u, double k);

// L^q norms of the P1 interpolant by cell/facet quadrature of |u|^q.
double lq_norm(const Mesh& mesh, const Eigen::VectorXd& u, double q,
               int quad_order = 4);
double boundary_lq_norm(const Mesh& mesh, const Eigen::VectorXd& u, double q,
                        int quad_order = 4);

// Level-set scan over the trailing window [t_end - tau, t_end]:
// per-sample measures |A_k(t)| = |{u(t) > k}| and |B_k(t)| on the boundary,
// plus the truncation energy
//   ||u^{(k)}||_{Q(tau)}^2 = sup_window int ((u-k)^+)^2 + int_window int |grad u|^2 1_{u>k}.
struct LevelSetProfile {
  double k = 0.0;
  double tau = 0.0;
  std::vector<double> times;
  std::vector<double> vol_measure;
  std::vector<double> bnd_measure;
  double q_norm_sq = 0.0;
  bool everything = false;  // k below the window minimum of u: the set is everything
};

LevelSetProfile level_sets(const Trajectory& traj, double k, double tau);

// Integrability exponents of the forcing data. All in [2, oo) with the strict
// relations 1/r1 + N/(2 q1) < 1 and 1/r2 + (N-1)/(2 q2) < 1/2; q_coeff > max(N, 2)
// is the integrability exponent carried by the lower-order coefficients.
struct SupExponents {
  double r1 = 8.0;
  double q1 = 4.0;
  double r2 = 8.0;
  double q2 = 4.0;
  double q_coeff = 4.0;
};

// Truncated energy inequality on the trailing window of length tau:
//   ||u^{(k)}||_{Q((1-sigma)tau)}^2 <= gamma [ 1/(sigma tau) int_W int |u^{(k)}|^2
//       + k^2 sum_l (int_W |A_k|^{r_{1,l}/q_{1,l}})^{2(1+kappa_{1,l})/r_{1,l}}
//       + k^2 sum_l (int_W |B_k|^{r_{2,l}/q_{2,l}})^{2(1+kappa_{2,l})/r_{2,l}} ],
// with the first (l = 1) exponent pair generated by (r1, q1) resp. (r2, q2)
// and the second by q_coeff. gamma_required is the smallest gamma that makes
// the inequality hold (0 when both sides vanish). Requires k >= khat where
// khat^2 = ||f||_{L^{r1} L^{q1}}^2 + ||g||_{L^{r2} L^{q2}}^2 over the horizon.
struct CaccioppoliCheck {
  double lhs = 0.0;
  double time_term = 0.0;
  double vol_terms[2] = {0.0, 0.0};
  double bnd_terms[2] = {0.0, 0.0};
  double khat = 0.0;
  double gamma_required = 0.0;
};

CaccioppoliCheck caccioppoli_check(const Trajectory& traj, const Signal& f,
                                   const Signal& g, double k, double tau,
                                   double sigma, const SupExponents& exponents = {});

// sup over [T/2, T] (all of [0, T] with global = true, the zero-initial-datum
// variant) of the nodal max of |u|, against
//   rhs = (||u||_{L^2 L^2}^2 + ||f||_{L^{r1} L^{q1}}^2 + ||g||_{L^{r2} L^{q2}}^2)^{1/2}.
// constant_ratio = sup_norm / rhs, with 0/0 reported as 0.
struct SupBound {
  double sup_norm = 0.0;
  double rhs = 0.0;
  double constant_ratio = 0.0;
};

SupBound sup_bound_check(const Trajectory& traj, const Signal& f, const Signal& g,
                         const SupExponents& exponents = {}, bool global = false);

// Empirical constant of the anisotropic embedding
//   ||u||_{L^r(W; L^q)} + ||u||_{L^{r_b}(W; L^{q_b}(boundary))} <= c ||u||_{Q},
// maximized over the sample trajectories (identically zero samples are
// skipped; the result is 0 if none remain). The volume pair must satisfy
// 1/r + N/(2q) = N/4; the boundary pair is derived from it: q_b = q(N-1)/N
// with r_b = r for N = 2, and r_b = 4 with q_b = q for N = 1, where the
// boundary carries counting measure. States are read against `mesh`.
double aniso_embedding_estimate(const Mesh& mesh, double r, double q,
                                const std::vector<Trajectory>& samples);

}  // namespace robinlab
