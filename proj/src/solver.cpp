#include "robinlab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>

namespace robinlab {

namespace {

using Complex = std::complex<double>;

std::vector<char> boundary_node_mask(const Mesh& mesh) {
  std::vector<char> on(mesh.ndof(), 0);
  for (const auto& f : mesh.boundary) {
    on[f.v[0]] = 1;
    if (mesh.dim == 2) on[f.v[1]] = 1;
  }
  return on;
}

Eigen::VectorXd nodal_field(const Mesh& mesh, const ScalarField& field) {
  Eigen::VectorXd out(mesh.ndof());
  for (int i = 0; i < mesh.ndof(); ++i) out[i] = field(mesh.vertices[i].x, mesh.vertices[i].y);
  if (!out.allFinite()) throw std::invalid_argument("nodal field has non-finite values");
  return out;
}

Eigen::VectorXd boundary_nodal_field(const Mesh& mesh, const ScalarField& field) {
  auto mask = boundary_node_mask(mesh);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.ndof());
  for (int i = 0; i < mesh.ndof(); ++i)
    if (mask[i]) out[i] = field(mesh.vertices[i].x, mesh.vertices[i].y);
  if (!out.allFinite()) throw std::invalid_argument("boundary field has non-finite values");
  return out;
}

void check_target(const Signal& s, SignalTarget expected, const char* what) {
  if (!s.terms.empty() && s.target != expected)
    throw std::invalid_argument(std::string(what) + ": signal target mismatch");
}

double fit_slope(const std::vector<double>& logx, const std::vector<double>& logy) {
  double n = (double)logx.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < logx.size(); ++i) {
    sx += logx[i];
    sy += logy[i];
    sxx += logx[i] * logx[i];
    sxy += logx[i] * logy[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ResolventSolution solve_resolvent(const AssembledSystem& sys, double lambda, const ScalarField& f,
                                  const ScalarField& g) {
  const Mesh& mesh = *sys.mesh;
  ResolventSolution sol;
  sol.lambda = lambda;
  sol.f_nodal = nodal_field(mesh, f);
  sol.g_nodal = boundary_nodal_field(mesh, g);

  Eigen::SparseMatrix<double> A = sys.K + lambda * sys.M;
  A.makeCompressed();
  Eigen::VectorXd rhs = sys.M * sol.f_nodal + sys.Mb * sol.g_nodal;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_resolvent: factorization failed (shift too small?)");
  sol.u = lu.solve(rhs);
  sol.residual = (A * sol.u - rhs).norm() / std::max(1.0, rhs.norm());
  if (!sol.u.allFinite() || sol.residual > 1e-8)
    throw std::runtime_error("solve_resolvent: solve did not reach tolerance (singular shift?)");
  return sol;
}

double exact_resolvent_1d(double lambda, double x) {
  if (!(lambda > 0)) throw std::invalid_argument("exact_resolvent_1d: lambda must be positive");
  double s = std::sqrt(lambda);
  // cosh(s x)/(s sinh s) scaled by e^{-s}/e^{-s}
  return (std::exp(s * (x - 1)) + std::exp(-s * (x + 1))) / (s * (1 - std::exp(-2 * s)));
}

double exact_resolvent_1d_l2(double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("exact_resolvent_1d_l2: lambda must be positive");
  double s = std::sqrt(lambda);
  double e2 = std::exp(-2 * s);
  double num = 2 * e2 + (1 - e2 * e2) / (2 * s);
  double den = lambda * (1 - e2) * (1 - e2);
  return std::sqrt(num / den);
}

GrowthFit resolvent_growth_exponent(const AssembledSystem& sys,
                                    const std::vector<double>& lambdas) {
  if (sys.mesh->dim != 1)
    throw std::invalid_argument("resolvent_growth_exponent: interval meshes only");
  if (lambdas.size() < 2)
    throw std::invalid_argument("resolvent_growth_exponent: need at least two shifts");
  ScalarField zero = [](double, double) { return 0.0; };
  ScalarField ramp = [](double x, double) { return x; };  // (0, 1) at the endpoints
  std::vector<double> lx, lu, llu;
  double lambda_max = 0;
  for (double lambda : lambdas) {
    lambda_max = std::max(lambda_max, lambda);
    ResolventSolution sol = solve_resolvent(sys, lambda, zero, ramp);
    double nrm = l2_norm(sys, sol.u);
    lx.push_back(std::log(lambda));
    lu.push_back(std::log(nrm));
    llu.push_back(std::log(lambda * nrm));
  }
  GrowthFit fit;
  fit.slope_u = fit_slope(lx, lu);
  fit.slope_lambda_u = fit_slope(lx, llu);
  fit.under_resolved = sys.mesh->h * std::sqrt(lambda_max) > 0.1;
  return fit;
}

Trajectory solve_parabolic(std::shared_ptr<const AssembledSystem> sys, const Eigen::VectorXd& u0,
                           const Signal& f, const Signal& g, double T, double dt, double theta) {
  if (!(T > 0) || !(dt > 0)) throw std::invalid_argument("solve_parabolic: need T > 0, dt > 0");
  if (!(theta >= 0.5 && theta <= 1.0))
    throw std::invalid_argument("solve_parabolic: theta must lie in [1/2, 1]");
  if (u0.size() != sys->ndof) throw std::invalid_argument("solve_parabolic: u0 size mismatch");
  check_target(f, SignalTarget::Volume, "solve_parabolic f");
  check_target(g, SignalTarget::Boundary, "solve_parabolic g");

  long steps = std::max(1l, std::lround(T / dt));
  double dte = T / (double)steps;

  Eigen::SparseMatrix<double> A = sys->M + theta * dte * sys->K;
  Eigen::SparseMatrix<double> B = sys->M - (1.0 - theta) * dte * sys->K;
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_parabolic: factorization of the step matrix failed");

  Trajectory traj;
  traj.system = sys;
  traj.theta = theta;
  traj.dt = dte;
  traj.times.resize(steps + 1);
  traj.states.resize(steps + 1);
  traj.states[0] = u0;
  for (long n = 0; n <= steps; ++n) traj.times[n] = T * (double)n / (double)steps;

  const Mesh& mesh = *sys->mesh;
  for (long n = 0; n < steps; ++n) {
    double ts = traj.times[n] + theta * dte;
    Eigen::VectorXd load = sys->M * nodal_values(f, mesh, ts) + sys->Mb * nodal_values(g, mesh, ts);
    Eigen::VectorXd rhs = B * traj.states[n] + dte * load;
    traj.states[n + 1] = lu.solve(rhs);
    if (!traj.states[n + 1].allFinite())
      throw std::runtime_error("solve_parabolic: non-finite state at step " + std::to_string(n + 1));
  }
  return traj;
}

double mild_residual(const Trajectory& traj, const Signal& f, const Signal& g) {
  const AssembledSystem& sys = *traj.system;
  const Mesh& mesh = *sys.mesh;
  size_t m = traj.times.size();
  std::vector<Eigen::VectorXd> loads(m);
  for (size_t n = 0; n < m; ++n)
    loads[n] =
        sys.M * nodal_values(f, mesh, traj.times[n]) + sys.Mb * nodal_values(g, mesh, traj.times[n]);

  Eigen::VectorXd int_u = Eigen::VectorXd::Zero(sys.ndof);
  Eigen::VectorXd int_load = Eigen::VectorXd::Zero(sys.ndof);
  double worst = 0.0;
  for (size_t n = 1; n < m; ++n) {
    double h = traj.times[n] - traj.times[n - 1];
    int_u += 0.5 * h * (traj.states[n - 1] + traj.states[n]);
    int_load += 0.5 * h * (loads[n - 1] + loads[n]);
    Eigen::VectorXd r = sys.M * (traj.states[n] - traj.states[0]) + sys.K * int_u - int_load;
    worst = std::max(worst, r.norm());
  }
  return worst;
}

double mass_identity_error(const Trajectory& traj, const Signal& f, const Signal& g) {
  const AssembledSystem& sys = *traj.system;
  const Mesh& mesh = *sys.mesh;
  double mass0 = total_mass(sys, traj.states[0]);
  double injected = 0.0;
  double worst = 0.0;
  for (size_t n = 1; n < traj.times.size(); ++n) {
    double h = traj.times[n] - traj.times[n - 1];
    double ts = traj.times[n - 1] + traj.theta * h;
    injected += h * ((sys.M * nodal_values(f, mesh, ts)).sum() +
                     (sys.Mb * nodal_values(g, mesh, ts)).sum());
    worst = std::max(worst, std::abs(total_mass(sys, traj.states[n]) - mass0 - injected));
  }
  return worst;
}

EnergyReport energy_estimate_check(const Trajectory& traj, const Eigen::VectorXd& u0,
                                   const Signal& f, const Signal& g) {
  const AssembledSystem& sys = *traj.system;
  const Mesh& mesh = *sys.mesh;
  EnergyReport rep;
  double sup = 0.0, grad = 0.0, load = 0.0;
  for (size_t n = 0; n < traj.times.size(); ++n) {
    const auto& u = traj.states[n];
    sup = std::max(sup, u.dot(sys.M * u));
    if (n == 0) continue;
    double h = traj.times[n] - traj.times[n - 1];
    grad += h * u.dot(sys.Kgrad * u);
    double ts = traj.times[n - 1] + traj.theta * h;  // the sample the scheme consumed
    Eigen::VectorXd fh = nodal_values(f, mesh, ts);
    Eigen::VectorXd gh = nodal_values(g, mesh, ts);
    load += h * (fh.dot(sys.M * fh) + gh.dot(sys.Mb * gh));
  }
  rep.lhs = sup + grad;
  rep.rhs = u0.dot(sys.M * u0) + load;
  rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

Eigen::VectorXcd solve_oscillatory_resolvent(const AssembledSystem& sys, double eta,
                                             const Eigen::VectorXcd& f_nodal,
                                             const Eigen::VectorXcd& g_nodal) {
  if (eta == 0.0)
    throw std::invalid_argument(
        "solve_oscillatory_resolvent: eta = 0 needs the zero-mean stationary solve");
  Eigen::SparseMatrix<Complex> A =
      sys.K.cast<Complex>() + Complex(0.0, eta) * sys.M.cast<Complex>();
  A.makeCompressed();
  Eigen::VectorXcd rhs = sys.M.cast<Complex>() * f_nodal + sys.Mb.cast<Complex>() * g_nodal;
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_oscillatory_resolvent: factorization failed");
  Eigen::VectorXcd u = lu.solve(rhs);
  if ((A * u - rhs).norm() > 1e-8 * std::max(1.0, rhs.norm()))
    throw std::runtime_error("solve_oscillatory_resolvent: residual too large");
  return u;
}

Eigen::VectorXd solve_zero_mean_stationary(const AssembledSystem& sys,
                                           const Eigen::VectorXd& rhs) {
  int n = sys.ndof;
  if (rhs.size() != n) throw std::invalid_argument("solve_zero_mean_stationary: size mismatch");
  double compat = std::abs(rhs.sum());
  if (compat > 1e-8 * std::max(1.0, rhs.norm()))
    throw std::invalid_argument("solve_zero_mean_stationary: incompatible right-hand side");

  Eigen::VectorXd m = sys.M * Eigen::VectorXd::Ones(n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sys.K.nonZeros() + 2 * n);
  for (int k = 0; k < sys.K.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.K, k); it; ++it)
      trips.emplace_back((int)it.row(), (int)it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, n, m[i]);
    trips.emplace_back(n, i, m[i]);
  }
  Eigen::SparseMatrix<double> A(n + 1, n + 1);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b.head(n) = rhs;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("solve_zero_mean_stationary: factorization failed");
  Eigen::VectorXd w = lu.solve(b);
  return w.head(n);
}

}  // namespace robinlab
