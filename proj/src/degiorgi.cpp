#include "robinlab/degiorgi.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "robinlab/csv.hpp"
#include "robinlab/quadrature.hpp"

namespace robinlab {

namespace {

using f128 = __float128;

struct ScaledFactors {
  // log of the step gains; the scaled recurrence reads
  //   Y_{n+1} = exp(la_y + n ga_y) (Y^{1+delta} + Z^{1+eps} Y^delta),
  //   Z_{n+1} = exp(la_z + n ga_z) (Y + Z^{1+eps}),
  // with la_* <= log(1/2) and ga_* <= 0 whenever lambda obeys its formula.
  f128 la_y, ga_y, la_z, ga_z;
  f128 log_lambda;
};

ScaledFactors scaled_factors(const IterationParams& p) {
  f128 c = p.c, b = p.b, eps = p.eps, delta = p.delta;
  f128 d = delta < eps / (1 + eps) ? delta : eps / (1 + eps);
  f128 lb = logq(b);
  f128 l2c = logq(2 * c);
  f128 log_lambda_y = -l2c / delta - lb / (delta * d);
  f128 log_lambda_z = -l2c * (1 + eps) / eps - lb / (eps * d);
  ScaledFactors s;
  s.log_lambda = log_lambda_y < log_lambda_z ? log_lambda_y : log_lambda_z;
  s.la_y = logq(c) + delta * s.log_lambda + lb / d;
  s.ga_y = (1 - delta / d) * lb;
  s.la_z = logq(c) + (eps / (1 + eps)) * s.log_lambda + lb / (d * (1 + eps));
  s.ga_z = (1 - (eps / (1 + eps)) / d) * lb;
  return s;
}

IterationCheck run_scaled(const IterationParams& p, f128 y0_scaled, f128 z0_scaled,
                          int n_max, bool applicable) {
  IterationCheck out;
  out.params = p;
  out.applicable = applicable;
  out.n_max = n_max;
  out.margin_y.reserve(n_max + 1);
  out.margin_z.reserve(n_max + 1);
  f128 eps = p.eps, delta = p.delta;
  f128 Y = y0_scaled, Z = z0_scaled;
  ScaledFactors s{};
  if (p.c > 0.0) s = scaled_factors(p);
  for (int n = 0; n <= n_max; ++n) {
    out.margin_y.push_back(static_cast<double>(1 - Y));
    out.margin_z.push_back(static_cast<double>(1 - Z));
    if (n == n_max) break;
    if (p.c == 0.0) {
      Y = 0;
      Z = 0;
      continue;
    }
    f128 gy = expq(s.la_y + n * s.ga_y);
    f128 gz = expq(s.la_z + n * s.ga_z);
    f128 y_next = gy * (powq(Y, 1 + delta) + powq(Z, 1 + eps) * powq(Y, delta));
    f128 z_next = gz * (Y + powq(Z, 1 + eps));
    Y = y_next;
    Z = z_next;
  }
  double lo = std::numeric_limits<double>::infinity();
  for (double m : out.margin_y) lo = std::min(lo, m);
  for (double m : out.margin_z) lo = std::min(lo, m);
  out.min_margin = lo;
  return out;
}

void check_params(const IterationParams& p) {
  if (!(p.c >= 0.0) || !std::isfinite(p.c)) throw std::invalid_argument("c must be >= 0");
  if (!(p.b >= 1.0) || !std::isfinite(p.b)) throw std::invalid_argument("b must be >= 1");
  if (!(p.eps > 0.0) || !std::isfinite(p.eps)) throw std::invalid_argument("eps must be > 0");
  if (!(p.delta > 0.0) || !std::isfinite(p.delta))
    throw std::invalid_argument("delta must be > 0");
}

// P1 values on a segment: kept length and exact integrals of the positive part.
struct SegmentClip {
  double length = 0.0;   // measure of {u > k}
  double l2sq = 0.0;     // int ((u-k)^+)^2 over the kept part
};

SegmentClip clip_segment(double ua, double ub, double k, double len) {
  SegmentClip out;
  double a = ua - k, b = ub - k;
  if (a <= 0.0 && b <= 0.0) return out;
  double p = a, q = b, ell = len;
  if (a > 0.0 && b > 0.0) {
    // whole segment kept
  } else if (a > 0.0) {
    double s = a / (a - b);  // crossing parameter from the a-end
    ell = len * s;
    q = 0.0;
  } else {
    double s = b / (b - a);
    ell = len * s;
    p = 0.0;
  }
  out.length = ell;
  out.l2sq = ell * (p * p + p * q + q * q) / 3.0;
  return out;
}

double tri_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * std::abs(cross(b - a, c - a)); }

// int over the triangle of the square of the linear function with corner
// values (w0, w1, w2): A/6 (sum w_i^2 + sum_{i<j} w_i w_j).
double tri_l2sq(double area, double w0, double w1, double w2) {
  return area / 6.0 *
         (w0 * w0 + w1 * w1 + w2 * w2 + w0 * w1 + w0 * w2 + w1 * w2);
}

// Clip a triangle by {u > k}: polygon of up to 4 vertices with values of u - k.
struct TriangleClip {
  int n = 0;
  Vec2 pts[4];
  double vals[4];
};

TriangleClip clip_triangle(const Vec2* p, const double* v, double k) {
  TriangleClip out;
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3;
    bool above_i = v[i] > k;
    bool above_j = v[j] > k;
    if (above_i) {
      out.pts[out.n] = p[i];
      out.vals[out.n++] = v[i] - k;
    }
    if (above_i != above_j) {
      double t = (k - v[i]) / (v[j] - v[i]);
      out.pts[out.n] = p[i] + t * (p[j] - p[i]);
      out.vals[out.n++] = 0.0;
    }
  }
  return out;
}

struct CellClip {
  double measure = 0.0;
  double l2sq = 0.0;
};

CellClip clip_cell(const Mesh& mesh, const Eigen::VectorXd& u, int cell, double k) {
  CellClip out;
  const Cell& c = mesh.cells[cell];
  if (mesh.dim == 1) {
    Vec2 a = mesh.vertices[c.v[0]], b = mesh.vertices[c.v[1]];
    SegmentClip sc = clip_segment(u[c.v[0]], u[c.v[1]], k, std::abs(b.x - a.x));
    out.measure = sc.length;
    out.l2sq = sc.l2sq;
    return out;
  }
  Vec2 p[3] = {mesh.vertices[c.v[0]], mesh.vertices[c.v[1]], mesh.vertices[c.v[2]]};
  double v[3] = {u[c.v[0]], u[c.v[1]], u[c.v[2]]};
  TriangleClip tc = clip_triangle(p, v, k);
  if (tc.n < 3) return out;
  // Fan triangulation from vertex 0 (the clip polygon is convex).
  for (int i = 1; i + 1 < tc.n; ++i) {
    double area = tri_area(tc.pts[0], tc.pts[i], tc.pts[i + 1]);
    out.measure += area;
    out.l2sq += tri_l2sq(area, tc.vals[0], tc.vals[i], tc.vals[i + 1]);
  }
  return out;
}

// Constant gradient of the P1 function on a cell.
double cell_grad_sq(const Mesh& mesh, const Eigen::VectorXd& u, int cell) {
  const Cell& c = mesh.cells[cell];
  if (mesh.dim == 1) {
    Vec2 a = mesh.vertices[c.v[0]], b = mesh.vertices[c.v[1]];
    double g = (u[c.v[1]] - u[c.v[0]]) / (b.x - a.x);
    return g * g;
  }
  Vec2 p0 = mesh.vertices[c.v[0]], p1 = mesh.vertices[c.v[1]], p2 = mesh.vertices[c.v[2]];
  double det = cross(p1 - p0, p2 - p0);
  double w0 = u[c.v[0]], w1 = u[c.v[1]], w2 = u[c.v[2]];
  double gx = ((w1 - w0) * (p2.y - p0.y) - (w2 - w0) * (p1.y - p0.y)) / det;
  double gy = ((w2 - w0) * (p1.x - p0.x) - (w1 - w0) * (p2.x - p0.x)) / det;
  return gx * gx + gy * gy;
}

void check_state(const Mesh& mesh, const Eigen::VectorXd& u) {
  if (u.size() != mesh.ndof())
    throw std::invalid_argument("state size does not match the mesh");
}

// Linear interpolation of u at a point of a known cell, via barycentric weights.
double eval_in_cell(const Mesh& mesh, const Eigen::VectorXd& u, int cell, Vec2 x) {
  const Cell& c = mesh.cells[cell];
  if (mesh.dim == 1) {
    Vec2 a = mesh.vertices[c.v[0]], b = mesh.vertices[c.v[1]];
    double t = (x.x - a.x) / (b.x - a.x);
    return (1.0 - t) * u[c.v[0]] + t * u[c.v[1]];
  }
  Vec2 p0 = mesh.vertices[c.v[0]], p1 = mesh.vertices[c.v[1]], p2 = mesh.vertices[c.v[2]];
  double det = cross(p1 - p0, p2 - p0);
  double l1 = cross(x - p0, p2 - p0) / det;
  double l2 = cross(p1 - p0, x - p0) / det;
  return (1.0 - l1 - l2) * u[c.v[0]] + l1 * u[c.v[1]] + l2 * u[c.v[2]];
}

// Trailing window of a trajectory: states at the samples inside the window,
// preceded by the state linearly interpolated exactly at the window start.
struct WindowScan {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> u;
};

WindowScan window_states(const Trajectory& traj, double w) {
  const auto& times = traj.times;
  double t_end = times.back();
  double t0 = t_end - w;
  double tol = 1e-12 * std::max(1.0, t_end - times.front());
  WindowScan out;
  std::size_t i = 0;
  while (i < times.size() && times[i] < t0 - tol) ++i;
  if (i > 0 && times[i] > t0 + tol) {
    double a = times[i - 1], b = times[i];
    double s = (t0 - a) / (b - a);
    out.t.push_back(t0);
    out.u.push_back((1.0 - s) * traj.states[i - 1] + s * traj.states[i]);
  }
  for (; i < times.size(); ++i) {
    out.t.push_back(times[i]);
    out.u.push_back(traj.states[i]);
  }
  return out;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    acc += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return acc;
}

const Mesh& traj_mesh(const Trajectory& traj) {
  if (!traj.system || traj.times.size() < 2 ||
      traj.states.size() != traj.times.size())
    throw std::invalid_argument("trajectory must carry a system and >= 2 states");
  return *traj.system->mesh;
}

// Time L^r norm of per-sample spatial norms by trapezoid over the full horizon.
double time_lr(const std::vector<double>& t, const std::vector<double>& v, double r) {
  std::vector<double> p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = std::pow(v[i], r);
  return std::pow(trapezoid(t, p), 1.0 / r);
}

void check_exponents(const SupExponents& e, int N) {
  for (double x : {e.r1, e.q1, e.r2, e.q2})
    if (!(x >= 2.0) || !std::isfinite(x))
      throw std::invalid_argument("integrability exponents must lie in [2, oo)");
  if (!(1.0 / e.r1 + N / (2.0 * e.q1) < 1.0))
    throw std::invalid_argument("exponent relation violated: 1/r1 + N/(2 q1) must be < 1");
  if (!(1.0 / e.r2 + (N - 1) / (2.0 * e.q2) < 0.5))
    throw std::invalid_argument(
        "exponent relation violated: 1/r2 + (N-1)/(2 q2) must be < 1/2");
  if (!(e.q_coeff > std::max(N, 2) * 1.0) || !std::isfinite(e.q_coeff))
    throw std::invalid_argument("q_coeff must exceed max(N, 2)");
}

double forcing_norm(const Signal& s, const Mesh& mesh, double r, double q,
                    const std::vector<double>& times, bool boundary) {
  if (s.terms.empty()) return 0.0;
  std::vector<double> prof = boundary ? lq_boundary_profile(s, mesh, q, times)
                                      : lq_volume_profile(s, mesh, q, times);
  return time_lr(times, prof, r);
}

}  // namespace

IterationParams iteration_params(double c, double b, double eps, double delta) {
  IterationParams p;
  p.c = c;
  p.b = b;
  p.eps = eps;
  p.delta = delta;
  check_params(p);
  p.d = std::min(delta, eps / (1.0 + eps));
  if (c == 0.0) {
    p.lambda = std::numeric_limits<double>::infinity();
    return p;
  }
  f128 lam = expq(scaled_factors(p).log_lambda);
  double lam_d = static_cast<double>(lam);
  // Round toward zero: the stored double must not exceed the f128 value.
  if (static_cast<f128>(lam_d) > lam) lam_d = std::nextafter(lam_d, 0.0);
  p.lambda = lam_d;
  return p;
}

IterationCheck iteration_lemma_verify(const IterationParams& params, double y0,
                                      double z0, int n_max) {
  check_params(params);
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (y0 < 0.0 || z0 < 0.0)
    throw std::invalid_argument("starting values must be nonnegative");
  if (params.c == 0.0)
    return run_scaled(params, 0.0, 0.0, n_max, true);
  ScaledFactors s = scaled_factors(params);
  f128 lam = expq(s.log_lambda);
  f128 lam_z = expq(s.log_lambda / (1 + static_cast<f128>(params.eps)));
  f128 Y0 = y0 / lam;
  f128 Z0 = z0 / lam_z;
  f128 slack = 1 + static_cast<f128>(1e-14);
  bool applicable = Y0 <= slack && Z0 <= slack;
  return run_scaled(params, Y0, Z0, n_max, applicable);
}

IterationCheck iteration_boundary_verify(const IterationParams& params, int n_max) {
  check_params(params);
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  return run_scaled(params, params.c == 0.0 ? 0.0 : 1.0,
                    params.c == 0.0 ? 0.0 : 1.0, n_max, true);
}

void save_iteration_report(const std::vector<IterationCheck>& checks,
                           const std::string& path) {
  CsvWriter csv(path);
  csv.header({"c", "b", "eps", "delta", "lambda", "min_margin", "n_max"});
  for (const auto& ch : checks)
    csv.row({ch.params.c, ch.params.b, ch.params.eps, ch.params.delta,
             ch.params.lambda, ch.min_margin, double(ch.n_max)});
}

double level_measure(const Mesh& mesh, const Eigen::VectorXd& u, double k) {
  check_state(mesh, u);
  double acc = 0.0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    acc += clip_cell(mesh, u, int(c), k).measure;
  return acc;
}

double boundary_level_measure(const Mesh& mesh, const Eigen::VectorXd& u, double k) {
  check_state(mesh, u);
  double acc = 0.0;
  for (const auto& f : mesh.boundary) {
    if (mesh.dim == 1) {
      acc += u[f.v[0]] > k ? 1.0 : 0.0;
    } else {
      Vec2 a = mesh.vertices[f.v[0]], b = mesh.vertices[f.v[1]];
      acc += clip_segment(u[f.v[0]], u[f.v[1]], k, norm(b - a)).length;
    }
  }
  return acc;
}

double truncation_l2sq(const Mesh& mesh, const Eigen::VectorXd& u, double k) {
  check_state(mesh, u);
  double acc = 0.0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    acc += clip_cell(mesh, u, int(c), k).l2sq;
  return acc;
}

double truncation_h1sq(const Mesh& mesh, const Eigen::VectorXd& u, double k) {
  check_state(mesh, u);
  double acc = 0.0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    double m = clip_cell(mesh, u, int(c), k).measure;
    if (m > 0.0) acc += cell_grad_sq(mesh, u, int(c)) * m;
  }
  return acc;
}

double lq_norm(const Mesh& mesh, const Eigen::VectorXd& u, double q, int quad_order) {
  check_state(mesh, u);
  if (!(q >= 1.0)) throw std::invalid_argument("q must be >= 1");
  double acc = 0.0;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const Cell& cell = mesh.cells[c];
    std::vector<QuadPoint> rule =
        mesh.dim == 1
            ? segment_rule(mesh.vertices[cell.v[0]], mesh.vertices[cell.v[1]], quad_order)
            : triangle_rule(mesh.vertices[cell.v[0]], mesh.vertices[cell.v[1]],
                            mesh.vertices[cell.v[2]], quad_order);
    for (const auto& qp : rule)
      acc += qp.w * std::pow(std::abs(eval_in_cell(mesh, u, int(c), qp.p)), q);
  }
  return std::pow(acc, 1.0 / q);
}

double boundary_lq_norm(const Mesh& mesh, const Eigen::VectorXd& u, double q,
                        int quad_order) {
  check_state(mesh, u);
  if (!(q >= 1.0)) throw std::invalid_argument("q must be >= 1");
  double acc = 0.0;
  for (const auto& f : mesh.boundary) {
    if (mesh.dim == 1) {
      acc += std::pow(std::abs(u[f.v[0]]), q);
    } else {
      Vec2 a = mesh.vertices[f.v[0]], b = mesh.vertices[f.v[1]];
      for (const auto& qp : segment_rule(a, b, quad_order)) {
        double t = norm(qp.p - a) / norm(b - a);
        double val = (1.0 - t) * u[f.v[0]] + t * u[f.v[1]];
        acc += qp.w * std::pow(std::abs(val), q);
      }
    }
  }
  return std::pow(acc, 1.0 / q);
}

LevelSetProfile level_sets(const Trajectory& traj, double k, double tau) {
  const Mesh& mesh = traj_mesh(traj);
  double horizon = traj.times.back() - traj.times.front();
  if (!(tau > 0.0) || tau > horizon * (1.0 + 1e-12))
    throw std::invalid_argument("tau must lie in (0, horizon]");
  WindowScan scan = window_states(traj, std::min(tau, horizon));
  LevelSetProfile prof;
  prof.k = k;
  prof.tau = tau;
  prof.times = scan.t;
  double sup_l2 = 0.0;
  std::vector<double> h1(scan.t.size());
  double min_u = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scan.t.size(); ++i) {
    prof.vol_measure.push_back(level_measure(mesh, scan.u[i], k));
    prof.bnd_measure.push_back(boundary_level_measure(mesh, scan.u[i], k));
    sup_l2 = std::max(sup_l2, truncation_l2sq(mesh, scan.u[i], k));
    h1[i] = truncation_h1sq(mesh, scan.u[i], k);
    min_u = std::min(min_u, scan.u[i].minCoeff());
  }
  prof.q_norm_sq = sup_l2 + trapezoid(scan.t, h1);
  prof.everything = k < min_u;
  return prof;
}

CaccioppoliCheck caccioppoli_check(const Trajectory& traj, const Signal& f,
                                   const Signal& g, double k, double tau,
                                   double sigma, const SupExponents& exponents) {
  const Mesh& mesh = traj_mesh(traj);
  int N = mesh.dim;
  check_exponents(exponents, N);
  double horizon = traj.times.back() - traj.times.front();
  if (!(tau > 0.0) || tau > horizon * (1.0 + 1e-12))
    throw std::invalid_argument("tau must lie in (0, horizon]");
  if (!(sigma > 0.0) || !(sigma < 0.5))
    throw std::invalid_argument("sigma must lie in (0, 1/2)");
  if (!f.terms.empty() && f.target != SignalTarget::Volume)
    throw std::invalid_argument("f must target the volume");
  if (!g.terms.empty() && g.target != SignalTarget::Boundary)
    throw std::invalid_argument("g must target the boundary");

  CaccioppoliCheck out;
  double nf = forcing_norm(f, mesh, exponents.r1, exponents.q1, traj.times, false);
  double ng = forcing_norm(g, mesh, exponents.r2, exponents.q2, traj.times, true);
  out.khat = std::sqrt(nf * nf + ng * ng);
  if (k < out.khat * (1.0 - 1e-12))
    throw std::invalid_argument("k must be at least khat");

  // Left side: truncation energy over the shrunk window (1 - sigma) tau.
  WindowScan inner = window_states(traj, (1.0 - sigma) * tau);
  double sup_l2 = 0.0;
  std::vector<double> h1(inner.t.size());
  for (std::size_t i = 0; i < inner.t.size(); ++i) {
    sup_l2 = std::max(sup_l2, truncation_l2sq(mesh, inner.u[i], k));
    h1[i] = truncation_h1sq(mesh, inner.u[i], k);
  }
  out.lhs = sup_l2 + trapezoid(inner.t, h1);

  // Right side over the full window tau.
  WindowScan outer = window_states(traj, tau);
  std::vector<double> l2(outer.t.size()), va(outer.t.size()), vb(outer.t.size());
  for (std::size_t i = 0; i < outer.t.size(); ++i) {
    l2[i] = truncation_l2sq(mesh, outer.u[i], k);
    va[i] = level_measure(mesh, outer.u[i], k);
    vb[i] = boundary_level_measure(mesh, outer.u[i], k);
  }
  out.time_term = trapezoid(outer.t, l2) / (sigma * tau);

  double kappa1 =
      (2.0 / N) * (1.0 - 1.0 / exponents.r1 - N / (2.0 * exponents.q1));
  double kappa2 =
      (2.0 / N) * (0.5 - 1.0 / exponents.r2 - (N - 1) / (2.0 * exponents.q2));
  double qc = exponents.q_coeff;
  double kappa12 = 2.0 * (qc - N) / (N * qc);
  double kappa22 = (qc - N) / (N * (qc - 1.0));
  double r1l[2] = {2.0 * (1.0 + kappa1) * exponents.r1 / (exponents.r1 - 1.0),
                   2.0 * (1.0 + kappa12)};
  double q1l[2] = {2.0 * (1.0 + kappa1) * exponents.q1 / (exponents.q1 - 1.0),
                   2.0 * (1.0 + kappa12) * qc / (qc - 2.0)};
  double ka1[2] = {kappa1, kappa12};
  double r2l[2] = {2.0 * (1.0 + kappa2) * exponents.r2 / (exponents.r2 - 1.0),
                   2.0 * (1.0 + kappa22)};
  double q2l[2] = {2.0 * (1.0 + kappa2) * exponents.q2 / (exponents.q2 - 1.0),
                   2.0 * (1.0 + kappa22) * (qc - 1.0) / (qc - 2.0)};
  double ka2[2] = {kappa2, kappa22};

  std::vector<double> pw(outer.t.size());
  for (int l = 0; l < 2; ++l) {
    for (std::size_t i = 0; i < pw.size(); ++i)
      pw[i] = std::pow(va[i], r1l[l] / q1l[l]);
    out.vol_terms[l] =
        k * k * std::pow(trapezoid(outer.t, pw), 2.0 * (1.0 + ka1[l]) / r1l[l]);
    for (std::size_t i = 0; i < pw.size(); ++i)
      pw[i] = std::pow(vb[i], r2l[l] / q2l[l]);
    out.bnd_terms[l] =
        k * k * std::pow(trapezoid(outer.t, pw), 2.0 * (1.0 + ka2[l]) / r2l[l]);
  }

  double rhs = out.time_term + out.vol_terms[0] + out.vol_terms[1] +
               out.bnd_terms[0] + out.bnd_terms[1];
  if (out.lhs == 0.0)
    out.gamma_required = 0.0;
  else if (rhs == 0.0)
    out.gamma_required = std::numeric_limits<double>::infinity();
  else
    out.gamma_required = out.lhs / rhs;
  return out;
}

SupBound sup_bound_check(const Trajectory& traj, const Signal& f, const Signal& g,
                         const SupExponents& exponents, bool global) {
  const Mesh& mesh = traj_mesh(traj);
  check_exponents(exponents, mesh.dim);
  const auto& times = traj.times;
  double t_half = global ? times.front()
                         : times.front() + 0.5 * (times.back() - times.front());
  SupBound out;
  std::vector<double> l2sq(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    l2sq[i] = std::pow(lq_norm(mesh, traj.states[i], 2.0), 2.0);
    if (times[i] >= t_half - 1e-12)
      out.sup_norm = std::max(out.sup_norm, traj.states[i].lpNorm<Eigen::Infinity>());
  }
  double uu = trapezoid(times, l2sq);
  double nf = forcing_norm(f, mesh, exponents.r1, exponents.q1, times, false);
  double ng = forcing_norm(g, mesh, exponents.r2, exponents.q2, times, true);
  out.rhs = std::sqrt(uu + nf * nf + ng * ng);
  out.constant_ratio = out.rhs == 0.0 ? 0.0 : out.sup_norm / out.rhs;
  return out;
}

double aniso_embedding_estimate(const Mesh& mesh, double r, double q,
                                const std::vector<Trajectory>& samples) {
  int N = mesh.dim;
  if (!(r >= 2.0) || !(q >= 2.0))
    throw std::invalid_argument("exponents must lie in [2, oo)");
  if (std::abs(1.0 / r + N / (2.0 * q) - N / 4.0) > 1e-9)
    throw std::invalid_argument("exponents must satisfy 1/r + N/(2q) = N/4");
  double rb = N == 1 ? 4.0 : r;
  double qb = N == 1 ? q : q * (N - 1) / double(N);
  if (N == 2 && qb < 2.0)
    throw std::invalid_argument("derived boundary exponent q(N-1)/N must be >= 2");

  double best = 0.0;
  for (const auto& traj : samples) {
    if (traj.times.size() < 2 || traj.states.size() != traj.times.size())
      throw std::invalid_argument("each sample needs >= 2 matching states");
    std::size_t n = traj.times.size();
    std::vector<double> vol(n), bnd(n), l2sq(n), h1(n);
    double sup_l2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd& u = traj.states[i];
      check_state(mesh, u);
      vol[i] = lq_norm(mesh, u, q);
      bnd[i] = boundary_lq_norm(mesh, u, qb);
      double l2 = lq_norm(mesh, u, 2.0);
      sup_l2 = std::max(sup_l2, l2 * l2);
      double acc = 0.0;
      for (std::size_t c = 0; c < mesh.cells.size(); ++c)
        acc += cell_grad_sq(mesh, u, int(c)) * cell_measure(mesh, int(c));
      h1[i] = acc;
    }
    double q_sq = sup_l2 + trapezoid(traj.times, h1);
    if (q_sq == 0.0) continue;
    double lhs = time_lr(traj.times, vol, r) + time_lr(traj.times, bnd, rb);
    best = std::max(best, lhs / std::sqrt(q_sq));
  }
  return best;
}

}  // namespace robinlab
