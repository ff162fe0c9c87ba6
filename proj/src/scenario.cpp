#include "robinlab/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "robinlab/almost_periodic.hpp"
#include "robinlab/assembly.hpp"
#include "robinlab/coefficients.hpp"
#include "robinlab/degiorgi.hpp"
#include "robinlab/expression.hpp"
#include "robinlab/mean_spaces.hpp"
#include "robinlab/signal.hpp"
#include "robinlab/solver.hpp"
#include "robinlab/trajectory.hpp"

namespace robinlab {

namespace {

struct ScenarioContext {
  const Config* cfg = nullptr;
  std::string name;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const AssembledSystem> system;
  Eigen::VectorXd u0;
  Signal f = zero_signal();
  Signal g = zero_signal(SignalTarget::Boundary);
  double T = 0.0;
  double dt = 0.0;
  double theta = 1.0;
  std::optional<Trajectory> traj;
};

using CheckFn = std::function<CheckResult(const ScenarioContext&, const Config&)>;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double complex_m_norm(const AssembledSystem& sys, const Eigen::VectorXcd& v) {
  return std::sqrt(std::abs((v.adjoint() * (sys.M * v)).value().real()));
}

Eigen::VectorXd nodal_field(const Mesh& mesh, const ScalarField& field) {
  Eigen::VectorXd u(mesh.ndof());
  for (int i = 0; i < mesh.ndof(); ++i)
    u[i] = field(mesh.vertices[i].x, mesh.vertices[i].y);
  return u;
}

const Trajectory& need_trajectory(const ScenarioContext& ctx, const std::string& check) {
  if (!ctx.traj)
    throw ConfigError(ctx.cfg->name + ": check '" + check +
                      "' needs a solved trajectory; set problem.T > 0");
  return *ctx.traj;
}

// Smallest nonzero generalized eigenvalue of (K, M) by inverse iteration on
// the zero-mean complement; requires a symmetric form.
double smallest_nonzero_eigenvalue(const AssembledSystem& sys) {
  Eigen::MatrixXd asym = Eigen::MatrixXd(sys.K) - Eigen::MatrixXd(sys.K).transpose();
  double scale = std::max(1.0, Eigen::MatrixXd(sys.K).cwiseAbs().maxCoeff());
  if (asym.cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("decay envelope needs a symmetric form");
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.ndof);
  double vol = ones.dot(sys.M * ones);
  Eigen::VectorXd v(sys.ndof);
  for (int i = 0; i < sys.ndof; ++i)
    v[i] = sys.mesh->vertices[i].x + 0.1 * sys.mesh->vertices[i].y;
  auto project = [&](Eigen::VectorXd& w) {
    w.array() -= ones.dot(sys.M * w) / vol;
  };
  project(v);
  v /= std::sqrt(v.dot(sys.M * v));
  double lambda = v.dot(sys.K * v);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXd w = solve_zero_mean_stationary(sys, sys.M * v);
    project(w);
    w /= std::sqrt(w.dot(sys.M * w));
    double next = w.dot(sys.K * w);
    v = w;
    if (std::abs(next - lambda) <= 1e-12 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

// ---- signal parsing ----

Signal parse_signal(const Config& cfg, const std::string& table, SignalTarget target) {
  if (!cfg.has(table + ".kind")) {
    if (!cfg.subtables(table).empty() || cfg.entries.count(table + ".profile"))
      cfg.fail(table + ".kind", "is required");
    return zero_signal(target);
  }
  std::string kind = cfg.text(table + ".kind");
  if (kind == "zero") return zero_signal(target);
  ScalarField profile = parse_expression(cfg.text(table + ".profile"));
  if (kind == "constant") return constant_signal(profile, target);
  if (kind == "trig")
    return trig_signal(cfg.number(table + ".eta"), profile,
                       cfg.flag_or(table + ".sine", false), target);
  if (kind == "decay") return decay_signal(cfg.number(table + ".rate"), profile, target);
  if (kind == "bump")
    return bump_signal(cfg.number(table + ".t0"), cfg.number(table + ".t1"), profile,
                       target);
  if (kind == "square_wave") {
    Signal s = square_wave_signal(cfg.number(table + ".period"), profile);
    s.target = target;
    return s;
  }
  cfg.fail(table + ".kind", "must be one of zero, constant, trig, decay, bump, "
                            "square_wave; got '" + kind + "'");
}

// ---- checks ----

CheckResult check_decay_oracle(const ScenarioContext& ctx, const Config& p) {
  const Trajectory& traj = need_trajectory(ctx, "decay_oracle");
  double rate = p.number("rate");
  double amplitude = p.number("amplitude");
  double tol = p.number("tolerance");
  CheckResult r{"decay_oracle", true, 0.0, tol, ""};
  for (double t : p.number_array("times")) {
    long idx = std::lround(t / ctx.traj->dt);
    if (idx < 0 || idx >= long(traj.times.size()))
      p.fail("times", "contains a time outside the horizon");
    double got = l2_norm(*ctx.system, traj.states[idx]);
    double want = amplitude * std::exp(-rate * traj.times[idx]);
    r.measured = std::max(r.measured, std::abs(got - want) / want);
  }
  r.passed = r.measured <= tol;
  r.detail = "max relative deviation from the separated solution " + fmt6(r.measured);
  return r;
}

CheckResult check_decay_envelope(const ScenarioContext& ctx, const Config& p) {
  const Trajectory& traj = need_trajectory(ctx, "decay_envelope");
  if (ctx.theta != 1.0)
    throw ConfigError(ctx.cfg->name + ": decay_envelope requires theta = 1");
  double slack = p.number_or("slack", 1e-10);
  double gap = smallest_nonzero_eigenvalue(*ctx.system);
  double rho = 1.0 / (1.0 + ctx.dt * gap);
  double tau = -ctx.dt / std::log(rho);
  double u0_sq = std::pow(l2_norm(*ctx.system, traj.states.front()), 2.0);
  CheckResult r{"decay_envelope", true, 0.0, slack, ""};
  // Relative overshoot of ||u(t)||^2 above e^{-t/tau} ||u0||^2, every step.
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    double bound = std::exp(-traj.times[i] / tau) * u0_sq;
    double got = std::pow(l2_norm(*ctx.system, traj.states[i]), 2.0);
    if (bound > 0.0) r.measured = std::max(r.measured, got / bound - 1.0);
  }
  r.passed = r.measured <= slack;
  r.detail = "spectral gap " + fmt6(gap) + ", tau " + fmt6(tau) +
             ", worst envelope overshoot " + fmt6(r.measured);
  return r;
}

CheckResult check_conservation(const ScenarioContext& ctx, const Config& p) {
  const Trajectory& traj = need_trajectory(ctx, "conservation");
  double cond_tol = p.number_or("condition_tolerance", 1e-12);
  double tol = p.number_or("tolerance", 1e-10);
  double cond = check_conservation_condition(*ctx.system);
  double drift = mass_identity_error(traj, ctx.f, ctx.g);
  CheckResult r{"conservation", cond <= cond_tol && drift <= tol, drift, tol, ""};
  r.detail = "conservation residual " + fmt6(cond) + ", mass identity error " +
             fmt6(drift) + " over " + std::to_string(traj.times.size() - 1) + " steps";
  return r;
}

CheckResult check_energy_estimate(const ScenarioContext& ctx, const Config& p) {
  const Trajectory& traj = need_trajectory(ctx, "energy_estimate");
  double bound = p.number_or("bound", 1.5);
  EnergyReport rep = energy_estimate_check(traj, ctx.u0, ctx.f, ctx.g);
  CheckResult r{"energy_estimate", rep.ratio <= bound, rep.ratio, bound, ""};
  r.detail = "energy ratio " + fmt6(rep.ratio);
  return r;
}

CheckResult check_mean_convergence(const ScenarioContext& ctx, const Config& p) {
  const Trajectory& traj = need_trajectory(ctx, "mean_convergence");
  double tol_l2 = p.number("tolerance_l2");
  double tol_max = p.number("tolerance_max");
  double vol = domain_measure(*ctx.mesh);
  double mean = total_mass(*ctx.system, traj.states.front()) / vol;
  Eigen::VectorXd dev =
      traj.states.back() - Eigen::VectorXd::Constant(ctx.system->ndof, mean);
  double dev_l2 = l2_norm(*ctx.system, dev);
  double dev_max = dev.lpNorm<Eigen::Infinity>();
  CheckResult r{"mean_convergence", dev_l2 <= tol_l2 && dev_max <= tol_max, dev_l2,
                tol_l2, ""};
  r.detail = "deviation from the conserved mean at t = " + fmt6(traj.times.back()) +
             ": L2 " + fmt6(dev_l2) + ", max " + fmt6(dev_max);
  return r;
}

CheckResult check_asymptotic_periodicity(const ScenarioContext& ctx, const Config& p) {
  const Trajectory& traj = need_trajectory(ctx, "asymptotic_periodicity");
  double tau = p.number("tau");
  double tol = p.number("tolerance");
  double tol_max = p.number_or("tolerance_max", tol);
  PeriodicityProfile prof = asymptotic_periodicity_check(traj, tau);
  CheckResult r{"asymptotic_periodicity",
                prof.final_l2 <= tol && prof.final_max <= tol_max, prof.final_l2, tol,
                ""};
  r.detail = "final period deviation: L2 " + fmt6(prof.final_l2) + ", max " +
             fmt6(prof.final_max);
  return r;
}

CheckResult check_frequency_transfer(const ScenarioContext& ctx, const Config& p) {
  double eta = p.number("eta");
  double tol = p.number("tolerance");
  TransferOptions opt;
  opt.periods = int(p.number_or("periods", opt.periods));
  opt.steps_per_period = int(p.number_or("steps_per_period", opt.steps_per_period));
  opt.settle = p.number_or("settle", opt.settle);
  opt.T_avg0 = p.number_or("T_avg0", opt.T_avg0);
  opt.dt0 = p.number_or("dt0", opt.dt0);
  TransferCheck tc = frequency_transfer_check(ctx.system, ctx.u0, ctx.f, ctx.g, eta, opt);
  CheckResult r{"frequency_transfer", tc.deviation <= tol, tc.deviation, tol, ""};
  r.detail = "deviation " + fmt6(tc.deviation) + " at eta " + fmt6(eta);
  if (p.has("absent")) {
    for (double ea : p.number_array("absent")) {
      TransferCheck ta =
          frequency_transfer_check(ctx.system, ctx.u0, ctx.f, ctx.g, ea, opt);
      double leak = complex_m_norm(*ctx.system, ta.lhs);
      if (leak >= ta.noise_floor) r.passed = false;
      r.detail += "; leakage " + fmt6(leak) + " vs floor " + fmt6(ta.noise_floor) +
                  " at eta " + fmt6(ea);
    }
  }
  if (p.has("dc")) {
    std::string dc = p.text("dc");
    TransferCheck t0 = frequency_transfer_check(ctx.system, ctx.u0, ctx.f, ctx.g, 0.0, opt);
    if (dc == "nonzero") {
      double rhs = complex_m_norm(*ctx.system, t0.rhs);
      if (!(rhs > 0.0) || t0.deviation > tol) r.passed = false;
      r.detail += "; dc deviation " + fmt6(t0.deviation);
    } else if (dc == "zero") {
      double leak = complex_m_norm(*ctx.system, t0.lhs);
      if (leak >= t0.noise_floor) r.passed = false;
      r.detail += "; dc leakage " + fmt6(leak) + " vs floor " + fmt6(t0.noise_floor);
    } else {
      p.fail("dc", "must be \"nonzero\" or \"zero\"");
    }
  }
  return r;
}

CheckResult check_resolvent_exact(const ScenarioContext&, const Config& p) {
  std::vector<double> lambdas = p.number_array("lambdas");
  int n = int(p.number_or("n", 512));
  double tol = p.number_or("tolerance", 1e-3);
  double order_min = p.number_or("order_min", 1.9);
  auto boundary_datum = [](double x, double) { return x; };  // (0, 1) datum
  std::map<int, std::vector<double>> errs;
  for (int m : {n / 2, n, 2 * n}) {
    auto mesh = std::make_shared<Mesh>(build_interval_mesh(m));
    AssembledSystem sys = assemble(mesh, laplacian());
    for (double lam : lambdas) {
      ResolventSolution sol =
          solve_resolvent(sys, lam, [](double, double) { return 0.0; }, boundary_datum);
      Eigen::VectorXd exact(sys.ndof);
      for (int i = 0; i < sys.ndof; ++i)
        exact[i] = exact_resolvent_1d(lam, mesh->vertices[i].x);
      errs[m].push_back(l2_norm(sys, sol.u - exact) / l2_norm(sys, exact));
    }
  }
  double worst = *std::max_element(errs[n].begin(), errs[n].end());
  double order = 1e30;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    order = std::min(order, std::log2(errs[n / 2][j] / errs[n][j]));
    order = std::min(order, std::log2(errs[n][j] / errs[2 * n][j]));
  }
  CheckResult r{"resolvent_exact", worst <= tol && order >= order_min, worst, tol, ""};
  r.detail = "max relative L2 error " + fmt6(worst) + " at n = " + std::to_string(n) +
             ", observed order " + fmt6(order);
  return r;
}

CheckResult check_hille_yosida_slope(const ScenarioContext&, const Config& p) {
  std::vector<double> lambdas = p.number_array("lambdas");
  if (lambdas.size() < 2) p.fail("lambdas", "needs at least two shifts");
  double expected = p.number_or("expected", 0.25);
  double tol_exact = p.number_or("tolerance_exact", 0.02);
  double tol_discrete = p.number_or("tolerance_discrete", 0.04);
  // Least squares on the closed-form norms.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double lam : lambdas) {
    double x = std::log(lam), y = std::log(lam * exact_resolvent_1d_l2(lam));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  double m = double(lambdas.size());
  double slope_exact = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  // Discrete fit on a mesh resolving the boundary layer of the largest shift.
  int n = int(p.number_or("n", 12800));
  auto mesh = std::make_shared<Mesh>(build_interval_mesh(n));
  AssembledSystem sys = assemble(mesh, laplacian());
  GrowthFit fit = resolvent_growth_exponent(sys, lambdas);
  if (fit.under_resolved)
    p.fail("n", "leaves the boundary layer unresolved for the largest shift");
  double dev_exact = std::abs(slope_exact - expected);
  double dev_discrete = std::abs(fit.slope_lambda_u - expected);
  CheckResult r{"hille_yosida_slope",
                dev_exact <= tol_exact && dev_discrete <= tol_discrete,
                std::max(dev_exact, dev_discrete), tol_discrete, ""};
  r.detail = "growth exponent: closed form " + fmt6(slope_exact) + ", discrete " +
             fmt6(fit.slope_lambda_u) + " at n = " + std::to_string(n);
  return r;
}

CheckResult check_iteration_lemma(const ScenarioContext& ctx, const Config& p) {
  int tuples = int(p.number_or("tuples", 10000));
  int n_max = int(p.number_or("n_max", 60));
  double floor = p.number_or("margin_floor", -1e-25);
  std::mt19937_64 rng(ctx.seed);
  std::uniform_real_distribution<double> uc(0.1, 10.0), ub(1.0, 8.0), ue(0.1, 3.0);
  double grid_min = 1.0;
  bool all_applicable = true;
  for (int i = 0; i < tuples; ++i) {
    auto params = iteration_params(uc(rng), ub(rng), ue(rng), ue(rng));
    auto chk = iteration_boundary_verify(params, n_max);
    all_applicable = all_applicable && chk.applicable;
    grid_min = std::min(grid_min, chk.min_margin);
  }
  CheckResult r{"iteration_lemma", all_applicable && grid_min >= floor, grid_min, floor,
                ""};
  r.detail = "worst margin " + fmt6(grid_min) + " over " + std::to_string(tuples) +
             " tuples, n <= " + std::to_string(n_max);
  return r;
}

CheckResult check_caccioppoli_bounded(const ScenarioContext& ctx, const Config& p) {
  const Trajectory& traj = need_trajectory(ctx, "caccioppoli_bounded");
  double tau = p.number("tau");
  double sigma = p.number_or("sigma", 0.25);
  double bound = p.number_or("bound", 1.0);
  std::vector<double> mults = p.has("k_multipliers")
                                  ? p.number_array("k_multipliers")
                                  : std::vector<double>{1.0, 2.0, 4.0};
  // A level far above the data never rejects, so it reveals the threshold.
  double khat = caccioppoli_check(traj, ctx.f, ctx.g, 1e30, tau, sigma).khat;
  double gamma_max = 0.0;
  for (double m : mults) {
    auto cc = caccioppoli_check(traj, ctx.f, ctx.g, std::max(m * khat, khat), tau, sigma);
    gamma_max = std::max(gamma_max, cc.gamma_required);
  }
  CheckResult r{"caccioppoli_bounded", std::isfinite(gamma_max) && gamma_max <= bound,
                gamma_max, bound, ""};
  r.detail = "max gamma " + fmt6(gamma_max) + " over the level panel, khat " +
             fmt6(khat);
  return r;
}

CheckResult check_sup_bound_panel(const ScenarioContext& ctx, const Config& p) {
  int panel = int(p.number_or("panel", 50));
  int global_count = int(p.number_or("global_panel", 15));
  double factor = p.number_or("factor", 3.0);
  int n = int(p.number_or("n", 100));
  double T = p.number_or("T", 1.0);
  double dt = p.number_or("dt", 2e-3);
  if (panel < 3 || global_count < 0 || global_count > panel)
    p.fail("panel", "needs panel >= 3 and 0 <= global_panel <= panel");

  std::mt19937_64 rng(ctx.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto mesh = std::make_shared<Mesh>(build_interval_mesh(n));
  std::vector<double> local_ratios, global_ratios, all_ratios;
  std::ostringstream rows;
  for (int i = 0; i < panel; ++i) {
    CoefficientSet coeffs;
    switch (int(u01(rng) * 4) % 4) {
      case 0: coeffs = laplacian(); break;
      case 1: coeffs = anisotropic(0.5 + 1.5 * u01(rng), 0.5 + 1.5 * u01(rng)); break;
      case 2: coeffs = reaction(u01(rng)); break;
      default: coeffs = robin(u01(rng)); break;
    }
    auto sys = std::make_shared<AssembledSystem>(assemble(mesh, coeffs));
    bool global = i < global_count;
    Eigen::VectorXd u0 = Eigen::VectorXd::Zero(sys->ndof);
    if (!global) {
      double amp = 0.2 + 0.8 * u01(rng), off = -1.0 + 2.0 * u01(rng);
      int mode = 1 + int(u01(rng) * 3);
      for (int j = 0; j < sys->ndof; ++j)
        u0[j] = off + amp * std::cos(mode * M_PI * mesh->vertices[j].x);
    }
    double fa = 0.2 + 0.8 * u01(rng), fb = -1.0 + 2.0 * u01(rng);
    double rate = 0.5 + 2.5 * u01(rng);
    Signal f = decay_signal(rate, [fa, fb](double x, double) { return fa + fb * x; });
    double ga = -1.0 + 2.0 * u01(rng), eta = 1.0 + 4.0 * u01(rng);
    Signal g = trig_signal(eta, [ga](double x, double) { return ga * x; }, false,
                           SignalTarget::Boundary);
    Trajectory traj = solve_parabolic(sys, u0, f, g, T, dt, 1.0);
    SupBound sb = sup_bound_check(traj, f, g, {}, global);
    (global ? global_ratios : local_ratios).push_back(sb.constant_ratio);
    all_ratios.push_back(sb.constant_ratio);
    rows << i << ", " << (global ? 1 : 0) << ", " << fmt(sb.constant_ratio) << "\n";
  }
  auto spread_ok = [&](std::vector<double> v, double& worst) {
    if (v.size() < 2) { worst = 0.0; return true; }
    std::sort(v.begin(), v.end());
    double median = v[v.size() / 2];
    worst = v.back() / median;
    return v.back() <= factor * median && v.front() > 0.0;
  };
  double worst_local = 0.0, worst_global = 0.0;
  bool ok = spread_ok(local_ratios, worst_local) && spread_ok(global_ratios, worst_global);
  std::ofstream out(ctx.out_dir + "/" + ctx.name + "_panel.csv");
  out << "index, u0_zero, ratio\n" << rows.str();
  CheckResult r{"sup_bound_panel", ok, std::max(worst_local, worst_global), factor, ""};
  r.detail = "ratio spread max/median: local " + fmt6(worst_local) + ", global " +
             fmt6(worst_global) + ", uniform bound " +
             fmt6(*std::max_element(all_ratios.begin(), all_ratios.end())) + ", seed " +
             std::to_string(ctx.seed);
  return r;
}

CheckResult check_mean_space_inequalities(const ScenarioContext& ctx, const Config& p) {
  int count = int(p.number_or("signals", 100));
  Mesh mesh = build_interval_mesh(64);
  std::vector<ScalarField> shapes = {
      [](double, double) { return 1.0; },
      [](double x, double) { return 1.0 + x; },
      [](double x, double) { return std::sin(M_PI * x); },
      [](double x, double) { return x * (1.0 - x) + 0.2; },
  };
  std::vector<double> shape_q2, shape_q4;
  for (const auto& s : shapes) {
    Eigen::VectorXd nodal = nodal_field(mesh, s);
    shape_q2.push_back(lq_norm(mesh, nodal, 2.0));
    shape_q4.push_back(lq_norm(mesh, nodal, 4.0));
  }
  std::mt19937_64 rng(ctx.seed + 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto draw_law = [&](auto&& self, int depth) -> std::function<double(double)> {
    int kind = int(u01(rng) * (depth == 0 ? 5 : 4)) % (depth == 0 ? 5 : 4);
    if (kind == 0) {
      double c = 0.3 + 1.7 * u01(rng);
      return [c](double) { return c; };
    }
    if (kind == 1) {
      double c = 0.3 + 1.7 * u01(rng), a = 0.3 + 1.7 * u01(rng);
      return [c, a](double t) { return c * std::exp(-a * t); };
    }
    if (kind == 2) {
      double c0 = 0.5 + u01(rng), w = 0.5 + 5.5 * u01(rng);
      double c1 = c0 * u01(rng);
      return [c0, c1, w](double t) { return c0 + c1 * std::sin(w * t); };
    }
    if (kind == 3) {
      double c = 0.3 + 1.7 * u01(rng), t0 = 5.0 * u01(rng), w = 0.5 + 2.5 * u01(rng);
      return [c, t0, w](double t) { return (t >= t0 && t <= t0 + w) ? c : 0.0; };
    }
    auto a = self(self, 1), b = self(self, 1);
    return [a, b](double t) { return 0.5 * (a(t) + b(t)); };
  };
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(20.0 * i / 200);
  std::vector<double> conv_grid;
  for (int i = 0; i <= 60; ++i) conv_grid.push_back(15.0 * i / 60);
  Kernel kernel{[](double t) { return std::exp(-t); }, 1.0, 1.0};

  double worst = 0.0;  // largest lhs/rhs over all four inequalities
  int failures = 0;
  for (int i = 0; i < count; ++i) {
    auto law = draw_law(draw_law, 0);
    int shape = int(u01(rng) * shapes.size()) % int(shapes.size());
    NormSamples s2{{}, {}, 2.0, "sig" + std::to_string(i)};
    NormSamples s4{{}, {}, 4.0, "sig" + std::to_string(i)};
    for (int j = 0; j <= 3000; ++j) {
      double t = 30.0 * j / 3000;
      double a = law(t);
      s2.times.push_back(t);
      s4.times.push_back(t);
      s2.values.push_back(a * shape_q2[shape]);
      s4.values.push_back(a * shape_q4[shape]);
    }
    // Window equivalence with the covering constant.
    auto p1 = running_norm(s2, 2.0, 1.0, grid);
    auto p25 = running_norm(s2, 2.0, 2.5, grid);
    WindowEquivalence eq = window_equivalence_ratio(p1, p25);
    if (!eq.within) ++failures;
    if (eq.bound > 0) worst = std::max(worst, eq.ratio / eq.bound);
    // Monotone embedding through the domain measure.
    auto hi = running_norm(s4, 4.0, 1.0, grid);
    double c_emb = embedding_constant(4.0, 2.0, 4.0, 2.0, 1.0, domain_measure(mesh));
    double lhs = m_norm(p1), rhs = c_emb * m_norm(hi);
    if (lhs > rhs * (1.0 + 1e-9)) ++failures;
    if (rhs > 0) worst = std::max(worst, lhs / rhs);
    // Bounded signals embed with constant T^{1/r}.
    double sup = *std::max_element(s2.values.begin(), s2.values.end());
    double frhs = std::pow(1.0, 1.0 / 2.0) * sup;
    if (m_norm(p1) > frhs * (1.0 + 1e-9)) ++failures;
    if (frhs > 0) worst = std::max(worst, m_norm(p1) / frhs);
    // Convolution against a monotone integrable kernel.
    ConvolutionBound conv = convolution_bound_check(p1, kernel, conv_grid);
    if (!conv.holds) ++failures;
    if (conv.rhs > 0)
      worst = std::max(
          worst, *std::max_element(conv.lhs.begin(), conv.lhs.end()) / conv.rhs);
  }
  CheckResult r{"mean_space_inequalities", failures == 0, worst, 1.0, ""};
  r.detail = std::to_string(count) + " signals, " + std::to_string(failures) +
             " violations, worst lhs/rhs " + fmt6(worst) + ", seed " +
             std::to_string(ctx.seed + 1);
  return r;
}

const std::map<std::string, CheckFn>& registry() {
  static const std::map<std::string, CheckFn> reg = {
      {"asymptotic_periodicity", check_asymptotic_periodicity},
      {"caccioppoli_bounded", check_caccioppoli_bounded},
      {"conservation", check_conservation},
      {"decay_envelope", check_decay_envelope},
      {"decay_oracle", check_decay_oracle},
      {"energy_estimate", check_energy_estimate},
      {"frequency_transfer", check_frequency_transfer},
      {"hille_yosida_slope", check_hille_yosida_slope},
      {"iteration_lemma", check_iteration_lemma},
      {"mean_convergence", check_mean_convergence},
      {"mean_space_inequalities", check_mean_space_inequalities},
      {"resolvent_exact", check_resolvent_exact},
      {"sup_bound_panel", check_sup_bound_panel},
  };
  return reg;
}

void save_checks_csv(const ScenarioContext& ctx, const std::vector<CheckResult>& checks) {
  std::ofstream out(ctx.out_dir + "/" + ctx.name + "_checks.csv");
  out << "check, passed, measured, tolerance\n";
  for (const CheckResult& c : checks)
    out << c.name << ", " << (c.passed ? 1 : 0) << ", " << fmt(c.measured) << ", "
        << fmt(c.tolerance) << "\n";
}

}  // namespace

bool ScenarioReport::all_passed() const {
  if (!config_ok) return false;
  for (const CheckResult& c : checks)
    if (!c.passed) return false;
  return true;
}

std::vector<std::string> list_checks() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

ScenarioReport run_scenario(const Config& cfg, const RunOptions& opt) {
  auto start = std::chrono::steady_clock::now();
  ScenarioReport report;
  report.name = cfg.text_or("name", cfg.name);
  try {
    ScenarioContext ctx;
    ctx.cfg = &cfg;
    ctx.name = cfg.text("name");
    ctx.out_dir = opt.out_dir;
    std::filesystem::create_directories(ctx.out_dir);
    double seed_value = cfg.number_or("seed", 20260817);
    if (seed_value < 0) cfg.fail("seed", "must be nonnegative");
    ctx.seed = opt.seed.value_or(std::uint64_t(seed_value));
    report.seed = ctx.seed;

    std::string kind = cfg.text_or("mesh.kind", "interval");
    if (kind == "interval") {
      int n = int(cfg.number_or("mesh.n", 100));
      if (n < 1) cfg.fail("mesh.n", "must be at least 1");
      ctx.mesh = std::make_shared<Mesh>(build_interval_mesh(n));
    } else if (kind == "square") {
      double h = cfg.number_or("mesh.h", 0.15);
      if (h <= 0) cfg.fail("mesh.h", "must be positive");
      ctx.mesh = std::make_shared<Mesh>(build_polygon_mesh(
          {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}, h));
    } else {
      cfg.fail("mesh.kind", "must be \"interval\" or \"square\"");
    }

    CoefficientSet coeffs =
        parse_coefficient_preset(cfg.text_or("problem.coefficients", "laplacian"));
    ctx.system = std::make_shared<AssembledSystem>(assemble(ctx.mesh, coeffs));
    ctx.u0 = nodal_field(*ctx.mesh, parse_expression(cfg.text_or("problem.u0", "0")));
    ctx.f = parse_signal(cfg, "forcing.f", SignalTarget::Volume);
    ctx.g = parse_signal(cfg, "forcing.g", SignalTarget::Boundary);
    ctx.T = cfg.number_or("problem.T", 0.0);
    if (ctx.T < 0) cfg.fail("problem.T", "must be nonnegative");
    ctx.theta = cfg.number_or("problem.theta", 1.0);
    if (ctx.theta < 0 || ctx.theta > 1) cfg.fail("problem.theta", "must lie in [0, 1]");
    if (ctx.T > 0) {
      ctx.dt = cfg.number_or("problem.dt", 0.0);
      if (ctx.dt <= 0) cfg.fail("problem.dt", "must be positive");
      ctx.traj = solve_parabolic(ctx.system, ctx.u0, ctx.f, ctx.g, ctx.T, ctx.dt,
                                 ctx.theta);
    }

    // Validate the verification list before running anything: every named
    // check must exist and its tolerances must be strictly positive.
    const auto& reg = registry();
    std::vector<std::string> checks = cfg.subtables("verify");
    for (const std::string& check : checks) {
      if (!reg.count(check)) {
        std::string names;
        for (const std::string& n : list_checks()) names += (names.empty() ? "" : ", ") + n;
        throw ConfigError(cfg.name + ": unknown check 'verify." + check +
                          "'; available: " + names);
      }
      for (const auto& [key, value] : cfg.section("verify." + check).entries)
        if (key.rfind("tolerance", 0) == 0 &&
            value.kind == ConfigValue::Kind::Number && value.num <= 0)
          throw ConfigError(cfg.name + ":" + std::to_string(value.line) + ": field '" +
                            key + "' must be strictly positive");
    }
    for (const std::string& check : checks) {
      try {
        report.checks.push_back(reg.at(check)(ctx, cfg.section("verify." + check)));
      } catch (const std::exception& e) {
        CheckResult failed{check, false, 0.0, 0.0, e.what()};
        report.checks.push_back(failed);
      }
    }

    if (cfg.has("output.summary")) {
      if (!ctx.traj)
        throw ConfigError(cfg.name + ": output.summary needs a solved trajectory");
      save_trajectory_summary(*ctx.traj, ctx.out_dir + "/" + cfg.text("output.summary"));
    }
    if (cfg.has("output.trajectory")) {
      if (!ctx.traj)
        throw ConfigError(cfg.name + ": output.trajectory needs a solved trajectory");
      save_trajectory(*ctx.traj, ctx.out_dir + "/" + cfg.text("output.trajectory"));
    }
    save_checks_csv(ctx, report.checks);
  } catch (const std::exception& e) {
    report.config_ok = false;
    report.error = e.what();
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ScenarioReport run_scenario_file(const std::string& path, const RunOptions& opt) {
  try {
    return run_scenario(parse_config_file(path), opt);
  } catch (const std::exception& e) {
    ScenarioReport report;
    report.name = path;
    report.config_ok = false;
    report.error = e.what();
    return report;
  }
}

std::vector<ScenarioReport> run_suite(const std::string& dir, const RunOptions& opt) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  if (!fs::is_directory(dir)) throw ConfigError(dir + ": not a directory");
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".toml")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());

  std::vector<ScenarioReport> reports(paths.size());
  int threads = std::clamp(opt.threads, 1, 64);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < paths.size(); i = next.fetch_add(1))
      reports[i] = run_scenario_file(paths[i], opt);
  };
  if (threads == 1 || paths.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    int workers = int(std::min<std::size_t>(threads, paths.size()));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  std::filesystem::create_directories(opt.out_dir);
  save_suite_summary(reports, opt.out_dir + "/suite_summary.csv");
  return reports;
}

void save_suite_summary(const std::vector<ScenarioReport>& reports,
                        const std::string& path) {
  std::ofstream out(path);
  out << "scenario, config_ok, checks_passed, checks_total, seed, passed\n";
  for (const ScenarioReport& r : reports) {
    int passed = 0;
    for (const CheckResult& c : r.checks) passed += c.passed ? 1 : 0;
    out << r.name << ", " << (r.config_ok ? 1 : 0) << ", " << passed << ", "
        << r.checks.size() << ", " << r.seed << ", " << (r.all_passed() ? 1 : 0)
        << "\n";
  }
}

}  // namespace robinlab
