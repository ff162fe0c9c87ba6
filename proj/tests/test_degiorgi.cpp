#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <random>
#include <vector>

#include "doctest.h"
#include "robinlab/coefficients.hpp"
#include "robinlab/degiorgi.hpp"
#include "robinlab/solver.hpp"

using namespace robinlab;

namespace {

std::shared_ptr<const AssembledSystem> interval_system(int n, const CoefficientSet& c) {
  auto mesh = std::make_shared<Mesh>(build_interval_mesh(n));
  return std::make_shared<AssembledSystem>(assemble(mesh, c));
}

Mesh unit_square(double h) {
  return build_polygon_mesh({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}, h);
}

Eigen::VectorXd nodal_x(const Mesh& mesh) {
  Eigen::VectorXd u(mesh.ndof());
  for (int i = 0; i < mesh.ndof(); ++i) u[i] = mesh.vertices[i].x;
  return u;
}

// Heated bar: insulated at x=0, unit influx at x=1; the mean grows linearly.
Trajectory heated_bar(double T, double dt) {
  auto sys = interval_system(100, laplacian());
  Signal g = constant_signal([](double x, double) { return x; }, SignalTarget::Boundary);
  return solve_parabolic(sys, Eigen::VectorXd::Zero(sys->ndof), zero_signal(), g, T,
                         dt, 1.0);
}

}  // namespace

TEST_CASE("iteration parameters from the explicit formulas") {
  auto p = iteration_params(1.0, 2.0, 1.0, 1.0);
  CHECK(p.d == 0.5);
  CHECK(p.lambda == 0.0625);
  CHECK(iteration_params(0.3, 1.0, 0.5, 2.0).lambda > 0.0);
  CHECK_THROWS_AS(iteration_params(-1.0, 2.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(iteration_params(1.0, 0.5, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(iteration_params(1.0, 2.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(iteration_params(1.0, 2.0, 1.0, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(iteration_lemma_verify(p, 0.01, 0.01, 0), std::invalid_argument);
  CHECK_THROWS_AS(iteration_lemma_verify(p, -0.01, 0.01, 10), std::invalid_argument);
}

TEST_CASE("saturated recurrence stays below the geometric envelope") {
  auto p = iteration_params(1.0, 2.0, 1.0, 1.0);
  auto boundary = iteration_boundary_verify(p, 60);
  CHECK(boundary.applicable);
  CHECK(boundary.margin_y.size() == 61);
  CHECK(boundary.margin_y[0] == 0.0);
  CHECK(boundary.margin_z[0] == 0.0);
  CHECK(boundary.min_margin >= -1e-25);

  // lambda = 1/16 and sqrt(lambda) = 1/4 are exact doubles, so the general
  // entry point sees the same boundary start.
  auto general = iteration_lemma_verify(p, p.lambda, 0.25, 60);
  CHECK(general.applicable);
  CHECK(general.min_margin >= -1e-25);

  auto zero = iteration_lemma_verify(p, 0.0, 0.0, 30);
  CHECK(zero.applicable);
  CHECK(zero.min_margin == 1.0);
}

TEST_CASE("broken hypothesis is reported as not applicable") {
  auto p = iteration_params(1.0, 2.0, 1.0, 1.0);
  auto above_y = iteration_lemma_verify(p, 1.01 * p.lambda, 0.25, 40);
  CHECK(!above_y.applicable);
  CHECK(above_y.min_margin < 0.0);
  auto above_z = iteration_lemma_verify(p, p.lambda, 1.01 * 0.25, 40);
  CHECK(!above_z.applicable);
}

TEST_CASE("randomized parameter grid at the hypothesis boundary") {
  std::mt19937_64 rng(20260817);
  std::uniform_real_distribution<double> uc(0.1, 10.0), ub(1.0, 8.0), ue(0.1, 3.0);
  double grid_min = 1.0;
  for (int i = 0; i < 10000; ++i) {
    auto p = iteration_params(uc(rng), ub(rng), ue(rng), ue(rng));
    auto chk = iteration_boundary_verify(p, 60);
    REQUIRE(chk.applicable);
    grid_min = std::min(grid_min, chk.min_margin);
  }
  CHECK(grid_min >= -1e-25);
}

TEST_CASE("saturated recurrence is monotone in the starting point") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uc(0.1, 10.0), ub(1.0, 8.0), ue(0.1, 3.0);
  for (int i = 0; i < 50; ++i) {
    auto p = iteration_params(uc(rng), ub(rng), ue(rng), ue(rng));
    double z0 = 0.6 * std::pow(p.lambda, 1.0 / (1.0 + p.eps));
    auto lo = iteration_lemma_verify(p, 0.3 * p.lambda, z0, 40);
    auto hi = iteration_lemma_verify(p, 0.7 * p.lambda, z0, 40);
    for (std::size_t n = 0; n < lo.margin_y.size(); ++n) {
      CHECK(lo.margin_y[n] >= hi.margin_y[n]);
      CHECK(lo.margin_z[n] >= hi.margin_z[n]);
    }
  }
}

TEST_CASE("level set geometry of the interpolated ramp is exact") {
  Mesh mesh = build_interval_mesh(200);
  Eigen::VectorXd u = nodal_x(mesh);
  double k = 0.31415;
  CHECK(level_measure(mesh, u, k) == doctest::Approx(1.0 - k).epsilon(1e-14));
  CHECK(level_measure(mesh, u, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(truncation_l2sq(mesh, u, k) ==
        doctest::Approx(std::pow(1.0 - k, 3) / 3.0).epsilon(1e-13));
  CHECK(truncation_h1sq(mesh, u, k) == doctest::Approx(1.0 - k).epsilon(1e-12));
  CHECK(boundary_level_measure(mesh, u, 0.5) == 1.0);
  CHECK(boundary_level_measure(mesh, u, -1.0) == 2.0);
  CHECK(boundary_level_measure(mesh, u, 1.5) == 0.0);

  Eigen::VectorXd c = Eigen::VectorXd::Constant(mesh.ndof(), 0.8);
  CHECK(level_measure(mesh, c, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(level_measure(mesh, c, 0.8) == 0.0);
  CHECK(truncation_l2sq(mesh, c, 0.8) == 0.0);
}

TEST_CASE("triangle clipping matches the ramp in two dimensions") {
  Mesh mesh = unit_square(0.15);
  Eigen::VectorXd u = nodal_x(mesh);
  double k = 0.31415;
  CHECK(level_measure(mesh, u, k) == doctest::Approx(1.0 - k).epsilon(1e-12));
  CHECK(truncation_l2sq(mesh, u, k) ==
        doctest::Approx(std::pow(1.0 - k, 3) / 3.0).epsilon(1e-12));
  CHECK(truncation_h1sq(mesh, u, k) == doctest::Approx(1.0 - k).epsilon(1e-12));
  // Boundary of the unit square above the level: two partial sides, the full
  // right side, nothing on the left.
  CHECK(boundary_level_measure(mesh, u, k) == doctest::Approx(3.0 - 2.0 * k).epsilon(1e-12));
  CHECK(domain_measure(mesh) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("layer cake identity for the truncation energy") {
  Mesh mesh = build_interval_mesh(100);
  Eigen::VectorXd u(mesh.ndof());
  for (int i = 0; i < mesh.ndof(); ++i)
    u[i] = std::sin(M_PI * mesh.vertices[i].x);
  double k = 0.3;
  double direct = truncation_l2sq(mesh, u, k);
  double umax = u.maxCoeff();
  int m = 4000;
  double cake = 0.0, prev = 2.0 * 0.0 * level_measure(mesh, u, k);
  for (int j = 1; j <= m; ++j) {
    double s = k + (umax - k) * double(j) / m;
    double cur = 2.0 * (s - k) * level_measure(mesh, u, s);
    cake += 0.5 * (prev + cur) * (umax - k) / m;
    prev = cur;
  }
  CHECK(cake == doctest::Approx(direct).epsilon(1e-3));
}

TEST_CASE("level set scan of the heated bar") {
  Trajectory traj = heated_bar(6.0, 5e-3);
  auto p1 = level_sets(traj, 5.0, 1.0);
  auto p2 = level_sets(traj, 5.5, 1.0);
  auto p3 = level_sets(traj, 6.0, 1.0);
  REQUIRE(p1.times.size() == p2.times.size());
  for (std::size_t i = 0; i < p1.times.size(); ++i) {
    CHECK(p1.vol_measure[i] >= p2.vol_measure[i]);
    CHECK(p2.vol_measure[i] >= p3.vol_measure[i]);
    CHECK(p1.vol_measure[i] <= 1.0 + 1e-12);
    CHECK(p1.bnd_measure[i] <= 2.0 + 1e-12);
  }
  CHECK(p1.q_norm_sq >= p2.q_norm_sq);
  CHECK(p2.q_norm_sq >= p3.q_norm_sq);

  auto beyond = level_sets(traj, 10.0, 1.0);
  CHECK(beyond.q_norm_sq == 0.0);
  for (double a : beyond.vol_measure) CHECK(a == 0.0);

  auto everything = level_sets(traj, -5.0, 1.0);
  CHECK(everything.everything);
  CHECK(everything.vol_measure[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!p2.everything);

  CHECK_THROWS_AS(level_sets(traj, 1.0, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(level_sets(traj, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("truncated energy inequality holds with bounded gamma") {
  Trajectory traj = heated_bar(6.0, 5e-3);
  Signal g = constant_signal([](double x, double) { return x; }, SignalTarget::Boundary);
  double khat = std::pow(6.0, 1.0 / 8.0);

  double gamma_max = 0.0;
  for (double mult : {1.0, 2.0, 4.0}) {
    auto cc = caccioppoli_check(traj, zero_signal(), g, mult * khat, 0.5, 0.25);
    CHECK(cc.khat == doctest::Approx(khat).epsilon(1e-9));
    CHECK(std::isfinite(cc.gamma_required));
    gamma_max = std::max(gamma_max, cc.gamma_required);
  }
  CHECK(gamma_max > 0.0);
  CHECK(gamma_max < 1.0);

  // Window panel: gamma stays bounded as tau and sigma vary.
  for (double tau : {0.25, 0.5, 1.0})
    for (double sigma : {0.1, 0.25, 0.4}) {
      auto cc = caccioppoli_check(traj, zero_signal(), g, 2.0 * khat, tau, sigma);
      CHECK(cc.gamma_required < 1.0);
    }

  // Quadratic homogeneity: doubling u, g and k leaves gamma unchanged.
  auto base = caccioppoli_check(traj, zero_signal(), g, khat, 0.5, 0.25);
  Trajectory doubled = traj;
  for (auto& s : doubled.states) s *= 2.0;
  Signal g2 = constant_signal([](double x, double) { return 2.0 * x; },
                              SignalTarget::Boundary);
  auto scaled = caccioppoli_check(doubled, zero_signal(), g2, 2.0 * khat, 0.5, 0.25);
  CHECK(scaled.gamma_required / base.gamma_required ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("vanishing truncations make the inequality trivial") {
  auto sys = interval_system(50, laplacian());
  Eigen::VectorXd u0 = Eigen::VectorXd::Constant(sys->ndof, 0.3);
  Trajectory traj = solve_parabolic(sys, u0, zero_signal(),
                                    zero_signal(SignalTarget::Boundary), 1.0, 0.01, 1.0);
  auto cc = caccioppoli_check(traj, zero_signal(),
                              zero_signal(SignalTarget::Boundary), 0.5, 0.5, 0.25);
  CHECK(cc.khat == 0.0);
  CHECK(cc.lhs == 0.0);
  CHECK(cc.gamma_required == 0.0);
}

TEST_CASE("caccioppoli check validates its inputs") {
  Trajectory traj = heated_bar(1.0, 0.01);
  Signal g = constant_signal([](double x, double) { return x; }, SignalTarget::Boundary);
  CHECK_THROWS_AS(caccioppoli_check(traj, zero_signal(), g, 2.0, 0.5, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(caccioppoli_check(traj, zero_signal(), g, 2.0, 0.5, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(caccioppoli_check(traj, zero_signal(), g, 0.1, 0.5, 0.25),
                  std::invalid_argument);
  Signal misplaced = constant_signal([](double, double) { return 1.0; },
                                     SignalTarget::Boundary);
  CHECK_THROWS_AS(caccioppoli_check(traj, misplaced, g, 2.0, 0.5, 0.25),
                  std::invalid_argument);

  auto mesh2 = std::make_shared<Mesh>(unit_square(0.4));
  auto sys2 = std::make_shared<AssembledSystem>(assemble(mesh2, laplacian()));
  Trajectory t2 = solve_parabolic(sys2, Eigen::VectorXd::Zero(sys2->ndof),
                                  zero_signal(), zero_signal(SignalTarget::Boundary),
                                  0.1, 0.01, 1.0);
  SupExponents tight;
  tight.r1 = 2.0;
  tight.q1 = 2.0;
  CHECK_THROWS_AS(caccioppoli_check(t2, zero_signal(),
                                    zero_signal(SignalTarget::Boundary), 1.0, 0.05,
                                    0.25, tight),
                  std::invalid_argument);
  SupExponents low_q;
  low_q.q_coeff = 2.0;
  CHECK_THROWS_AS(caccioppoli_check(t2, zero_signal(),
                                    zero_signal(SignalTarget::Boundary), 1.0, 0.05,
                                    0.25, low_q),
                  std::invalid_argument);
}

TEST_CASE("sup norm ratio for a square integrable unbounded datum") {
  int n = 200;
  auto sys = interval_system(n, laplacian());
  Eigen::VectorXd u0(sys->ndof);
  for (int i = 0; i < sys->ndof; ++i) {
    double x = std::max(sys->mesh->vertices[i].x, 0.25 / n);
    u0[i] = std::pow(x, -0.25);
  }
  Trajectory traj = solve_parabolic(sys, u0, zero_signal(),
                                    zero_signal(SignalTarget::Boundary), 1.0, 1e-3, 1.0);
  auto sb = sup_bound_check(traj, zero_signal(), zero_signal(SignalTarget::Boundary));
  // By t = 1/2 the solution has settled near its conserved mean 4/3.
  CHECK(sb.sup_norm == doctest::Approx(4.0 / 3.0).epsilon(0.01));
  CHECK(sb.constant_ratio > 0.0);
  CHECK(sb.constant_ratio < 3.0);
}

TEST_CASE("global sup bound applies from a zero initial datum") {
  auto sys = interval_system(100, laplacian());
  Signal f = bump_signal(0.0, 0.5, [](double, double) { return 1.0; });
  Trajectory traj = solve_parabolic(sys, Eigen::VectorXd::Zero(sys->ndof), f,
                                    zero_signal(SignalTarget::Boundary), 1.0, 1e-3, 1.0);
  auto sb = sup_bound_check(traj, f, zero_signal(SignalTarget::Boundary), {}, true);
  CHECK(sb.sup_norm > 0.0);
  CHECK(sb.constant_ratio > 0.0);
  CHECK(sb.constant_ratio < 10.0);

  Trajectory silent = solve_parabolic(sys, Eigen::VectorXd::Zero(sys->ndof),
                                      zero_signal(), zero_signal(SignalTarget::Boundary),
                                      0.5, 0.01, 1.0);
  auto zero = sup_bound_check(silent, zero_signal(), zero_signal(SignalTarget::Boundary));
  CHECK(zero.sup_norm == 0.0);
  CHECK(zero.constant_ratio == 0.0);
}

TEST_CASE("sup norm ratios stay comparable across scenarios") {
  auto sys = interval_system(100, laplacian());
  std::vector<double> ratios;
  {
    Eigen::VectorXd u0(sys->ndof);
    for (int i = 0; i < sys->ndof; ++i)
      u0[i] = std::cos(M_PI * sys->mesh->vertices[i].x);
    Trajectory t = solve_parabolic(sys, u0, zero_signal(),
                                   zero_signal(SignalTarget::Boundary), 1.0, 1e-3, 1.0);
    ratios.push_back(
        sup_bound_check(t, zero_signal(), zero_signal(SignalTarget::Boundary))
            .constant_ratio);
  }
  {
    Signal f = bump_signal(0.0, 0.5, [](double, double) { return 1.0; });
    Trajectory t = solve_parabolic(sys, Eigen::VectorXd::Zero(sys->ndof), f,
                                   zero_signal(SignalTarget::Boundary), 1.0, 1e-3, 1.0);
    ratios.push_back(
        sup_bound_check(t, f, zero_signal(SignalTarget::Boundary)).constant_ratio);
  }
  {
    Signal g = constant_signal([](double x, double) { return x; }, SignalTarget::Boundary);
    Trajectory t = solve_parabolic(sys, Eigen::VectorXd::Zero(sys->ndof), zero_signal(),
                                   g, 1.0, 1e-3, 1.0);
    ratios.push_back(sup_bound_check(t, zero_signal(), g).constant_ratio);
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  double median = sorted[1];
  for (double r : ratios) {
    CHECK(r > 0.0);
    CHECK(r <= 3.0 * median);
  }
}

TEST_CASE("anisotropic embedding constant for explicit functions") {
  Mesh mesh = build_interval_mesh(64);
  Trajectory constant;
  constant.times = {0.0, 0.5, 1.0, 1.5, 2.0};
  for (int i = 0; i < 5; ++i)
    constant.states.push_back(Eigen::VectorXd::Ones(mesh.ndof()));
  double est = aniso_embedding_estimate(mesh, 8.0, 4.0, {constant});
  double tau = 2.0;
  double exact = std::pow(tau, 1.0 / 8.0) + std::pow(2.0, 0.25) * std::pow(tau, 0.25);
  CHECK(est == doctest::Approx(exact).epsilon(1e-12));

  // A zero sample is excluded from the maximum rather than contributing 0/0.
  Trajectory zero;
  zero.times = constant.times;
  for (int i = 0; i < 5; ++i) zero.states.push_back(Eigen::VectorXd::Zero(mesh.ndof()));
  CHECK(aniso_embedding_estimate(mesh, 8.0, 4.0, {zero, constant}) ==
        doctest::Approx(est).epsilon(1e-14));
  CHECK(aniso_embedding_estimate(mesh, 8.0, 4.0, {zero}) == 0.0);

  CHECK_THROWS_AS(aniso_embedding_estimate(mesh, 8.0, 5.0, {constant}),
                  std::invalid_argument);
  CHECK_THROWS_AS(aniso_embedding_estimate(mesh, 1.5, 4.0, {constant}),
                  std::invalid_argument);
}

TEST_CASE("embedding constant is stable under refinement") {
  double prev = 0.0;
  for (int n : {100, 200}) {
    Mesh mesh = build_interval_mesh(n);
    Trajectory h;
    int steps = 100;
    for (int s = 0; s <= steps; ++s) {
      double t = 0.5 * s / steps;
      h.times.push_back(t);
      Eigen::VectorXd u(mesh.ndof());
      for (int i = 0; i <= n; ++i)
        u[i] = std::exp(-M_PI * M_PI * t) * std::cos(M_PI * double(i) / n);
      h.states.push_back(u);
    }
    double est = aniso_embedding_estimate(mesh, 8.0, 4.0, {h});
    if (prev > 0.0) CHECK(est == doctest::Approx(prev).epsilon(2e-3));
    prev = est;
  }
}

TEST_CASE("embedding on the square uses the derived boundary pair") {
  Mesh mesh = unit_square(0.2);
  Trajectory constant;
  constant.times = {0.0, 1.0, 2.0};
  for (int i = 0; i < 3; ++i)
    constant.states.push_back(Eigen::VectorXd::Ones(mesh.ndof()));
  double est = aniso_embedding_estimate(mesh, 4.0, 4.0, {constant});
  // Volume term tau^{1/4}; boundary term tau^{1/4} |boundary|^{1/2} = 2 tau^{1/4}.
  CHECK(est == doctest::Approx(3.0 * std::pow(2.0, 0.25)).epsilon(1e-9));
}

TEST_CASE("iteration report csv") {
  std::vector<IterationCheck> checks;
  checks.push_back(iteration_boundary_verify(iteration_params(1.0, 2.0, 1.0, 1.0), 30));
  checks.push_back(iteration_boundary_verify(iteration_params(0.5, 3.0, 0.7, 1.3), 30));
  std::string path = "iteration_report_test.csv";
  save_iteration_report(checks, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "c, b, eps, delta, lambda, min_margin, n_max");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
  in.close();
  std::remove(path.c_str());
}
