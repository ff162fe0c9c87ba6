#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "robinlab/almost_periodic.hpp"
#include "robinlab/coefficients.hpp"
#include "robinlab/solver.hpp"

using namespace robinlab;

namespace {

constexpr double kPi = std::numbers::pi;

struct Sampled {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
};

template <typename F>
Sampled sample_vector(F fn, const Eigen::VectorXd& x0, double t1, double dt) {
  Sampled s;
  int n = int(std::lround(t1 / dt));
  for (int i = 0; i <= n; ++i) {
    double t = t1 * double(i) / double(n);
    s.times.push_back(t);
    s.states.push_back(fn(t) * x0);
  }
  return s;
}

std::shared_ptr<const AssembledSystem> interval_system(int n, const CoefficientSet& c) {
  auto mesh = std::make_shared<Mesh>(build_interval_mesh(n));
  return std::make_shared<AssembledSystem>(assemble(mesh, c));
}

double cos_pi_x(double x, double) { return std::cos(kPi * x); }

Eigen::VectorXd nodal(const Mesh& mesh, double (*fn)(double, double)) {
  Eigen::VectorXd u(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    u[i] = fn(mesh.vertices[i].x, mesh.vertices[i].y);
  return u;
}

}  // namespace

TEST_CASE("cesaro limits of elementary signals") {
  Eigen::VectorXd x0(3);
  x0 << 1.0, -0.4, 2.2;

  auto constant = sample_vector([](double) { return 1.0; }, x0, 120.0, 0.02);
  auto c0 = cesaro_limit(constant.times, constant.states, 0.0, 100.0);
  CHECK((c0.value.real() - x0).norm() < 1e-10);
  CHECK(c0.value.imag().norm() < 1e-10);

  auto c2 = cesaro_limit(constant.times, constant.states, 2.0, 100.0);
  CHECK(c2.value.norm() <= 2.0 * x0.norm() / (2.0 * 100.0) + 1e-3 * x0.norm());
  CHECK(c2.value.norm() / std::sqrt(3.0) <= c2.trunc_err * 1.05 + 1e-6);

  auto wave = sample_vector([](double t) { return std::cos(3.0 * t); }, x0, 120.0, 0.02);
  auto c3 = cesaro_limit(wave.times, wave.states, 3.0, 100.0);
  CHECK((c3.value - 0.5 * x0.cast<std::complex<double>>()).norm() < 3e-3 * x0.norm());
  auto c3m = cesaro_limit(wave.times, wave.states, -3.0, 100.0);
  CHECK((c3m.value - c3.value.conjugate()).norm() < 1e-12 * x0.norm());

  // Linearity is exact: the quadrature is linear in the samples.
  Sampled mix = constant;
  for (std::size_t i = 0; i < mix.states.size(); ++i) mix.states[i] += wave.states[i];
  auto cmix = cesaro_limit(mix.times, mix.states, 3.0, 100.0);
  auto cconst3 = cesaro_limit(constant.times, constant.states, 3.0, 100.0);
  CHECK((cmix.value - cconst3.value - c3.value).norm() < 1e-12 * x0.norm());
}

TEST_CASE("cesaro rejects bad grids and windows") {
  Eigen::VectorXd x0 = Eigen::VectorXd::Ones(1);
  auto coarse = sample_vector([](double t) { return std::cos(3.0 * t); }, x0, 120.0, 0.21);
  CHECK_THROWS_AS(cesaro_limit(coarse.times, coarse.states, 3.0, 100.0),
                  std::invalid_argument);
  auto fine = sample_vector([](double t) { return std::cos(3.0 * t); }, x0, 120.0, 0.02);
  CHECK_THROWS_AS(cesaro_limit(fine.times, fine.states, 3.0, 200.0), std::invalid_argument);
  CHECK_THROWS_AS(cesaro_limit(fine.times, fine.states, 3.0, -1.0), std::invalid_argument);
  auto broken = fine;
  std::swap(broken.times[5], broken.times[6]);
  CHECK_THROWS_AS(cesaro_limit(broken.times, broken.states, 3.0, 100.0),
                  std::invalid_argument);
}

TEST_CASE("character orthogonality bound") {
  Eigen::VectorXd x0 = Eigen::VectorXd::Ones(1);
  auto wave = sample_vector([](double t) { return std::cos(2.0 * t); }, x0, 120.0, 0.01);
  for (double eta : {2.5, 3.0, 4.0, 7.0}) {
    auto c = cesaro_limit(wave.times, wave.states, eta, 100.0);
    CHECK(c.value.norm() <= 2.0 / (std::abs(eta - 2.0) * 100.0) + 5e-4);
  }
}

TEST_CASE("frequency sets of constructed signals") {
  Eigen::VectorXd x0 = Eigen::VectorXd::Ones(2);
  std::vector<double> cands = {0.0, 2.0, -2.0, 3.0, -3.0};

  auto pure = sample_vector([](double t) { return std::cos(2.0 * t); }, x0, 320.0, 0.02);
  auto spec = freq_set(pure.times, pure.states, cands, 100.0 * kPi, 0.05);
  REQUIRE(spec.entries.size() == 2);
  CHECK(std::abs(spec.entries[0].eta) == 2.0);
  CHECK(std::abs(spec.entries[1].eta) == 2.0);
  CHECK(spec.entries[0].eta == -spec.entries[1].eta);
  for (const auto& e : spec.entries)
    CHECK(e.coefficient.norm() / std::sqrt(2.0) == doctest::Approx(0.5).epsilon(0.02));
  CHECK(spec.noise_floor < 0.05);

  auto biased = sample_vector([](double t) { return 0.7 + std::cos(2.0 * t); }, x0,
                              320.0, 0.02);
  auto bspec = freq_set(biased.times, biased.states, cands, 100.0 * kPi, 0.05);
  REQUIRE(bspec.entries.size() == 3);
  bool has_zero = false;
  for (const auto& e : bspec.entries)
    if (e.eta == 0.0) {
      has_zero = true;
      CHECK(e.coefficient.real()(0) == doctest::Approx(0.7).epsilon(1e-3));
    }
  CHECK(has_zero);

  auto zero = sample_vector([](double) { return 0.0; }, x0, 320.0, 0.02);
  auto zspec = freq_set(zero.times, zero.states, cands, 100.0 * kPi, 0.05);
  CHECK(zspec.entries.empty());

  double r2 = std::sqrt(2.0);
  auto almost = sample_vector(
      [r2](double t) { return std::sin(t) + std::sin(r2 * t); }, x0, 410.0, 0.05);
  std::vector<double> acands = {0.0, 1.0, -1.0, r2, -r2};
  auto aspec = freq_set(almost.times, almost.states, acands, 400.0, 0.1);
  CHECK(aspec.entries.size() == 4);
  for (const auto& e : aspec.entries) {
    CHECK(e.eta != 0.0);
    CHECK(e.coefficient.norm() / std::sqrt(2.0) == doctest::Approx(0.5).epsilon(0.05));
  }

  CHECK_THROWS_AS(freq_set(pure.times, pure.states, cands, 100.0 * kPi, 1e-4),
                  std::invalid_argument);
  CHECK_THROWS_AS(freq_set(pure.times, pure.states, {2.0, 2.0}, 100.0 * kPi, 0.05),
                  std::invalid_argument);
}

TEST_CASE("square wave harmonics match the Fourier series") {
  auto mesh = std::make_shared<Mesh>(build_interval_mesh(4));
  Signal sq = square_wave_signal(1.0, [](double, double) { return 1.0; });
  const std::complex<double> I(0.0, 1.0);
  for (int m : {1, 3, -1}) {
    auto c = exact_cesaro_nodal(sq, *mesh, 2.0 * kPi * m);
    CHECK(std::abs(c(0) - (-2.0 * I / (kPi * double(m)))) < 1e-12);
  }
  CHECK(exact_cesaro_nodal(sq, *mesh, 4.0 * kPi).norm() == 0.0);  // even harmonic
  CHECK(exact_cesaro_nodal(sq, *mesh, 7.0).norm() == 0.0);        // non-harmonic
  CHECK(exact_cesaro_nodal(sq, *mesh, 0.0).norm() == 0.0);        // symmetric wave

  Signal dec = decay_signal(1.0, [](double, double) { return 1.0; });
  CHECK(exact_cesaro_nodal(dec, *mesh, 0.0).norm() == 0.0);
  CHECK(exact_cesaro_nodal(dec, *mesh, 1.0).norm() == 0.0);

  // Numerical Cesàro average of the sampled wave agrees with the third harmonic.
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  SignalTerm term = sq.terms[0];
  auto wave = sample_vector([&term](double t) { return time_factor(term, t); }, one,
                            110.0, 0.001);
  auto c3 = cesaro_limit(wave.times, wave.states, 6.0 * kPi, 100.0);
  CHECK(std::abs(c3.value(0) - (-2.0 * I / (3.0 * kPi))) < 0.02 * 2.0 / (3.0 * kPi));
}

TEST_CASE("frequency transfer at the forcing frequency") {
  auto sys = interval_system(100, laplacian());
  Signal f = trig_signal(2.0, cos_pi_x);
  TransferOptions opt;
  opt.periods = 50;
  opt.steps_per_period = 100;
  opt.settle = 5.0;
  auto check = frequency_transfer_check(sys, nodal(*sys->mesh, cos_pi_x), f,
                                        zero_signal(SignalTarget::Boundary), 2.0, opt);
  CHECK(check.deviation < 0.02);
  double rhs_norm = std::sqrt(
      std::abs((check.rhs.adjoint() * (sys->M * check.rhs))(0).real()));
  CHECK(rhs_norm > 0.01);
}

TEST_CASE("absent frequencies stay below the noise floor") {
  auto sys = interval_system(100, laplacian());
  Signal f = trig_signal(2.0, cos_pi_x);
  TransferOptions opt;
  opt.periods = 50;
  opt.steps_per_period = 200;
  opt.settle = 5.0;
  auto check = frequency_transfer_check(sys, nodal(*sys->mesh, cos_pi_x), f,
                                        zero_signal(SignalTarget::Boundary), 5.0, opt);
  double lhs_norm = std::sqrt(
      std::abs((check.lhs.adjoint() * (sys->M * check.lhs))(0).real()));
  CHECK(lhs_norm < check.noise_floor);
  CHECK(check.noise_floor < 0.01);
}

TEST_CASE("zero frequency recovers the conserved initial mean") {
  auto sys = interval_system(100, laplacian());
  Signal f = trig_signal(2.0, cos_pi_x);
  TransferOptions opt;
  opt.settle = 5.0;

  Eigen::VectorXd with_mean =
      nodal(*sys->mesh, [](double x, double) { return 0.3 + std::cos(kPi * x); });
  auto check = frequency_transfer_check(sys, with_mean, f,
                                        zero_signal(SignalTarget::Boundary), 0.0, opt);
  CHECK(check.deviation < 0.02);
  CHECK(check.rhs.real().maxCoeff() == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(check.rhs.real().minCoeff() == doctest::Approx(0.3).epsilon(1e-6));

  auto zero_mean = frequency_transfer_check(sys, nodal(*sys->mesh, cos_pi_x), f,
                                            zero_signal(SignalTarget::Boundary), 0.0, opt);
  double lhs_norm = std::sqrt(
      std::abs((zero_mean.lhs.adjoint() * (sys->M * zero_mean.lhs))(0).real()));
  double rhs_norm = std::sqrt(
      std::abs((zero_mean.rhs.adjoint() * (sys->M * zero_mean.rhs))(0).real()));
  CHECK(rhs_norm < 1e-10);
  CHECK(lhs_norm < zero_mean.noise_floor);
}

TEST_CASE("transfer deviation shrinks under refinement") {
  Signal f = trig_signal(2.0, cos_pi_x);
  std::vector<double> devs;
  int ns[3] = {50, 100, 200};
  int spps[3] = {25, 50, 100};
  int pers[3] = {12, 25, 50};
  for (int lvl = 0; lvl < 3; ++lvl) {
    auto sys = interval_system(ns[lvl], laplacian());
    TransferOptions opt;
    opt.periods = pers[lvl];
    opt.steps_per_period = spps[lvl];
    opt.settle = 5.0;
    auto check = frequency_transfer_check(sys, nodal(*sys->mesh, cos_pi_x), f,
                                          zero_signal(SignalTarget::Boundary), 2.0, opt);
    devs.push_back(check.deviation);
  }
  CHECK(devs[0] > devs[1]);
  CHECK(devs[1] > devs[2]);
  CHECK(devs[2] < 0.002);
}

TEST_CASE("transfer rejects incompatible inputs") {
  auto sys = interval_system(50, laplacian());
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(sys->ndof);
  TransferOptions opt;
  opt.periods = 1;
  opt.settle = 0.1;

  Signal bad_f = constant_signal([](double, double) { return 1.0; });
  CHECK_THROWS_AS(frequency_transfer_check(sys, u0, bad_f,
                                           zero_signal(SignalTarget::Boundary), 2.0, opt),
                  std::invalid_argument);

  Signal bad_g = square_wave_signal(1.0, [](double, double) { return 1.0; });
  CHECK_THROWS_AS(frequency_transfer_check(sys, u0, zero_signal(), bad_g, 2.0 * kPi, opt),
                  std::invalid_argument);

  auto nonconservative = interval_system(50, reaction(1.0));
  Signal f = trig_signal(2.0, cos_pi_x);
  CHECK_THROWS_AS(frequency_transfer_check(nonconservative, u0, f,
                                           zero_signal(SignalTarget::Boundary), 2.0, opt),
                  std::invalid_argument);
}

TEST_CASE("square wave boundary forcing settles on a periodic orbit") {
  auto sys = interval_system(200, laplacian());
  Signal g = square_wave_signal(1.0, [](double x, double) { return 1.0 - 2.0 * x; });
  Eigen::VectorXd u0 =
      nodal(*sys->mesh, [](double x, double) { return 0.2 + 0.5 * std::cos(2.0 * kPi * x); });
  Trajectory traj = solve_parabolic(sys, u0, zero_signal(), g, 11.0, 1.0 / 200.0, 1.0);
  auto prof = asymptotic_periodicity_check(traj, 1.0);
  CHECK(prof.final_l2 < 1e-4);
  CHECK(prof.final_max < 1e-4);
  // Envelope decay at period boundaries until the roundoff floor.
  for (int n = 1; n <= 10; ++n) {
    double prev = prof.d_l2[std::size_t(200 * (n - 1))];
    double cur = n < 10 ? prof.d_l2[std::size_t(200 * n)] : prof.final_l2;
    CHECK((cur < prev || prev < 1e-11));
  }
}

TEST_CASE("free decay is trivially periodic in the limit") {
  auto sys = interval_system(100, laplacian());
  Trajectory traj = solve_parabolic(sys, nodal(*sys->mesh, cos_pi_x), zero_signal(),
                                    zero_signal(SignalTarget::Boundary), 11.0, 0.01, 1.0);
  auto prof = asymptotic_periodicity_check(traj, 1.0);
  CHECK(prof.final_l2 < 1e-10);
  CHECK(prof.final_max < 1e-10);
}

TEST_CASE("irrational frequency ratios defeat any single period") {
  auto sys = interval_system(100, laplacian());
  Signal f = sum(trig_signal(1.0, cos_pi_x), trig_signal(std::sqrt(2.0), cos_pi_x));
  double tau = 2.0 * kPi;
  Trajectory traj = solve_parabolic(sys, Eigen::VectorXd::Zero(sys->ndof), f,
                                    zero_signal(SignalTarget::Boundary), 13.0 * tau,
                                    tau / 200.0, 1.0);
  auto prof = asymptotic_periodicity_check(traj, tau);
  CHECK(prof.final_l2 > 1e-2);
}

TEST_CASE("periodicity check validates trajectory and period") {
  auto sys = interval_system(50, laplacian());
  Trajectory traj = solve_parabolic(sys, Eigen::VectorXd::Zero(sys->ndof), zero_signal(),
                                    zero_signal(SignalTarget::Boundary), 2.0, 0.01, 1.0);
  CHECK_THROWS_AS(asymptotic_periodicity_check(traj, 1.0), std::invalid_argument);
  Trajectory longer = solve_parabolic(sys, Eigen::VectorXd::Zero(sys->ndof), zero_signal(),
                                      zero_signal(SignalTarget::Boundary), 11.0, 0.01, 1.0);
  CHECK_THROWS_AS(asymptotic_periodicity_check(longer, 1.0005), std::invalid_argument);
  CHECK_THROWS_AS(asymptotic_periodicity_check(Trajectory{}, 1.0), std::invalid_argument);
}

TEST_CASE("spectrum csv export") {
  Eigen::VectorXd x0 = Eigen::VectorXd::Ones(2);
  auto pure = sample_vector([](double t) { return std::cos(2.0 * t); }, x0, 320.0, 0.02);
  auto spec = freq_set(pure.times, pure.states, {0.0, 2.0, -2.0}, 100.0 * kPi, 0.05);
  std::string path = "spectrum_test.csv";
  save_spectrum(spec, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "eta, re_norm, im_norm, trunc_err");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == int(spec.entries.size()));
  in.close();
  std::remove(path.c_str());
}
