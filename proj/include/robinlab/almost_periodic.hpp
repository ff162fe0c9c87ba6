#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "robinlab/solver.hpp"

namespace robinlab {

// One Cesàro coefficient (1/T) int e^{-i eta s} f(s) ds over the final window
// of length T_avg, with the character-orthogonality truncation estimate.
struct CesaroCoefficient {
  Eigen::VectorXcd value;
  double trunc_err = 0.0;
};

// Samples must resolve the oscillation 2 pi / |eta| by at least 20 points and
// span at least T_avg. The phase uses absolute sample times.
CesaroCoefficient cesaro_limit(const std::vector<double>& times,
                               const std::vector<Eigen::VectorXd>& samples,
                               double eta, double T_avg);

struct SpectrumEntry {
  double eta = 0.0;
  Eigen::VectorXcd coefficient;
  double trunc_err = 0.0;
};

struct FrequencySpectrum {
  std::vector<SpectrumEntry> entries;
  double T_avg = 0.0;
  double noise_floor = 0.0;  // worst cross-leakage bound over the candidates
};

// Keeps the candidates whose coefficient RMS norm (|c|_2 / sqrt(n)) exceeds
// the threshold. The threshold must sit above the noise floor, which is the
// largest leakage bound 2 sup|f| / (T_avg gap) over candidate pairs (0 counts
// as always present).
FrequencySpectrum freq_set(const std::vector<double>& times,
                           const std::vector<Eigen::VectorXd>& samples,
                           const std::vector<double>& candidate_etas,
                           double T_avg, double threshold);

// Exact Cesàro coefficient of a signal at frequency eta, as the complex
// amplitude interpolated at the mesh vertices. Trig and constant terms hit
// their matching frequencies, square waves their odd harmonics; decaying,
// bump, and tabulated terms average to zero.
Eigen::VectorXcd exact_cesaro_nodal(const Signal& s, const Mesh& mesh, double eta);

struct TransferOptions {
  int periods = 200;           // averaging horizon in forcing periods (eta != 0)
  int steps_per_period = 100;  // time steps per forcing period
  double settle = 10.0;        // burn-in before the averaging window
  double T_avg0 = 50.0;        // averaging horizon when eta = 0
  double dt0 = 0.01;           // time step when eta = 0
};

struct TransferCheck {
  Eigen::VectorXcd lhs;      // Cesàro average of the trajectory tail
  Eigen::VectorXcd rhs;      // (i eta M + K) solve; zero-mean solve plus the
                             // conserved initial mean at eta = 0
  double deviation = 0.0;    // ||lhs - rhs||_M / ||rhs||_M
  double noise_floor = 0.0;  // leakage scale certifying absent frequencies
  double T_avg = 0.0;
};

// Runs the theta = 1/2 scheme to settle + T_avg and compares the tail Cesàro
// average against one resolvent solve fed with the exact forcing coefficients.
// Requires a conservative system with the fixed-point property and forcing
// with int_Omega f(t) + int_bdry g(t) = 0 at all times.
TransferCheck frequency_transfer_check(std::shared_ptr<const AssembledSystem> sys,
                                       const Eigen::VectorXd& u0, const Signal& f,
                                       const Signal& g, double eta,
                                       const TransferOptions& opt = {});

struct PeriodicityProfile {
  std::vector<double> times;  // t where d(t) is defined (t + tau on the grid)
  std::vector<double> d_l2;   // ||u(t+tau) - u(t)||_{L2}
  std::vector<double> d_max;  // nodal max norm of the same difference
  double final_l2 = 0.0;
  double final_max = 0.0;
};

// tau must be a grid-aligned period and the trajectory must span >= 10 tau.
PeriodicityProfile asymptotic_periodicity_check(const Trajectory& traj, double tau);

// CSV "eta, re_norm, im_norm, trunc_err" (RMS norms of the two parts).
void save_spectrum(const FrequencySpectrum& spectrum, const std::string& path);

}  // namespace robinlab
