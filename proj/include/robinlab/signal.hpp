#pragma once

#include <Eigen/Dense>
#include <vector>

#include "robinlab/expression.hpp"
#include "robinlab/mesh.hpp"

namespace robinlab {

// Time factor of one additive term of a forcing signal.
enum class TimeKind { Constant, Cos, Sin, ExpDecay, Bump, SquareWave, Tabulated };

enum class SignalTarget { Volume, Boundary };

struct SignalTerm {
  TimeKind kind = TimeKind::Constant;
  ScalarField profile;  // spatial part, evaluated at mesh nodes
  double eta = 0.0;     // Cos/Sin angular frequency
  double rate = 0.0;    // ExpDecay exponent: e^{-rate t}
  double t0 = 0.0;      // Bump support [t0, t1)
  double t1 = 0.0;
  double period = 0.0;  // SquareWave: +1 on [0, p/2), -1 on [p/2, p)
  std::vector<double> times;   // Tabulated: strictly increasing grid
  std::vector<double> values;  // Tabulated: linear interpolation, 0 outside
};

// Finite sum of separable terms. Empty terms = the zero signal.
struct Signal {
  std::vector<SignalTerm> terms;
  SignalTarget target = SignalTarget::Volume;
};

double time_factor(const SignalTerm& term, double t);
double eval(const Signal& s, double t, double x, double y);

// Values at every mesh vertex at time t (the nodal interpolant).
Eigen::VectorXd nodal_values(const Signal& s, const Mesh& mesh, double t);

// Distinct angular frequencies carried by trig terms (both signs) and 0 for
// constant terms. Decaying, bump, and tabulated terms contribute none; a
// square wave carries infinitely many odd harmonics and is deliberately left
// out, so callers must pick candidates themselves.
std::vector<double> frequencies(const Signal& s);

Signal zero_signal(SignalTarget target = SignalTarget::Volume);
Signal constant_signal(ScalarField profile, SignalTarget target = SignalTarget::Volume);
Signal trig_signal(double eta, ScalarField profile, bool sine = false,
                   SignalTarget target = SignalTarget::Volume);
Signal decay_signal(double rate, ScalarField profile, SignalTarget target = SignalTarget::Volume);
Signal bump_signal(double t0, double t1, ScalarField profile,
                   SignalTarget target = SignalTarget::Volume);
Signal square_wave_signal(double period, ScalarField profile,
                          SignalTarget target = SignalTarget::Boundary);
Signal sum(const Signal& a, const Signal& b);

// (int |f(t,.)|^q)^{1/q} over the domain or the boundary at each time,
// by quadrature of the given order on the signal itself (not its interpolant).
std::vector<double> lq_volume_profile(const Signal& s, const Mesh& mesh, double q,
                                      const std::vector<double>& times, int quad_order = 4);
std::vector<double> lq_boundary_profile(const Signal& s, const Mesh& mesh, double q,
                                        const std::vector<double>& times, int quad_order = 4);

}  // namespace robinlab
