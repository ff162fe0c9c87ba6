#pragma once

#include <functional>
#include <string>
#include <vector>

namespace robinlab {

// Scalar time profile t -> ||f(t)||_{L^q}, sampled on a strictly increasing
// grid. The samples define the signal on [times.front(), times.back()]; the
// window quadrature treats anything outside that range as unknown.
struct NormSamples {
  std::vector<double> times;
  std::vector<double> values;  // nonnegative
  double q = 2.0;              // spatial exponent the values were computed with
  std::string source;          // identity tag; profiles compare only within one source
};

// Windowed running norm R(t) = (int_t^{t+T} ||f(s)||^r ds)^{1/r}.
struct RunningNormProfile {
  double r = 1.0;
  double q = 2.0;
  double T = 1.0;
  std::vector<double> times;
  std::vector<double> values;
  bool truncated = false;  // some window ran past the sampled extent
  std::string source;
  // Raw source samples. Convolution checks integrate ||f(s)||^r from these,
  // not from the windowed values.
  std::vector<double> raw_times;
  std::vector<double> raw_values;
};

// Requires r >= 1, T > 0, source spacing <= T/10, strictly increasing grids.
RunningNormProfile running_norm(const NormSamples& src, double r, double T,
                                const std::vector<double>& grid);

// sup of the windowed samples.
double m_norm(const RunningNormProfile& profile);

// True when every sample at t >= t_tail stays below tol. The profile must
// reach t_tail.
bool is_m0(const RunningNormProfile& profile, double tol, double t_tail);

struct WindowEquivalence {
  double ratio;  // m-norm with the larger window over m-norm with the smaller
  double bound;  // ceil(T_large / T_small)
  bool within;   // ratio <= bound
};

// Both profiles must come from the same source with the same r and q.
WindowEquivalence window_equivalence_ratio(const RunningNormProfile& a,
                                           const RunningNormProfile& b);

// Nonincreasing integrable kernel on [0, inf) with certified norms.
struct Kernel {
  std::function<double(double)> h;
  double l1;    // ||h||_1
  double linf;  // ||h||_inf
};

struct ConvolutionBound {
  std::vector<double> times;
  std::vector<double> lhs;  // int_0^t h(t-s) ||f(s)||^r ds
  double rhs;               // (||h||_inf + (2/T) ||h||_1) * m_norm^r
  bool holds;
};

// Rejects kernels that increase anywhere on [0, max t_grid].
ConvolutionBound convolution_bound_check(const RunningNormProfile& profile,
                                         const Kernel& kernel,
                                         const std::vector<double>& t_grid);

struct ConvolutionDecay {
  bool applicable;  // profile passed is_m0(tol, t_tail)
  bool decays;      // convolution samples at t >= t_tail all below tol
  double tail_max;  // largest convolution sample at t >= t_tail
};

// Evaluates the convolution on the profile's own grid. A profile that is not
// mean-vanishing is reported as not applicable rather than rejected.
ConvolutionDecay convolution_decay_check(const RunningNormProfile& profile,
                                         const Kernel& kernel, double tol,
                                         double t_tail);

// Constant in ||f||_{m;r_lo,q_lo} <= C ||f||_{m;r_hi,q_hi} on a domain of
// finite measure: C = T^{1/r_lo - 1/r_hi} * measure^{1/q_lo - 1/q_hi}.
double embedding_constant(double r_hi, double r_lo, double q_hi, double q_lo,
                          double T, double domain_measure);

// Two-column CSV "t, R".
void save_profile(const RunningNormProfile& profile, const std::string& path);

}  // namespace robinlab
