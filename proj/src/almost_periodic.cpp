#include "robinlab/almost_periodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "robinlab/csv.hpp"

namespace robinlab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_samples(const std::vector<double>& times,
                   const std::vector<Eigen::VectorXd>& samples) {
  if (times.size() != samples.size() || times.size() < 2)
    throw std::invalid_argument("need at least two matching time samples");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("sample times must be strictly increasing");
  for (const auto& s : samples)
    if (s.size() != samples.front().size() || !s.allFinite())
      throw std::invalid_argument("samples must be finite vectors of one size");
}

double rms(const Eigen::VectorXcd& v) {
  return v.size() == 0 ? 0.0 : v.norm() / std::sqrt(double(v.size()));
}

double sup_rms_window(const std::vector<double>& times,
                      const std::vector<Eigen::VectorXd>& samples, double a) {
  double sup = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] >= a)
      sup = std::max(sup, samples[i].norm() / std::sqrt(double(samples[i].size())));
  return sup;
}

double m_dist(const AssembledSystem& sys, const Eigen::VectorXcd& a,
              const Eigen::VectorXcd& b) {
  Eigen::VectorXcd d = a - b;
  return std::sqrt(std::max(0.0, (d.adjoint() * (sys.M * d))(0).real()));
}

double m_cnorm(const AssembledSystem& sys, const Eigen::VectorXcd& a) {
  return std::sqrt(std::max(0.0, (a.adjoint() * (sys.M * a))(0).real()));
}

}  // namespace

CesaroCoefficient cesaro_limit(const std::vector<double>& times,
                               const std::vector<Eigen::VectorXd>& samples,
                               double eta, double T_avg) {
  check_samples(times, samples);
  if (!(T_avg > 0.0)) throw std::invalid_argument("averaging window must be positive");
  double span = times.back() - times.front();
  if (span < T_avg * (1.0 - 1e-12))
    throw std::invalid_argument("samples span less than the averaging window");
  double max_dt = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    max_dt = std::max(max_dt, times[i + 1] - times[i]);
  if (eta != 0.0 && max_dt > 2.0 * kPi / (20.0 * std::abs(eta)) * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "grid spacing " << max_dt << " under-resolves eta = " << eta
        << "; need spacing <= " << 2.0 * kPi / (20.0 * std::abs(eta));
    throw std::invalid_argument(msg.str());
  }

  double b = times.back();
  double a = b - T_avg;
  auto phase = [eta](double s) {
    return std::complex<double>(std::cos(eta * s), -std::sin(eta * s));
  };
  // First sample index strictly inside the window.
  std::size_t i0 = std::upper_bound(times.begin(), times.end(), a) - times.begin();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(samples.front().size());
  double prev_t;
  Eigen::VectorXcd prev_v;
  if (i0 == 0) {
    prev_t = times[0];
    prev_v = phase(prev_t) * samples[0].cast<std::complex<double>>();
    i0 = 1;
  } else {
    // Interpolate the state at the window start.
    double w = (a - times[i0 - 1]) / (times[i0] - times[i0 - 1]);
    Eigen::VectorXd ua = samples[i0 - 1] + w * (samples[i0] - samples[i0 - 1]);
    prev_t = a;
    prev_v = phase(a) * ua.cast<std::complex<double>>();
  }
  for (std::size_t i = i0; i < times.size(); ++i) {
    Eigen::VectorXcd cur = phase(times[i]) * samples[i].cast<std::complex<double>>();
    acc += 0.5 * (times[i] - prev_t) * (prev_v + cur);
    prev_t = times[i];
    prev_v = cur;
  }

  CesaroCoefficient out;
  out.value = acc / T_avg;
  double sup = sup_rms_window(times, samples, a);
  out.trunc_err = 2.0 * sup / (T_avg * std::max(std::abs(eta), 2.0 * kPi / T_avg));
  return out;
}

FrequencySpectrum freq_set(const std::vector<double>& times,
                           const std::vector<Eigen::VectorXd>& samples,
                           const std::vector<double>& candidate_etas,
                           double T_avg, double threshold) {
  if (candidate_etas.empty()) throw std::invalid_argument("no candidate frequencies");
  for (std::size_t i = 0; i < candidate_etas.size(); ++i)
    for (std::size_t j = i + 1; j < candidate_etas.size(); ++j)
      if (std::abs(candidate_etas[i] - candidate_etas[j]) < 1e-12)
        throw std::invalid_argument("candidate frequencies must be pairwise distinct");
  check_samples(times, samples);

  // Worst cross-leakage between candidates (0 counts as always present).
  double sup = sup_rms_window(times, samples, times.back() - T_avg);
  double resolution = 2.0 * kPi / T_avg;
  double floor = 0.0;
  for (double eta : candidate_etas) {
    double gap = std::numeric_limits<double>::infinity();
    for (double other : candidate_etas)
      if (std::abs(other - eta) > 1e-12) gap = std::min(gap, std::abs(other - eta));
    if (std::abs(eta) > 1e-12) gap = std::min(gap, std::abs(eta));  // DC is always present
    if (std::isinf(gap)) gap = resolution;  // lone DC candidate: window resolution
    floor = std::max(floor, 2.0 * sup / (T_avg * gap));
  }
  if (threshold <= floor) {
    std::ostringstream msg;
    msg << "threshold " << threshold << " is at or below the noise floor " << floor;
    throw std::invalid_argument(msg.str());
  }

  FrequencySpectrum spectrum;
  spectrum.T_avg = T_avg;
  spectrum.noise_floor = floor;
  for (double eta : candidate_etas) {
    CesaroCoefficient c = cesaro_limit(times, samples, eta, T_avg);
    if (rms(c.value) > threshold)
      spectrum.entries.push_back({eta, c.value, c.trunc_err});
  }
  return spectrum;
}

Eigen::VectorXcd exact_cesaro_nodal(const Signal& s, const Mesh& mesh, double eta) {
  const std::complex<double> I(0.0, 1.0);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(mesh.vertices.size());
  double tol = 1e-9 * std::max(1.0, std::abs(eta));
  auto matches = [&](double target) { return std::abs(eta - target) <= tol; };
  for (const auto& term : s.terms) {
    std::complex<double> c(0.0, 0.0);
    switch (term.kind) {
      case TimeKind::Constant:
        if (matches(0.0)) c = 1.0;
        break;
      case TimeKind::Cos:
        if (matches(term.eta)) c += 0.5;
        if (matches(-term.eta)) c += 0.5;
        break;
      case TimeKind::Sin:
        if (matches(term.eta)) c += -0.5 * I;
        if (matches(-term.eta)) c += 0.5 * I;
        break;
      case TimeKind::SquareWave: {
        // +-1 wave: sum over odd m of (4 / (pi m)) sin(2 pi m t / period).
        double m = eta * term.period / (2.0 * kPi);
        long mr = std::lround(m);
        if (mr != 0 && std::abs(m - double(mr)) <= 1e-9 * std::max(1.0, std::abs(m)) &&
            (mr % 2 != 0))
          c = -2.0 * I / (kPi * double(mr));
        break;
      }
      case TimeKind::ExpDecay:
      case TimeKind::Bump:
      case TimeKind::Tabulated:
        break;  // mean-vanishing: every Cesàro coefficient is zero
    }
    if (c == std::complex<double>(0.0, 0.0)) continue;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
      out[v] += c * term.profile(mesh.vertices[v].x, mesh.vertices[v].y);
  }
  return out;
}

TransferCheck frequency_transfer_check(std::shared_ptr<const AssembledSystem> sys,
                                       const Eigen::VectorXd& u0, const Signal& f,
                                       const Signal& g, double eta,
                                       const TransferOptions& opt) {
  if (!sys) throw std::invalid_argument("system is null");
  if (check_conservation_condition(*sys) > 1e-8)
    throw std::invalid_argument("system does not satisfy the conservation condition");
  if (check_fixedpoint_condition(*sys) > 1e-8)
    throw std::invalid_argument("constants are not equilibria of the system");

  double T_avg, dt;
  if (eta != 0.0) {
    if (opt.periods < 1 || opt.steps_per_period < 20)
      throw std::invalid_argument("need >= 1 period and >= 20 steps per period");
    double tau = 2.0 * kPi / std::abs(eta);
    T_avg = double(opt.periods) * tau;
    dt = tau / double(opt.steps_per_period);
  } else {
    T_avg = opt.T_avg0;
    dt = opt.dt0;
  }

  // Zero-mean compatibility of the forcing at a spread of sample times.
  const Mesh& mesh = *sys->mesh;
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys->ndof);
  Eigen::VectorXd M1 = sys->M * ones, Mb1 = sys->Mb * ones;
  double check_span = eta != 0.0 ? 2.0 * kPi / std::abs(eta) : T_avg;
  for (int k = 0; k <= 37; ++k) {
    double t = check_span * double(k) / 37.0;
    Eigen::VectorXd fn = nodal_values(f, mesh, t), gn = nodal_values(g, mesh, t);
    double total = M1.dot(fn) + Mb1.dot(gn);
    double scale = std::max({1.0, fn.lpNorm<Eigen::Infinity>(), gn.lpNorm<Eigen::Infinity>()});
    if (std::abs(total) > 1e-8 * scale)
      throw std::invalid_argument("forcing violates the zero-mean compatibility");
  }

  Trajectory traj = solve_parabolic(sys, u0, f, g, opt.settle + T_avg, dt, 0.5);

  TransferCheck out;
  out.T_avg = T_avg;
  CesaroCoefficient tail = cesaro_limit(traj.times, traj.states, eta, T_avg);
  out.lhs = tail.value;

  Eigen::VectorXcd cf = exact_cesaro_nodal(f, mesh, eta);
  Eigen::VectorXcd cg = exact_cesaro_nodal(g, mesh, eta);
  if (f.terms.empty()) cf = Eigen::VectorXcd::Zero(sys->ndof);
  if (g.terms.empty()) cg = Eigen::VectorXcd::Zero(sys->ndof);
  if (eta != 0.0) {
    out.rhs = solve_oscillatory_resolvent(*sys, eta, cf, cg);
  } else {
    Eigen::VectorXd rhs_dual = sys->M * cf.real() + sys->Mb * cg.real();
    Eigen::VectorXd w = solve_zero_mean_stationary(*sys, rhs_dual);
    double mean0 = M1.dot(u0) / M1.dot(ones);
    out.rhs = (w + mean0 * ones).cast<std::complex<double>>();
  }

  double den = m_cnorm(*sys, out.rhs);
  out.deviation = m_dist(*sys, out.lhs, out.rhs) / std::max(den, 1e-300);

  // Leakage certificate: distance from eta to the frequencies that are
  // actually present (0 is present through the initial mean).
  std::vector<double> present = frequencies(f);
  for (double p : frequencies(g)) present.push_back(p);
  present.push_back(0.0);
  double gap = std::numeric_limits<double>::infinity();
  for (double p : present)
    if (std::abs(p - eta) > 1e-9) gap = std::min(gap, std::abs(p - eta));
  if (std::isinf(gap)) gap = std::max(std::abs(eta), 2.0 * kPi / T_avg);
  gap = std::max(gap, 2.0 * kPi / T_avg);
  double sup_m = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    if (traj.times[i] >= traj.times.back() - T_avg)
      sup_m = std::max(sup_m, l2_norm(*sys, traj.states[i]));
  out.noise_floor = 4.0 * sup_m / (T_avg * gap);
  return out;
}

PeriodicityProfile asymptotic_periodicity_check(const Trajectory& traj, double tau) {
  if (!traj.system || traj.times.size() < 2)
    throw std::invalid_argument("trajectory is empty");
  if (!(tau > 0.0)) throw std::invalid_argument("period must be positive");
  double horizon = traj.times.back() - traj.times.front();
  if (horizon < 10.0 * tau * (1.0 - 1e-12))
    throw std::invalid_argument("trajectory horizon must reach 10 periods");
  long k = std::lround(tau / traj.dt);
  if (k < 1 || std::abs(double(k) * traj.dt - tau) > 1e-9 * std::max(1.0, tau))
    throw std::invalid_argument("period must align with the trajectory step");

  PeriodicityProfile out;
  std::size_t n = traj.states.size();
  for (std::size_t i = 0; i + std::size_t(k) < n; ++i) {
    Eigen::VectorXd d = traj.states[i + std::size_t(k)] - traj.states[i];
    out.times.push_back(traj.times[i]);
    out.d_l2.push_back(l2_norm(*traj.system, d));
    out.d_max.push_back(d.lpNorm<Eigen::Infinity>());
  }
  out.final_l2 = out.d_l2.back();
  out.final_max = out.d_max.back();
  return out;
}

void save_spectrum(const FrequencySpectrum& spectrum, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"eta", "re_norm", "im_norm", "trunc_err"});
  for (const auto& e : spectrum.entries) {
    double n = std::sqrt(double(std::max<Eigen::Index>(e.coefficient.size(), 1)));
    csv.row({e.eta, e.coefficient.real().norm() / n, e.coefficient.imag().norm() / n,
             e.trunc_err});
  }
}

}  // namespace robinlab
