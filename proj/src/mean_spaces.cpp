#include "robinlab/mean_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "robinlab/csv.hpp"

namespace robinlab {

namespace {

void check_grid(const std::vector<double>& t, const char* what) {
  if (t.empty()) throw std::invalid_argument(std::string(what) + " is empty");
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    if (!(t[i] < t[i + 1]))
      throw std::invalid_argument(std::string(what) + " is not strictly increasing");
  for (double v : t)
    if (!std::isfinite(v))
      throw std::invalid_argument(std::string(what) + " has a non-finite entry");
}

double lerp(const std::vector<double>& t, const std::vector<double>& v, double x) {
  if (x <= t.front()) return v.front();
  if (x >= t.back()) return v.back();
  auto it = std::upper_bound(t.begin(), t.end(), x);
  std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
  double w = (x - t[i]) / (t[i + 1] - t[i]);
  return v[i] + w * (v[i + 1] - v[i]);
}

// Piecewise-linear integrand on a fine grid. Window integrals accumulate the
// trapezoid cells directly: every term is nonnegative, so exponentially small
// windows keep full relative accuracy (a global prefix sum would cancel them
// to zero).
struct Integrand {
  std::vector<double> s;
  std::vector<double> val;

  double at(double x) const {
    if (x <= s.front()) return val.front();
    if (x >= s.back()) return val.back();
    auto it = std::upper_bound(s.begin(), s.end(), x);
    std::size_t i = static_cast<std::size_t>(it - s.begin()) - 1;
    double w = (x - s[i]) / (s[i + 1] - s[i]);
    return val[i] + w * (val[i + 1] - val[i]);
  }

  double integral(double a, double b) const {
    a = std::max(a, s.front());
    b = std::min(b, s.back());
    if (b <= a) return 0.0;
    auto it = std::upper_bound(s.begin(), s.end(), a);
    std::size_t i = static_cast<std::size_t>(it - s.begin());  // first node > a
    double acc = 0.0, prev_s = a, prev_v = at(a);
    for (; i < s.size() && s[i] <= b; ++i) {
      acc += 0.5 * (s[i] - prev_s) * (val[i] + prev_v);
      prev_s = s[i];
      prev_v = val[i];
    }
    if (b > prev_s) acc += 0.5 * (b - prev_s) * (at(b) + prev_v);
    return acc;
  }
};

// Union of the source nodes and a uniform grid with the requested step.
Integrand build_integrand(const std::vector<double>& src_t,
                          const std::vector<double>& src_v, double r,
                          double step) {
  double t0 = src_t.front(), t1 = src_t.back();
  std::vector<double> nodes = src_t;
  long n_uniform = std::lround(std::ceil((t1 - t0) / step));
  for (long k = 1; k < n_uniform; ++k) nodes.push_back(t0 + (t1 - t0) * double(k) / double(n_uniform));
  std::sort(nodes.begin(), nodes.end());
  double merge_tol = 1e-12 * std::max(1.0, t1 - t0);
  Integrand out;
  out.s.reserve(nodes.size());
  for (double x : nodes)
    if (out.s.empty() || x - out.s.back() > merge_tol) out.s.push_back(x);
  out.val.resize(out.s.size());
  for (std::size_t i = 0; i < out.s.size(); ++i)
    out.val[i] = std::pow(std::max(0.0, lerp(src_t, src_v, out.s[i])), r);
  return out;
}

void check_kernel(const Kernel& kernel, double t_max) {
  if (!kernel.h) throw std::invalid_argument("kernel callable is empty");
  if (!(kernel.l1 >= 0.0) || !(kernel.linf >= 0.0))
    throw std::invalid_argument("kernel norms must be nonnegative");
  int n = 2000;
  double prev = kernel.h(0.0);
  if (!(prev <= kernel.linf * (1.0 + 1e-9) + 1e-12))
    throw std::invalid_argument("kernel exceeds its certified sup norm at 0");
  for (int i = 1; i <= n; ++i) {
    double s = t_max * double(i) / double(n);
    double hs = kernel.h(s);
    if (!std::isfinite(hs) || hs < -1e-12)
      throw std::invalid_argument("kernel must be finite and nonnegative");
    if (hs > prev + 1e-12 * std::max(1.0, std::abs(prev)))
      throw std::invalid_argument("kernel must be nonincreasing");
    prev = hs;
  }
}

}  // namespace

RunningNormProfile running_norm(const NormSamples& src, double r, double T,
                                const std::vector<double>& grid) {
  check_grid(src.times, "source grid");
  check_grid(grid, "evaluation grid");
  if (src.times.size() != src.values.size() || src.times.size() < 2)
    throw std::invalid_argument("source needs at least two matching samples");
  for (double v : src.values)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("norm samples must be finite and nonnegative");
  if (!(r >= 1.0)) throw std::invalid_argument("time exponent r must be >= 1");
  if (!(src.q >= 1.0)) throw std::invalid_argument("space exponent q must be >= 1");
  if (!(T > 0.0)) throw std::invalid_argument("window length T must be positive");
  for (std::size_t i = 0; i + 1 < src.times.size(); ++i)
    if (src.times[i + 1] - src.times[i] > T / 10.0 + 1e-12 * T)
      throw std::invalid_argument("source grid must be finer than T/10");

  double min_spacing = src.times.back() - src.times.front();
  for (std::size_t i = 0; i + 1 < src.times.size(); ++i)
    min_spacing = std::min(min_spacing, src.times[i + 1] - src.times[i]);
  Integrand integrand =
      build_integrand(src.times, src.values, r, std::min(T / 500.0, min_spacing));

  RunningNormProfile out;
  out.r = r;
  out.q = src.q;
  out.T = T;
  out.times = grid;
  out.source = src.source;
  out.raw_times = src.times;
  out.raw_values = src.values;
  out.values.resize(grid.size());
  double t0 = src.times.front(), t1 = src.times.back();
  double edge_tol = 1e-12 * std::max(1.0, t1 - t0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double a = grid[k], b = grid[k] + T;
    if (a < t0 - edge_tol || b > t1 + edge_tol) out.truncated = true;
    double w = integrand.integral(std::max(a, t0), std::min(b, t1));
    out.values[k] = std::pow(std::max(0.0, w), 1.0 / r);
  }
  return out;
}

double m_norm(const RunningNormProfile& profile) {
  double sup = 0.0;
  for (double v : profile.values) sup = std::max(sup, v);
  return sup;
}

bool is_m0(const RunningNormProfile& profile, double tol, double t_tail) {
  if (profile.times.empty()) throw std::invalid_argument("profile is empty");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (profile.times.back() < t_tail)
    throw std::invalid_argument("profile does not reach the tail onset");
  for (std::size_t k = 0; k < profile.times.size(); ++k)
    if (profile.times[k] >= t_tail && profile.values[k] >= tol) return false;
  return true;
}

WindowEquivalence window_equivalence_ratio(const RunningNormProfile& a,
                                           const RunningNormProfile& b) {
  if (a.source != b.source || a.source.empty())
    throw std::invalid_argument("profiles must come from the same named source");
  if (a.r != b.r || a.q != b.q)
    throw std::invalid_argument("profiles must share the exponents r and q");
  const RunningNormProfile& lo = a.T <= b.T ? a : b;
  const RunningNormProfile& hi = a.T <= b.T ? b : a;
  WindowEquivalence out;
  out.bound = std::ceil(hi.T / lo.T - 1e-12);
  double n_lo = m_norm(lo), n_hi = m_norm(hi);
  if (n_lo == 0.0 && n_hi == 0.0)
    out.ratio = 1.0;
  else if (n_lo == 0.0)
    out.ratio = std::numeric_limits<double>::infinity();
  else
    out.ratio = n_hi / n_lo;
  out.within = out.ratio <= out.bound * (1.0 + 1e-9);
  return out;
}

ConvolutionBound convolution_bound_check(const RunningNormProfile& profile,
                                         const Kernel& kernel,
                                         const std::vector<double>& t_grid) {
  check_grid(t_grid, "convolution grid");
  if (profile.raw_times.size() < 2)
    throw std::invalid_argument("profile carries no raw source samples");
  check_kernel(kernel, std::max(t_grid.back(), profile.T));

  double min_spacing = profile.raw_times.back() - profile.raw_times.front();
  for (std::size_t i = 0; i + 1 < profile.raw_times.size(); ++i)
    min_spacing = std::min(min_spacing, profile.raw_times[i + 1] - profile.raw_times[i]);
  Integrand integrand = build_integrand(profile.raw_times, profile.raw_values,
                                        profile.r, std::min(profile.T / 500.0, min_spacing));

  ConvolutionBound out;
  out.times = t_grid;
  out.rhs = (kernel.linf + 2.0 * kernel.l1 / profile.T) *
            std::pow(m_norm(profile), profile.r);
  out.lhs.resize(t_grid.size());
  auto integrand_at = [&](double x) {
    return std::pow(std::max(0.0, lerp(profile.raw_times, profile.raw_values, x)),
                    profile.r);
  };
  double s0 = std::max(0.0, integrand.s.front());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    double t = t_grid[k];
    double hi = std::min(t, integrand.s.back());
    double acc = 0.0;
    if (hi > s0) {
      // Trapezoid of h(t-s) * ||f(s)||^r over the fine nodes in [s0, hi].
      auto lo_it = std::lower_bound(integrand.s.begin(), integrand.s.end(), s0);
      double prev_s = s0;
      double prev_v = kernel.h(t - s0) * integrand_at(s0);
      for (auto it = lo_it; it != integrand.s.end() && *it <= hi; ++it) {
        std::size_t i = static_cast<std::size_t>(it - integrand.s.begin());
        double cur_s = integrand.s[i];
        if (cur_s <= prev_s) continue;
        double cur_v = kernel.h(t - cur_s) * integrand.val[i];
        acc += 0.5 * (cur_s - prev_s) * (prev_v + cur_v);
        prev_s = cur_s;
        prev_v = cur_v;
      }
      if (hi > prev_s)
        acc += 0.5 * (hi - prev_s) * (prev_v + kernel.h(t - hi) * integrand_at(hi));
    }
    out.lhs[k] = acc;
  }
  out.holds = true;
  for (double v : out.lhs)
    if (v > out.rhs * (1.0 + 1e-9) + 1e-12) out.holds = false;
  return out;
}

ConvolutionDecay convolution_decay_check(const RunningNormProfile& profile,
                                         const Kernel& kernel, double tol,
                                         double t_tail) {
  ConvolutionDecay out;
  out.applicable = is_m0(profile, tol, t_tail);
  std::vector<double> grid;
  for (double t : profile.times)
    if (t >= 0.0) grid.push_back(t);
  if (grid.empty()) throw std::invalid_argument("profile grid has no nonnegative times");
  ConvolutionBound conv = convolution_bound_check(profile, kernel, grid);
  out.tail_max = 0.0;
  for (std::size_t k = 0; k < conv.times.size(); ++k)
    if (conv.times[k] >= t_tail) out.tail_max = std::max(out.tail_max, conv.lhs[k]);
  out.decays = out.applicable && out.tail_max < tol;
  return out;
}

double embedding_constant(double r_hi, double r_lo, double q_hi, double q_lo,
                          double T, double domain_measure) {
  if (!(r_lo >= 1.0) || !(r_hi >= r_lo) || !(q_lo >= 1.0) || !(q_hi >= q_lo))
    throw std::invalid_argument("exponents must satisfy 1 <= lo <= hi");
  if (!(T > 0.0) || !(domain_measure > 0.0))
    throw std::invalid_argument("window and domain measure must be positive");
  return std::pow(T, 1.0 / r_lo - 1.0 / r_hi) *
         std::pow(domain_measure, 1.0 / q_lo - 1.0 / q_hi);
}

void save_profile(const RunningNormProfile& profile, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"t", "R"});
  for (std::size_t k = 0; k < profile.times.size(); ++k)
    csv.row({profile.times[k], profile.values[k]});
}

}  // namespace robinlab
