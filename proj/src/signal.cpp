#include "robinlab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robinlab/quadrature.hpp"

namespace robinlab {

double time_factor(const SignalTerm& term, double t) {
  switch (term.kind) {
    case TimeKind::Constant:
      return 1.0;
    case TimeKind::Cos:
      return std::cos(term.eta * t);
    case TimeKind::Sin:
      return std::sin(term.eta * t);
    case TimeKind::ExpDecay:
      return std::exp(-term.rate * t);
    case TimeKind::Bump:
      return (t >= term.t0 && t < term.t1) ? 1.0 : 0.0;
    case TimeKind::SquareWave: {
      double phase = std::fmod(t, term.period);
      if (phase < 0) phase += term.period;
      return phase < 0.5 * term.period ? 1.0 : -1.0;
    }
    case TimeKind::Tabulated: {
      const auto& ts = term.times;
      if (ts.empty() || t < ts.front() || t > ts.back()) return 0.0;
      auto it = std::upper_bound(ts.begin(), ts.end(), t);
      if (it == ts.begin()) return term.values.front();
      if (it == ts.end()) return term.values.back();
      size_t j = it - ts.begin();
      double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
      return (1 - w) * term.values[j - 1] + w * term.values[j];
    }
  }
  return 0.0;
}

double eval(const Signal& s, double t, double x, double y) {
  double v = 0.0;
  for (const auto& term : s.terms) v += time_factor(term, t) * term.profile(x, y);
  return v;
}

Eigen::VectorXd nodal_values(const Signal& s, const Mesh& mesh, double t) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mesh.ndof());
  for (const auto& term : s.terms) {
    double tf = time_factor(term, t);
    if (tf == 0.0) continue;
    for (int i = 0; i < mesh.ndof(); ++i)
      out[i] += tf * term.profile(mesh.vertices[i].x, mesh.vertices[i].y);
  }
  return out;
}

std::vector<double> frequencies(const Signal& s) {
  std::vector<double> out;
  for (const auto& term : s.terms) {
    if (term.kind == TimeKind::Cos || term.kind == TimeKind::Sin) {
      out.push_back(term.eta);
      out.push_back(-term.eta);
    } else if (term.kind == TimeKind::Constant) {
      out.push_back(0.0);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Signal zero_signal(SignalTarget target) {
  Signal s;
  s.target = target;
  return s;
}

Signal constant_signal(ScalarField profile, SignalTarget target) {
  Signal s;
  s.target = target;
  s.terms.push_back({TimeKind::Constant, std::move(profile), 0, 0, 0, 0, 0, {}, {}});
  return s;
}

Signal trig_signal(double eta, ScalarField profile, bool sine, SignalTarget target) {
  Signal s;
  s.target = target;
  s.terms.push_back(
      {sine ? TimeKind::Sin : TimeKind::Cos, std::move(profile), eta, 0, 0, 0, 0, {}, {}});
  return s;
}

Signal decay_signal(double rate, ScalarField profile, SignalTarget target) {
  if (!(rate > 0)) throw std::invalid_argument("decay_signal: rate must be positive");
  Signal s;
  s.target = target;
  s.terms.push_back({TimeKind::ExpDecay, std::move(profile), 0, rate, 0, 0, 0, {}, {}});
  return s;
}

Signal bump_signal(double t0, double t1, ScalarField profile, SignalTarget target) {
  if (!(t0 < t1)) throw std::invalid_argument("bump_signal: need t0 < t1");
  Signal s;
  s.target = target;
  s.terms.push_back({TimeKind::Bump, std::move(profile), 0, 0, t0, t1, 0, {}, {}});
  return s;
}

Signal square_wave_signal(double period, ScalarField profile, SignalTarget target) {
  if (!(period > 0)) throw std::invalid_argument("square_wave_signal: period must be positive");
  Signal s;
  s.target = target;
  s.terms.push_back({TimeKind::SquareWave, std::move(profile), 0, 0, 0, 0, period, {}, {}});
  return s;
}

Signal sum(const Signal& a, const Signal& b) {
  if (a.target != b.target) throw std::invalid_argument("signal sum: mismatched targets");
  Signal s = a;
  s.terms.insert(s.terms.end(), b.terms.begin(), b.terms.end());
  return s;
}

std::vector<double> lq_volume_profile(const Signal& s, const Mesh& mesh, double q,
                                      const std::vector<double>& times, int quad_order) {
  if (!(q >= 1)) throw std::invalid_argument("lq_volume_profile: need q >= 1");
  std::vector<std::vector<QuadPoint>> rules(mesh.cells.size());
  for (size_t ci = 0; ci < mesh.cells.size(); ++ci) {
    const auto& c = mesh.cells[ci];
    rules[ci] = mesh.dim == 1
                    ? segment_rule(mesh.vertices[c.v[0]], mesh.vertices[c.v[1]], quad_order)
                    : triangle_rule(mesh.vertices[c.v[0]], mesh.vertices[c.v[1]],
                                    mesh.vertices[c.v[2]], quad_order);
  }
  std::vector<double> out(times.size());
  for (size_t k = 0; k < times.size(); ++k) {
    double acc = 0.0;
    for (const auto& rule : rules)
      for (const auto& qp : rule) acc += qp.w * std::pow(std::abs(eval(s, times[k], qp.p.x, qp.p.y)), q);
    out[k] = std::pow(acc, 1.0 / q);
  }
  return out;
}

std::vector<double> lq_boundary_profile(const Signal& s, const Mesh& mesh, double q,
                                        const std::vector<double>& times, int quad_order) {
  if (!(q >= 1)) throw std::invalid_argument("lq_boundary_profile: need q >= 1");
  std::vector<std::vector<QuadPoint>> rules;
  for (const auto& f : mesh.boundary) {
    if (mesh.dim == 1) {
      // counting measure at the endpoint
      rules.push_back({{mesh.vertices[f.v[0]], 1.0}});
    } else {
      rules.push_back(segment_rule(mesh.vertices[f.v[0]], mesh.vertices[f.v[1]], quad_order));
    }
  }
  std::vector<double> out(times.size());
  for (size_t k = 0; k < times.size(); ++k) {
    double acc = 0.0;
    for (const auto& rule : rules)
      for (const auto& qp : rule) acc += qp.w * std::pow(std::abs(eval(s, times[k], qp.p.x, qp.p.y)), q);
    out[k] = std::pow(acc, 1.0 / q);
  }
  return out;
}

}  // namespace robinlab
