#include "robinlab/coefficients.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace robinlab {

namespace {

MatrixField constant_matrix(double a11, double a22) {
  return [a11, a22](double, double) {
    return std::array<std::array<double, 2>, 2>{{{a11, 0.0}, {0.0, a22}}};
  };
}

const VectorField zero_vector = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
const ScalarField zero_scalar = [](double, double) { return 0.0; };
const BoundaryField zero_boundary = [](double, double, const Vec2&) { return 0.0; };

CoefficientSet base() {
  CoefficientSet cs;
  cs.a = constant_matrix(1.0, 1.0);
  cs.b = zero_vector;
  cs.c = zero_vector;
  cs.d = zero_scalar;
  cs.beta = zero_boundary;
  cs.mu = 1.0;
  return cs;
}

}  // namespace

CoefficientSet laplacian() { return base(); }

CoefficientSet anisotropic(double a11, double a22) {
  if (!(a11 > 0) || !(a22 > 0))
    throw std::invalid_argument("anisotropic: diagonal entries must be positive");
  CoefficientSet cs = base();
  cs.a = constant_matrix(a11, a22);
  cs.mu = std::min(a11, a22);
  return cs;
}

CoefficientSet drift_conserving(double gamma) {
  CoefficientSet cs = base();
  cs.c = [gamma](double, double) { return std::array<double, 2>{gamma, 0.0}; };
  cs.beta = [gamma](double, double, const Vec2& n) { return -gamma * n.x; };
  return cs;
}

CoefficientSet reaction(double d) {
  CoefficientSet cs = base();
  cs.d = [d](double, double) { return d; };
  return cs;
}

CoefficientSet robin(double beta) {
  CoefficientSet cs = base();
  cs.beta = [beta](double, double, const Vec2&) { return beta; };
  return cs;
}

CoefficientSet parse_coefficient_preset(const std::string& spec) {
  auto strip = [](std::string s) {
    size_t a = s.find_first_not_of(" \t");
    size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::string text = strip(spec);
  size_t paren = text.find('(');
  std::string name = strip(paren == std::string::npos ? text : text.substr(0, paren));
  std::vector<double> args;
  if (paren != std::string::npos) {
    if (text.back() != ')')
      throw std::invalid_argument("coefficient preset: missing ')' in \"" + spec + "\"");
    std::string inner = text.substr(paren + 1, text.size() - paren - 2);
    size_t start = 0;
    while (start <= inner.size() && !inner.empty()) {
      size_t comma = inner.find(',', start);
      std::string tok = strip(inner.substr(start, comma - start));
      try {
        args.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw std::invalid_argument("coefficient preset: bad argument \"" + tok + "\"");
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  auto want = [&](size_t n) {
    if (args.size() != n)
      throw std::invalid_argument("coefficient preset \"" + name + "\": expected " +
                                  std::to_string(n) + " argument(s)");
  };
  if (name == "laplacian") {
    want(0);
    return laplacian();
  }
  if (name == "anisotropic") {
    want(2);
    return anisotropic(args[0], args[1]);
  }
  if (name == "drift_conserving") {
    want(1);
    return drift_conserving(args[0]);
  }
  if (name == "reaction") {
    want(1);
    return reaction(args[0]);
  }
  if (name == "robin") {
    want(1);
    return robin(args[0]);
  }
  throw std::invalid_argument("unknown coefficient preset \"" + name + "\"");
}

}  // namespace robinlab
