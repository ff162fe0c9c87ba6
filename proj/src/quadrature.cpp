#include "robinlab/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace robinlab {

namespace {

struct GL {
  std::vector<double> x;  // nodes on [-1,1]
  std::vector<double> w;  // weights summing to 2
};

const GL& gauss_legendre(int npts) {
  static const GL rules[] = {
      {{0.0}, {2.0}},
      {{-0.5773502691896257, 0.5773502691896257}, {1.0, 1.0}},
      {{-0.7745966692414834, 0.0, 0.7745966692414834},
       {0.5555555555555556, 0.8888888888888888, 0.5555555555555556}},
      {{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
       {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538}},
      {{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640},
       {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
        0.2369268850561891}},
      {{-0.9324695142031521, -0.6612093864662645, -0.2386191860831969, 0.2386191860831969,
        0.6612093864662645, 0.9324695142031521},
       {0.1713244923791704, 0.3607615730481386, 0.4679139345726910, 0.4679139345726910,
        0.3607615730481386, 0.1713244923791704}},
  };
  if (npts < 1) npts = 1;
  if (npts > 6) npts = 6;
  return rules[npts - 1];
}

void push_symmetric(std::vector<std::array<double, 4>>& out, double l1, double l2, double l3,
                    double w) {
  // distinct permutations of barycentric coordinates
  std::array<std::array<double, 3>, 6> perms = {{{l1, l2, l3},
                                                 {l1, l3, l2},
                                                 {l2, l1, l3},
                                                 {l2, l3, l1},
                                                 {l3, l1, l2},
                                                 {l3, l2, l1}}};
  for (const auto& p : perms) {
    bool dup = false;
    for (const auto& q : out)
      if (std::abs(q[0] - p[0]) < 1e-15 && std::abs(q[1] - p[1]) < 1e-15 &&
          std::abs(q[2] - p[2]) < 1e-15) {
        dup = true;
        break;
      }
    if (!dup) out.push_back({p[0], p[1], p[2], w});
  }
}

// Barycentric points and weights (weights sum to 1) for symmetric triangle
// rules of the given polynomial degree.
std::vector<std::array<double, 4>> triangle_points(int degree) {
  std::vector<std::array<double, 4>> pts;
  if (degree <= 1) {
    push_symmetric(pts, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0);
  } else if (degree == 2) {
    push_symmetric(pts, 2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3);
  } else if (degree <= 4) {
    push_symmetric(pts, 0.108103018168070, 0.445948490915965, 0.445948490915965,
                   0.223381589678011);
    push_symmetric(pts, 0.816847572980459, 0.091576213509771, 0.091576213509771,
                   0.109951743655322);
  } else if (degree == 5) {
    push_symmetric(pts, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225);
    push_symmetric(pts, 0.059715871789770, 0.470142064105115, 0.470142064105115,
                   0.132394152788506);
    push_symmetric(pts, 0.797426985353087, 0.101286507323456, 0.101286507323456,
                   0.125939180544827);
  } else {
    push_symmetric(pts, 0.501426509658179, 0.249286745170910, 0.249286745170910,
                   0.116786275726379);
    push_symmetric(pts, 0.873821971016996, 0.063089014491502, 0.063089014491502,
                   0.050844906370207);
    push_symmetric(pts, 0.053145049844816, 0.310352451033785, 0.636502499121399,
                   0.082851075618374);
  }
  return pts;
}

}  // namespace

std::vector<QuadPoint> segment_rule(Vec2 a, Vec2 b, int degree) {
  if (degree < 1) throw std::invalid_argument("segment_rule: degree must be >= 1");
  int npts = (degree + 2) / 2;  // n-point Gauss is exact to degree 2n-1
  const GL& gl = gauss_legendre(npts);
  double len = norm(b - a);
  std::vector<QuadPoint> out(gl.x.size());
  for (size_t i = 0; i < gl.x.size(); ++i) {
    double s = 0.5 * (1.0 + gl.x[i]);
    out[i].p = a + s * (b - a);
    out[i].w = 0.5 * len * gl.w[i];
  }
  return out;
}

std::vector<QuadPoint> triangle_rule(Vec2 a, Vec2 b, Vec2 c, int degree) {
  if (degree < 1) throw std::invalid_argument("triangle_rule: degree must be >= 1");
  double area = 0.5 * cross(b - a, c - a);
  auto pts = triangle_points(degree);
  std::vector<QuadPoint> out(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    out[i].p = pts[i][0] * a + pts[i][1] * b + pts[i][2] * c;
    out[i].w = pts[i][3] * area;
  }
  return out;
}

}  // namespace robinlab
