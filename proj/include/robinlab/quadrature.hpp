#pragma once

#include <vector>

#include "robinlab/geometry.hpp"

namespace robinlab {

struct QuadPoint {
  Vec2 p;
  double w = 0.0;
};

// Gauss-Legendre rule on the segment [a,b], exact for polynomials of the
// requested degree (>= 1). Weights sum to |b - a|.
std::vector<QuadPoint> segment_rule(Vec2 a, Vec2 b, int degree);

// Symmetric rule on the triangle (a,b,c), exact for polynomials of the
// requested degree (capped at 6). Weights sum to the triangle area.
std::vector<QuadPoint> triangle_rule(Vec2 a, Vec2 b, Vec2 c, int degree);

}  // namespace robinlab
