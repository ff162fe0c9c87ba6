#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "doctest.h"
#include "robinlab/expression.hpp"
#include "robinlab/mesh.hpp"
#include "robinlab/quadrature.hpp"

using namespace robinlab;

namespace {

std::vector<Vec2> unit_square() { return {{0, 0}, {1, 0}, {1, 1}, {0, 1}}; }

void check_mesh_invariants(const Mesh& mesh) {
  for (const auto& f : mesh.boundary) {
    double len = std::sqrt(f.normal.x * f.normal.x + f.normal.y * f.normal.y);
    CHECK(std::abs(len - 1.0) < 1e-12);
    // outward: normal points away from the owning cell centroid
    Vec2 centroid{0, 0};
    for (int k = 0; k < mesh.nodes_per_cell(); ++k)
      centroid = centroid + (1.0 / mesh.nodes_per_cell()) * mesh.vertices[mesh.cells[f.cell].v[k]];
    Vec2 fmid = mesh.dim == 1 ? mesh.vertices[f.v[0]]
                              : 0.5 * (mesh.vertices[f.v[0]] + mesh.vertices[f.v[1]]);
    CHECK(dot(f.normal, fmid - centroid) > 0);
    if (mesh.dim == 2) {
      Vec2 t = mesh.vertices[f.v[1]] - mesh.vertices[f.v[0]];
      CHECK(std::abs(dot(f.normal, t)) < 1e-12);
    }
  }
  for (int ci = 0; ci < (int)mesh.cells.size(); ++ci) CHECK(cell_measure(mesh, ci) > 0);
}

}  // namespace

TEST_CASE("interval mesh basics") {
  CHECK_THROWS(build_interval_mesh(0));

  Mesh m1 = build_interval_mesh(1);
  CHECK(m1.vertices.size() == 2);
  CHECK(m1.cells.size() == 1);
  CHECK(m1.boundary.size() == 2);

  Mesh m4 = build_interval_mesh(4);
  CHECK(m4.h == doctest::Approx(0.25).epsilon(1e-14));
  bool saw_left = false, saw_right = false;
  for (const auto& f : m4.boundary) {
    if (m4.vertices[f.v[0]].x == 0.0) {
      saw_left = true;
      CHECK(f.normal.x == -1.0);
    }
    if (m4.vertices[f.v[0]].x == 1.0) {
      saw_right = true;
      CHECK(f.normal.x == 1.0);
    }
  }
  CHECK(saw_left);
  CHECK(saw_right);

  Mesh big = build_interval_mesh(1000);
  CHECK(std::abs(domain_measure(big) - 1.0) < 1e-12);
  CHECK(boundary_measure(big) == 2.0);
  check_mesh_invariants(big);
}

TEST_CASE("interval refinement halves h exactly") {
  Mesh m = build_interval_mesh(5);
  Mesh r = refine(m);
  CHECK(r.h == doctest::Approx(m.h / 2.0).epsilon(1e-15));
  CHECK(r.cells.size() == 10);
  CHECK(std::abs(domain_measure(r) - 1.0) < 1e-12);
}

TEST_CASE("unit square polygon mesh") {
  Mesh coarse = build_polygon_mesh(unit_square(), 2.0);
  CHECK(coarse.cells.size() == 2);

  Mesh m = build_polygon_mesh(unit_square(), 0.5);
  CHECK(m.h <= 0.5 + 1e-12);
  CHECK(std::abs(domain_measure(m) - 1.0) < 1e-10);
  CHECK(std::abs(boundary_measure(m) - 4.0) < 1e-10);
  check_mesh_invariants(m);

  // every boundary facet vertex lies on the input polygon boundary
  for (const auto& f : m.boundary) {
    for (int k = 0; k < 2; ++k) {
      Vec2 p = m.vertices[f.v[k]];
      double dist = std::min({std::abs(p.x), std::abs(1 - p.x), std::abs(p.y), std::abs(1 - p.y)});
      CHECK(dist < 1e-12);
    }
  }

  // 2D boundary facets form closed loops: every boundary vertex has even facet degree
  std::map<int, int> degree;
  for (const auto& f : m.boundary) {
    degree[f.v[0]]++;
    degree[f.v[1]]++;
  }
  for (const auto& [v, d] : degree) CHECK(d == 2);
}

TEST_CASE("single triangle and L-shaped polygon") {
  Mesh tri = build_polygon_mesh({{0, 0}, {1, 0}, {0, 1}}, 10.0);
  CHECK(tri.cells.size() == 1);
  CHECK(std::abs(domain_measure(tri) - 0.5) < 1e-12);

  std::vector<Vec2> lshape = {{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}};
  Mesh lm = build_polygon_mesh(lshape, 0.3);
  CHECK(std::abs(domain_measure(lm) - 0.75) < 1e-10);
  check_mesh_invariants(lm);
}

TEST_CASE("polygon validation") {
  CHECK_THROWS(build_polygon_mesh({{0, 0}, {1, 0}}, 0.5));
  // bowtie self-intersection
  CHECK_THROWS(build_polygon_mesh({{0, 0}, {1, 1}, {1, 0}, {0, 1}}, 0.5));
  CHECK_THROWS(build_polygon_mesh(unit_square(), 0.0));
}

TEST_CASE("triangle refinement conformity") {
  Mesh m = build_polygon_mesh(unit_square(), 2.0);
  Mesh r = refine(m);
  CHECK(r.cells.size() == 4 * m.cells.size());
  CHECK(r.h == doctest::Approx(m.h / 2).epsilon(1e-14));
  CHECK(std::abs(domain_measure(r) - 1.0) < 1e-12);
  CHECK(std::abs(boundary_measure(r) - 4.0) < 1e-12);
  check_mesh_invariants(r);
}

TEST_CASE("mesh text round trip") {
  Mesh m2 = build_polygon_mesh(unit_square(), 0.6);
  save_mesh(m2, "roundtrip2d.txt");
  Mesh l2 = load_mesh("roundtrip2d.txt");
  CHECK(l2.dim == 2);
  CHECK(l2.vertices.size() == m2.vertices.size());
  CHECK(l2.cells.size() == m2.cells.size());
  CHECK(l2.boundary.size() == m2.boundary.size());
  CHECK(std::abs(domain_measure(l2) - domain_measure(m2)) < 1e-14);
  CHECK(l2.h == doctest::Approx(m2.h).epsilon(1e-14));

  Mesh m1 = build_interval_mesh(7);
  save_mesh(m1, "roundtrip1d.txt");
  Mesh l1 = load_mesh("roundtrip1d.txt");
  CHECK(l1.dim == 1);
  CHECK(l1.vertices.size() == 8);
  CHECK(l1.boundary.size() == 2);
  std::remove("roundtrip2d.txt");
  std::remove("roundtrip1d.txt");
}

TEST_CASE("segment quadrature exactness") {
  // integrate x^p on [0,1] for p up to the rule degree
  for (int degree = 1; degree <= 6; ++degree) {
    auto rule = segment_rule({0, 0}, {1, 0}, degree);
    for (int p = 0; p <= degree; ++p) {
      double got = 0;
      for (const auto& qp : rule) got += qp.w * std::pow(qp.p.x, p);
      CHECK(got == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("triangle quadrature exactness") {
  // integrate x^a y^b on the reference triangle: a! b! / (a+b+2)!
  auto factorial = [](int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  for (int degree = 1; degree <= 6; ++degree) {
    auto rule = triangle_rule({0, 0}, {1, 0}, {0, 1}, degree);
    double wsum = 0;
    for (const auto& qp : rule) wsum += qp.w;
    CHECK(wsum == doctest::Approx(0.5).epsilon(1e-13));
    for (int a = 0; a + 0 <= degree; ++a) {
      for (int b = 0; a + b <= degree; ++b) {
        double got = 0;
        for (const auto& qp : rule) got += qp.w * std::pow(qp.p.x, a) * std::pow(qp.p.y, b);
        double expect = factorial(a) * factorial(b) / factorial(a + b + 2);
        CHECK(got == doctest::Approx(expect).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("expression parser") {
  auto f = parse_expression("sin(pi*x) + 2*cos(y)/4 - exp(-x*x)");
  double x = 0.3, y = 1.2;
  CHECK(f(x, y) ==
        doctest::Approx(std::sin(M_PI * x) + 2 * std::cos(y) / 4 - std::exp(-x * x)).epsilon(1e-15));

  auto g = parse_expression("-(x - 1) * (x + 1)");
  CHECK(g(0.5, 0) == doctest::Approx(0.75).epsilon(1e-15));

  CHECK_THROWS(parse_expression("sin(x"));
  CHECK_THROWS(parse_expression("2 +"));
  CHECK_THROWS(parse_expression("foo(x)"));
  CHECK_THROWS(parse_expression("x 3"));
}
