#pragma once

#include <array>
#include <string>
#include <vector>

#include "robinlab/geometry.hpp"

namespace robinlab {

// Simplicial cell: a segment (dim 1, v[2] == -1) or a triangle (dim 2).
struct Cell {
  std::array<int, 3> v{-1, -1, -1};
};

// A boundary facet is a single vertex in 1D (v[1] == -1) or an edge in 2D.
// `cell` is the unique owning cell. `normal` is the outward unit normal;
// in 1D only normal.x is meaningful (-1 at x=0, +1 at x=1 for the interval).
struct BoundaryFacet {
  std::array<int, 2> v{-1, -1};
  int cell = -1;
  Vec2 normal{};
};

// Immutable after construction; refinement builds a new mesh.
struct Mesh {
  int dim = 1;
  std::vector<Vec2> vertices;  // y is unused (0) when dim == 1
  std::vector<Cell> cells;
  std::vector<BoundaryFacet> boundary;
  double h = 0.0;  // max cell diameter

  int nodes_per_cell() const { return dim + 1; }
  int ndof() const { return static_cast<int>(vertices.size()); }
};

// Uniform mesh of (0,1) with n cells. Boundary facets at x=0 and x=1.
Mesh build_interval_mesh(int n);

// Conforming triangulation of a simple polygon (ear clipping + uniform
// refinement until h <= h_target). Vertices in either orientation.
Mesh build_polygon_mesh(const std::vector<Vec2>& polygon, double h_target);

// Uniform refinement: each segment splits in 2, each triangle in 4.
Mesh refine(const Mesh& mesh);

double cell_measure(const Mesh& mesh, int cell);
// 1D boundary facets carry counting measure 1; 2D facets their length.
double facet_measure(const Mesh& mesh, const BoundaryFacet& facet);

double domain_measure(const Mesh& mesh);
double boundary_measure(const Mesh& mesh);

// Plain-text exchange format, one record per line:
//   v x [y]
//   c i j [k]
//   b i [j]
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

}  // namespace robinlab
