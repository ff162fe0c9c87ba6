#include "robinlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace robinlab {

namespace {

double triangle_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

// Orients triangles counterclockwise, extracts boundary facets with outward
// normals, and computes h. Builders and the loader call this last.
void finalize(Mesh& mesh) {
  if (mesh.dim == 1) {
    for (auto& cell : mesh.cells) {
      if (mesh.vertices[cell.v[0]].x > mesh.vertices[cell.v[1]].x) std::swap(cell.v[0], cell.v[1]);
    }
    // boundary vertices appear in exactly one cell
    std::vector<int> count(mesh.vertices.size(), 0);
    std::vector<int> owner(mesh.vertices.size(), -1);
    for (int ci = 0; ci < (int)mesh.cells.size(); ++ci) {
      for (int k = 0; k < 2; ++k) {
        count[mesh.cells[ci].v[k]]++;
        owner[mesh.cells[ci].v[k]] = ci;
      }
    }
    mesh.boundary.clear();
    for (int i = 0; i < (int)mesh.vertices.size(); ++i) {
      if (count[i] != 1) continue;
      BoundaryFacet f;
      f.v = {i, -1};
      f.cell = owner[i];
      const Cell& c = mesh.cells[f.cell];
      double mid = 0.5 * (mesh.vertices[c.v[0]].x + mesh.vertices[c.v[1]].x);
      f.normal = {mesh.vertices[i].x > mid ? 1.0 : -1.0, 0.0};
      mesh.boundary.push_back(f);
    }
    mesh.h = 0.0;
    for (const auto& c : mesh.cells)
      mesh.h = std::max(mesh.h, mesh.vertices[c.v[1]].x - mesh.vertices[c.v[0]].x);
    return;
  }

  for (auto& cell : mesh.cells) {
    if (triangle_area(mesh.vertices[cell.v[0]], mesh.vertices[cell.v[1]],
                      mesh.vertices[cell.v[2]]) < 0)
      std::swap(cell.v[1], cell.v[2]);
  }
  // edge -> owning cells; boundary edges belong to exactly one
  std::map<std::pair<int, int>, std::vector<int>> edges;
  for (int ci = 0; ci < (int)mesh.cells.size(); ++ci) {
    const auto& v = mesh.cells[ci].v;
    for (int k = 0; k < 3; ++k) {
      int a = v[k], b = v[(k + 1) % 3];
      edges[{std::min(a, b), std::max(a, b)}].push_back(ci);
    }
  }
  mesh.boundary.clear();
  for (const auto& [edge, owners] : edges) {
    if (owners.size() == 1) {
      BoundaryFacet f;
      f.v = {edge.first, edge.second};
      f.cell = owners[0];
      Vec2 a = mesh.vertices[edge.first], b = mesh.vertices[edge.second];
      Vec2 t = b - a;
      Vec2 n{t.y, -t.x};
      double len = norm(n);
      n = (1.0 / len) * n;
      const auto& cv = mesh.cells[f.cell].v;
      Vec2 centroid = (1.0 / 3.0) * (mesh.vertices[cv[0]] + mesh.vertices[cv[1]] + mesh.vertices[cv[2]]);
      Vec2 midpoint = 0.5 * (a + b);
      if (dot(n, midpoint - centroid) < 0) n = -1.0 * n;
      f.normal = n;
      mesh.boundary.push_back(f);
    } else if (owners.size() != 2) {
      throw std::runtime_error("mesh: edge shared by " + std::to_string(owners.size()) + " cells");
    }
  }
  mesh.h = 0.0;
  for (const auto& c : mesh.cells) {
    for (int k = 0; k < 3; ++k) {
      double d = norm(mesh.vertices[c.v[k]] - mesh.vertices[c.v[(k + 1) % 3]]);
      mesh.h = std::max(mesh.h, d);
    }
  }
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  auto sgn = [](double x) { return (x > 0) - (x < 0); };
  double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (sgn(d1) * sgn(d2) < 0 && sgn(d3) * sgn(d4) < 0) return true;
  auto on = [](Vec2 p, Vec2 q, Vec2 r) {
    return std::abs(cross(q - p, r - p)) < 1e-14 && dot(r - p, r - q) <= 0;
  };
  return on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b);
}

// Inclusive: points on the triangle boundary count as inside. A candidate ear
// whose closed triangle contains another polygon vertex (even on an edge)
// would clip off region outside the polygon, so boundary contact must block.
bool point_in_triangle(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
  double scale = norm(b - a) + norm(c - b) + norm(a - c);
  double eps = 1e-12 * scale * scale;
  double d1 = cross(b - a, p - a), d2 = cross(c - b, p - b), d3 = cross(a - c, p - c);
  return d1 > -eps && d2 > -eps && d3 > -eps;
}

std::vector<Cell> ear_clip(const std::vector<Vec2>& pts) {
  int n = (int)pts.size();
  std::vector<int> idx(n);
  double area2 = 0;
  for (int i = 0; i < n; ++i) area2 += cross(pts[i], pts[(i + 1) % n]);
  for (int i = 0; i < n; ++i) idx[i] = area2 > 0 ? i : n - 1 - i;  // force CCW

  std::vector<Cell> cells;
  int guard = 0;
  while (idx.size() > 3) {
    if (++guard > 4 * n * n) throw std::runtime_error("polygon mesh: ear clipping failed");
    bool clipped = false;
    int m = (int)idx.size();
    for (int i = 0; i < m; ++i) {
      int ip = idx[(i + m - 1) % m], ic = idx[i], in = idx[(i + 1) % m];
      Vec2 a = pts[ip], b = pts[ic], c = pts[in];
      if (cross(b - a, c - a) <= 1e-14) continue;  // reflex or degenerate
      bool ear = true;
      for (int j : idx) {
        if (j == ip || j == ic || j == in) continue;
        if (point_in_triangle(pts[j], a, b, c)) {
          ear = false;
          break;
        }
      }
      if (!ear) continue;
      cells.push_back({{ip, ic, in}});
      idx.erase(idx.begin() + i);
      clipped = true;
      break;
    }
    if (!clipped) throw std::runtime_error("polygon mesh: no ear found (polygon degenerate?)");
  }
  cells.push_back({{idx[0], idx[1], idx[2]}});
  return cells;
}

}  // namespace

Mesh build_interval_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_interval_mesh: need n >= 1");
  Mesh mesh;
  mesh.dim = 1;
  mesh.vertices.resize(n + 1);
  for (int i = 0; i <= n; ++i) mesh.vertices[i] = {double(i) / n, 0.0};
  mesh.cells.resize(n);
  for (int i = 0; i < n; ++i) mesh.cells[i].v = {i, i + 1, -1};
  finalize(mesh);
  return mesh;
}

Mesh build_polygon_mesh(const std::vector<Vec2>& polygon, double h_target) {
  int n = (int)polygon.size();
  if (n < 3) throw std::invalid_argument("build_polygon_mesh: need at least 3 vertices");
  if (!(h_target > 0)) throw std::invalid_argument("build_polygon_mesh: h_target must be positive");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) {
        if (norm(polygon[i] - polygon[j]) < 1e-14)
          throw std::invalid_argument("build_polygon_mesh: repeated vertex");
        continue;
      }
      if (segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]))
        throw std::invalid_argument("build_polygon_mesh: polygon self-intersects");
    }
  }
  Mesh mesh;
  mesh.dim = 2;
  mesh.vertices = polygon;
  mesh.cells = ear_clip(polygon);
  finalize(mesh);
  while (mesh.h > h_target) mesh = refine(mesh);
  return mesh;
}

Mesh refine(const Mesh& mesh) {
  Mesh out;
  out.dim = mesh.dim;
  out.vertices = mesh.vertices;
  if (mesh.dim == 1) {
    for (const auto& c : mesh.cells) {
      int mid = (int)out.vertices.size();
      out.vertices.push_back(0.5 * (mesh.vertices[c.v[0]] + mesh.vertices[c.v[1]]));
      out.cells.push_back({{c.v[0], mid, -1}});
      out.cells.push_back({{mid, c.v[1], -1}});
    }
  } else {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid_of = [&](int a, int b) {
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      int idx = (int)out.vertices.size();
      out.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
      midpoint[key] = idx;
      return idx;
    };
    for (const auto& c : mesh.cells) {
      int a = c.v[0], b = c.v[1], d = c.v[2];
      int ab = mid_of(a, b), bd = mid_of(b, d), da = mid_of(d, a);
      out.cells.push_back({{a, ab, da}});
      out.cells.push_back({{ab, b, bd}});
      out.cells.push_back({{da, bd, d}});
      out.cells.push_back({{ab, bd, da}});
    }
  }
  finalize(out);
  return out;
}

double cell_measure(const Mesh& mesh, int cell) {
  const Cell& c = mesh.cells[cell];
  if (mesh.dim == 1) return mesh.vertices[c.v[1]].x - mesh.vertices[c.v[0]].x;
  return triangle_area(mesh.vertices[c.v[0]], mesh.vertices[c.v[1]], mesh.vertices[c.v[2]]);
}

double facet_measure(const Mesh& mesh, const BoundaryFacet& facet) {
  if (mesh.dim == 1) return 1.0;  // counting measure on the endpoints
  return norm(mesh.vertices[facet.v[1]] - mesh.vertices[facet.v[0]]);
}

double domain_measure(const Mesh& mesh) {
  double s = 0;
  for (int i = 0; i < (int)mesh.cells.size(); ++i) s += cell_measure(mesh, i);
  return s;
}

double boundary_measure(const Mesh& mesh) {
  double s = 0;
  for (const auto& f : mesh.boundary) s += facet_measure(mesh, f);
  return s;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_mesh: cannot open " + path);
  out.precision(17);
  for (const auto& v : mesh.vertices) {
    out << "v " << v.x;
    if (mesh.dim == 2) out << " " << v.y;
    out << "\n";
  }
  for (const auto& c : mesh.cells) {
    out << "c " << c.v[0] << " " << c.v[1];
    if (mesh.dim == 2) out << " " << c.v[2];
    out << "\n";
  }
  for (const auto& f : mesh.boundary) {
    out << "b " << f.v[0];
    if (mesh.dim == 2) out << " " << f.v[1];
    out << "\n";
  }
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_mesh: cannot open " + path);
  Mesh mesh;
  mesh.dim = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    auto fail = [&](const std::string& what) -> std::runtime_error {
      return std::runtime_error("load_mesh: " + what + " at line " + std::to_string(lineno));
    };
    if (tag == "v") {
      double x, y;
      if (!(ss >> x)) throw fail("bad vertex");
      if (ss >> y) {
        if (mesh.dim == 1) throw fail("mixed 1D/2D vertices");
        mesh.dim = 2;
        mesh.vertices.push_back({x, y});
      } else {
        if (mesh.dim == 2) throw fail("mixed 1D/2D vertices");
        mesh.dim = 1;
        mesh.vertices.push_back({x, 0.0});
      }
    } else if (tag == "c") {
      int i, j, k;
      if (!(ss >> i >> j)) throw fail("bad cell");
      if (ss >> k) {
        if (mesh.dim != 2) throw fail("triangle cell in 1D mesh");
        mesh.cells.push_back({{i, j, k}});
      } else {
        if (mesh.dim != 1) throw fail("segment cell in 2D mesh");
        mesh.cells.push_back({{i, j, -1}});
      }
    } else if (tag == "b") {
      // boundary connectivity is derivable; facets are recomputed below
    } else {
      throw fail("unknown record '" + tag + "'");
    }
  }
  if (mesh.dim == 0 || mesh.cells.empty()) throw std::runtime_error("load_mesh: empty mesh");
  for (const auto& c : mesh.cells) {
    for (int k = 0; k < mesh.dim + 1; ++k) {
      if (c.v[k] < 0 || c.v[k] >= (int)mesh.vertices.size())
        throw std::runtime_error("load_mesh: cell index out of range");
    }
  }
  finalize(mesh);
  return mesh;
}

}  // namespace robinlab
