#include "sirpns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

namespace sirpns {

TriMesh::TriMesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
                 std::vector<BoundaryEdge> boundary_edges)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)) {
  const int nv = num_vertices();
  for (int t = 0; t < num_triangles(); ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= nv) throw std::invalid_argument("triangle references missing vertex");
    }
    if (!(signed_area(t) > 0.0)) {
      throw std::invalid_argument("triangle " + std::to_string(t) + " is not counter-clockwise");
    }
  }
}

double TriMesh::signed_area(int t) const {
  const auto& [a, b, c] = triangles_[t];
  const Point e1 = vertices_[b] - vertices_[a];
  const Point e2 = vertices_[c] - vertices_[a];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < num_triangles(); ++t) sum += signed_area(t);
  return sum;
}

std::pair<Point, Point> TriMesh::bounds() const {
  Point lo = vertices_.front(), hi = vertices_.front();
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

TriMesh build_rectangle_mesh(int nx, int ny, Point lower, Point upper) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("cell counts must be at least 1");
  if (!(upper.x() > lower.x() && upper.y() > lower.y())) {
    throw std::invalid_argument("rectangle corners are not ordered");
  }
  const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };

  std::vector<Point> vertices;
  vertices.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  const double hx = (upper.x() - lower.x()) / nx;
  const double hy = (upper.y() - lower.y()) / ny;
  for (int j = 0; j <= ny; ++j) {
    // Snap the last row/column to the exact corner coordinate.
    const double y = (j == ny) ? upper.y() : lower.y() + j * hy;
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? upper.x() : lower.x() + i * hx;
      vertices.emplace_back(x, y);
    }
  }

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int bl = id(i, j), br = id(i + 1, j), tl = id(i, j + 1), tr = id(i + 1, j + 1);
      triangles.push_back({bl, br, tr});
      triangles.push_back({bl, tr, tl});
    }
  }

  std::vector<BoundaryEdge> edges;
  for (int i = 0; i < nx; ++i) {
    edges.push_back({{id(i, 0), id(i + 1, 0)}, Side::Bottom});
    edges.push_back({{id(i + 1, ny), id(i, ny)}, Side::Top});
  }
  for (int j = 0; j < ny; ++j) {
    edges.push_back({{id(nx, j), id(nx, j + 1)}, Side::Right});
    edges.push_back({{id(0, j + 1), id(0, j)}, Side::Left});
  }
  return TriMesh(std::move(vertices), std::move(triangles), std::move(edges));
}

TriMesh build_unit_square_mesh(int nx, int ny) {
  return build_rectangle_mesh(nx, ny, Point(0.0, 0.0), Point(1.0, 1.0));
}

std::set<int> boundary_vertex_set(const TriMesh& mesh) {
  std::set<int> out;
  for (const auto& e : mesh.boundary_edges()) out.insert(e.vertices.begin(), e.vertices.end());
  return out;
}

std::vector<std::pair<std::array<int, 2>, int>> edge_incidence(const TriMesh& mesh) {
  std::map<std::array<int, 2>, int> count;
  for (const auto& tri : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  return {count.begin(), count.end()};
}

double mesh_size(const TriMesh& mesh) {
  double h = 0.0;
  for (const auto& tri : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      h = std::max(h, (mesh.vertex(tri[k]) - mesh.vertex(tri[(k + 1) % 3])).norm());
    }
  }
  return h;
}

void write_vtk_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(9);
  out << "# vtk DataFile Version 2.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace sirpns
