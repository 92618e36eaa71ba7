#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <set>
#include <vector>

namespace sirpns {

using Point = Eigen::Vector2d;

enum class Side { Left, Right, Bottom, Top };

struct BoundaryEdge {
  std::array<int, 2> vertices;
  Side side;
};

/// Conforming triangulation of an axis-aligned rectangle.
///
/// Triangles are stored counter-clockwise. The object is immutable once built,
/// so it can be shared freely between solvers and threads.
class TriMesh {
 public:
  TriMesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
          std::vector<BoundaryEdge> boundary_edges);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  const Point& vertex(int i) const { return vertices_[i]; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  /// Signed area; positive for counter-clockwise triangles.
  double signed_area(int t) const;
  double total_area() const;

  /// Bounding box of the vertex set as (min corner, max corner).
  std::pair<Point, Point> bounds() const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
};

/// Structured mesh of [x0,x1]x[y0,y1] with nx*ny cells, each cut along the
/// bottom-left to top-right diagonal.
TriMesh build_rectangle_mesh(int nx, int ny, Point lower, Point upper);

/// Structured mesh of the unit square.
TriMesh build_unit_square_mesh(int nx, int ny);

std::set<int> boundary_vertex_set(const TriMesh& mesh);

/// Longest edge length.
double mesh_size(const TriMesh& mesh);

/// Number of triangles incident to each undirected edge, keyed by (min, max) vertex.
std::vector<std::pair<std::array<int, 2>, int>> edge_incidence(const TriMesh& mesh);

/// Legacy ASCII VTK dump of the bare mesh.
void write_vtk_mesh(const TriMesh& mesh, const std::filesystem::path& path);

}  // namespace sirpns
