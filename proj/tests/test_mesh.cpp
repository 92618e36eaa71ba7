#include "sirpns/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

using namespace sirpns;

TEST_SUITE("mesh") {

TEST_CASE("structured counts") {
  const auto m11 = build_unit_square_mesh(1, 1);
  CHECK(m11.num_vertices() == 4);
  CHECK(m11.num_triangles() == 2);
  CHECK(m11.total_area() == doctest::Approx(1.0).epsilon(1e-14));

  const auto m22 = build_unit_square_mesh(2, 2);
  CHECK(m22.num_vertices() == 9);
  CHECK(m22.num_triangles() == 8);

  const auto m32 = build_unit_square_mesh(32, 32);
  CHECK(m32.num_vertices() == 1089);
  CHECK(m32.num_triangles() == 2048);
  CHECK(std::abs(m32.total_area() - 1.0) <= 1e-12);
}

TEST_CASE("counts and areas for many shapes") {
  for (int nx = 1; nx <= 7; ++nx) {
    for (int ny = 1; ny <= 5; ++ny) {
      const auto m = build_unit_square_mesh(nx, ny);
      CHECK(m.num_vertices() == (nx + 1) * (ny + 1));
      CHECK(m.num_triangles() == 2 * nx * ny);
      CHECK(m.boundary_edges().size() == static_cast<std::size_t>(2 * (nx + ny)));
      CHECK(boundary_vertex_set(m).size() == static_cast<std::size_t>(2 * (nx + ny)));
      CHECK(std::abs(m.total_area() - 1.0) <= 1e-12);
      for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0.0);
    }
  }
}

TEST_CASE("edge manifold and boundary cover") {
  const auto m = build_unit_square_mesh(5, 3);
  std::map<std::array<int, 2>, Side> boundary;
  for (const auto& e : m.boundary_edges()) {
    boundary[{std::min(e.vertices[0], e.vertices[1]), std::max(e.vertices[0], e.vertices[1])}] = e.side;
  }
  double perimeter = 0.0;
  for (const auto& [edge, count] : edge_incidence(m)) {
    const bool on_boundary = boundary.count(edge) > 0;
    CHECK(count == (on_boundary ? 1 : 2));
    if (on_boundary) perimeter += (m.vertex(edge[0]) - m.vertex(edge[1])).norm();
  }
  CHECK(perimeter == doctest::Approx(4.0));
  for (const auto& [edge, side] : boundary) {
    const Point a = m.vertex(edge[0]), b = m.vertex(edge[1]);
    switch (side) {
      case Side::Left: CHECK((a.x() == 0.0 && b.x() == 0.0)); break;
      case Side::Right: CHECK((a.x() == 1.0 && b.x() == 1.0)); break;
      case Side::Bottom: CHECK((a.y() == 0.0 && b.y() == 0.0)); break;
      case Side::Top: CHECK((a.y() == 1.0 && b.y() == 1.0)); break;
    }
  }
}

TEST_CASE("diagonal runs bottom-left to top-right") {
  const auto m = build_unit_square_mesh(1, 1);
  // Both triangles contain the (0,0)-(1,1) edge.
  for (int t = 0; t < 2; ++t) {
    int hits = 0;
    for (int v : m.triangle(t)) {
      const Point p = m.vertex(v);
      if ((p - Point(0, 0)).norm() == 0.0 || (p - Point(1, 1)).norm() == 0.0) ++hits;
    }
    CHECK(hits == 2);
  }
}

TEST_CASE("boundary vertex sets") {
  CHECK(boundary_vertex_set(build_unit_square_mesh(1, 1)).size() == 4);
  const auto m22 = build_unit_square_mesh(2, 2);
  const auto b22 = boundary_vertex_set(m22);
  CHECK(b22.size() == 8);
  for (int v = 0; v < m22.num_vertices(); ++v) {
    const bool centre = (m22.vertex(v) - Point(0.5, 0.5)).norm() < 1e-15;
    CHECK(b22.count(v) == (centre ? 0u : 1u));
  }
  CHECK(boundary_vertex_set(build_unit_square_mesh(4, 4)).size() == 16);
}

TEST_CASE("mesh size") {
  CHECK(mesh_size(build_unit_square_mesh(1, 1)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(mesh_size(build_unit_square_mesh(2, 2)) == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(mesh_size(build_unit_square_mesh(10, 10)) == doctest::Approx(std::sqrt(2.0) / 10));
}

TEST_CASE("invalid counts") {
  CHECK_THROWS_AS(build_unit_square_mesh(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_unit_square_mesh(2, -1), std::invalid_argument);
}

TEST_CASE("clockwise triangles are rejected") {
  std::vector<Point> v{{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(TriMesh(v, {{0, 2, 1}}, {}), std::invalid_argument);
  CHECK_NOTHROW(TriMesh(v, {{0, 1, 2}}, {}));
}

TEST_CASE("vtk mesh dump") {
  const auto path = std::filesystem::temp_directory_path() / "sirpns_mesh_dump.vtk";
  write_vtk_mesh(build_unit_square_mesh(2, 1), path);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# vtk DataFile Version 2.0");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(text.find("POINTS 6") != std::string::npos);
  CHECK(text.find("CELLS 4 16") != std::string::npos);
  std::filesystem::remove(path);
}

}
