#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "poroflow/mesh.hpp"
#include "poroflow/verify.hpp"

using namespace poroflow;

namespace {

Mesh unit_square() {
  return Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0, 1, 2}}, {{0, 2, 3}}});
}

}  // namespace

TEST_CASE("two-triangle square") {
  const Mesh m = unit_square();
  CHECK(m.num_faces() == 5);
  CHECK(m.num_interior_faces() == 1);
  CHECK(m.cell_area(0) == doctest::Approx(0.5));
  CHECK(m.cell_area(1) == doctest::Approx(0.5));
  for (int v = 0; v < 4; ++v) CHECK(m.is_boundary_vertex(v));
}

TEST_CASE("reference triangle") {
  const Mesh m({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
  CHECK(m.num_cells() == 1);
  CHECK(m.boundary_faces().size() == 3);
  CHECK(m.total_area() == doctest::Approx(0.5));
}

TEST_CASE("clockwise cells are reoriented") {
  const Mesh m({{0, 0}, {1, 0}, {0, 1}}, {{{0, 2, 1}}});
  CHECK(m.cell_area(0) == doctest::Approx(0.5));
  const Eigen::Matrix2d j = m.jacobian(0);
  CHECK(j.determinant() > 0.0);
}

TEST_CASE("invalid meshes are rejected") {
  using V = std::vector<Point>;
  using C = std::vector<std::array<int, 3>>;
  CHECK_THROWS_AS(Mesh(V{{0, 0}, {1, 0}, {0, 1}}, C{{0, 1, 2}, {0, 1, 2}}), MeshError);
  CHECK_THROWS_AS(Mesh(V{{0, 0}, {1, 0}, {2, 0}}, C{{0, 1, 2}}), MeshError);
  CHECK_THROWS_AS(Mesh(V{{0, 0}, {1, 0}, {0, 1}}, C{{0, 1, 3}}), MeshError);
  CHECK_THROWS_AS(Mesh(V{{0, 0}, {1, 0}, {0, 1}, {0, 0}}, C{{0, 1, 2}}), MeshError);
  // Edge 0-1 shared by three cells.
  CHECK_THROWS_AS(Mesh(V{{0, 0}, {1, 0}, {0, 1}, {0, -1}, {1, 1}},
                       C{{0, 1, 2}, {0, 3, 1}, {0, 1, 4}}),
                  MeshError);
}

TEST_CASE("structured meshes") {
  CHECK(structured_mesh(1, 1, 1, 1).num_cells() == 2);
  CHECK(structured_mesh(1, 1, 1, 1).total_area() == doctest::Approx(1.0));
  const Mesh m22 = structured_mesh(2, 2, 1, 1);
  CHECK(m22.num_cells() == 8);
  for (int c = 0; c < 8; ++c) CHECK(m22.cell_area(c) == doctest::Approx(0.125));

  // 8 cells; 4 vertical interior edges plus 4 diagonals = 7 after the two
  // outer verticals are counted as boundary (see README).
  const Mesh m41 = structured_mesh(4, 1, 2, 1);
  CHECK(m41.num_cells() == 8);
  CHECK(m41.num_interior_faces() == 7);
  // Euler: interior faces = (3 * cells - boundary faces) / 2.
  CHECK(m41.num_interior_faces() ==
        (3 * m41.num_cells() - static_cast<int>(m41.boundary_faces().size())) / 2);

  for (MeshPattern pattern : {MeshPattern::Diagonal, MeshPattern::Shifted}) {
    const Mesh coarse = structured_mesh(3, 2, 1.5, 1.0, pattern);
    const Mesh fine = structured_mesh(6, 4, 1.5, 1.0, pattern);
    if (pattern == MeshPattern::Diagonal) {
      CHECK(fine.num_cells() == 4 * coarse.num_cells());
    } else {
      // Shifted rows gain one boundary cell each, so doubling is not exactly 4x.
      CHECK(fine.num_cells() == 4 * (2 * 6 + 1));
    }
    CHECK(std::abs(fine.total_area() - 1.5) < 1e-12 * 1.5);
    CHECK(std::abs(coarse.total_area() - 1.5) < 1e-12 * 1.5);
  }
  CHECK(structured_mesh(4, 3, 1, 1, MeshPattern::Shifted).num_cells() == 3 * 9);
}

TEST_CASE("circumcenter distances") {
  const Mesh sq = unit_square();
  int interior = -1;
  for (int f = 0; f < sq.num_faces(); ++f) {
    if (!sq.is_boundary_face(f)) interior = f;
  }
  CHECK_THROWS_AS(sq.interior_face_distance(interior), MeshError);
  CHECK_THROWS_AS(sq.interior_face_distance(sq.boundary_faces()[0]), MeshError);
  CHECK_FALSE(sq.circumcenters_separated());

  const Mesh rh = rhombus_mesh();
  for (int f = 0; f < rh.num_faces(); ++f) {
    if (rh.is_boundary_face(f)) continue;
    CHECK(rh.interior_face_distance(f) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  }

  const Mesh shifted = structured_mesh(5, 4, 1, 1, MeshPattern::Shifted);
  CHECK(shifted.circumcenters_separated());
  for (int f = 0; f < shifted.num_faces(); ++f) {
    if (shifted.is_boundary_face(f)) continue;
    const auto cells = shifted.face_cells(f);
    const double d =
        (shifted.circumcenter(cells[0]) - shifted.circumcenter(cells[1])).norm();
    CHECK(shifted.interior_face_distance(f) == doctest::Approx(d));
  }
}

TEST_CASE("face orientation") {
  const Mesh m = structured_mesh(3, 3, 1, 1, MeshPattern::Shifted);
  for (int f = 0; f < m.num_faces(); ++f) {
    const auto& e = m.face(f);
    CHECK(e[0] < e[1]);
    const Point t = m.vertex(e[1]) - m.vertex(e[0]);
    CHECK((m.face_normal(f) - Point(t.y(), -t.x()).normalized()).norm() < 1e-14);
  }
  for (int c = 0; c < m.num_cells(); ++c) {
    for (int i = 0; i < 3; ++i) {
      const CellFace cf = m.cell_faces(c)[i];
      const Point outward = m.face_normal(cf.face) * cf.sign;
      // Local face i is opposite local vertex i.
      const Point mid = 0.5 * (m.vertex(m.face(cf.face)[0]) + m.vertex(m.face(cf.face)[1]));
      CHECK(outward.dot(mid - m.vertex(m.cell(c)[i])) > 0.0);
    }
  }
  // Interior faces see opposite signs from their two cells.
  for (int f = 0; f < m.num_faces(); ++f) {
    if (m.is_boundary_face(f)) continue;
    int sum = 0;
    for (int c : m.face_cells(f)) {
      for (const CellFace& cf : m.cell_faces(c)) {
        if (cf.face == f) sum += cf.sign;
      }
    }
    CHECK(sum == 0);
  }
}

TEST_CASE("text format") {
  const Mesh m = structured_mesh(3, 2, 1.7, 0.9, MeshPattern::Shifted);
  std::stringstream buf;
  write_mesh(m, buf);
  const Mesh back = parse_mesh(buf);
  REQUIRE(back.num_vertices() == m.num_vertices());
  REQUIRE(back.num_cells() == m.num_cells());
  for (int v = 0; v < m.num_vertices(); ++v) {
    CHECK((back.vertex(v) - m.vertex(v)).norm() <= 1e-15);
  }
  for (int c = 0; c < m.num_cells(); ++c) CHECK(back.cell(c) == m.cell(c));

  std::istringstream commented(
      "poroflow-mesh v1\n# square\nvertices 4\n0 0\n1 0\n1 1 # corner\n0 1\ncells 2\n0 1 2\n0 2 3\n");
  CHECK(parse_mesh(commented).num_faces() == 5);

  std::istringstream three_d("poroflow-mesh v1\nvertices 3\n0 0 0\n1 0 0\n0 1 0\ncells 1\n0 1 2\n");
  CHECK_THROWS_WITH_AS(parse_mesh(three_d), doctest::Contains("two-dimensional"), MeshError);
  std::istringstream no_header("vertices 3\n0 0\n1 0\n0 1\ncells 1\n0 1 2\n");
  CHECK_THROWS_AS(parse_mesh(no_header), MeshError);
  std::istringstream repeated(
      "poroflow-mesh v1\nvertices 3\n0 0\n1 0\n0 1\ncells 2\n0 1 2\n2 1 0\n");
  CHECK_THROWS_AS(parse_mesh(repeated), MeshError);
}
