#ifndef POROFLOW_MESH_HPP
#define POROFLOW_MESH_HPP

#include <array>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace poroflow {

using Point = Eigen::Vector2d;

class MeshError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Face of a cell together with the orientation of the cell's outward
/// normal relative to the global face normal.
struct CellFace {
  int face = -1;
  int sign = 0;  // +1 if outward normal == n_e, -1 otherwise
};

/// Immutable 2D triangulation with connectivity and geometry.
///
/// Local face i of a cell is the edge opposite local vertex i. Each global
/// face stores its endpoints with the smaller vertex index first; its unit
/// normal is the tangent (b - a) rotated clockwise.
class Mesh {
public:
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_interior_faces() const { return num_faces() - static_cast<int>(boundary_faces_.size()); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& cell(int c) const { return cells_[c]; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::array<int, 2>& face(int f) const { return faces_[f]; }
  const std::array<CellFace, 3>& cell_faces(int c) const { return cell_faces_[c]; }
  /// One or two incident cells; the second entry is -1 on the boundary.
  const std::array<int, 2>& face_cells(int f) const { return face_cells_[f]; }
  const Point& face_normal(int f) const { return face_normal_[f]; }
  double face_length(int f) const { return face_length_[f]; }
  double cell_area(int c) const { return cell_area_[c]; }
  const Point& circumcenter(int c) const { return circumcenter_[c]; }
  Point centroid(int c) const;
  const std::vector<int>& boundary_faces() const { return boundary_faces_; }
  bool is_boundary_face(int f) const { return face_cells_[f][1] < 0; }
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }
  double total_area() const;

  /// Maps reference coordinates (xi, eta) on the unit triangle to cell c.
  Point map_to_physical(int c, const Point& ref) const;
  /// Jacobian of the affine map, columns r1 - r0 and r2 - r0.
  Eigen::Matrix2d jacobian(int c) const;

  /// Distance between the circumcenters of the two cells sharing an
  /// interior face. Throws for boundary faces and coincident circumcenters.
  double interior_face_distance(int f) const;
  /// True when every interior face has distinct circumcenters on either
  /// side (required by two-point lumping).
  bool circumcenters_separated() const;

private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<std::array<int, 2>> faces_;
  std::vector<std::array<CellFace, 3>> cell_faces_;
  std::vector<std::array<int, 2>> face_cells_;
  std::vector<Point> face_normal_;
  std::vector<double> face_length_;
  std::vector<double> cell_area_;
  std::vector<Point> circumcenter_;
  std::vector<int> boundary_faces_;
  std::vector<bool> boundary_vertex_;
};

enum class MeshPattern {
  Diagonal,  // each rectangle split into two right triangles
  Shifted,   // odd vertex rows offset by half a cell; acute interior cells
};

/// Rectangle [0,width] x [0,height] triangulated on an nx-by-ny grid.
/// Diagonal yields 2*nx*ny cells; Shifted yields ny*(2*nx+1) cells.
Mesh structured_mesh(int nx, int ny, double width, double height,
                     MeshPattern pattern = MeshPattern::Diagonal);

/// Parses the `poroflow-mesh v1` text format.
Mesh parse_mesh(std::istream& in);
Mesh load_mesh(const std::filesystem::path& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

}  // namespace poroflow

#endif  // POROFLOW_MESH_HPP
