#include "poroflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace poroflow {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

Point circumcenter_of(const Point& a, const Point& b, const Point& c) {
  const Point bb = b - a;
  const Point cc = c - a;
  const double d = 2.0 * (bb.x() * cc.y() - bb.y() * cc.x());
  const double b2 = bb.squaredNorm();
  const double c2 = cc.squaredNorm();
  return a + Point((cc.y() * b2 - bb.y() * c2) / d, (bb.x() * c2 - cc.x() * b2) / d);
}

// Relative tolerance below which two circumcenters are treated as coincident.
constexpr double kCoincidentTol = 1e-12;

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  const int nv = num_vertices();
  if (nv < 3 || cells_.empty()) {
    throw MeshError("mesh needs at least 3 vertices and 1 cell");
  }

  double scale = 0.0;
  for (const auto& v : vertices_) {
    if (!std::isfinite(v.x()) || !std::isfinite(v.y())) {
      throw MeshError("non-finite vertex coordinate");
    }
    scale = std::max(scale, v.cwiseAbs().maxCoeff());
  }
  scale = std::max(scale, 1.0);

  {
    std::vector<int> order(nv);
    for (int i = 0; i < nv; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto& pa = vertices_[a];
      const auto& pb = vertices_[b];
      return pa.x() < pb.x() || (pa.x() == pb.x() && pa.y() < pb.y());
    });
    for (int i = 1; i < nv; ++i) {
      if ((vertices_[order[i]] - vertices_[order[i - 1]]).norm() <= 1e-14 * scale) {
        throw MeshError("duplicate vertices " + std::to_string(order[i - 1]) + " and " +
                        std::to_string(order[i]));
      }
    }
  }

  std::set<std::array<int, 3>> seen_cells;
  cell_area_.resize(cells_.size());
  circumcenter_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto& t = cells_[c];
    for (int v : t) {
      if (v < 0 || v >= nv) {
        throw MeshError("cell " + std::to_string(c) + " references vertex " + std::to_string(v) +
                        " out of range");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw MeshError("cell " + std::to_string(c) + " is degenerate (repeated vertex)");
    }
    auto key = t;
    std::sort(key.begin(), key.end());
    if (!seen_cells.insert(key).second) {
      throw MeshError("non-manifold mesh: cell " + std::to_string(c) + " is repeated");
    }
    double area = signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    if (std::abs(area) <= 1e-14 * scale * scale) {
      throw MeshError("cell " + std::to_string(c) + " is degenerate (zero area)");
    }
    if (area < 0.0) {
      std::swap(t[1], t[2]);
      area = -area;
    }
    cell_area_[c] = area;
    circumcenter_[c] = circumcenter_of(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
  }

  std::map<std::pair<int, int>, int> face_index;
  cell_faces_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& t = cells_[c];
    for (int i = 0; i < 3; ++i) {
      const int a = std::min(t[(i + 1) % 3], t[(i + 2) % 3]);
      const int b = std::max(t[(i + 1) % 3], t[(i + 2) % 3]);
      auto [it, inserted] = face_index.try_emplace({a, b}, static_cast<int>(faces_.size()));
      const int f = it->second;
      if (inserted) {
        faces_.push_back({a, b});
        face_cells_.push_back({static_cast<int>(c), -1});
        const Point tangent = vertices_[b] - vertices_[a];
        face_length_.push_back(tangent.norm());
        face_normal_.emplace_back(tangent.y() / tangent.norm(), -tangent.x() / tangent.norm());
      } else if (face_cells_[f][1] < 0) {
        face_cells_[f][1] = static_cast<int>(c);
      } else {
        throw MeshError("non-manifold edge (" + std::to_string(a) + ", " + std::to_string(b) +
                        ") has more than two cells");
      }
      const Point mid = 0.5 * (vertices_[a] + vertices_[b]);
      const double outward = face_normal_[f].dot(mid - vertices_[t[i]]);
      cell_faces_[c][i] = CellFace{f, outward > 0.0 ? 1 : -1};
    }
  }

  boundary_vertex_.assign(nv, false);
  for (int f = 0; f < num_faces(); ++f) {
    if (face_cells_[f][1] < 0) {
      boundary_faces_.push_back(f);
      boundary_vertex_[faces_[f][0]] = true;
      boundary_vertex_[faces_[f][1]] = true;
      continue;
    }
    int signs = 0;
    for (int side = 0; side < 2; ++side) {
      for (const auto& cf : cell_faces_[face_cells_[f][side]]) {
        if (cf.face == f) signs += cf.sign;
      }
    }
    if (signs != 0) {
      throw MeshError("non-manifold mesh: cells " + std::to_string(face_cells_[f][0]) + " and " +
                      std::to_string(face_cells_[f][1]) + " overlap across face " +
                      std::to_string(f));
    }
  }
  std::vector<bool> used(nv, false);
  for (const auto& t : cells_) {
    for (int v : t) used[v] = true;
  }
  for (int v = 0; v < nv; ++v) {
    if (!used[v]) throw MeshError("vertex " + std::to_string(v) + " belongs to no cell");
  }
}

Point Mesh::centroid(int c) const {
  const auto& t = cells_[c];
  return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (double a : cell_area_) sum += a;
  return sum;
}

Point Mesh::map_to_physical(int c, const Point& ref) const {
  const auto& t = cells_[c];
  return vertices_[t[0]] + jacobian(c) * ref;
}

Eigen::Matrix2d Mesh::jacobian(int c) const {
  const auto& t = cells_[c];
  Eigen::Matrix2d jac;
  jac.col(0) = vertices_[t[1]] - vertices_[t[0]];
  jac.col(1) = vertices_[t[2]] - vertices_[t[0]];
  return jac;
}

double Mesh::interior_face_distance(int f) const {
  if (f < 0 || f >= num_faces()) throw MeshError("face index out of range");
  if (is_boundary_face(f)) {
    throw MeshError("face " + std::to_string(f) + " is a boundary face");
  }
  const double d = (circumcenter_[face_cells_[f][0]] - circumcenter_[face_cells_[f][1]]).norm();
  if (d <= kCoincidentTol * face_length_[f]) {
    throw MeshError("circumcenters coincide across face " + std::to_string(f));
  }
  return d;
}

bool Mesh::circumcenters_separated() const {
  for (int f = 0; f < num_faces(); ++f) {
    if (is_boundary_face(f)) continue;
    const double d = (circumcenter_[face_cells_[f][0]] - circumcenter_[face_cells_[f][1]]).norm();
    if (d <= kCoincidentTol * face_length_[f]) return false;
  }
  return true;
}

Mesh structured_mesh(int nx, int ny, double width, double height, MeshPattern pattern) {
  if (nx < 1 || ny < 1) throw MeshError("structured mesh needs nx, ny >= 1");
  if (!(width > 0.0) || !(height > 0.0)) throw MeshError("structured mesh needs positive extent");

  const double hx = width / nx;
  const double hy = height / ny;
  std::vector<Point> vertices;
  std::vector<std::vector<int>> rows(ny + 1);
  for (int j = 0; j <= ny; ++j) {
    const double y = j * hy;
    const bool shifted = pattern == MeshPattern::Shifted && j % 2 == 1;
    auto add = [&](double x) {
      rows[j].push_back(static_cast<int>(vertices.size()));
      vertices.emplace_back(x, y);
    };
    if (!shifted) {
      for (int i = 0; i <= nx; ++i) add(i * hx);
    } else {
      add(0.0);
      for (int i = 0; i < nx; ++i) add((i + 0.5) * hx);
      add(width);
    }
  }

  // Zip consecutive vertex rows into a strip of triangles, always advancing
  // along the row whose next vertex lies further left.
  std::vector<std::array<int, 3>> cells;
  for (int j = 0; j < ny; ++j) {
    const auto& bottom = rows[j];
    const auto& top = rows[j + 1];
    std::size_t ib = 0;
    std::size_t it = 0;
    while (ib + 1 < bottom.size() || it + 1 < top.size()) {
      bool advance_bottom;
      if (ib + 1 == bottom.size()) {
        advance_bottom = false;
      } else if (it + 1 == top.size()) {
        advance_bottom = true;
      } else {
        advance_bottom = vertices[bottom[ib + 1]].x() <= vertices[top[it + 1]].x();
      }
      if (advance_bottom) {
        cells.push_back({bottom[ib], bottom[ib + 1], top[it]});
        ++ib;
      } else {
        cells.push_back({bottom[ib], top[it + 1], top[it]});
        ++it;
      }
    }
  }
  return Mesh(std::move(vertices), std::move(cells));
}

namespace {

struct LineReader {
  std::istream& in;
  int line_no = 0;

  // Next non-empty line with comments stripped; false at end of input.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw MeshError("mesh parse error at line " + std::to_string(line_no) + ": " + what);
  }
};

template <typename T>
std::vector<T> split_values(const std::string& line) {
  std::istringstream ss(line);
  std::vector<T> values;
  std::string token;
  while (ss >> token) {
    std::istringstream ts(token);
    T value;
    if (!(ts >> value) || !ts.eof()) {
      throw MeshError("cannot parse token '" + token + "'");
    }
    values.push_back(value);
  }
  return values;
}

int read_count(LineReader& reader, const std::string& keyword) {
  std::string line;
  if (!reader.next(line)) reader.fail("expected '" + keyword + " <count>'");
  std::istringstream ss(line);
  std::string word;
  long count = -1;
  std::string extra;
  if (!(ss >> word >> count) || word != keyword || count < 0 || (ss >> extra)) {
    reader.fail("expected '" + keyword + " <count>'");
  }
  return static_cast<int>(count);
}

}  // namespace

Mesh parse_mesh(std::istream& in) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) reader.fail("empty mesh file");
  {
    std::istringstream ss(line);
    std::string name;
    std::string version;
    ss >> name >> version;
    if (name != "poroflow-mesh" || version != "v1") {
      reader.fail("expected header 'poroflow-mesh v1'");
    }
  }

  const int nv = read_count(reader, "vertices");
  std::vector<Point> vertices;
  vertices.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    if (!reader.next(line)) reader.fail("unexpected end of file in vertex block");
    std::vector<double> xy;
    try {
      xy = split_values<double>(line);
    } catch (const MeshError& e) {
      reader.fail(e.what());
    }
    if (xy.size() == 3) reader.fail("only two-dimensional meshes are supported");
    if (xy.size() != 2) reader.fail("vertex line needs exactly 2 coordinates");
    vertices.emplace_back(xy[0], xy[1]);
  }

  const int nc = read_count(reader, "cells");
  std::vector<std::array<int, 3>> cells;
  cells.reserve(nc);
  for (int i = 0; i < nc; ++i) {
    if (!reader.next(line)) reader.fail("unexpected end of file in cell block");
    std::vector<long> ids;
    try {
      ids = split_values<long>(line);
    } catch (const MeshError& e) {
      reader.fail(e.what());
    }
    if (ids.size() == 4) reader.fail("only triangular cells are supported");
    if (ids.size() != 3) reader.fail("cell line needs exactly 3 vertex indices");
    cells.push_back({static_cast<int>(ids[0]), static_cast<int>(ids[1]), static_cast<int>(ids[2])});
  }
  if (reader.next(line)) reader.fail("trailing content after cell block");
  return Mesh(std::move(vertices), std::move(cells));
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  return parse_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "poroflow-mesh v1\n";
  out << "vertices " << mesh.num_vertices() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << '\n';
  out << "cells " << mesh.num_cells() << '\n';
  for (const auto& t : mesh.cells()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace poroflow
