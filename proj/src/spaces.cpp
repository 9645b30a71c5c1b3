#include "poroflow/spaces.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

namespace poroflow {

std::string to_string(FluxSpace kind) { return kind == FluxSpace::RT0 ? "rt0" : "bdm1"; }

const QuadratureRule& simplex_quadrature(int degree) {
  static const QuadratureRule centroid{{Point(1.0 / 3.0, 1.0 / 3.0)}, {0.5}};
  static const QuadratureRule midpoints{
      {Point(0.5, 0.0), Point(0.5, 0.5), Point(0.0, 0.5)}, {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0}};
  // Six-point symmetric rule (Dunavant), weights rescaled to area 1/2.
  static const QuadratureRule degree4 = [] {
    const double a = 0.445948490915965;
    const double b = 0.091576213509771;
    const double wa = 0.223381589678011 / 2.0;
    const double wb = 0.109951743655322 / 2.0;
    return QuadratureRule{{Point(a, a), Point(1.0 - 2.0 * a, a), Point(a, 1.0 - 2.0 * a),
                           Point(b, b), Point(1.0 - 2.0 * b, b), Point(b, 1.0 - 2.0 * b)},
                          {wa, wa, wa, wb, wb, wb}};
  }();
  switch (degree) {
    case 1:
      return centroid;
    case 2:
      return midpoints;
    case 4:
      return degree4;
    default:
      throw std::invalid_argument("unsupported quadrature degree " + std::to_string(degree));
  }
}

const QuadratureRule& vertex_quadrature() {
  static const QuadratureRule rule{{Point(0.0, 0.0), Point(1.0, 0.0), Point(0.0, 1.0)},
                                   {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0}};
  return rule;
}

DofLayout::DofLayout(const Mesh& mesh, FluxSpace flux_space)
    : flux_space_(flux_space), num_cells_(mesh.num_cells()) {
  u_constrained_.assign(2 * mesh.num_vertices(), false);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v)) {
      u_constrained_[2 * v] = true;
      u_constrained_[2 * v + 1] = true;
    }
  }
  const int per_face = flux_dofs_per_face();
  q_constrained_.assign(per_face * mesh.num_faces(), false);
  for (int f : mesh.boundary_faces()) {
    for (int k = 0; k < per_face; ++k) q_constrained_[per_face * f + k] = true;
  }
  for (int i = 0; i < num_displacement(); ++i) {
    if (!u_constrained_[i]) u_free_.push_back(i);
  }
  for (int i = 0; i < num_flux(); ++i) {
    if (!q_constrained_[i]) q_free_.push_back(i);
  }
}

std::array<int, 6> DofLayout::cell_displacement_dofs(const Mesh& mesh, int cell) const {
  const auto& t = mesh.cell(cell);
  return {2 * t[0], 2 * t[0] + 1, 2 * t[1], 2 * t[1] + 1, 2 * t[2], 2 * t[2] + 1};
}

namespace {

std::array<Eigen::Vector2d, 3> hat_gradients(const Mesh& mesh, int cell) {
  const Eigen::Matrix2d inv_t = mesh.jacobian(cell).inverse().transpose();
  return {inv_t * Eigen::Vector2d(-1.0, -1.0), inv_t * Eigen::Vector2d(1.0, 0.0),
          inv_t * Eigen::Vector2d(0.0, 1.0)};
}

std::array<double, 3> hat_values(const Point& ref) {
  return {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
}

int local_index(const std::array<int, 3>& cell, int vertex) {
  for (int i = 0; i < 3; ++i) {
    if (cell[i] == vertex) return i;
  }
  throw std::logic_error("vertex not in cell");
}

}  // namespace

P1VectorBasis eval_p1_vector_basis(const Mesh& mesh, const DofLayout& layout, int cell,
                                   const Point& ref) {
  P1VectorBasis basis;
  basis.hat = hat_values(ref);
  basis.hat_grad = hat_gradients(mesh, cell);
  basis.dofs = layout.cell_displacement_dofs(mesh, cell);
  return basis;
}

FluxBasis eval_flux_basis(const Mesh& mesh, FluxSpace kind, int cell, const Point& ref) {
  FluxBasis basis;
  const auto& t = mesh.cell(cell);
  const auto& faces = mesh.cell_faces(cell);
  const double area = mesh.cell_area(cell);

  if (kind == FluxSpace::RT0) {
    basis.count = 3;
    const Point x = mesh.map_to_physical(cell, ref);
    for (int i = 0; i < 3; ++i) {
      const double s = faces[i].sign;
      basis.value[i] = s * (x - mesh.vertex(t[i])) / (2.0 * area);
      basis.divergence[i] = s / area;
      basis.dofs[i] = faces[i].face;
    }
    return basis;
  }

  basis.count = 6;
  const auto lambda = hat_values(ref);
  const auto grad = hat_gradients(mesh, cell);
  for (int i = 0; i < 3; ++i) {
    const int f = faces[i].face;
    const Eigen::Vector2d& n = mesh.face_normal(f);
    for (int k = 0; k < 2; ++k) {
      const int v = mesh.face(f)[k];
      const int other = mesh.face(f)[1 - k];
      const int lv = local_index(t, v);
      // The other face at corner v is the one opposite the other endpoint.
      const Eigen::Vector2d& m = mesh.face_normal(faces[local_index(t, other)].face);
      Eigen::Matrix2d normals;
      normals.row(0) = n.transpose();
      normals.row(1) = m.transpose();
      const Eigen::Vector2d dir = normals.inverse() * Eigen::Vector2d(1.0, 0.0);
      basis.value[2 * i + k] = lambda[lv] * dir;
      basis.divergence[2 * i + k] = grad[lv].dot(dir);
      basis.dofs[2 * i + k] = 2 * f + k;
    }
  }
  return basis;
}

Eigen::Vector2d evaluate_flux(const Mesh& mesh, const DofLayout& layout, const Eigen::VectorXd& q,
                              int cell, const Point& ref) {
  const FluxBasis basis = eval_flux_basis(mesh, layout.flux_space(), cell, ref);
  Eigen::Vector2d value = Eigen::Vector2d::Zero();
  for (int j = 0; j < basis.count; ++j) value += q[basis.dofs[j]] * basis.value[j];
  return value;
}

Eigen::VectorXd interpolate_flux(const Mesh& mesh, const DofLayout& layout,
                                 const std::function<Eigen::Vector2d(const Point&)>& field) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(layout.num_flux());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Point& a = mesh.vertex(mesh.face(f)[0]);
    const Point& b = mesh.vertex(mesh.face(f)[1]);
    const Eigen::Vector2d& n = mesh.face_normal(f);
    if (layout.flux_space() == FluxSpace::RT0) {
      // Three-point Gauss-Legendre on the edge.
      const double g = std::sqrt(0.6);
      const std::array<double, 3> s{0.5 * (1.0 - g), 0.5, 0.5 * (1.0 + g)};
      const std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
      double flux = 0.0;
      for (int k = 0; k < 3; ++k) flux += w[k] * field(a + s[k] * (b - a)).dot(n);
      q[f] = flux * mesh.face_length(f);
    } else {
      q[2 * f] = field(a).dot(n);
      q[2 * f + 1] = field(b).dot(n);
    }
  }
  return q;
}

Eigen::VectorXd interpolate_displacement(
    const Mesh& mesh, const DofLayout& layout,
    const std::function<Eigen::Vector2d(const Point&)>& field) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(layout.num_displacement());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Eigen::Vector2d value = field(mesh.vertex(v));
    u[2 * v] = value.x();
    u[2 * v + 1] = value.y();
  }
  return u;
}

Eigen::VectorXd project_q(const std::function<double(int, const Point&)>& field,
                          const Mesh& mesh) {
  const auto& rule = simplex_quadrature(4);
  Eigen::VectorXd avg(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    double sum = 0.0;
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      sum += rule.weights[k] * field(c, mesh.map_to_physical(c, rule.points[k]));
    }
    avg[c] = 2.0 * sum;  // reference area 1/2
  }
  return avg;
}

Eigen::VectorXd cell_divergence(const Mesh& mesh, const DofLayout& layout,
                                const Eigen::VectorXd& u) {
  Eigen::VectorXd div(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto grad = hat_gradients(mesh, c);
    const auto dofs = layout.cell_displacement_dofs(mesh, c);
    double d = 0.0;
    for (int i = 0; i < 3; ++i) d += u[dofs[2 * i]] * grad[i].x() + u[dofs[2 * i + 1]] * grad[i].y();
    div[c] = d;
  }
  return div;
}

}  // namespace poroflow
