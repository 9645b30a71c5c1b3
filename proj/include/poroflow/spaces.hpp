#ifndef POROFLOW_SPACES_HPP
#define POROFLOW_SPACES_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "poroflow/mesh.hpp"

namespace poroflow {

enum class FluxSpace { RT0, BDM1 };

std::string to_string(FluxSpace kind);

/// Quadrature rule on the reference triangle {(0,0),(1,0),(0,1)}.
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;  // sum to 1/2
};

/// Symmetric rules with positive weights, exact for polynomials up to
/// `degree` (1, 2 or 4).
const QuadratureRule& simplex_quadrature(int degree);

/// Trapezoidal (vertex) rule: weight 1/6 at each corner. Exact for P1.
const QuadratureRule& vertex_quadrature();

/// Global degree-of-freedom numbering for the P1-vector displacement, P0
/// scalar and flux spaces on one mesh, including essential constraints.
///
/// Displacement DOF 2*v + k is component k at vertex v. Flux DOFs: RT0 has
/// DOF f for face f (flux through f along n_f); BDM1 has DOFs 2f and 2f+1,
/// the normal component along n_f at the first and second face endpoint.
class DofLayout {
public:
  DofLayout(const Mesh& mesh, FluxSpace flux_space);

  FluxSpace flux_space() const { return flux_space_; }
  int num_displacement() const { return static_cast<int>(u_constrained_.size()); }
  int num_pressure() const { return num_cells_; }
  int num_flux() const { return static_cast<int>(q_constrained_.size()); }
  int flux_dofs_per_face() const { return flux_space_ == FluxSpace::RT0 ? 1 : 2; }
  int flux_dofs_per_cell() const { return 3 * flux_dofs_per_face(); }

  bool displacement_constrained(int dof) const { return u_constrained_[dof]; }
  bool flux_constrained(int dof) const { return q_constrained_[dof]; }
  /// Unconstrained DOF indices in increasing order.
  const std::vector<int>& free_displacement() const { return u_free_; }
  const std::vector<int>& free_flux() const { return q_free_; }

  std::array<int, 6> cell_displacement_dofs(const Mesh& mesh, int cell) const;

private:
  FluxSpace flux_space_;
  int num_cells_ = 0;
  std::vector<bool> u_constrained_;
  std::vector<bool> q_constrained_;
  std::vector<int> u_free_;
  std::vector<int> q_free_;
};

/// Six P1 vector basis functions on a cell: (vertex i, component k) at
/// index 2*i + k, matching cell_displacement_dofs.
struct P1VectorBasis {
  std::array<double, 3> hat{};                 // scalar hat values
  std::array<Eigen::Vector2d, 3> hat_grad{};   // physical gradients
  std::array<int, 6> dofs{};
};

P1VectorBasis eval_p1_vector_basis(const Mesh& mesh, const DofLayout& layout, int cell,
                                   const Point& ref);

/// Flux basis on a cell, physical values and (constant) divergences,
/// signed with the global face normals. Only the first `count` entries are
/// meaningful (3 for RT0, 6 for BDM1).
struct FluxBasis {
  int count = 0;
  std::array<Eigen::Vector2d, 6> value{};
  std::array<double, 6> divergence{};
  std::array<int, 6> dofs{};
};

FluxBasis eval_flux_basis(const Mesh& mesh, FluxSpace kind, int cell, const Point& ref);

/// Flux field value at a reference point of a cell from global coefficients.
Eigen::Vector2d evaluate_flux(const Mesh& mesh, const DofLayout& layout,
                              const Eigen::VectorXd& q, int cell, const Point& ref);

/// Degrees of freedom of a vector field under the flux space's DOF
/// functionals (edge flux for RT0, endpoint normal values for BDM1).
Eigen::VectorXd interpolate_flux(const Mesh& mesh, const DofLayout& layout,
                                 const std::function<Eigen::Vector2d(const Point&)>& field);

/// Nodal interpolant of a vector field into the P1 displacement space.
Eigen::VectorXd interpolate_displacement(const Mesh& mesh, const DofLayout& layout,
                                         const std::function<Eigen::Vector2d(const Point&)>& field);

/// L2 projection onto piecewise constants: per-cell averages via the
/// degree-4 rule. The callable receives the cell index and a physical point.
Eigen::VectorXd project_q(const std::function<double(int, const Point&)>& field,
                          const Mesh& mesh);

/// Cellwise (constant) divergence of a P1 displacement field.
Eigen::VectorXd cell_divergence(const Mesh& mesh, const DofLayout& layout,
                                const Eigen::VectorXd& u);

}  // namespace poroflow

#endif  // POROFLOW_SPACES_HPP
