#ifndef POROFLOW_FORMS_HPP
#define POROFLOW_FORMS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "poroflow/mesh.hpp"
#include "poroflow/spaces.hpp"

namespace poroflow {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Physical coefficients of the poroelastic Darcy-Forchheimer system.
/// Permeability, body force and fluid source are cellwise constant.
struct Material {
  double lambda_e = 1.0;  // first Lame parameter
  double mu_e = 1.0;      // shear modulus
  double alpha = 1.0;     // Biot coefficient
  double inv_M = 1.0;     // 1/M
  double mu_f = 1.0;      // fluid viscosity
  double rho = 1.0;       // reference fluid density
  double beta = 0.0;      // Forchheimer index
  std::vector<Eigen::Matrix2d> kappa;
  std::vector<Eigen::Vector2d> force;
  std::vector<double> source;

  /// Uniform material with scalar permeability and zero force/source.
  static Material homogeneous(int num_cells, double kappa_scalar = 1.0);

  /// Throws std::invalid_argument naming the offending parameter.
  void validate(int num_cells) const;
  /// True when every cell's tensor is a multiple of the identity.
  bool scalar_permeability() const;
  double permeability_scale() const;
  bool has_source() const;
};

enum class DissipationKind { Exact, Lumped, Quadrature };

std::string to_string(DissipationKind kind);

/// Pairing rule: Lumped needs RT0, Quadrature needs BDM1. Lumped further
/// requires scalar permeability and separated circumcenters.
void validate_scheme(FluxSpace flux_space, DissipationKind kind, const Mesh& mesh,
                     const Material& material);

/// Default Newton regularization 1e-10 * mu/(rho*beta*kappa); zero for beta = 0.
double default_eps_reg(const Material& material);

SparseMatrix assemble_elasticity(const Mesh& mesh, const Material& material,
                                 const DofLayout& layout);

/// B(i, K) = alpha * integral over K of div(v_i).
SparseMatrix assemble_coupling(const Mesh& mesh, const Material& material,
                               const DofLayout& layout);

/// D(K, j) = integral over K of div(w_j).
SparseMatrix assemble_div_constraint(const Mesh& mesh, const DofLayout& layout);

/// Load vector <f, v_i>.
Eigen::VectorXd assemble_load(const Mesh& mesh, const Material& material, const DofLayout& layout);

/// Matrices shared by energy evaluation and time stepping.
struct SystemMatrices {
  SparseMatrix elasticity;
  SparseMatrix coupling;
  SparseMatrix divergence;
  Eigen::VectorXd load;
  Eigen::VectorXd cell_area;
};

SystemMatrices assemble_system(const Mesh& mesh, const Material& material,
                               const DofLayout& layout);

/// Discrete dissipation potential D_h and its derivatives.
///
/// Exact integrates the continuous potential (quadratic part with the
/// degree-2 rule, cubic part with the degree-4 rule). Quadrature uses the
/// vertex rule for both parts. Lumped is the two-point sum over interior
/// faces with weights d_e/|e| (quadratic) and d_e/|e|^2 (cubic).
class Dissipation {
public:
  Dissipation(DissipationKind kind, const Mesh& mesh, const Material& material,
              const DofLayout& layout);

  DissipationKind kind() const { return kind_; }

  double value(const Eigen::VectorXd& q) const;
  /// Gradient of value(): r^T w = m_h(q; q, w).
  Eigen::VectorXd residual(const Eigen::VectorXd& q) const;
  /// Hessian of value(), with the rank-one Forchheimer term dropped where
  /// |q| < eps_reg.
  SparseMatrix jacobian(const Eigen::VectorXd& q, double eps_reg) const;

  /// Lumping coefficients of interior face f: {w2 * mu/kappa_e, w3 * rho*beta}.
  std::pair<double, double> lumped_coefficients(int face) const;

private:
  void integrate(const Eigen::VectorXd& q, double* value, Eigen::VectorXd* residual,
                 std::vector<Eigen::Triplet<double>>* jac, double eps_reg) const;

  DissipationKind kind_;
  const Mesh& mesh_;
  const Material& material_;
  const DofLayout& layout_;
  std::vector<double> lumped_quadratic_;
  std::vector<double> lumped_cubic_;
};

double dissipation(DissipationKind kind, const Mesh& mesh, const Material& material,
                   const DofLayout& layout, const Eigen::VectorXd& q);
Eigen::VectorXd m_residual(DissipationKind kind, const Mesh& mesh, const Material& material,
                           const DofLayout& layout, const Eigen::VectorXd& q);
SparseMatrix m_jacobian(DissipationKind kind, const Mesh& mesh, const Material& material,
                        const DofLayout& layout, const Eigen::VectorXd& q, double eps_reg);

/// Components of the Helmholtz free energy
///   E_h = 1/2 u^T A u + M/2 ||theta - alpha div u||^2 - <f, u>.
struct EnergyParts {
  double energy = 0.0;
  double elastic = 0.0;        // u^T A u
  double pressure_term = 0.0;  // inv_M ||p||^2 with p = M (theta - alpha div u)
  double load_work = 0.0;      // <f, u>
};

EnergyParts energy_parts(const SystemMatrices& system, const Material& material,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& theta);
double energy(const Mesh& mesh, const Material& material, const DofLayout& layout,
              const Eigen::VectorXd& u, const Eigen::VectorXd& theta);

struct ConsistencyBounds {
  double c_est = 0.0;
  double C_est = 0.0;
};

/// Samples random constrained flux fields and returns the extreme ratios
/// D_h(q)/D(q) of a localized potential against the exact one.
ConsistencyBounds check_assumption1(const Mesh& mesh, const Material& material,
                                    const DofLayout& layout, DissipationKind kind, int samples,
                                    std::uint64_t seed);

}  // namespace poroflow

#endif  // POROFLOW_FORMS_HPP
