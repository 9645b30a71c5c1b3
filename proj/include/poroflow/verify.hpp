#ifndef POROFLOW_VERIFY_HPP
#define POROFLOW_VERIFY_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "poroflow/forms.hpp"
#include "poroflow/mesh.hpp"
#include "poroflow/stepper.hpp"

namespace poroflow {

/// One minimization step on a tiny mesh, solved without the production
/// Newton path.
struct OracleProblem {
  Mesh mesh;
  Material material;
  SchemeConfig config;
  Eigen::VectorXd u_prev;      // full displacement coefficients
  Eigen::VectorXd theta_prev;  // per cell
};

struct OracleSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd theta;
  Eigen::VectorXd q;
  Eigen::VectorXd p;  // M (theta - alpha div u)
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Limit on unconstrained DOFs accepted by the dense oracles.
inline constexpr int kOracleMaxDofs = 60;

/// Eliminates theta through the cellwise constraint and minimizes the
/// reduced objective in (u, q) by Barzilai-Borwein gradient descent with a
/// nonmonotone Armijo safeguard, to ||grad|| < 1e-10 * ||grad_0||.
OracleSolution oracle_minimize(const OracleProblem& problem, int max_iterations = 2000000);

/// Dense solve of the KKT system of the quadratic (beta = 0) problem in
/// (u, theta, q, lambda).
OracleSolution kkt_direct_solve(const OracleProblem& problem);

/// One implicit step of the linear (beta = 0) system as a single dense
/// solve in (u, q, p) over unconstrained DOFs, assembled from the forms
/// without the Newton path. Throws for beta > 0.
State linear_step_direct(const Mesh& mesh, const Material& material, const DofLayout& layout,
                         const SchemeConfig& config, const State& previous);

/// Largest per-DOF discrepancy between Stepper::step and the oracle on one
/// problem, over u, q, theta and p.
struct OracleComparison {
  std::string label;
  double max_discrepancy = 0.0;
  double scale = 1.0;  // max(1, largest magnitude among compared values)
  int newton_iters = 0;
  int oracle_iterations = 0;
};

OracleComparison compare_with_stepper(const OracleProblem& problem, const std::string& label);

/// Two equilateral triangles sharing the unit edge from (0,0) to (1,0).
Mesh rhombus_mesh();
/// Unit square split into four triangles around its center vertex.
Mesh centered_square_mesh();

/// Tiny problems spanning every scheme with beta = 0 and beta > 0, on the
/// rhombus (flow only) and the centered square (flow and displacement).
std::vector<std::pair<std::string, OracleProblem>> oracle_corpus();

/// Smooth exact fields on the unit square with sources computed
/// analytically so that the continuous steady system holds exactly.
struct ManufacturedCase {
  std::string id;
  Material constants;  // scalar parameters; kappa/force/source filled per mesh
  double kappa = 1.0;
  std::function<Eigen::Vector2d(const Point&)> u;
  std::function<double(const Point&)> p;
  std::function<Eigen::Vector2d(const Point&)> q;
  std::function<Eigen::Vector2d(const Point&)> force;
  std::function<double(const Point&)> source;
};

/// Known ids: "constant", "darcy", "forchheimer".
ManufacturedCase manufactured_case(const std::string& id);

/// Material on a mesh with force and source projected onto cell averages.
Material case_material(const ManufacturedCase& mcase, const Mesh& mesh);

struct ConvergenceReport {
  std::vector<double> h;
  std::vector<double> err_u;
  std::vector<double> err_p;
  std::vector<double> err_q;
  std::vector<double> rate_u;  // empty entry (NaN) on the first level
  std::vector<double> rate_p;
  std::vector<double> rate_q;
};

/// One time step from the interpolated exact state on nested structured
/// meshes of the unit square with n0 * 2^l cells per side.
ConvergenceReport convergence_study(const std::string& case_id, int levels,
                                    const SchemeConfig& config,
                                    MeshPattern pattern = MeshPattern::Diagonal, int n0 = 4);

void write_convergence_csv(const ConvergenceReport& report, std::ostream& out);

struct SweepRow {
  int mesh_index = 0;
  int material_index = 0;
  DissipationKind kind = DissipationKind::Lumped;
  double c_est = 0.0;
  double C_est = 0.0;
};

/// check_assumption1 over every (mesh, material, kind). Material entries
/// are templates: empty or single-entry cell arrays are replicated.
/// Throws if any ratio is not finite and positive.
std::vector<SweepRow> assumption1_sweep(const std::vector<Mesh>& meshes,
                                        const std::vector<Material>& materials,
                                        const std::vector<DissipationKind>& kinds, int samples,
                                        std::uint64_t seed);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

/// Replicates single-entry (or fills empty) per-cell arrays of a template.
Material expand_material(const Material& tmpl, int num_cells);

}  // namespace poroflow

#endif  // POROFLOW_VERIFY_HPP
