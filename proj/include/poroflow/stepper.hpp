#ifndef POROFLOW_STEPPER_HPP
#define POROFLOW_STEPPER_HPP

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "poroflow/forms.hpp"
#include "poroflow/mesh.hpp"
#include "poroflow/spaces.hpp"

namespace poroflow {

/// One time level. theta is always recovered from (u, p) and never
/// advanced independently.
struct State {
  double time = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd p;
  Eigen::VectorXd q;
  Eigen::VectorXd theta;
};

struct SchemeConfig {
  FluxSpace flux_space = FluxSpace::RT0;
  DissipationKind dissipation = DissipationKind::Exact;
  double tau = 0.01;
  int n_steps = 1;
  double newton_tol_rel = 1e-10;
  double newton_tol_abs = 1e-13;
  int newton_max_iter = 50;
  double eps_reg = -1.0;  // negative: default_eps_reg(material)
  bool line_search = false;
};

/// Solver failure (Newton divergence, singular factorization).
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

private:
  int step_;
};

/// Energy or mass-conservation certificate violated.
class InvariantError : public std::runtime_error {
public:
  InvariantError(const std::string& what, int step) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

private:
  int step_;
};

struct LedgerEntry {
  int step = 0;
  double time = 0.0;
  double energy = 0.0;
  double elastic = 0.0;
  double pressure_term = 0.0;
  double dissipation = 0.0;
  double cum_dissipation = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  int newton_iters = 0;
};

struct EnergyLedger {
  std::vector<LedgerEntry> entries;
};

struct StepDiagnostics {
  int newton_iters = 0;
  std::vector<double> residual_norms;
  /// Worst per-cell mass balance over all Newton iterates, relative to
  /// max(1, |theta_K|).
  double max_mass_residual = 0.0;
  double objective = 0.0;             // E_h(u^n, theta^n) + tau D_h(q^n)
  double competitor_objective = 0.0;  // E_h(u^{n-1}, theta^{n-1})
};

enum class InitialGuess { Previous, Zero };

struct StepResult {
  State state;
  StepDiagnostics diagnostics;
};

struct RunResult {
  State final_state;
  EnergyLedger ledger;
  std::vector<State> states;
  std::vector<StepDiagnostics> diagnostics;
};

struct EnergyReport {
  bool pass = true;
  double worst_slack = 0.0;
  int worst_step = 0;
  std::string message;
};

/// Implicit Euler for the saddle-point system via monolithic Newton.
/// The mesh, material and layout must outlive the stepper.
class Stepper {
public:
  Stepper(const Mesh& mesh, const Material& material, const DofLayout& layout,
          SchemeConfig config);

  const SchemeConfig& config() const { return config_; }
  const SystemMatrices& system() const { return system_; }
  const Dissipation& dissipation() const { return dissipation_; }
  double eps_reg() const { return eps_reg_; }

  /// Displacement in equilibrium with the given pressure, q = 0, t = 0.
  State initialize(const Eigen::VectorXd& p0) const;

  StepResult step(const State& previous, InitialGuess guess = InitialGuess::Previous) const;

  /// n_steps steps from initialize(p0). Violations of the energy inequality
  /// or of local mass conservation throw InvariantError. The observer sees
  /// every state including the initial one.
  RunResult run(const Eigen::VectorXd& p0,
                const std::function<void(int, const State&)>& observer = {}) const;

  /// theta = inv_M p + alpha * Pi div u.
  Eigen::VectorXd recover_theta(const Eigen::VectorXd& u, const Eigen::VectorXd& p) const;

  /// Per-cell balance (|K|(theta - theta_prev) + tau int div q - tau |K| g) / |K|.
  Eigen::VectorXd mass_residual(const State& previous, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& p, const Eigen::VectorXd& q) const;

  EnergyParts energy(const State& state) const;
  LedgerEntry ledger_entry(int step, const State& state, const LedgerEntry* initial,
                           double cum_dissipation, int newton_iters) const;

private:
  const Mesh& mesh_;
  const Material& material_;
  const DofLayout& layout_;
  SchemeConfig config_;
  SystemMatrices system_;
  Dissipation dissipation_;
  double eps_reg_;
  // Blocks restricted to unconstrained DOFs.
  SparseMatrix select_u_;
  SparseMatrix select_q_;
  SparseMatrix elasticity_free_;
  SparseMatrix coupling_free_;
  SparseMatrix divergence_free_;
};

/// Checks the cumulative inequality at every prefix and the per-step
/// decrease E_n + tau D_n <= E_{n-1}, reporting the worst slack.
EnergyReport check_energy(const EnergyLedger& ledger);

}  // namespace poroflow

#endif  // POROFLOW_STEPPER_HPP
