#include "poroflow/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseLU>

namespace poroflow {

using Triplet = Eigen::Triplet<double>;

namespace {

SparseMatrix selection(int full, const std::vector<int>& free) {
  std::vector<Triplet> t;
  t.reserve(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) t.emplace_back(free[i], static_cast<int>(i), 1.0);
  SparseMatrix s(full, static_cast<Eigen::Index>(free.size()));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

void append(std::vector<Triplet>& out, const SparseMatrix& m, int row0, int col0, double scale,
            bool transpose) {
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      const int r = static_cast<int>(transpose ? it.col() : it.row());
      const int c = static_cast<int>(transpose ? it.row() : it.col());
      out.emplace_back(row0 + r, col0 + c, scale * it.value());
    }
  }
}

// Tolerance used by the ledger checks, relative to the energy scale.
constexpr double kEnergyTol = 1e-10;

}  // namespace

Stepper::Stepper(const Mesh& mesh, const Material& material, const DofLayout& layout,
                 SchemeConfig config)
    : mesh_(mesh),
      material_(material),
      layout_(layout),
      config_(config),
      system_(assemble_system(mesh, material, layout)),
      dissipation_(config.dissipation, mesh, material, layout) {
  material_.validate(mesh_.num_cells());
  if (layout_.flux_space() != config_.flux_space) {
    throw std::invalid_argument("DOF layout flux space does not match the scheme configuration");
  }
  validate_scheme(config_.flux_space, config_.dissipation, mesh_, material_);
  if (!(config_.tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  if (config_.n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
  if (config_.newton_max_iter < 1) throw std::invalid_argument("newton_max_iter must be >= 1");
  eps_reg_ = config_.eps_reg < 0.0 ? default_eps_reg(material_) : config_.eps_reg;

  select_u_ = selection(layout_.num_displacement(), layout_.free_displacement());
  select_q_ = selection(layout_.num_flux(), layout_.free_flux());
  elasticity_free_ = select_u_.transpose() * system_.elasticity * select_u_;
  coupling_free_ = select_u_.transpose() * system_.coupling;
  divergence_free_ = system_.divergence * select_q_;
}

Eigen::VectorXd Stepper::recover_theta(const Eigen::VectorXd& u, const Eigen::VectorXd& p) const {
  return material_.inv_M * p +
         (system_.coupling.transpose() * u).cwiseQuotient(system_.cell_area);
}

State Stepper::initialize(const Eigen::VectorXd& p0) const {
  if (p0.size() != mesh_.num_cells() || !p0.allFinite()) {
    throw std::invalid_argument("initial pressure must be finite with one value per cell");
  }
  State state;
  state.time = 0.0;
  state.p = p0;
  state.q = Eigen::VectorXd::Zero(layout_.num_flux());
  state.u = Eigen::VectorXd::Zero(layout_.num_displacement());
  if (elasticity_free_.rows() > 0) {
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(elasticity_free_);
    if (lu.info() != Eigen::Success) throw SolverError("singular elasticity system", 0);
    const Eigen::VectorXd rhs =
        select_u_.transpose() * system_.load + coupling_free_ * p0;
    state.u = select_u_ * Eigen::VectorXd(lu.solve(rhs));
  }
  state.theta = recover_theta(state.u, state.p);
  return state;
}

Eigen::VectorXd Stepper::mass_residual(const State& previous, const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
  const Eigen::VectorXd& area = system_.cell_area;
  const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(material_.source.data(),
                                                              mesh_.num_cells());
  Eigen::VectorXd r = material_.inv_M * area.cwiseProduct(p - previous.p) +
                      system_.coupling.transpose() * (u - previous.u) +
                      config_.tau * (system_.divergence * q) - config_.tau * area.cwiseProduct(g);
  return r.cwiseQuotient(area);
}

EnergyParts Stepper::energy(const State& state) const {
  return energy_parts(system_, material_, state.u, state.theta);
}

StepResult Stepper::step(const State& previous, InitialGuess guess) const {
  const double tau = config_.tau;
  const int nu = static_cast<int>(select_u_.cols());
  const int nc = mesh_.num_cells();
  const int nq = static_cast<int>(select_q_.cols());
  const int step_index = static_cast<int>(std::lround(previous.time / tau)) + 1;

  Eigen::VectorXd u = previous.u;
  Eigen::VectorXd p = previous.p;
  Eigen::VectorXd q = guess == InitialGuess::Previous ? previous.q
                                                      : Eigen::VectorXd::Zero(layout_.num_flux());

  const Eigen::VectorXd& area = system_.cell_area;
  const Eigen::VectorXd g =
      Eigen::Map<const Eigen::VectorXd>(material_.source.data(), nc);
  const double scale_u = 2.0 * material_.mu_e + material_.lambda_e;
  const double scale_q = tau * material_.mu_f / material_.permeability_scale();

  auto residual = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& pp,
                      const Eigen::VectorXd& qq) {
    Eigen::VectorXd r(nu + nq + nc);
    r.segment(0, nu) = select_u_.transpose() *
                       (system_.elasticity * uu - system_.coupling * pp - system_.load);
    r.segment(nu, nq) =
        tau * (select_q_.transpose() *
               (dissipation_.residual(qq) - system_.divergence.transpose() * pp));
    r.segment(nu + nq, nc) =
        -(material_.inv_M * area.cwiseProduct(pp - previous.p) +
          system_.coupling.transpose() * (uu - previous.u) + tau * (system_.divergence * qq) -
          tau * area.cwiseProduct(g));
    return r;
  };
  auto norm = [&](const Eigen::VectorXd& r) {
    const double ru = r.segment(0, nu).squaredNorm() / (scale_u * scale_u);
    const double rq = r.segment(nu, nq).squaredNorm() / (scale_q * scale_q);
    const double rp = r.segment(nu + nq, nc).squaredNorm();
    return std::sqrt(ru + rq + rp);
  };
  auto mass_check = [&](const Eigen::VectorXd& uu, const Eigen::VectorXd& pp,
                        const Eigen::VectorXd& qq) {
    const Eigen::VectorXd m = mass_residual(previous, uu, pp, qq);
    const Eigen::VectorXd theta = recover_theta(uu, pp);
    double worst = 0.0;
    for (int c = 0; c < nc; ++c) {
      worst = std::max(worst, std::abs(m[c]) / std::max(1.0, std::abs(theta[c])));
    }
    return worst;
  };

  // Static part of the symmetric Newton matrix
  //   [ A   0      -B      ]
  //   [ 0   tau H  -tau D^T]
  //   [-B^T -tau D -inv_M Mp]
  std::vector<Triplet> fixed;
  append(fixed, elasticity_free_, 0, 0, 1.0, false);
  append(fixed, coupling_free_, 0, nu + nq, -1.0, false);
  append(fixed, coupling_free_, nu + nq, 0, -1.0, true);
  append(fixed, divergence_free_, nu, nu + nq, -tau, true);
  append(fixed, divergence_free_, nu + nq, nu, -tau, false);
  for (int c = 0; c < nc; ++c) {
    fixed.emplace_back(nu + nq + c, nu + nq + c, -material_.inv_M * area[c]);
  }

  StepResult result;
  StepDiagnostics& diag = result.diagnostics;
  Eigen::VectorXd r = residual(u, p, q);
  const double initial_norm = norm(r);
  double current = initial_norm;
  diag.residual_norms.push_back(current);
  const double target = config_.newton_tol_abs + config_.newton_tol_rel * initial_norm;

  Eigen::SparseLU<SparseMatrix> lu;
  int iter = 0;
  while (current > target) {
    if (iter == config_.newton_max_iter) {
      std::ostringstream msg;
      msg << "Newton did not converge in step " << step_index << " after " << iter
          << " iterations (residual " << current << ", target " << target << ")";
      throw SolverError(msg.str(), step_index);
    }
    std::vector<Triplet> triplets = fixed;
    const SparseMatrix h = select_q_.transpose() * dissipation_.jacobian(q, eps_reg_) * select_q_;
    append(triplets, h, nu, nu, tau, false);
    SparseMatrix jac(nu + nq + nc, nu + nq + nc);
    jac.setFromTriplets(triplets.begin(), triplets.end());
    lu.compute(jac);
    if (lu.info() != Eigen::Success) {
      throw SolverError("singular Newton matrix in step " + std::to_string(step_index),
                        step_index);
    }
    const Eigen::VectorXd delta = lu.solve(-r);
    if (!delta.allFinite()) {
      throw SolverError("non-finite Newton update in step " + std::to_string(step_index),
                        step_index);
    }

    double damping = 1.0;
    Eigen::VectorXd u_new, p_new, q_new, r_new;
    double next = 0.0;
    for (int attempt = 0;; ++attempt) {
      u_new = u + damping * (select_u_ * delta.segment(0, nu));
      q_new = q + damping * (select_q_ * delta.segment(nu, nq));
      p_new = p + damping * delta.segment(nu + nq, nc);
      r_new = residual(u_new, p_new, q_new);
      next = norm(r_new);
      if (!config_.line_search || next <= current || attempt == 10) break;
      damping *= 0.5;
    }
    u = std::move(u_new);
    p = std::move(p_new);
    q = std::move(q_new);
    r = std::move(r_new);
    current = next;
    ++iter;
    diag.residual_norms.push_back(current);
    diag.max_mass_residual = std::max(diag.max_mass_residual, mass_check(u, p, q));
  }
  diag.newton_iters = iter;
  diag.max_mass_residual = std::max(diag.max_mass_residual, mass_check(u, p, q));

  State& next_state = result.state;
  next_state.time = previous.time + tau;
  next_state.u = std::move(u);
  next_state.p = std::move(p);
  next_state.q = std::move(q);
  next_state.theta = recover_theta(next_state.u, next_state.p);

  diag.objective = energy(next_state).energy + tau * dissipation_.value(next_state.q);
  diag.competitor_objective = energy(previous).energy;
  return result;
}

LedgerEntry Stepper::ledger_entry(int step, const State& state, const LedgerEntry* initial,
                                  double cum_dissipation, int newton_iters) const {
  const EnergyParts parts = energy(state);
  LedgerEntry e;
  e.step = step;
  e.time = state.time;
  e.energy = parts.energy;
  e.elastic = parts.elastic;
  e.pressure_term = parts.pressure_term;
  e.dissipation = step == 0 ? 0.0 : dissipation_.value(state.q);
  e.cum_dissipation = cum_dissipation + config_.tau * e.dissipation;
  // 2 E_h plus accumulated dissipation; equals the classical form for f = 0.
  const double stored = parts.elastic + parts.pressure_term - 2.0 * parts.load_work;
  e.lhs = stored + e.cum_dissipation;
  e.rhs = initial ? initial->rhs : stored;
  e.slack = e.rhs - e.lhs;
  e.newton_iters = newton_iters;
  return e;
}

RunResult Stepper::run(const Eigen::VectorXd& p0,
                       const std::function<void(int, const State&)>& observer) const {
  RunResult out;
  State state = initialize(p0);
  out.ledger.entries.push_back(ledger_entry(0, state, nullptr, 0.0, 0));
  if (observer) observer(0, state);
  out.states.push_back(state);
  const bool certify = !material_.has_source();

  for (int n = 1; n <= config_.n_steps; ++n) {
    StepResult step_result = step(state);
    state = std::move(step_result.state);
    const LedgerEntry& initial = out.ledger.entries.front();
    out.ledger.entries.push_back(ledger_entry(n, state, &initial,
                                              out.ledger.entries.back().cum_dissipation,
                                              step_result.diagnostics.newton_iters));
    out.diagnostics.push_back(step_result.diagnostics);
    if (observer) observer(n, state);
    out.states.push_back(state);

    if (step_result.diagnostics.max_mass_residual > 1e-12) {
      std::ostringstream msg;
      msg << "local mass conservation violated in step " << n << " (relative residual "
          << step_result.diagnostics.max_mass_residual << ")";
      throw InvariantError(msg.str(), n);
    }
    if (certify) {
      EnergyLedger prefix;
      prefix.entries.assign(out.ledger.entries.end() - 2, out.ledger.entries.end());
      prefix.entries.front().step = n - 1;
      const EnergyReport report = check_energy(prefix);
      const LedgerEntry& last = out.ledger.entries.back();
      if (!report.pass || last.lhs > last.rhs + kEnergyTol * std::abs(last.rhs)) {
        throw InvariantError("energy dissipation inequality violated in step " +
                                 std::to_string(n) + ": " + report.message,
                             n);
      }
    }
  }
  out.final_state = state;
  return out;
}

EnergyReport check_energy(const EnergyLedger& ledger) {
  EnergyReport report;
  if (ledger.entries.empty()) {
    report.pass = false;
    report.message = "empty ledger";
    return report;
  }
  report.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
    const LedgerEntry& e = ledger.entries[i];
    if (e.slack < report.worst_slack) {
      report.worst_slack = e.slack;
      report.worst_step = e.step;
    }
    if (e.lhs > e.rhs + kEnergyTol * std::abs(e.rhs)) {
      report.pass = false;
      std::ostringstream msg;
      msg << "cumulative inequality fails at step " << e.step << ": lhs " << e.lhs << " > rhs "
          << e.rhs;
      report.message = msg.str();
      return report;
    }
    if (i == 0) continue;
    const LedgerEntry& prev = ledger.entries[i - 1];
    const double tau = e.time - prev.time;
    const double scale = std::abs(prev.energy) + 0.5 * (prev.elastic + prev.pressure_term);
    if (e.energy + tau * e.dissipation > prev.energy + kEnergyTol * scale) {
      report.pass = false;
      std::ostringstream msg;
      msg << "objective increases at step " << e.step << ": E + tau D = "
          << e.energy + tau * e.dissipation << " > previous E = " << prev.energy;
      report.message = msg.str();
      return report;
    }
  }
  return report;
}

}  // namespace poroflow
