#include "poroflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

namespace poroflow {

namespace {

using std::numbers::pi;

// Reduced objective of one minimization step with theta eliminated.
class ReducedObjective {
public:
  explicit ReducedObjective(const OracleProblem& problem)
      : problem_(problem),
        layout_(problem.mesh, problem.config.flux_space),
        system_(assemble_system(problem.mesh, problem.material, layout_)),
        dissipation_(problem.config.dissipation, problem.mesh, problem.material, layout_) {
    const int free = static_cast<int>(layout_.free_displacement().size() +
                                      layout_.free_flux().size());
    if (free > kOracleMaxDofs) {
      throw std::invalid_argument("oracle problem has " + std::to_string(free) +
                                  " unconstrained DOFs (limit " +
                                  std::to_string(kOracleMaxDofs) + ")");
    }
    area_ = system_.cell_area;
    source_ = Eigen::Map<const Eigen::VectorXd>(problem.material.source.data(),
                                                problem.mesh.num_cells());
  }

  int size() const {
    return static_cast<int>(layout_.free_displacement().size() + layout_.free_flux().size());
  }
  int num_u() const { return static_cast<int>(layout_.free_displacement().size()); }
  const DofLayout& layout() const { return layout_; }
  const SystemMatrices& system() const { return system_; }
  const Dissipation& dissipation() const { return dissipation_; }

  void unpack(const Eigen::VectorXd& x, Eigen::VectorXd& u, Eigen::VectorXd& q) const {
    u = Eigen::VectorXd::Zero(layout_.num_displacement());
    q = Eigen::VectorXd::Zero(layout_.num_flux());
    const auto& fu = layout_.free_displacement();
    const auto& fq = layout_.free_flux();
    for (std::size_t i = 0; i < fu.size(); ++i) u[fu[i]] = x[i];
    for (std::size_t i = 0; i < fq.size(); ++i) q[fq[i]] = x[fu.size() + i];
  }

  Eigen::VectorXd theta(const Eigen::VectorXd& q) const {
    const double tau = problem_.config.tau;
    return problem_.theta_prev - tau * (system_.divergence * q).cwiseQuotient(area_) +
           tau * source_;
  }

  Eigen::VectorXd pressure(const Eigen::VectorXd& u, const Eigen::VectorXd& theta) const {
    return (theta - (system_.coupling.transpose() * u).cwiseQuotient(area_)) /
           problem_.material.inv_M;
  }

  double value(const Eigen::VectorXd& x) const {
    Eigen::VectorXd u, q;
    unpack(x, u, q);
    const Eigen::VectorXd th = theta(q);
    return problem_.config.tau * dissipation_.value(q) +
           energy_parts(system_, problem_.material, u, th).energy;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd u, q;
    unpack(x, u, q);
    const Eigen::VectorXd p = pressure(u, theta(q));
    const Eigen::VectorXd gu = system_.elasticity * u - system_.load - system_.coupling * p;
    const Eigen::VectorXd gq = problem_.config.tau *
                               (dissipation_.residual(q) - system_.divergence.transpose() * p);
    Eigen::VectorXd g(size());
    const auto& fu = layout_.free_displacement();
    const auto& fq = layout_.free_flux();
    for (std::size_t i = 0; i < fu.size(); ++i) g[i] = gu[fu[i]];
    for (std::size_t i = 0; i < fq.size(); ++i) g[fu.size() + i] = gq[fq[i]];
    return g;
  }

  OracleSolution solution(const Eigen::VectorXd& x) const {
    OracleSolution s;
    unpack(x, s.u, s.q);
    s.theta = theta(s.q);
    s.p = pressure(s.u, s.theta);
    return s;
  }

private:
  const OracleProblem& problem_;
  DofLayout layout_;
  SystemMatrices system_;
  Dissipation dissipation_;
  Eigen::VectorXd area_;
  Eigen::VectorXd source_;
};

}  // namespace

OracleSolution oracle_minimize(const OracleProblem& problem, int max_iterations) {
  problem.material.validate(problem.mesh.num_cells());
  validate_scheme(problem.config.flux_space, problem.config.dissipation, problem.mesh,
                  problem.material);
  const ReducedObjective objective(problem);
  const int n = objective.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = objective.gradient(x);
  double fx = objective.value(x);
  const double tolerance = 1e-10 * g.norm();

  std::deque<double> recent{fx};
  double step = g.norm() > 0.0 ? 1.0 / g.norm() : 1.0;
  int iter = 0;
  while (g.norm() > tolerance && g.norm() > 0.0) {
    if (iter == max_iterations) {
      throw std::runtime_error("oracle gradient descent did not converge (|grad| = " +
                               std::to_string(g.norm()) + ")");
    }
    const double reference = *std::max_element(recent.begin(), recent.end());
    const double slack = 1e-13 * std::abs(reference);
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    for (int backtrack = 0;; ++backtrack) {
      x_new = x - step * g;
      f_new = objective.value(x_new);
      if (f_new <= reference - 1e-4 * step * g.squaredNorm() + slack || backtrack == 60) break;
      step *= 0.5;
    }
    const Eigen::VectorXd g_new = objective.gradient(x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    step = sy > 0.0 ? s.squaredNorm() / sy : 1.0 / std::max(g_new.norm(), 1e-300);
    x = x_new;
    g = g_new;
    fx = f_new;
    recent.push_back(fx);
    if (recent.size() > 10) recent.pop_front();
    ++iter;
  }

  OracleSolution out = objective.solution(x);
  out.iterations = iter;
  out.gradient_norm = g.norm();
  return out;
}

OracleSolution kkt_direct_solve(const OracleProblem& problem) {
  if (problem.material.beta != 0.0) {
    throw std::invalid_argument("direct KKT solve requires beta = 0");
  }
  const ReducedObjective objective(problem);
  const DofLayout& layout = objective.layout();
  const SystemMatrices& sys = objective.system();
  const auto& fu = layout.free_displacement();
  const auto& fq = layout.free_flux();
  const int nu = static_cast<int>(fu.size());
  const int nq = static_cast<int>(fq.size());
  const int nc = problem.mesh.num_cells();
  const double tau = problem.config.tau;

  const Eigen::MatrixXd a_full = Eigen::MatrixXd(sys.elasticity);
  const Eigen::MatrixXd b_full = Eigen::MatrixXd(sys.coupling);
  const Eigen::MatrixXd d_full = Eigen::MatrixXd(sys.divergence);
  const Eigen::MatrixXd h_full = Eigen::MatrixXd(
      objective.dissipation().jacobian(Eigen::VectorXd::Zero(layout.num_flux()), 0.0));

  Eigen::MatrixXd a(nu, nu), g(nc, nu), d(nc, nq), h(nq, nq);
  Eigen::VectorXd f(nu);
  for (int i = 0; i < nu; ++i) {
    f[i] = sys.load[fu[i]];
    for (int j = 0; j < nu; ++j) a(i, j) = a_full(fu[i], fu[j]);
    for (int c = 0; c < nc; ++c) g(c, i) = b_full(fu[i], c) / sys.cell_area[c];
  }
  for (int c = 0; c < nc; ++c) {
    for (int j = 0; j < nq; ++j) d(c, j) = d_full(c, fq[j]);
  }
  for (int i = 0; i < nq; ++i) {
    for (int j = 0; j < nq; ++j) h(i, j) = h_full(fq[i], fq[j]);
  }
  const Eigen::MatrixXd area = sys.cell_area.asDiagonal();
  const Eigen::MatrixXd w = area / problem.material.inv_M;

  // Unknown order: u, theta, q, lambda.
  const int n = nu + 2 * nc + nq;
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const int it = nu;
  const int iq = nu + nc;
  const int il = nu + nc + nq;
  kkt.block(0, 0, nu, nu) = a + g.transpose() * w * g;
  kkt.block(0, it, nu, nc) = -g.transpose() * w;
  rhs.segment(0, nu) = f;
  kkt.block(it, 0, nc, nu) = -w * g;
  kkt.block(it, it, nc, nc) = w;
  kkt.block(it, il, nc, nc) = area;
  kkt.block(iq, iq, nq, nq) = tau * h;
  kkt.block(iq, il, nq, nc) = tau * d.transpose();
  kkt.block(il, it, nc, nc) = area;
  kkt.block(il, iq, nc, nq) = tau * d;
  const Eigen::VectorXd source =
      Eigen::Map<const Eigen::VectorXd>(problem.material.source.data(), nc);
  rhs.segment(il, nc) = area * (problem.theta_prev + tau * source);

  const Eigen::VectorXd z = kkt.fullPivLu().solve(rhs);
  Eigen::VectorXd x(nu + nq);
  x.segment(0, nu) = z.segment(0, nu);
  x.segment(nu, nq) = z.segment(iq, nq);
  OracleSolution out = objective.solution(x);
  out.theta = z.segment(it, nc);
  out.p = objective.pressure(out.u, out.theta);
  return out;
}

ManufacturedCase manufactured_case(const std::string& id) {
  ManufacturedCase mc;
  mc.id = id;
  Material& m = mc.constants;
  m.lambda_e = 1.0;
  m.mu_e = 1.0;
  m.alpha = 1.0;
  m.inv_M = 1.0;
  m.mu_f = 1.0;
  m.rho = 1.0;
  m.beta = 0.0;
  mc.kappa = 1.0;

  if (id == "constant") {
    mc.u = [](const Point&) { return Eigen::Vector2d::Zero().eval(); };
    mc.p = [](const Point&) { return 1.0; };
    mc.q = [](const Point&) { return Eigen::Vector2d::Zero().eval(); };
    mc.force = [](const Point&) { return Eigen::Vector2d::Zero().eval(); };
    mc.source = [](const Point&) { return 0.0; };
    return mc;
  }

  // u* = (phi, phi) with phi = sin(pi x) sin(pi y); the elastic part of the
  // force is -div(2 mu eps(u*) + lambda tr(eps(u*)) I).
  const double lam = m.lambda_e;
  const double mu = m.mu_e;
  const double alpha = m.alpha;
  mc.u = [](const Point& x) {
    const double phi = std::sin(pi * x.x()) * std::sin(pi * x.y());
    return Eigen::Vector2d(phi, phi);
  };
  auto elastic_force = [lam, mu](const Point& x) {
    const double phi = std::sin(pi * x.x()) * std::sin(pi * x.y());
    const double cc = std::cos(pi * x.x()) * std::cos(pi * x.y());
    const double p2 = pi * pi;
    return Eigen::Vector2d(2.0 * p2 * mu * phi - (mu + lam) * (-p2 * phi + p2 * cc),
                           2.0 * p2 * mu * phi - (mu + lam) * (p2 * cc - p2 * phi));
  };

  if (id == "darcy") {
    const double k_over_mu = mc.kappa / m.mu_f;
    mc.p = [](const Point& x) { return std::cos(pi * x.x()) * std::cos(pi * x.y()); };
    auto grad_p = [](const Point& x) {
      return Eigen::Vector2d(-pi * std::sin(pi * x.x()) * std::cos(pi * x.y()),
                             -pi * std::cos(pi * x.x()) * std::sin(pi * x.y()));
    };
    mc.q = [grad_p, k_over_mu](const Point& x) { return (-k_over_mu * grad_p(x)).eval(); };
    mc.force = [elastic_force, grad_p, alpha](const Point& x) {
      return (elastic_force(x) + alpha * grad_p(x)).eval();
    };
    mc.source = [k_over_mu](const Point& x) {
      return 2.0 * pi * pi * k_over_mu * std::cos(pi * x.x()) * std::cos(pi * x.y());
    };
    return mc;
  }

  if (id == "forchheimer") {
    m.beta = 1.0;
    const double mu_over_k = m.mu_f / mc.kappa;
    const double rb = m.rho * m.beta;
    // q* = (sin(pi x), 0) is gradient compatible; p* integrates -(mu/k q + rho beta |q| q).
    mc.q = [](const Point& x) { return Eigen::Vector2d(std::sin(pi * x.x()), 0.0); };
    mc.p = [mu_over_k, rb](const Point& x) {
      const double s = x.x();
      return -mu_over_k * (1.0 - std::cos(pi * s)) / pi -
             rb * (0.5 * s - std::sin(2.0 * pi * s) / (4.0 * pi));
    };
    auto grad_p = [mu_over_k, rb](const Point& x) {
      const double s = std::sin(pi * x.x());
      return Eigen::Vector2d(-mu_over_k * s - rb * std::abs(s) * s, 0.0);
    };
    mc.force = [elastic_force, grad_p, alpha](const Point& x) {
      return (elastic_force(x) + alpha * grad_p(x)).eval();
    };
    mc.source = [](const Point& x) { return pi * std::cos(pi * x.x()); };
    return mc;
  }

  throw std::invalid_argument("unknown manufactured case '" + id + "'");
}

Material case_material(const ManufacturedCase& mcase, const Mesh& mesh) {
  Material m = mcase.constants;
  const int nc = mesh.num_cells();
  m.kappa.assign(nc, mcase.kappa * Eigen::Matrix2d::Identity());
  const Eigen::VectorXd fx =
      project_q([&](int, const Point& x) { return mcase.force(x).x(); }, mesh);
  const Eigen::VectorXd fy =
      project_q([&](int, const Point& x) { return mcase.force(x).y(); }, mesh);
  const Eigen::VectorXd g = project_q([&](int, const Point& x) { return mcase.source(x); }, mesh);
  m.force.resize(nc);
  m.source.resize(nc);
  for (int c = 0; c < nc; ++c) {
    m.force[c] = Eigen::Vector2d(fx[c], fy[c]);
    m.source[c] = g[c];
  }
  return m;
}

ConvergenceReport convergence_study(const std::string& case_id, int levels,
                                    const SchemeConfig& config, MeshPattern pattern, int n0) {
  if (levels < 3) throw std::invalid_argument("convergence study needs at least 3 levels");
  const ManufacturedCase mc = manufactured_case(case_id);
  const auto& rule = simplex_quadrature(4);
  ConvergenceReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int level = 0; level < levels; ++level) {
    const int n = n0 << level;
    const Mesh mesh = structured_mesh(n, n, 1.0, 1.0, pattern);
    const DofLayout layout(mesh, config.flux_space);
    const Material material = case_material(mc, mesh);
    SchemeConfig cfg = config;
    cfg.n_steps = 1;
    const Stepper stepper(mesh, material, layout, cfg);

    State previous;
    previous.u = interpolate_displacement(mesh, layout, mc.u);
    previous.p = project_q([&](int, const Point& x) { return mc.p(x); }, mesh);
    previous.q = interpolate_flux(mesh, layout, mc.q);
    for (int f : mesh.boundary_faces()) {
      for (int k = 0; k < layout.flux_dofs_per_face(); ++k) {
        previous.q[layout.flux_dofs_per_face() * f + k] = 0.0;
      }
    }
    previous.theta = stepper.recover_theta(previous.u, previous.p);
    const State next = stepper.step(previous).state;

    double eu = 0.0, ep = 0.0, eq = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const double jdet = 2.0 * mesh.cell_area(c);
      const auto dofs = layout.cell_displacement_dofs(mesh, c);
      for (std::size_t k = 0; k < rule.points.size(); ++k) {
        const Point& ref = rule.points[k];
        const Point x = mesh.map_to_physical(c, ref);
        const double w = rule.weights[k] * jdet;
        const std::array<double, 3> hat{1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
        Eigen::Vector2d uh = Eigen::Vector2d::Zero();
        for (int i = 0; i < 3; ++i) {
          uh += hat[i] * Eigen::Vector2d(next.u[dofs[2 * i]], next.u[dofs[2 * i + 1]]);
        }
        eu += w * (uh - mc.u(x)).squaredNorm();
        ep += w * std::pow(next.p[c] - mc.p(x), 2);
        eq += w * (evaluate_flux(mesh, layout, next.q, c, ref) - mc.q(x)).squaredNorm();
      }
    }
    report.h.push_back(1.0 / n);
    report.err_u.push_back(std::sqrt(eu));
    report.err_p.push_back(std::sqrt(ep));
    report.err_q.push_back(std::sqrt(eq));
    auto rate = [&](const std::vector<double>& e) {
      if (level == 0) return nan;
      const std::size_t l = e.size() - 1;
      return std::log(e[l - 1] / e[l]) / std::log(report.h[l - 1] / report.h[l]);
    };
    report.rate_u.push_back(rate(report.err_u));
    report.rate_p.push_back(rate(report.err_p));
    report.rate_q.push_back(rate(report.err_q));
  }
  return report;
}

void write_convergence_csv(const ConvergenceReport& report, std::ostream& out) {
  out << "# poroflow-convergence v1\n";
  out << "h,err_u,err_p,err_q,rate_u,rate_p,rate_q\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < report.h.size(); ++i) {
    out << report.h[i] << ',' << report.err_u[i] << ',' << report.err_p[i] << ','
        << report.err_q[i] << ',' << report.rate_u[i] << ',' << report.rate_p[i] << ','
        << report.rate_q[i] << '\n';
  }
}

Material expand_material(const Material& tmpl, int num_cells) {
  Material m = tmpl;
  auto fill = [num_cells](auto& values, auto fallback) {
    if (values.empty()) {
      values.assign(num_cells, fallback);
    } else if (values.size() == 1) {
      values.assign(num_cells, values.front());
    }
  };
  fill(m.kappa, Eigen::Matrix2d::Identity().eval());
  fill(m.force, Eigen::Vector2d::Zero().eval());
  fill(m.source, 0.0);
  return m;
}

std::vector<SweepRow> assumption1_sweep(const std::vector<Mesh>& meshes,
                                        const std::vector<Material>& materials,
                                        const std::vector<DissipationKind>& kinds, int samples,
                                        std::uint64_t seed) {
  std::vector<SweepRow> rows;
  for (std::size_t mi = 0; mi < meshes.size(); ++mi) {
    const Mesh& mesh = meshes[mi];
    for (std::size_t ki = 0; ki < materials.size(); ++ki) {
      const Material material = expand_material(materials[ki], mesh.num_cells());
      for (DissipationKind kind : kinds) {
        if (kind == DissipationKind::Exact) {
          throw std::invalid_argument("assumption-1 sweep accepts only localized kinds");
        }
        const FluxSpace space =
            kind == DissipationKind::Lumped ? FluxSpace::RT0 : FluxSpace::BDM1;
        validate_scheme(space, kind, mesh, material);
        const DofLayout layout(mesh, space);
        const ConsistencyBounds b =
            check_assumption1(mesh, material, layout, kind, samples, seed + rows.size());
        if (!(b.c_est > 0.0) || !std::isfinite(b.C_est) || b.c_est > b.C_est) {
          throw std::runtime_error("assumption-1 ratio out of (0, inf) on mesh " +
                                   std::to_string(mi));
        }
        rows.push_back(SweepRow{static_cast<int>(mi), static_cast<int>(ki), kind, b.c_est,
                                b.C_est});
      }
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "# poroflow-assumption1 v1\n";
  out << "mesh,material,kind,c_est,C_est\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.mesh_index << ',' << r.material_index << ',' << to_string(r.kind) << ',' << r.c_est
        << ',' << r.C_est << '\n';
  }
}

}  // namespace poroflow

namespace poroflow {

Mesh rhombus_mesh() {
  const double h = std::sqrt(3.0) / 2.0;
  return Mesh({Point(0.0, 0.0), Point(1.0, 0.0), Point(0.5, h), Point(0.5, -h)},
              {{0, 1, 2}, {0, 3, 1}});
}

Mesh centered_square_mesh() {
  return Mesh({Point(0.0, 0.0), Point(1.0, 0.0), Point(1.0, 1.0), Point(0.0, 1.0), Point(0.5, 0.5)},
              {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}});
}

State linear_step_direct(const Mesh& mesh, const Material& material, const DofLayout& layout,
                         const SchemeConfig& config, const State& previous) {
  if (material.beta != 0.0) throw std::invalid_argument("linear_step_direct needs beta = 0");
  const Eigen::MatrixXd a(assemble_elasticity(mesh, material, layout));
  const Eigen::MatrixXd b(assemble_coupling(mesh, material, layout));
  const Eigen::MatrixXd d(assemble_div_constraint(mesh, layout));
  const Eigen::MatrixXd h(m_jacobian(config.dissipation, mesh, material, layout,
                                     Eigen::VectorXd::Zero(layout.num_flux()), 0.0));
  const Eigen::VectorXd f = assemble_load(mesh, material, layout);
  const auto fu = layout.free_displacement();
  const auto fq = layout.free_flux();
  const int nu = static_cast<int>(fu.size());
  const int nq = static_cast<int>(fq.size());
  const int np = mesh.num_cells();
  const double tau = config.tau;

  // Rows: momentum, Darcy law, mass balance.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nu + nq + np, nu + nq + np);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu + nq + np);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nu; ++j) k(i, j) = a(fu[i], fu[j]);
    for (int c = 0; c < np; ++c) k(i, nu + nq + c) = -b(fu[i], c);
    rhs[i] = f[fu[i]];
  }
  for (int i = 0; i < nq; ++i) {
    for (int j = 0; j < nq; ++j) k(nu + i, nu + j) = h(fq[i], fq[j]);
    for (int c = 0; c < np; ++c) k(nu + i, nu + nq + c) = -d(c, fq[i]);
  }
  const Eigen::VectorXd bu_old = b.transpose() * previous.u;
  for (int c = 0; c < np; ++c) {
    const int r = nu + nq + c;
    const double area = mesh.cell_area(c);
    for (int j = 0; j < nu; ++j) k(r, j) = b(fu[j], c);
    for (int j = 0; j < nq; ++j) k(r, nu + j) = tau * d(c, fq[j]);
    k(r, r) = material.inv_M * area;
    rhs[r] = material.inv_M * area * previous.p[c] + bu_old[c] + tau * area * material.source[c];
  }
  const Eigen::VectorXd x = k.fullPivLu().solve(rhs);

  State s;
  s.time = previous.time + tau;
  s.u = Eigen::VectorXd::Zero(layout.num_displacement());
  s.q = Eigen::VectorXd::Zero(layout.num_flux());
  for (int i = 0; i < nu; ++i) s.u[fu[i]] = x[i];
  for (int i = 0; i < nq; ++i) s.q[fq[i]] = x[nu + i];
  s.p = x.tail(np);
  s.theta = material.inv_M * s.p + material.alpha * cell_divergence(mesh, layout, s.u);
  return s;
}

OracleComparison compare_with_stepper(const OracleProblem& problem, const std::string& label) {
  const DofLayout layout(problem.mesh, problem.config.flux_space);
  const Stepper stepper(problem.mesh, problem.material, layout, problem.config);
  State previous;
  previous.u = problem.u_prev;
  const Eigen::VectorXd div_u = stepper.recover_theta(problem.u_prev,
                                                      Eigen::VectorXd::Zero(problem.mesh.num_cells()));
  previous.p = (problem.theta_prev - div_u) / problem.material.inv_M;
  previous.q = Eigen::VectorXd::Zero(layout.num_flux());
  previous.theta = problem.theta_prev;
  const StepResult stepped = stepper.step(previous);
  const OracleSolution oracle = oracle_minimize(problem);

  OracleComparison cmp;
  cmp.label = label;
  cmp.newton_iters = stepped.diagnostics.newton_iters;
  cmp.oracle_iterations = oracle.iterations;
  const State& s = stepped.state;
  double scale = 1.0;
  for (const Eigen::VectorXd* v : {&s.u, &s.q, &s.theta, &s.p}) {
    if (v->size() > 0) scale = std::max(scale, v->cwiseAbs().maxCoeff());
  }
  auto diff = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
  };
  cmp.scale = scale;
  cmp.max_discrepancy = std::max({diff(s.u, oracle.u), diff(s.q, oracle.q),
                                  diff(s.theta, oracle.theta), diff(s.p, oracle.p)});
  return cmp;
}

std::vector<std::pair<std::string, OracleProblem>> oracle_corpus() {
  struct Scheme {
    FluxSpace space;
    DissipationKind kind;
  };
  const std::vector<Scheme> schemes{{FluxSpace::RT0, DissipationKind::Exact},
                                    {FluxSpace::BDM1, DissipationKind::Exact},
                                    {FluxSpace::RT0, DissipationKind::Lumped},
                                    {FluxSpace::BDM1, DissipationKind::Quadrature}};
  std::vector<std::pair<std::string, OracleProblem>> corpus;
  for (int mesh_id = 0; mesh_id < 2; ++mesh_id) {
    const Mesh mesh = mesh_id == 0 ? rhombus_mesh() : centered_square_mesh();
    for (const Scheme& scheme : schemes) {
      for (double beta : {0.0, 2.0}) {
        OracleProblem problem{mesh, Material::homogeneous(mesh.num_cells()), {}, {}, {}};
        problem.material.beta = beta;
        problem.material.alpha = 0.8;
        problem.material.inv_M = 0.5;
        problem.config.flux_space = scheme.space;
        problem.config.dissipation = scheme.kind;
        problem.config.tau = 0.5;
        problem.u_prev = Eigen::VectorXd::Zero(2 * mesh.num_vertices());
        problem.theta_prev.resize(mesh.num_cells());
        for (int c = 0; c < mesh.num_cells(); ++c) {
          problem.theta_prev[c] = c % 2 == 0 ? 1.0 + 0.5 * c : -0.5;
        }
        if (mesh_id == 1) {
          problem.material.force[0] = Eigen::Vector2d(0.3, -0.2);
          problem.u_prev[8] = 0.05;  // interior vertex 4
          problem.u_prev[9] = -0.02;
        }
        const std::string label = std::string(mesh_id == 0 ? "rhombus" : "centered") + "/" +
                                  to_string(scheme.kind) + "/" + to_string(scheme.space) +
                                  "/beta=" + (beta == 0.0 ? "0" : "2");
        corpus.emplace_back(label, std::move(problem));
      }
    }
  }
  return corpus;
}

}  // namespace poroflow
