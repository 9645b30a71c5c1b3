#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "poroflow/verify.hpp"

using namespace poroflow;

namespace {

double max_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("oracle on zero data") {
  OracleProblem problem{rhombus_mesh(), Material::homogeneous(2), {}, {}, {}};
  problem.material.beta = 1.0;
  problem.u_prev = Eigen::VectorXd::Zero(8);
  problem.theta_prev = Eigen::VectorXd::Zero(2);
  const OracleSolution s = oracle_minimize(problem);
  CHECK(s.u.norm() == 0.0);
  CHECK(s.q.norm() == 0.0);
  CHECK(s.theta.norm() == 0.0);
}

TEST_CASE("oracle agrees with the dense KKT solve when beta = 0") {
  int checked = 0;
  for (const auto& [label, problem] : oracle_corpus()) {
    if (problem.material.beta != 0.0) continue;
    CAPTURE(label);
    const OracleSolution gd = oracle_minimize(problem);
    const OracleSolution kkt = kkt_direct_solve(problem);
    double scale = 1.0;
    for (const Eigen::VectorXd* v : {&kkt.u, &kkt.q, &kkt.theta}) {
      if (v->size() > 0) scale = std::max(scale, v->cwiseAbs().maxCoeff());
    }
    CHECK(max_diff(gd.u, kkt.u) < 1e-10 * scale);
    CHECK(max_diff(gd.q, kkt.q) < 1e-10 * scale);
    CHECK(max_diff(gd.theta, kkt.theta) < 1e-10 * scale);
    ++checked;
  }
  CHECK(checked == 8);
}

TEST_CASE("KKT solve rejects the nonlinear problem") {
  OracleProblem problem = oracle_corpus().at(1).second;
  REQUIRE(problem.material.beta > 0.0);
  CHECK_THROWS(kkt_direct_solve(problem));
}

TEST_CASE("stepper matches the oracle on the corpus") {
  const auto corpus = oracle_corpus();
  CHECK(corpus.size() >= 16);
  for (const auto& [label, problem] : corpus) {
    CAPTURE(label);
    const OracleComparison cmp = compare_with_stepper(problem, label);
    CHECK(cmp.max_discrepancy < 1e-6 * cmp.scale);
    CHECK(cmp.newton_iters >= 1);
  }
}

TEST_CASE("oracle size limit") {
  OracleProblem problem{structured_mesh(6, 6, 1, 1), {}, {}, {}, {}};
  problem.material = Material::homogeneous(problem.mesh.num_cells());
  problem.u_prev = Eigen::VectorXd::Zero(2 * problem.mesh.num_vertices());
  problem.theta_prev = Eigen::VectorXd::Zero(problem.mesh.num_cells());
  CHECK_THROWS_AS(oracle_minimize(problem), std::invalid_argument);
}

TEST_CASE("manufactured cases") {
  CHECK_THROWS(manufactured_case("unknown"));
  const ManufacturedCase darcy = manufactured_case("darcy");
  // The exact flux satisfies the Darcy law: mu/kappa q = -grad p.
  const double h = 1e-6;
  for (const Point& x : {Point(0.3, 0.7), Point(0.81, 0.12)}) {
    const Eigen::Vector2d grad((darcy.p(x + Point(h, 0)) - darcy.p(x - Point(h, 0))) / (2 * h),
                               (darcy.p(x + Point(0, h)) - darcy.p(x - Point(0, h))) / (2 * h));
    CHECK((darcy.constants.mu_f / darcy.kappa * darcy.q(x) + grad).norm() < 1e-8);
  }
  const ManufacturedCase fo = manufactured_case("forchheimer");
  CHECK(fo.constants.beta > 0.0);
  for (const Point& x : {Point(0.3, 0.7), Point(0.81, 0.12)}) {
    const Eigen::Vector2d q = fo.q(x);
    const Eigen::Vector2d grad((fo.p(x + Point(h, 0)) - fo.p(x - Point(h, 0))) / (2 * h),
                               (fo.p(x + Point(0, h)) - fo.p(x - Point(0, h))) / (2 * h));
    const Eigen::Vector2d law = fo.constants.mu_f / fo.kappa * q +
                                fo.constants.rho * fo.constants.beta * q.norm() * q + grad;
    CHECK(law.norm() < 1e-8);
    // Normal flux vanishes on the boundary.
    CHECK(std::abs(fo.q(Point(0.0, x.y())).x()) < 1e-14);
    CHECK(std::abs(fo.q(Point(1.0, x.y())).x()) < 1e-14);
  }

  SchemeConfig cfg;
  cfg.tau = 1.0;
  const ConvergenceReport constant = convergence_study("constant", 3, cfg);
  for (double e : constant.err_p) CHECK(e < 1e-12);
  for (double e : constant.err_q) CHECK(e < 1e-12);
}

TEST_CASE("linear convergence study") {
  SchemeConfig cfg;
  cfg.tau = 1.0;
  const ConvergenceReport r = convergence_study("darcy", 3, cfg);
  REQUIRE(r.h.size() == 3);
  CHECK(std::isnan(r.rate_p[0]));
  CHECK(r.rate_p.back() >= 0.8);
  CHECK(r.rate_q.back() >= 0.8);
  for (std::size_t i = 1; i < r.h.size(); ++i) {
    CHECK(r.err_p[i] < r.err_p[i - 1]);
    CHECK(std::isfinite(r.rate_u[i]));
  }
  std::ostringstream csv;
  write_convergence_csv(r, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "# poroflow-convergence v1");
  std::getline(lines, line);
  CHECK(line == "h,err_u,err_p,err_q,rate_u,rate_p,rate_q");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3);
  CHECK_THROWS(convergence_study("darcy", 2, cfg));
}

TEST_CASE("consistency sweep") {
  std::vector<Mesh> meshes{structured_mesh(3, 3, 1, 1, MeshPattern::Shifted),
                           structured_mesh(6, 6, 1, 1, MeshPattern::Shifted)};
  std::vector<Material> materials(2);
  materials[1].beta = 2.0;
  materials[1].kappa = {0.3 * Eigen::Matrix2d::Identity()};
  const std::vector<DissipationKind> kinds{DissipationKind::Lumped, DissipationKind::Quadrature};
  const auto rows = assumption1_sweep(meshes, materials, kinds, 20, 99);
  CHECK(rows.size() == 8);
  for (const SweepRow& r : rows) {
    CHECK(r.c_est > 0.0);
    CHECK(r.c_est <= r.C_est);
    CHECK(std::isfinite(r.C_est));
  }
  // Deterministic for a fixed seed.
  const auto again = assumption1_sweep(meshes, materials, kinds, 20, 99);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].c_est == rows[i].c_est);

  std::ostringstream csv;
  write_sweep_csv(rows, csv);
  CHECK(csv.str().rfind("# poroflow-assumption1 v1\nmesh,material,kind,c_est,C_est\n", 0) == 0);
  CHECK_THROWS(assumption1_sweep(meshes, materials, {DissipationKind::Exact}, 5, 1));
}

TEST_CASE("material templates") {
  Material tmpl;
  tmpl.kappa = {2.0 * Eigen::Matrix2d::Identity()};
  const Material m = expand_material(tmpl, 5);
  CHECK(m.kappa.size() == 5);
  CHECK(m.force.size() == 5);
  CHECK(m.source.size() == 5);
  CHECK(m.kappa[4](0, 0) == 2.0);
  CHECK_NOTHROW(m.validate(5));
}
