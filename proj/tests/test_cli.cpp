#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "poroflow/cli.hpp"
#include "poroflow/config.hpp"
#include "poroflow/io.hpp"
#include "poroflow/verify.hpp"

using namespace poroflow;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
[mesh]
nx = 2
ny = 2
[scheme]
flux_space = rt0
dissipation = exact
tau = 0.1
n_steps = 3
)";

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("poroflow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> vtk_section(const std::string& vtk, const std::string& header,
                                     int count) {
  std::istringstream in(vtk.substr(vtk.find(header)));
  std::string line;
  std::getline(in, line);
  if (header.rfind("SCALARS", 0) == 0) std::getline(in, line);  // lookup table
  std::vector<std::string> out;
  for (int i = 0; i < count && std::getline(in, line); ++i) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const RunConfig cfg = parse(kMinimal);
  CHECK(cfg.mesh.nx == 2);
  CHECK(cfg.mesh.pattern == MeshPattern::Diagonal);
  CHECK(cfg.scheme.newton_tol_rel == 1e-10);
  CHECK(cfg.scheme.eps_reg == 0.0);  // beta = 0
  CHECK(cfg.scheme.n_steps == 3);
  CHECK(cfg.output_every == 1);
  CHECK(cfg.emit_csv);
  CHECK(cfg.emit_vtk);
  CHECK(cfg.initial.value == 0.0);

  const RunConfig fo = parse(std::string(kMinimal) + "[material]\nbeta = 2\nrho = 0.5\nkappa = 4\n");
  CHECK(fo.scheme.eps_reg == doctest::Approx(1e-10 * 1.0 / (0.5 * 2.0 * 4.0)));
}

TEST_CASE("config errors carry line and key") {
  CHECK(parse_error(std::string(kMinimal) + "[material]\nbeta = -1\n").find("beta") !=
        std::string::npos);
  CHECK(parse_error(std::string(kMinimal) + "[material]\nbeta = -1\n").find("line 11") !=
        std::string::npos);

  const std::string pairing = parse_error(R"(
[mesh]
nx = 2
ny = 2
[scheme]
flux_space = bdm1
dissipation = lumped
tau = 0.1
n_steps = 1
)");
  CHECK(pairing.find("requires flux_space = rt0") != std::string::npos);
  CHECK(pairing.find("scheme.dissipation") != std::string::npos);

  const std::string tensor = parse_error(R"(
[mesh]
nx = 2
ny = 2
[material]
kappa_xx = 1
kappa_yy = 2
[scheme]
flux_space = rt0
dissipation = lumped
tau = 0.1
n_steps = 1
)");
  CHECK(tensor.find("lumping is only a sufficient approximation for scalar permeabilities") !=
        std::string::npos);

  CHECK(parse_error(std::string(kMinimal) + "[scheme]\n").find("duplicate") == std::string::npos);
  CHECK(parse_error(std::string(kMinimal) + "[output]\ncolour = red\n").find("unknown key") !=
        std::string::npos);
  CHECK(parse_error(std::string(kMinimal) + "[extras]\n").find("unknown section") !=
        std::string::npos);
  CHECK(parse_error("[mesh]\nnx = 2\nny = 2\n[scheme]\nflux_space = rt0\ndissipation = exact\n"
                    "n_steps = 1\n")
            .find("scheme.tau") != std::string::npos);
  const std::string mismatch = parse_error(
      "[mesh]\nnx = two\nny = 2\n[scheme]\nflux_space = rt0\ndissipation = exact\ntau = 1\n"
      "n_steps = 1\n");
  CHECK(mismatch.find("line 2") != std::string::npos);
  CHECK(mismatch.find("mesh.nx") != std::string::npos);
  CHECK(mismatch.find("integer") != std::string::npos);
  CHECK(parse_error(std::string(kMinimal) + "[mesh]\nnx = 3\n").find("duplicate key") !=
        std::string::npos);
  CHECK(parse_error("nx = 2\n").find("outside") != std::string::npos);
  CHECK(parse_error(std::string(kMinimal) + "[mesh]\nfile = m.txt\n").find("cannot be combined") !=
        std::string::npos);
  CHECK(parse_error(std::string(kMinimal) + "[initial]\npulse_box = 0 1 0\n").find("4 numbers") !=
        std::string::npos);
  CHECK(parse_error(std::string(kMinimal) + "[scheme]\n").empty());
}

TEST_CASE("initial pressure") {
  const RunConfig cfg =
      parse(std::string(kMinimal) + "[initial]\npressure = 0.5\npulse_box = 0 0.5 0 1\n"
                                    "pulse_value = 2\n");
  const Mesh mesh = build_mesh(cfg);
  const Eigen::VectorXd p0 = build_initial_pressure(cfg, mesh);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CHECK(p0[c] == (mesh.centroid(c).x() < 0.5 ? 2.0 : 0.5));
  }

  const fs::path dir = scratch("pressure");
  {
    std::ofstream f(dir / "p.txt");
    f << "# per cell\n";
    for (int c = 0; c < 8; ++c) f << c * 0.25 << '\n';
  }
  std::istringstream in(std::string(kMinimal) + "[initial]\npressure_file = p.txt\n");
  const RunConfig from_file = parse_config(in, dir);
  const Eigen::VectorXd pf = build_initial_pressure(from_file, build_mesh(from_file));
  CHECK(pf[7] == 1.75);
  {
    std::ofstream f(dir / "p.txt");
    f << "1 2 3\n";
  }
  CHECK_THROWS_AS(build_initial_pressure(from_file, build_mesh(from_file)), ConfigError);
}

TEST_CASE("mesh round trip through a file") {
  const fs::path dir = scratch("mesh");
  const Mesh m = structured_mesh(5, 3, 2.0, 1.0, MeshPattern::Shifted);
  {
    std::ofstream f(dir / "m.txt");
    write_mesh(m, f);
  }
  std::istringstream in("[mesh]\nfile = m.txt\n[scheme]\nflux_space = rt0\ndissipation = lumped\n"
                        "tau = 0.1\nn_steps = 1\n");
  const RunConfig cfg = parse_config(in, dir);
  const Mesh back = build_mesh(cfg);
  REQUIRE(back.num_cells() == m.num_cells());
  for (int v = 0; v < m.num_vertices(); ++v) {
    CHECK((back.vertex(v) - m.vertex(v)).cwiseAbs().maxCoeff() <= 1e-15);
  }
  for (int c = 0; c < m.num_cells(); ++c) CHECK(back.cell(c) == m.cell(c));

  std::ostringstream out, err;
  CHECK(cmd_mesh_info(dir / "m.txt", out, err) == kExitOk);
  CHECK(out.str().find("cells: " + std::to_string(m.num_cells())) != std::string::npos);
  CHECK(out.str().find("lumped dissipation admissible: yes") != std::string::npos);
  CHECK(cmd_mesh_info(dir / "missing.txt", out, err) == kExitUsage);
}

TEST_CASE("ledger csv round trip") {
  const Mesh mesh = structured_mesh(3, 3, 1, 1);
  Material m = Material::homogeneous(mesh.num_cells());
  m.beta = 1.0;
  const DofLayout layout(mesh, FluxSpace::RT0);
  SchemeConfig cfg;
  cfg.n_steps = 4;
  const Stepper stepper(mesh, m, layout, cfg);
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(mesh.num_cells());
  p0[0] = 1.0 / 3.0;
  const EnergyLedger ledger = stepper.run(p0).ledger;
  std::stringstream buf;
  write_ledger_csv(ledger, buf);
  const EnergyLedger back = read_ledger_csv(buf);
  REQUIRE(back.entries.size() == ledger.entries.size());
  for (std::size_t i = 0; i < ledger.entries.size(); ++i) {
    const LedgerEntry& a = ledger.entries[i];
    const LedgerEntry& b = back.entries[i];
    CHECK(a.step == b.step);
    CHECK(a.time == b.time);
    CHECK(a.energy == b.energy);
    CHECK(a.elastic == b.elastic);
    CHECK(a.pressure_term == b.pressure_term);
    CHECK(a.dissipation == b.dissipation);
    CHECK(a.cum_dissipation == b.cum_dissipation);
    CHECK(a.lhs == b.lhs);
    CHECK(a.rhs == b.rhs);
    CHECK(a.slack == b.slack);
    CHECK(a.newton_iters == b.newton_iters);
  }
  std::istringstream bad("step,time\n");
  CHECK_THROWS(read_ledger_csv(bad));
}

TEST_CASE("vtk output") {
  const Mesh sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0, 1, 2}}, {{0, 2, 3}}});
  const DofLayout layout(sq, FluxSpace::RT0);
  State s;
  s.u = Eigen::VectorXd::Zero(8);
  s.p = Eigen::VectorXd::Zero(2);
  s.theta = Eigen::VectorXd::Zero(2);
  s.q = Eigen::VectorXd::Zero(layout.num_flux());
  std::ostringstream zero;
  write_vtk(s, sq, layout, zero);
  const std::string z = zero.str();
  CHECK(z.find("POINTS 4 double") != std::string::npos);
  CHECK(z.find("CELLS 2 8") != std::string::npos);
  CHECK(z.find("CELL_TYPES 2\n5\n5\n") != std::string::npos);
  for (const auto& line : vtk_section(z, "VECTORS u", 4)) CHECK(line == "0 0 0");
  for (const auto& line : vtk_section(z, "SCALARS p", 2)) CHECK(line == "0");
  for (const auto& line : vtk_section(z, "VECTORS q", 2)) CHECK(line == "0 0 0");

  s.p.setOnes();
  std::ostringstream ones;
  write_vtk(s, sq, layout, ones);
  for (const auto& line : vtk_section(ones.str(), "SCALARS p", 2)) CHECK(line == "1");

  // One interior flux F: cell average of F * s (x - r_opposite) / (2|K|).
  int f = -1;
  for (int e = 0; e < sq.num_faces(); ++e) {
    if (!sq.is_boundary_face(e)) f = e;
  }
  const double flux = 0.6;
  s.q[f] = flux;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 3; ++i) {
      const CellFace cf = sq.cell_faces(c)[i];
      if (cf.face != f) continue;
      const Point opposite = sq.vertex(sq.cell(c)[i]);
      const Eigen::Vector2d expected =
          flux * cf.sign * (sq.centroid(c) - opposite) / (2.0 * sq.cell_area(c));
      CHECK((cell_average_flux(sq, layout, s.q, c) - expected).norm() < 1e-15);
    }
  }
}

TEST_CASE("run command") {
  const fs::path dir = scratch("run");
  const fs::path out_dir = dir / "out";
  {
    std::ofstream f(dir / "zero.cfg");
    f << kMinimal << "[output]\ndirectory = " << out_dir.string() << "\nevery = 2\n";
  }
  ::unsetenv(kOutputDirEnv);
  std::ostringstream out, err;
  CHECK(cmd_run(dir / "zero.cfg", out, err) == kExitOk);
  std::ifstream csv(out_dir / "ledger.csv");
  const EnergyLedger zero = read_ledger_csv(csv);
  REQUIRE(zero.entries.size() == 4);
  for (const LedgerEntry& e : zero.entries) {
    CHECK(e.energy == 0.0);
    CHECK(e.lhs == 0.0);
    CHECK(e.dissipation == 0.0);
  }
  CHECK(fs::exists(out_dir / "state_00000.vtk"));
  CHECK(fs::exists(out_dir / "state_00002.vtk"));
  CHECK_FALSE(fs::exists(out_dir / "state_00001.vtk"));
  CHECK(fs::exists(out_dir / "state_00003.vtk"));  // final state always written

  const fs::path env_dir = dir / "env";
  ::setenv(kOutputDirEnv, env_dir.string().c_str(), 1);
  CHECK(cmd_run(dir / "zero.cfg", out, err) == kExitOk);
  ::unsetenv(kOutputDirEnv);
  CHECK(fs::exists(env_dir / "ledger.csv"));

  {
    std::ofstream f(dir / "stiff.cfg");
    f << "[mesh]\nnx = 4\nny = 4\n[material]\nbeta = 1e6\n[scheme]\nflux_space = rt0\n"
         "dissipation = exact\ntau = 1e4\nn_steps = 2\nnewton_max_iter = 1\n"
         "[initial]\npulse_box = 0 0.5 0 1\n[output]\ndirectory = "
      << (dir / "stiff").string() << "\n";
  }
  std::ostringstream err2;
  CHECK(cmd_run(dir / "stiff.cfg", out, err2) == kExitSolver);
  CHECK(err2.str().find("step 1") != std::string::npos);

  {
    std::ofstream f(dir / "bad.cfg");
    f << kMinimal << "[material]\nbeta = -1\n";
  }
  std::ostringstream err3;
  CHECK(cmd_run(dir / "bad.cfg", out, err3) == kExitUsage);
  CHECK(err3.str().find("beta") != std::string::npos);
  CHECK(cmd_run(dir / "absent.cfg", out, err3) == kExitUsage);
}

TEST_CASE("shipped pulse-decay demo") {
  const fs::path dir = scratch("demo");
  ::setenv(kOutputDirEnv, dir.string().c_str(), 1);
  std::ostringstream out, err;
  const int status = cmd_run(fs::path(POROFLOW_SOURCE_DIR) / "configs" / "pulse_decay.cfg", out, err);
  ::unsetenv(kOutputDirEnv);
  REQUIRE(status == kExitOk);
  std::ifstream csv(dir / "ledger.csv");
  const EnergyLedger ledger = read_ledger_csv(csv);
  REQUIRE(ledger.entries.size() == 51);
  for (std::size_t n = 1; n < ledger.entries.size(); ++n) {
    CHECK(ledger.entries[n].energy < ledger.entries[n - 1].energy);
    CHECK(ledger.entries[n].lhs <= ledger.entries[n].rhs + 1e-10 * std::abs(ledger.entries[n].rhs));
  }
}

TEST_CASE("verify command") {
  std::ostringstream out, err;
  CHECK(cmd_verify("everything", scratch("verify_bad"), out, err) == kExitUsage);
  CHECK(err.str().find("unknown suite") != std::string::npos);
  const fs::path dir = scratch("verify");
  ::unsetenv(kOutputDirEnv);
  CHECK(cmd_verify("oracle", dir, out, err) == kExitOk);
  CHECK(fs::exists(dir / "oracle.csv"));
  CHECK(cmd_verify("assumption1", dir, out, err) == kExitOk);
  CHECK(fs::exists(dir / "assumption1.csv"));
  CHECK(out.str().find("FAIL") == std::string::npos);
}

TEST_CASE("executable exit codes") {
  const std::string exe = POROFLOW_CLI;
  CHECK(WEXITSTATUS(std::system((exe + " > /dev/null 2>&1").c_str())) == kExitUsage);
  CHECK(WEXITSTATUS(std::system((exe + " verify nonsense > /dev/null 2>&1").c_str())) == kExitUsage);
  CHECK(WEXITSTATUS(std::system((exe + " run /nonexistent.cfg > /dev/null 2>&1").c_str())) ==
        kExitUsage);
}
