#include <iostream>

#include <CLI11.hpp>

#include "poroflow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mixed finite element solver for Darcy-Forchheimer poroelasticity"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run a configured simulation");
  run->add_option("config", config, "configuration file")->required();

  std::string suite;
  std::string verify_dir = "verify-output";
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite, "oracle, convergence, assumption1 or all")->required();
  verify->add_option("-o,--output", verify_dir, "directory for CSV artifacts");

  std::string mesh;
  auto* info = app.add_subcommand("mesh-info", "summarize a mesh file");
  info->add_option("mesh", mesh, "mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? poroflow::kExitOk : poroflow::kExitUsage;
  }

  if (*run) return poroflow::cmd_run(config, std::cout, std::cerr);
  if (*verify) return poroflow::cmd_verify(suite, verify_dir, std::cout, std::cerr);
  return poroflow::cmd_mesh_info(mesh, std::cout, std::cerr);
}
