#ifndef POROFLOW_CLI_HPP
#define POROFLOW_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

namespace poroflow {

/// Process exit statuses.
enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 1,      // bad arguments or configuration
  kExitSolver = 2,     // Newton failure or singular system
  kExitInvariant = 3,  // energy inequality or mass balance violated
};

/// Environment variable that replaces the configured output directory.
inline constexpr const char* kOutputDirEnv = "POROFLOW_OUTPUT_DIR";

/// Runs a configured simulation; writes ledger.csv and state_NNNNN.vtk
/// snapshots into the output directory.
int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

/// suite: oracle, convergence, assumption1 or all. CSV artifacts go to
/// `output_dir` (overridden by the environment variable).
int cmd_verify(const std::string& suite, const std::filesystem::path& output_dir,
               std::ostream& out, std::ostream& err);

int cmd_mesh_info(const std::filesystem::path& mesh_path, std::ostream& out, std::ostream& err);

/// Output directory after applying the environment override.
std::filesystem::path resolve_output_dir(const std::filesystem::path& configured);

}  // namespace poroflow

#endif  // POROFLOW_CLI_HPP
