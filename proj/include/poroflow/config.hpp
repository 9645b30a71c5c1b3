#ifndef POROFLOW_CONFIG_HPP
#define POROFLOW_CONFIG_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "poroflow/forms.hpp"
#include "poroflow/mesh.hpp"
#include "poroflow/stepper.hpp"

namespace poroflow {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct MeshSource {
  std::string file;  // empty: structured mesh
  int nx = 0;
  int ny = 0;
  double width = 1.0;
  double height = 1.0;
  MeshPattern pattern = MeshPattern::Diagonal;
};

/// Initial pressure: a constant background, optionally overwritten on the
/// cells whose centroid lies in a box, or read per cell from a file.
struct InitialPressure {
  double value = 0.0;
  std::optional<Eigen::Vector4d> pulse_box;  // x0 x1 y0 y1
  double pulse_value = 1.0;
  std::string file;
};

struct RunConfig {
  MeshSource mesh;
  Material material;  // scalar parameters; cell arrays hold one entry
  SchemeConfig scheme;
  InitialPressure initial;
  std::filesystem::path output_dir = "output";
  int output_every = 1;
  bool emit_csv = true;
  bool emit_vtk = true;
};

/// Parses the sectioned `key = value` format. Unknown sections or keys,
/// missing required keys, malformed values and violated invariants raise
/// ConfigError with the offending line and key. Relative file paths are
/// resolved against `base_dir`.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig parse_config(const std::filesystem::path& path);

Mesh build_mesh(const RunConfig& config);
Material build_material(const RunConfig& config, const Mesh& mesh);
Eigen::VectorXd build_initial_pressure(const RunConfig& config, const Mesh& mesh);

}  // namespace poroflow

#endif  // POROFLOW_CONFIG_HPP
