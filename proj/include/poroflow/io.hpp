#ifndef POROFLOW_IO_HPP
#define POROFLOW_IO_HPP

#include <filesystem>
#include <iosfwd>

#include "poroflow/mesh.hpp"
#include "poroflow/spaces.hpp"
#include "poroflow/stepper.hpp"

namespace poroflow {

/// First line of every ledger file. Bump the version when columns change.
inline constexpr const char* kLedgerHeader = "# poroflow-ledger v1";
inline constexpr const char* kLedgerColumns =
    "step,time,E,elastic,pressure_term,D_h,cum_dissipation,lhs,rhs,slack,newton_iters";

/// Values are written with max_digits10 so that read_ledger_csv restores
/// them bit for bit.
void write_ledger_csv(const EnergyLedger& ledger, std::ostream& out);
EnergyLedger read_ledger_csv(std::istream& in);

/// Legacy ASCII unstructured grid. Point data u; cell data p, theta and the
/// cell average of q.
void write_vtk(const State& state, const Mesh& mesh, const DofLayout& layout, std::ostream& out);
void write_vtk(const State& state, const Mesh& mesh, const DofLayout& layout,
               const std::filesystem::path& path);

/// Mean of the flux field over a cell. Both flux spaces are affine per
/// cell, so this is the value at the centroid.
Eigen::Vector2d cell_average_flux(const Mesh& mesh, const DofLayout& layout,
                                  const Eigen::VectorXd& q, int cell);

}  // namespace poroflow

#endif  // POROFLOW_IO_HPP
