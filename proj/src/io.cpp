#include "poroflow/io.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace poroflow {

void write_ledger_csv(const EnergyLedger& ledger, std::ostream& out) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << kLedgerHeader << '\n' << kLedgerColumns << '\n';
  for (const LedgerEntry& e : ledger.entries) {
    out << e.step << ',' << e.time << ',' << e.energy << ',' << e.elastic << ','
        << e.pressure_term << ',' << e.dissipation << ',' << e.cum_dissipation << ',' << e.lhs
        << ',' << e.rhs << ',' << e.slack << ',' << e.newton_iters << '\n';
  }
  out.precision(old_precision);
}

EnergyLedger read_ledger_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kLedgerHeader) {
    throw std::runtime_error("ledger: missing header '" + std::string(kLedgerHeader) + "'");
  }
  if (!std::getline(in, line) || line != kLedgerColumns) {
    throw std::runtime_error("ledger: unexpected column line");
  }
  EnergyLedger ledger;
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) {
      throw std::runtime_error("ledger line " + std::to_string(line_no) + ": expected 11 columns");
    }
    LedgerEntry e;
    try {
      e.step = std::stoi(cells[0]);
      e.time = std::stod(cells[1]);
      e.energy = std::stod(cells[2]);
      e.elastic = std::stod(cells[3]);
      e.pressure_term = std::stod(cells[4]);
      e.dissipation = std::stod(cells[5]);
      e.cum_dissipation = std::stod(cells[6]);
      e.lhs = std::stod(cells[7]);
      e.rhs = std::stod(cells[8]);
      e.slack = std::stod(cells[9]);
      e.newton_iters = std::stoi(cells[10]);
    } catch (const std::exception&) {
      throw std::runtime_error("ledger line " + std::to_string(line_no) + ": malformed number");
    }
    ledger.entries.push_back(e);
  }
  return ledger;
}

Eigen::Vector2d cell_average_flux(const Mesh& mesh, const DofLayout& layout,
                                  const Eigen::VectorXd& q, int cell) {
  return evaluate_flux(mesh, layout, q, cell, Point(1.0 / 3.0, 1.0 / 3.0));
}

void write_vtk(const State& state, const Mesh& mesh, const DofLayout& layout, std::ostream& out) {
  const int nv = mesh.num_vertices();
  const int nc = mesh.num_cells();
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "# vtk DataFile Version 3.0\n"
      << "poroflow t=" << state.time << '\n'
      << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (int v = 0; v < nv; ++v) {
    const Point& x = mesh.vertex(v);
    out << x.x() << ' ' << x.y() << " 0\n";
  }
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (int c = 0; c < nc; ++c) {
    const auto& t = mesh.cell(c);
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "CELL_TYPES " << nc << '\n';
  for (int c = 0; c < nc; ++c) out << "5\n";

  out << "POINT_DATA " << nv << "\nVECTORS u double\n";
  for (int v = 0; v < nv; ++v) out << state.u[2 * v] << ' ' << state.u[2 * v + 1] << " 0\n";

  out << "CELL_DATA " << nc << "\nSCALARS p double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) out << state.p[c] << '\n';
  out << "SCALARS theta double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < nc; ++c) out << state.theta[c] << '\n';
  out << "VECTORS q double\n";
  for (int c = 0; c < nc; ++c) {
    const Eigen::Vector2d avg = cell_average_flux(mesh, layout, state.q, c);
    out << avg.x() << ' ' << avg.y() << " 0\n";
  }
  out.precision(old_precision);
}

void write_vtk(const State& state, const Mesh& mesh, const DofLayout& layout,
               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_vtk(state, mesh, layout, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace poroflow
