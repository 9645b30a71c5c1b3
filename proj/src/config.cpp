#include "poroflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "poroflow/verify.hpp"

namespace poroflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Parser {
public:
  Parser(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    std::ostringstream msg;
    msg << "config";
    if (it != entries_.end()) msg << " line " << it->second.line;
    msg << ": key '" << key << "': " << what;
    throw ConfigError(msg.str());
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  const std::string& raw(const std::string& key) const { return entries_.at(key).value; }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_number(key);
  }

  double required_number(const std::string& key) const {
    if (!has(key)) fail(key, "missing required key");
    return parse_number(key);
  }

  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    return parse_integer(key);
  }

  int required_integer(const std::string& key) const {
    if (!has(key)) fail(key, "missing required key");
    return parse_integer(key);
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = lower(raw(key));
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(key, "expected a boolean, got '" + raw(key) + "'");
  }

  std::string choice(const std::string& key, const std::set<std::string>& options) const {
    if (!has(key)) fail(key, "missing required key");
    const std::string v = lower(raw(key));
    if (!options.count(v)) {
      std::string list;
      for (const auto& o : options) list += (list.empty() ? "" : ", ") + o;
      fail(key, "expected one of {" + list + "}, got '" + raw(key) + "'");
    }
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::size_t count) const {
    std::istringstream ss(raw(key));
    std::vector<double> out;
    std::string token;
    while (ss >> token) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        fail(key, "expected numbers, got '" + raw(key) + "'");
      }
    }
    if (out.size() != count) {
      fail(key, "expected " + std::to_string(count) + " numbers, got " + std::to_string(out.size()));
    }
    return out;
  }

private:
  double parse_number(const std::string& key) const {
    const std::string& v = raw(key);
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      fail(key, "expected a number, got '" + v + "'");
    }
  }

  int parse_integer(const std::string& key) const {
    const std::string& v = raw(key);
    try {
      std::size_t used = 0;
      const long x = std::stol(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return static_cast<int>(x);
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + v + "'");
    }
  }

  std::map<std::string, Entry> entries_;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "mesh.file",          "mesh.nx",           "mesh.ny",
      "mesh.width",         "mesh.height",       "mesh.pattern",
      "material.lambda_e",  "material.mu_e",     "material.alpha",
      "material.inv_M",     "material.mu_f",     "material.rho",
      "material.beta",      "material.kappa",    "material.kappa_xx",
      "material.kappa_xy",  "material.kappa_yy", "material.force_x",
      "material.force_y",   "material.source",   "scheme.flux_space",
      "scheme.dissipation", "scheme.tau",        "scheme.n_steps",
      "scheme.newton_tol_rel", "scheme.newton_tol_abs", "scheme.newton_max_iter",
      "scheme.eps_reg",     "scheme.line_search", "initial.pressure",
      "initial.pulse_box",  "initial.pulse_value", "initial.pressure_file",
      "output.directory",   "output.every",      "output.csv",
      "output.vtk"};
  return keys;
}

// Config key holding each Material parameter, for diagnostics.
std::string material_key(const std::string& parameter) {
  if (parameter == "kappa") return "material.kappa";
  if (parameter == "force") return "material.force_x";
  return "material." + parameter;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> sections{"mesh", "material", "scheme", "initial",
                                                  "output"};
      if (!sections.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside of any section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key)) throw ConfigError(where + "unknown key '" + key + "'");
    if (value.empty()) throw ConfigError(where + "key '" + key + "' has no value");
    if (!entries.emplace(key, Entry{value, line_no}).second) {
      throw ConfigError(where + "duplicate key '" + key + "'");
    }
  }

  const Parser p(std::move(entries));
  RunConfig cfg;

  if (p.has("mesh.file")) {
    std::filesystem::path file = p.raw("mesh.file");
    if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
    cfg.mesh.file = file.string();
    for (const char* k : {"mesh.nx", "mesh.ny", "mesh.width", "mesh.height", "mesh.pattern"}) {
      if (p.has(k)) p.fail(k, "cannot be combined with mesh.file");
    }
  } else {
    cfg.mesh.nx = p.required_integer("mesh.nx");
    cfg.mesh.ny = p.required_integer("mesh.ny");
    cfg.mesh.width = p.number("mesh.width", 1.0);
    cfg.mesh.height = p.number("mesh.height", 1.0);
    if (cfg.mesh.nx < 1) p.fail("mesh.nx", "must be >= 1");
    if (cfg.mesh.ny < 1) p.fail("mesh.ny", "must be >= 1");
    if (!(cfg.mesh.width > 0.0)) p.fail("mesh.width", "must be > 0");
    if (!(cfg.mesh.height > 0.0)) p.fail("mesh.height", "must be > 0");
    if (p.has("mesh.pattern")) {
      cfg.mesh.pattern = p.choice("mesh.pattern", {"diagonal", "shifted"}) == "shifted"
                             ? MeshPattern::Shifted
                             : MeshPattern::Diagonal;
    }
  }

  Material& m = cfg.material;
  m.lambda_e = p.number("material.lambda_e", m.lambda_e);
  m.mu_e = p.number("material.mu_e", m.mu_e);
  m.alpha = p.number("material.alpha", m.alpha);
  m.inv_M = p.number("material.inv_M", m.inv_M);
  m.mu_f = p.number("material.mu_f", m.mu_f);
  m.rho = p.number("material.rho", m.rho);
  m.beta = p.number("material.beta", m.beta);
  Eigen::Matrix2d kappa = Eigen::Matrix2d::Identity();
  const bool tensor = p.has("material.kappa_xx") || p.has("material.kappa_xy") ||
                      p.has("material.kappa_yy");
  if (tensor) {
    if (p.has("material.kappa")) p.fail("material.kappa", "cannot be combined with kappa_xx/xy/yy");
    kappa << p.required_number("material.kappa_xx"), p.number("material.kappa_xy", 0.0),
        p.number("material.kappa_xy", 0.0), p.required_number("material.kappa_yy");
  } else {
    kappa *= p.number("material.kappa", 1.0);
  }
  m.kappa = {kappa};
  m.force = {Eigen::Vector2d(p.number("material.force_x", 0.0), p.number("material.force_y", 0.0))};
  m.source = {p.number("material.source", 0.0)};
  try {
    m.validate(1);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    const auto a = what.find('\'');
    const auto b = what.find('\'', a + 1);
    const std::string parameter = what.substr(a + 1, b - a - 1);
    std::string key = material_key(parameter);
    if (parameter == "kappa" && tensor) key = "material.kappa_xx";
    p.fail(key, what);
  }

  SchemeConfig& s = cfg.scheme;
  s.flux_space =
      p.choice("scheme.flux_space", {"rt0", "bdm1"}) == "rt0" ? FluxSpace::RT0 : FluxSpace::BDM1;
  const std::string kind = p.choice("scheme.dissipation", {"exact", "lumped", "quadrature"});
  s.dissipation = kind == "exact"    ? DissipationKind::Exact
                  : kind == "lumped" ? DissipationKind::Lumped
                                     : DissipationKind::Quadrature;
  s.tau = p.required_number("scheme.tau");
  s.n_steps = p.required_integer("scheme.n_steps");
  s.newton_tol_rel = p.number("scheme.newton_tol_rel", s.newton_tol_rel);
  s.newton_tol_abs = p.number("scheme.newton_tol_abs", s.newton_tol_abs);
  s.newton_max_iter = p.integer("scheme.newton_max_iter", s.newton_max_iter);
  s.eps_reg = p.number("scheme.eps_reg", default_eps_reg(m));
  s.line_search = p.boolean("scheme.line_search", s.line_search);
  if (!(s.tau > 0.0)) p.fail("scheme.tau", "must be > 0");
  if (s.n_steps < 0) p.fail("scheme.n_steps", "must be >= 0");
  if (s.newton_max_iter < 1) p.fail("scheme.newton_max_iter", "must be >= 1");
  if (!(s.newton_tol_rel >= 0.0)) p.fail("scheme.newton_tol_rel", "must be >= 0");
  if (!(s.newton_tol_abs >= 0.0)) p.fail("scheme.newton_tol_abs", "must be >= 0");
  if (!(s.eps_reg >= 0.0)) p.fail("scheme.eps_reg", "must be >= 0");
  if (s.dissipation == DissipationKind::Lumped && s.flux_space != FluxSpace::RT0) {
    p.fail("scheme.dissipation", "lumped dissipation requires flux_space = rt0");
  }
  if (s.dissipation == DissipationKind::Quadrature && s.flux_space != FluxSpace::BDM1) {
    p.fail("scheme.dissipation", "quadrature dissipation requires flux_space = bdm1");
  }
  if (s.dissipation == DissipationKind::Lumped && !m.scalar_permeability()) {
    p.fail(tensor ? "material.kappa_xx" : "material.kappa",
           "lumped dissipation requires scalar permeability (lumping is only a sufficient "
           "approximation for scalar permeabilities)");
  }

  cfg.initial.value = p.number("initial.pressure", 0.0);
  if (p.has("initial.pulse_box")) {
    const auto box = p.numbers("initial.pulse_box", 4);
    cfg.initial.pulse_box = Eigen::Vector4d(box[0], box[1], box[2], box[3]);
    cfg.initial.pulse_value = p.number("initial.pulse_value", 1.0);
  } else if (p.has("initial.pulse_value")) {
    p.fail("initial.pulse_value", "requires initial.pulse_box");
  }
  if (p.has("initial.pressure_file")) {
    if (p.has("initial.pressure") || p.has("initial.pulse_box")) {
      p.fail("initial.pressure_file", "cannot be combined with pressure or pulse_box");
    }
    std::filesystem::path file = p.raw("initial.pressure_file");
    if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
    cfg.initial.file = file.string();
  }

  if (p.has("output.directory")) cfg.output_dir = p.raw("output.directory");
  cfg.output_every = p.integer("output.every", 1);
  if (cfg.output_every < 1) p.fail("output.every", "must be >= 1");
  cfg.emit_csv = p.boolean("output.csv", true);
  cfg.emit_vtk = p.boolean("output.vtk", true);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

Mesh build_mesh(const RunConfig& config) {
  if (!config.mesh.file.empty()) return load_mesh(config.mesh.file);
  return structured_mesh(config.mesh.nx, config.mesh.ny, config.mesh.width, config.mesh.height,
                         config.mesh.pattern);
}

Material build_material(const RunConfig& config, const Mesh& mesh) {
  return expand_material(config.material, mesh.num_cells());
}

Eigen::VectorXd build_initial_pressure(const RunConfig& config, const Mesh& mesh) {
  const int nc = mesh.num_cells();
  Eigen::VectorXd p0 = Eigen::VectorXd::Constant(nc, config.initial.value);
  if (!config.initial.file.empty()) {
    std::ifstream in(config.initial.file);
    if (!in) throw ConfigError("cannot open pressure file " + config.initial.file);
    std::string line;
    int c = 0;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      std::istringstream ss(line);
      double v;
      while (ss >> v) {
        if (c == nc) throw ConfigError("pressure file has more values than cells");
        p0[c++] = v;
      }
      if (!ss.eof()) {
        throw ConfigError("pressure file line " + std::to_string(line_no) + ": not a number");
      }
    }
    if (c != nc) {
      throw ConfigError("pressure file has " + std::to_string(c) + " values for " +
                        std::to_string(nc) + " cells");
    }
  }
  if (config.initial.pulse_box) {
    const Eigen::Vector4d& box = *config.initial.pulse_box;
    for (int c = 0; c < nc; ++c) {
      const Point x = mesh.centroid(c);
      if (x.x() >= box[0] && x.x() <= box[1] && x.y() >= box[2] && x.y() <= box[3]) {
        p0[c] = config.initial.pulse_value;
      }
    }
  }
  return p0;
}

}  // namespace poroflow
