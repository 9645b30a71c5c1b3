#include "poroflow/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace poroflow {

using Triplet = Eigen::Triplet<double>;

Material Material::homogeneous(int num_cells, double kappa_scalar) {
  Material m;
  m.kappa.assign(num_cells, kappa_scalar * Eigen::Matrix2d::Identity());
  m.force.assign(num_cells, Eigen::Vector2d::Zero());
  m.source.assign(num_cells, 0.0);
  return m;
}

void Material::validate(int num_cells) const {
  auto require = [](bool ok, const std::string& name, const std::string& rule) {
    if (!ok) throw std::invalid_argument("invalid material parameter '" + name + "': " + rule);
  };
  require(std::isfinite(mu_e) && mu_e > 0.0, "mu_e", "must be > 0");
  require(std::isfinite(lambda_e) && lambda_e >= 0.0, "lambda_e", "must be >= 0");
  require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0, "alpha", "must lie in (0, 1]");
  require(std::isfinite(inv_M) && inv_M > 0.0, "inv_M", "must be > 0 (M < infinity)");
  require(std::isfinite(mu_f) && mu_f > 0.0, "mu_f", "must be > 0");
  require(std::isfinite(rho) && rho > 0.0, "rho", "must be > 0");
  require(std::isfinite(beta) && beta >= 0.0, "beta", "must be >= 0");
  require(static_cast<int>(kappa.size()) == num_cells, "kappa", "needs one tensor per cell");
  require(static_cast<int>(force.size()) == num_cells, "force", "needs one vector per cell");
  require(static_cast<int>(source.size()) == num_cells, "source", "needs one value per cell");
  for (const auto& k : kappa) {
    require(k.allFinite() && std::abs(k(0, 1) - k(1, 0)) <= 1e-14 * k.norm(), "kappa",
            "must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(k);
    require(eig.eigenvalues().minCoeff() > 0.0, "kappa", "must be positive definite");
  }
  for (const auto& f : force) require(f.allFinite(), "force", "must be finite");
  for (double g : source) require(std::isfinite(g), "source", "must be finite");
}

bool Material::scalar_permeability() const {
  for (const auto& k : kappa) {
    if (k(0, 1) != 0.0 || k(1, 0) != 0.0 || k(0, 0) != k(1, 1)) return false;
  }
  return true;
}

double Material::permeability_scale() const {
  if (kappa.empty()) return 1.0;
  double sum = 0.0;
  for (const auto& k : kappa) sum += 0.5 * k.trace();
  return sum / static_cast<double>(kappa.size());
}

bool Material::has_source() const {
  for (double g : source) {
    if (g != 0.0) return true;
  }
  return false;
}

std::string to_string(DissipationKind kind) {
  switch (kind) {
    case DissipationKind::Exact:
      return "exact";
    case DissipationKind::Lumped:
      return "lumped";
    case DissipationKind::Quadrature:
      return "quadrature";
  }
  return "unknown";
}

void validate_scheme(FluxSpace flux_space, DissipationKind kind, const Mesh& mesh,
                     const Material& material) {
  if (kind == DissipationKind::Lumped) {
    if (flux_space != FluxSpace::RT0) {
      throw std::invalid_argument("lumped dissipation requires flux_space = rt0");
    }
    if (!material.scalar_permeability()) {
      throw std::invalid_argument(
          "lumped dissipation requires scalar permeability (lumping is only a sufficient "
          "approximation for scalar permeabilities)");
    }
    if (!mesh.circumcenters_separated()) {
      throw std::invalid_argument(
          "lumped dissipation requires distinct circumcenters across every interior face");
    }
  }
  if (kind == DissipationKind::Quadrature && flux_space != FluxSpace::BDM1) {
    throw std::invalid_argument("quadrature dissipation requires flux_space = bdm1");
  }
}

double default_eps_reg(const Material& material) {
  if (material.beta == 0.0) return 0.0;
  return 1e-10 * material.mu_f / (material.rho * material.beta * material.permeability_scale());
}

SparseMatrix assemble_elasticity(const Mesh& mesh, const Material& material,
                                 const DofLayout& layout) {
  Eigen::Matrix3d stiffness;
  const double lam = material.lambda_e;
  const double mu = material.mu_e;
  stiffness << lam + 2.0 * mu, lam, 0.0, lam, lam + 2.0 * mu, 0.0, 0.0, 0.0, mu;

  std::vector<Triplet> triplets;
  triplets.reserve(36 * mesh.num_cells());
  const Point centroid_ref(1.0 / 3.0, 1.0 / 3.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto basis = eval_p1_vector_basis(mesh, layout, c, centroid_ref);
    Eigen::Matrix<double, 3, 6> strain = Eigen::Matrix<double, 3, 6>::Zero();
    for (int i = 0; i < 3; ++i) {
      const auto& g = basis.hat_grad[i];
      strain(0, 2 * i) = g.x();
      strain(1, 2 * i + 1) = g.y();
      strain(2, 2 * i) = g.y();
      strain(2, 2 * i + 1) = g.x();
    }
    const Eigen::Matrix<double, 6, 6> local =
        mesh.cell_area(c) * strain.transpose() * stiffness * strain;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) triplets.emplace_back(basis.dofs[i], basis.dofs[j], local(i, j));
    }
  }
  SparseMatrix a(layout.num_displacement(), layout.num_displacement());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

SparseMatrix assemble_coupling(const Mesh& mesh, const Material& material,
                               const DofLayout& layout) {
  std::vector<Triplet> triplets;
  triplets.reserve(6 * mesh.num_cells());
  const Point centroid_ref(1.0 / 3.0, 1.0 / 3.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto basis = eval_p1_vector_basis(mesh, layout, c, centroid_ref);
    const double scale = material.alpha * mesh.cell_area(c);
    for (int i = 0; i < 3; ++i) {
      triplets.emplace_back(basis.dofs[2 * i], c, scale * basis.hat_grad[i].x());
      triplets.emplace_back(basis.dofs[2 * i + 1], c, scale * basis.hat_grad[i].y());
    }
  }
  SparseMatrix b(layout.num_displacement(), mesh.num_cells());
  b.setFromTriplets(triplets.begin(), triplets.end());
  return b;
}

SparseMatrix assemble_div_constraint(const Mesh& mesh, const DofLayout& layout) {
  std::vector<Triplet> triplets;
  triplets.reserve(layout.flux_dofs_per_cell() * mesh.num_cells());
  const Point centroid_ref(1.0 / 3.0, 1.0 / 3.0);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto basis = eval_flux_basis(mesh, layout.flux_space(), c, centroid_ref);
    for (int j = 0; j < basis.count; ++j) {
      triplets.emplace_back(c, basis.dofs[j], mesh.cell_area(c) * basis.divergence[j]);
    }
  }
  SparseMatrix d(mesh.num_cells(), layout.num_flux());
  d.setFromTriplets(triplets.begin(), triplets.end());
  return d;
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const Material& material,
                              const DofLayout& layout) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(layout.num_displacement());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto dofs = layout.cell_displacement_dofs(mesh, c);
    const Eigen::Vector2d share = material.force[c] * mesh.cell_area(c) / 3.0;
    for (int i = 0; i < 3; ++i) {
      load[dofs[2 * i]] += share.x();
      load[dofs[2 * i + 1]] += share.y();
    }
  }
  return load;
}

SystemMatrices assemble_system(const Mesh& mesh, const Material& material,
                               const DofLayout& layout) {
  SystemMatrices system;
  system.elasticity = assemble_elasticity(mesh, material, layout);
  system.coupling = assemble_coupling(mesh, material, layout);
  system.divergence = assemble_div_constraint(mesh, layout);
  system.load = assemble_load(mesh, material, layout);
  system.cell_area.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) system.cell_area[c] = mesh.cell_area(c);
  return system;
}

Dissipation::Dissipation(DissipationKind kind, const Mesh& mesh, const Material& material,
                         const DofLayout& layout)
    : kind_(kind), mesh_(mesh), material_(material), layout_(layout) {
  if (kind_ != DissipationKind::Lumped) return;
  validate_scheme(layout_.flux_space(), kind_, mesh_, material_);
  lumped_quadratic_.assign(mesh.num_faces(), 0.0);
  lumped_cubic_.assign(mesh.num_faces(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (mesh.is_boundary_face(f)) continue;
    const double d = mesh.interior_face_distance(f);
    const double len = mesh.face_length(f);
    const auto& cells = mesh.face_cells(f);
    const double inv_kappa =
        0.5 * (1.0 / material.kappa[cells[0]](0, 0) + 1.0 / material.kappa[cells[1]](0, 0));
    lumped_quadratic_[f] = d / len * material.mu_f * inv_kappa;
    lumped_cubic_[f] = d / (len * len) * material.rho * material.beta;
  }
}

std::pair<double, double> Dissipation::lumped_coefficients(int face) const {
  if (kind_ != DissipationKind::Lumped) throw std::logic_error("not a lumped dissipation");
  return {lumped_quadratic_[face], lumped_cubic_[face]};
}

void Dissipation::integrate(const Eigen::VectorXd& q, double* value, Eigen::VectorXd* residual,
                            std::vector<Triplet>* jac, double eps_reg) const {
  if (kind_ == DissipationKind::Lumped) {
    for (int f = 0; f < mesh_.num_faces(); ++f) {
      if (mesh_.is_boundary_face(f)) continue;
      const double flux = q[f];
      const double a = lumped_quadratic_[f];
      const double b = lumped_cubic_[f];
      const double mag = std::abs(flux);
      if (value) *value += 0.5 * a * flux * flux + b / 3.0 * mag * mag * mag;
      if (residual) (*residual)[f] += a * flux + b * mag * flux;
      if (jac) jac->emplace_back(f, f, a + 2.0 * b * mag);
    }
    return;
  }

  const bool exact = kind_ == DissipationKind::Exact;
  const QuadratureRule& quadratic_rule = exact ? simplex_quadrature(2) : vertex_quadrature();
  const QuadratureRule& cubic_rule = exact ? simplex_quadrature(4) : vertex_quadrature();
  const double rho_beta = material_.rho * material_.beta;
  const int n = layout_.flux_dofs_per_cell();

  for (int c = 0; c < mesh_.num_cells(); ++c) {
    const double jdet = 2.0 * mesh_.cell_area(c);
    const Eigen::Matrix2d kinv = material_.mu_f * material_.kappa[c].inverse();
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    std::array<int, 6> dofs{};

    auto field_at = [&](const Point& ref, FluxBasis& basis) {
      basis = eval_flux_basis(mesh_, layout_.flux_space(), c, ref);
      dofs = basis.dofs;
      Eigen::Vector2d v = Eigen::Vector2d::Zero();
      for (int j = 0; j < n; ++j) v += q[basis.dofs[j]] * basis.value[j];
      return v;
    };

    FluxBasis basis;
    for (std::size_t k = 0; k < quadratic_rule.points.size(); ++k) {
      const double w = quadratic_rule.weights[k] * jdet;
      const Eigen::Vector2d v = field_at(quadratic_rule.points[k], basis);
      const Eigen::Vector2d kv = kinv * v;
      if (value) *value += 0.5 * w * v.dot(kv);
      for (int i = 0; i < n; ++i) {
        if (residual) (*residual)[basis.dofs[i]] += w * kv.dot(basis.value[i]);
        if (jac) {
          for (int j = 0; j < n; ++j) local(i, j) += w * basis.value[i].dot(kinv * basis.value[j]);
        }
      }
    }

    if (rho_beta != 0.0) {
      for (std::size_t k = 0; k < cubic_rule.points.size(); ++k) {
        const double w = cubic_rule.weights[k] * jdet * rho_beta;
        const Eigen::Vector2d v = field_at(cubic_rule.points[k], basis);
        const double mag = v.norm();
        if (value) *value += w / 3.0 * mag * mag * mag;
        for (int i = 0; i < n; ++i) {
          const double vi = v.dot(basis.value[i]);
          if (residual) (*residual)[basis.dofs[i]] += w * mag * vi;
          if (jac) {
            for (int j = 0; j < n; ++j) {
              double entry = mag * basis.value[i].dot(basis.value[j]);
              if (mag >= eps_reg && mag > 0.0) entry += vi * v.dot(basis.value[j]) / mag;
              local(i, j) += w * entry;
            }
          }
        }
      }
    }

    if (jac) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) jac->emplace_back(dofs[i], dofs[j], local(i, j));
      }
    }
  }
}

double Dissipation::value(const Eigen::VectorXd& q) const {
  double v = 0.0;
  integrate(q, &v, nullptr, nullptr, 0.0);
  return v;
}

Eigen::VectorXd Dissipation::residual(const Eigen::VectorXd& q) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(layout_.num_flux());
  integrate(q, nullptr, &r, nullptr, 0.0);
  return r;
}

SparseMatrix Dissipation::jacobian(const Eigen::VectorXd& q, double eps_reg) const {
  std::vector<Triplet> triplets;
  integrate(q, nullptr, nullptr, &triplets, eps_reg);
  SparseMatrix h(layout_.num_flux(), layout_.num_flux());
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

double dissipation(DissipationKind kind, const Mesh& mesh, const Material& material,
                   const DofLayout& layout, const Eigen::VectorXd& q) {
  return Dissipation(kind, mesh, material, layout).value(q);
}

Eigen::VectorXd m_residual(DissipationKind kind, const Mesh& mesh, const Material& material,
                           const DofLayout& layout, const Eigen::VectorXd& q) {
  return Dissipation(kind, mesh, material, layout).residual(q);
}

SparseMatrix m_jacobian(DissipationKind kind, const Mesh& mesh, const Material& material,
                        const DofLayout& layout, const Eigen::VectorXd& q, double eps_reg) {
  return Dissipation(kind, mesh, material, layout).jacobian(q, eps_reg);
}

EnergyParts energy_parts(const SystemMatrices& system, const Material& material,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& theta) {
  EnergyParts parts;
  parts.elastic = u.dot(system.elasticity * u);
  // alpha * cellwise divergence = (B^T u)_K / |K|
  const Eigen::VectorXd mismatch =
      theta - (system.coupling.transpose() * u).cwiseQuotient(system.cell_area);
  const double mismatch_sq = mismatch.cwiseProduct(mismatch).dot(system.cell_area);
  parts.pressure_term = mismatch_sq / material.inv_M;
  parts.load_work = system.load.dot(u);
  parts.energy = 0.5 * parts.elastic + 0.5 * parts.pressure_term - parts.load_work;
  return parts;
}

double energy(const Mesh& mesh, const Material& material, const DofLayout& layout,
              const Eigen::VectorXd& u, const Eigen::VectorXd& theta) {
  return energy_parts(assemble_system(mesh, material, layout), material, u, theta).energy;
}

ConsistencyBounds check_assumption1(const Mesh& mesh, const Material& material,
                                    const DofLayout& layout, DissipationKind kind, int samples,
                                    std::uint64_t seed) {
  if (kind == DissipationKind::Exact) {
    throw std::invalid_argument("assumption-1 check needs a localized dissipation kind");
  }
  if (samples < 1) throw std::invalid_argument("assumption-1 check needs samples >= 1");
  if (layout.free_flux().empty()) {
    throw std::invalid_argument("assumption-1 check needs at least one unconstrained flux DOF");
  }
  const Dissipation localized(kind, mesh, material, layout);
  const Dissipation exact(DissipationKind::Exact, mesh, material, layout);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  ConsistencyBounds bounds{std::numeric_limits<double>::infinity(), 0.0};
  Eigen::VectorXd q = Eigen::VectorXd::Zero(layout.num_flux());
  for (int s = 0; s < samples; ++s) {
    double reference = 0.0;
    for (int attempt = 0; attempt < 100 && reference <= 0.0; ++attempt) {
      for (int dof : layout.free_flux()) q[dof] = unit(rng);
      reference = exact.value(q);
    }
    if (reference <= 0.0) throw std::runtime_error("could not draw a flux with D(q) > 0");
    const double ratio = localized.value(q) / reference;
    bounds.c_est = std::min(bounds.c_est, ratio);
    bounds.C_est = std::max(bounds.C_est, ratio);
  }
  return bounds;
}

}  // namespace poroflow
