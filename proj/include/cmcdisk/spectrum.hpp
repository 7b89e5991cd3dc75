#pragma once

#include "cmcdisk/energy.hpp"

#include <Eigen/Sparse>

#include <optional>

namespace cmcdisk {

/// Symmetric generalized eigensystem for a second-variation form, reduced
/// to admissible degrees of freedom: 3 per interior vertex, 2 per boundary
/// vertex (orthonormal tangent frame of the surface at the vertex image),
/// or 1 per vertex for scalar forms.
struct HessianSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd M;  // lumped mass diagonal
  std::vector<int> dof_offset;
  std::vector<int> dof_count;                       // per vertex: 1, 2 or 3
  std::vector<Eigen::Matrix<double, 3, 2>> frames;  // boundary tangent frames (vector forms)
  std::shared_ptr<const DiskMesh> mesh;
  int dofs = 0;
  bool scalar = false;

  double norm_estimate() const;  // infinity norm of A
};

HessianSystem assemble_second_variation(const SurfaceMap& u, const EnergyParams& params);

/// Builds the same system with tangent frames rotated by the given angle
/// (frame invariance testing).
HessianSystem assemble_second_variation_rotated(const SurfaceMap& u, const EnergyParams& params,
                                                double frame_angle);

/// Embeds a reduced vector back to full nodal R^3 values (vector systems).
std::vector<Vec3> embed_field(const HessianSystem& sys, const Eigen::VectorXd& reduced);

struct SpectralReport {
  std::vector<double> eigenvalues;  // ascending, first k
  int index = 0;                    // eigenvalues < -index_tol
  int nullity = 0;                  // eigenvalues in [-index_tol, index_tol]
  double index_tol = 0.0;
  int dofs = 0;
  double max_pair_residual = 0.0;
  std::optional<std::vector<Eigen::VectorXd>> eigenvectors;
};

/// Lowest-k eigenpairs of A x = lambda M x. Dense solve below the
/// threshold, shift-invert subspace iteration above it. index_tol < 0
/// selects the default 1e-8 * |A|_inf.
SpectralReport morse_index(const HessianSystem& system, int k = 12, double index_tol = -1.0,
                           bool want_vectors = false, int dense_threshold = 3000);

struct NormalField {
  std::vector<Vec3> n;            // per triangle; unit off the mask
  std::vector<char> branch_mask;  // 1 where |u_x1 x u_x2| is below tolerance
  int n_branched = 0;
};

NormalField normal_field(const SurfaceMap& u, double branch_tol = 1e-6);

/// Area-type scalar form B_H on normal perturbations f*n; branch-masked
/// triangles contribute only the |grad f|^2 part. Throws if more than 10%
/// of triangles are branched.
HessianSystem area_index_form(const SurfaceMap& u, double H, const ImplicitSurface& sigma,
                              double branch_tol = 1e-6);

/// Quadratic-form value B_H(f n, f n) for a nodal scalar field f.
double area_form_value(const HessianSystem& sys, std::span<const double> f);

struct IndexComparison {
  int index_area = 0;    // index of B_H
  int index_energy = 0;  // index of the eps = 0 second variation
  bool pass = false;     // index_area <= index_energy
  SpectralReport area_report;
  SpectralReport energy_report;
};

IndexComparison index_comparison_check(const SurfaceMap& u, const EnergyParams& params,
                                       int k = 12, double index_tol = -1.0);

struct HerschCheck {
  double D = 0.0;
  double bound = 0.0;    // 16 pi / H^2
  double margin = 0.0;   // bound - D
  bool pass = false;
  double sharper = 0.0;  // (16 pi + 2 * boundary integral of A^{u_r}(n,n)) / H^2
  double boundary_integral = 0.0;
};

HerschCheck hersch_bound_check(const SurfaceMap& u, double H, const ImplicitSurface& sigma,
                               double mesh_tol = 0.0);

}  // namespace cmcdisk
