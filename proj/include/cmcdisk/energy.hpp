#pragma once

#include "cmcdisk/mesh.hpp"
#include "cmcdisk/surface.hpp"

#include <memory>
#include <random>

namespace cmcdisk {

/// Nodal map from the disk into R^3 with boundary vertices constrained to
/// the surface. Treated as an immutable value during evaluations.
struct SurfaceMap {
  std::shared_ptr<const DiskMesh> mesh;
  std::vector<Vec3> pos;
};

/// Prescribed-curvature function on R^3: zero, a constant, or the barrier
/// cutoff profile composed with the offset distance, optionally scaled.
class CurvatureField {
 public:
  static CurvatureField zero();
  static CurvatureField constant(double H);
  static CurvatureField from_barrier(const BarrierSpec& barrier);

  CurvatureField scaled(double factor) const;

  double value(const Vec3& y) const;
  Vec3 grad(const Vec3& y) const;
  /// Value on the plateau (scale * H).
  double plateau() const { return scale_ * profile_.H; }
  /// Integral over the region enclosed by the constraint surface. The
  /// profile equals its plateau there, so this is plateau * volume.
  double integral_inside(const ImplicitSurface& sigma) const {
    return plateau() * sigma.enclosed_volume;
  }
  bool is_constant() const { return kind_ != Kind::barrier; }

 private:
  enum class Kind { zero, constant, barrier };
  Kind kind_ = Kind::zero;
  double scale_ = 1.0;
  PrescribedCurvature profile_{0.0, 1.0};
  std::shared_ptr<const BarrierSpec> barrier_;
};

struct EnergyParams {
  ImplicitSurface sigma;      // the constraint surface
  BarrierSpec barrier;        // barrier surface, H0, H, t0
  CurvatureField f;
  double H = 0.0;             // target mean curvature (f's plateau)
  double eps = 0.0;           // in [0,1]; 0 drops the p-term
  double p = 2.2;             // in (2,3)
  double boundary_tol = 1e-9;
  double bead_spacing_cap = 0.0;  // defaulted to 0.05 * diam(sigma)
};

/// Benchmark-style parameter bundle: constraint sigma, barrier (possibly
/// the same surface), target curvature H, cutoff f built from the barrier.
EnergyParams make_params(const ImplicitSurface& sigma, const ImplicitSurface& barrier_surface,
                         double H0, double H, double eps = 0.0, double p = 2.2);

/// Bead chain of maps on a shared mesh; first bead is a constant map.
struct HomotopyPath {
  std::shared_ptr<const DiskMesh> mesh;
  std::vector<std::vector<Vec3>> beads;

  int n_beads() const { return static_cast<int>(beads.size()); }
};

// ---- scalar functionals ----

double dirichlet(const SurfaceMap& u);
double perturbed_dirichlet(const SurfaceMap& u, double eps, double p);

/// Signed f-weighted volume swept by the bead chain (midpoint rule in t,
/// centroid rule in x). Additive under concatenation, antisymmetric under
/// reversal. Throws if consecutive beads are farther apart than the cap.
double swept_volume(const HomotopyPath& path, const CurvatureField& f, double spacing_cap);

/// perturbed_dirichlet(u) + swept_volume(path); the path must end at u.
double total_energy(const SurfaceMap& u, const HomotopyPath& path, const EnergyParams& params);

/// First variation against a nodal field psi whose boundary values are
/// tangent to the surface (checked).
double first_variation(const SurfaceMap& u, std::span<const Vec3> psi, const EnergyParams& params);

struct Residual {
  std::vector<Vec3> force;  // nodal gradient of the energy (boundary rows tangent-projected)
  std::vector<Vec3> riesz;  // force / lumped mass, boundary rows tangent-projected
  std::vector<double> mass;
  double norm = 0.0;         // sqrt(sum_i m_i |riesz_i|^2) = |force|_{M^-1}
  double orth_defect = 0.0;  // max over boundary vertices of |tangential u_r|
};

Residual residual(const SurfaceMap& u, const EnergyParams& params);

/// L2 norm of the per-triangle Hopf quantity
/// (|u_x|^2-|u_y|^2)/4 - (i/2) <u_x,u_y>; zero iff weakly conformal.
double hopf_defect(const SurfaceMap& u);

// ---- diagnostics ----

/// max over boundary vertices of |phi_sigma(position)|.
double boundary_defect(const SurfaceMap& u, const ImplicitSurface& sigma);

/// Discrete radial derivative at boundary vertices (area-weighted average
/// of adjacent triangle gradients applied to the radial direction).
std::vector<Vec3> boundary_radial_derivative(const SurfaceMap& u);

/// Per-interior-vertex mean curvature of the image surface by the
/// cotangent formula; entries for boundary vertices (and vertices within
/// `exclude_rings` graph distance of the boundary) are NaN.
std::vector<double> cotan_mean_curvature(const SurfaceMap& u, int exclude_rings = 1);

/// Algebraic sphere fit of the interior image vertices. CMC disks inside a
/// ball are spherical caps, so the fitted radius measures the realized mean
/// curvature and the worst radial deviation measures sphericity.
struct OsculatingSphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  double mean_curvature = 0.0;  // 2 / radius
  double sphericity = 0.0;      // max |dist(p, center) - radius| / radius
};
OsculatingSphere osculating_sphere(const SurfaceMap& u, int exclude_rings = 1);

// ---- map and path constructors ----

SurfaceMap constant_map(std::shared_ptr<const DiskMesh> mesh, const Vec3& point);
/// Equatorial section: (a x1, b x2, 0) for sphere/ellipsoid semi-axes.
SurfaceMap flat_map(std::shared_ptr<const DiskMesh> mesh, const ImplicitSurface& sigma);
/// Conformal spherical cap meeting the sphere of radius R orthogonally,
/// with cap-sphere radius 2/H (centered on the +z axis).
SurfaceMap cap_map(std::shared_ptr<const DiskMesh> mesh, double R, double H);
/// Degree-one cover of the sphere of radius R (polar angle pi*|x|).
SurfaceMap full_cover_map(std::shared_ptr<const DiskMesh> mesh, double R);
/// full_cover_map precomposed with the disk Moebius map z -> (z+a)/(1+conj(a)z).
SurfaceMap mobius_bubble_map(std::shared_ptr<const DiskMesh> mesh, double R,
                             const Vec2& a);

/// Adds uniform noise of the given amplitude; boundary vertices are
/// perturbed tangentially and re-projected.
void add_tangent_noise(SurfaceMap& u, const ImplicitSurface& sigma, double amplitude,
                       std::mt19937_64& rng);

/// Straight-line bead interpolation with boundary re-projection.
HomotopyPath linear_path(const SurfaceMap& from, const SurfaceMap& to, int n_segments,
                         const ImplicitSurface& sigma);
HomotopyPath concat(const HomotopyPath& a, const HomotopyPath& b);
HomotopyPath reversed(const HomotopyPath& path);
/// Inserts interpolated beads (boundary re-projected) until consecutive
/// beads are within the cap.
HomotopyPath refine_to_spacing(const HomotopyPath& path, double cap, const ImplicitSurface& sigma);
double max_bead_spacing(const HomotopyPath& path);

/// Constant -> expanding caps through the full cover -> shrink back to a
/// constant; sweeps the enclosed region once (degree one).
HomotopyPath cap_sweepout(std::shared_ptr<const DiskMesh> mesh, const ImplicitSurface& sigma,
                          int n_beads);

struct EnergyReport {
  double eps, p, H, D, Deps, V, E, hopf, orth_defect;
};
EnergyReport energy_report(const SurfaceMap& u, const HomotopyPath& path, const EnergyParams& params);

}  // namespace cmcdisk
