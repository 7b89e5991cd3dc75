#pragma once

#include "cmcdisk/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cmcdisk {

/// Smooth closed surface given as the zero level set of phi, with phi < 0
/// strictly inside the enclosed region. All oracles are pure functions.
struct ImplicitSurface {
  std::function<double(const Vec3&)> phi;
  std::function<Vec3(const Vec3&)> grad;
  std::function<Mat3(const Vec3&)> hess;
  double bound_radius = 1.0;  // surface contained in the ball of this radius
  double band_width = 0.25;   // |phi| band on which grad is nonvanishing
  double enclosed_volume = 0.0;
  std::string spec;  // config-file form, e.g. "sphere 1"

  double diameter() const { return 2.0 * bound_radius; }
  /// Unit normal pointing into the enclosed region.
  Vec3 inward_normal(const Vec3& q) const {
    const Vec3 g = grad(q);
    return -g / g.norm();
  }
};

ImplicitSurface make_sphere(double radius);
ImplicitSurface make_ellipsoid(double a, double b, double c);
/// Parses "sphere R" or "ellipsoid a b c".
ImplicitSurface parse_surface(const std::string& spec);

struct ClosestPointOptions {
  int max_iter = 200;
  double phi_tol = 1e-12;    // on-surface tolerance for the iteration
  double angle_tol = 1e-8;   // residual angle between y-q and the normal
};

/// Closest-point projection onto the zero level set. Throws on
/// non-convergence, reporting the offending point.
Vec3 closest_point(const ImplicitSurface& surface, const Vec3& y,
                   const ClosestPointOptions& opts = {});

/// Second fundamental form of the surface at q in the normal direction w,
/// evaluated on the tangent vector v:
///   A^w(v,v) = <w, eta> * hess phi(v,v) / |grad phi|,
/// with eta the inward normal, so that A^eta > 0 on convex surfaces.
/// Throws if q is off the surface or v is not tangent.
double second_fundamental_form(const ImplicitSurface& surface, const Vec3& q,
                               const Vec3& w, const Vec3& v);

/// Sum of the principal curvatures with respect to the inward normal
/// (2/R on a sphere of radius R).
double mean_curvature(const ImplicitSurface& surface, const Vec3& q);

/// Principal curvatures w.r.t. the inward normal, ascending.
Vec2 principal_curvatures(const ImplicitSurface& surface, const Vec3& q);

/// Orthonormal tangent basis at q (deterministic).
std::pair<Vec3, Vec3> tangent_basis(const ImplicitSurface& surface, const Vec3& q);

/// Deterministic quasi-uniform sample of surface points (Fibonacci
/// directions projected by closest_point).
std::vector<Vec3> sample_surface_points(const ImplicitSurface& surface, int n);

/// Barrier data: a strictly convex surface enclosing the constraint, its
/// mean-curvature lower bound H0, the target curvature H < H0, and the
/// offset depth t0 up to which the outward offsets keep mean curvature
/// >= (H0+H)/2.
struct BarrierSpec {
  ImplicitSurface surface;
  double H0 = 0.0;
  double H = 0.0;
  double t0 = 0.0;
};

/// Largest grid value t0 <= 1/4 (64-point grid) such that all offsets
/// Sigma'_t, t <= t0, have sampled mean curvature >= (H0+H)/2.
/// Throws if H >= H0 or if no grid point is admissible.
double choose_t0(const ImplicitSurface& barrier_surface, double H0, double H,
                 int n_samples = 500);

/// Validates the barrier (convexity, curvature bound) and picks t0.
BarrierSpec make_barrier(ImplicitSurface surface, double H0, double H);

/// Distance to the closed region enclosed by the barrier surface: zero
/// inside, |y - closest point| outside.
double offset_distance(const BarrierSpec& barrier, const Vec3& y);

/// Smooth cutoff profile in the offset distance d: equals H for
/// d <= t0/4, 0 for d >= 3 t0/4, quintic-smoothstep in between.
struct PrescribedCurvature {
  double H = 0.0;
  double t0 = 0.0;
  double value(double d) const;
  double derivative(double d) const;
};

PrescribedCurvature build_f(const BarrierSpec& barrier);

}  // namespace cmcdisk
