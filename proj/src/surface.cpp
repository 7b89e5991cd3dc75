#include "cmcdisk/surface.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace cmcdisk {

ImplicitSurface make_sphere(double radius) {
  if (radius <= 0) throw std::invalid_argument("sphere: radius must be positive");
  ImplicitSurface s;
  s.phi = [radius](const Vec3& y) { return y.squaredNorm() - radius * radius; };
  s.grad = [](const Vec3& y) { return Vec3(2.0 * y); };
  s.hess = [](const Vec3&) { return Mat3(2.0 * Mat3::Identity()); };
  s.bound_radius = radius;
  s.band_width = radius * radius * 0.75;
  s.enclosed_volume = 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
  std::ostringstream os;
  os << "sphere " << radius;
  s.spec = os.str();
  return s;
}

ImplicitSurface make_ellipsoid(double a, double b, double c) {
  if (a <= 0 || b <= 0 || c <= 0) throw std::invalid_argument("ellipsoid: semi-axes must be positive");
  ImplicitSurface s;
  const Vec3 inv2(1.0 / (a * a), 1.0 / (b * b), 1.0 / (c * c));
  s.phi = [inv2](const Vec3& y) {
    return y.x() * y.x() * inv2.x() + y.y() * y.y() * inv2.y() + y.z() * y.z() * inv2.z() - 1.0;
  };
  s.grad = [inv2](const Vec3& y) { return Vec3(2.0 * y.cwiseProduct(inv2)); };
  s.hess = [inv2](const Vec3&) { return Mat3(2.0 * inv2.asDiagonal()); };
  s.bound_radius = std::max({a, b, c});
  s.band_width = 0.5;
  s.enclosed_volume = 4.0 / 3.0 * std::numbers::pi * a * b * c;
  std::ostringstream os;
  os << "ellipsoid " << a << " " << b << " " << c;
  s.spec = os.str();
  return s;
}

ImplicitSurface parse_surface(const std::string& spec) {
  std::istringstream is(spec);
  std::string kind;
  is >> kind;
  if (kind == "sphere") {
    double r;
    if (!(is >> r)) throw std::invalid_argument("surface spec: expected 'sphere R'");
    return make_sphere(r);
  }
  if (kind == "ellipsoid") {
    double a, b, c;
    if (!(is >> a >> b >> c)) throw std::invalid_argument("surface spec: expected 'ellipsoid a b c'");
    return make_ellipsoid(a, b, c);
  }
  throw std::invalid_argument("surface spec: unknown kind '" + kind + "'");
}

namespace {

// gradient-flow walk onto the zero level set
Vec3 walk_to_surface(const ImplicitSurface& surface, Vec3 q, double tol) {
  for (int sub = 0; sub < 60; ++sub) {
    const double f = surface.phi(q);
    if (std::abs(f) <= tol) break;
    const Vec3 g = surface.grad(q);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-20) break;
    q -= (f / g2) * g;
  }
  return q;
}

}  // namespace

Vec3 closest_point(const ImplicitSurface& surface, const Vec3& y, const ClosestPointOptions& opts) {
  const double scale = 1.0 + surface.bound_radius;
  Vec3 start = y;
  if (surface.grad(start).norm() < 1e-12) start += Vec3(1e-3 * surface.bound_radius, 0, 0);
  Vec3 q = walk_to_surface(surface, start, opts.phi_tol * scale);
  for (int it = 0; it < opts.max_iter; ++it) {
    const Vec3 n = surface.grad(q).normalized();
    const Vec3 tangential = (y - q) - n.dot(y - q) * n;
    const double dist = (y - q).norm();
    const bool on_surface = std::abs(surface.phi(q)) <= opts.phi_tol * scale;
    const bool aligned =
        tangential.norm() <= opts.angle_tol * dist || tangential.norm() <= 1e-13 * scale;
    if (on_surface && aligned) return q;
    // slide toward the foot point, with the curvature foreshortening
    // correction 1/(1 + sd*kappa) that makes the iteration second order
    Vec3 step = tangential;
    if (tangential.norm() > 1e-300) {
      const Vec3 that = tangential.normalized();
      const double kappa = that.dot(surface.hess(q) * that) / surface.grad(q).norm();
      const double sd = (y - q).dot(n);
      const double denom = std::max(0.2, 1.0 + sd * kappa);
      step /= denom;
    }
    double alpha = 1.0;
    for (int ls = 0; ls < 40; ++ls) {
      const Vec3 cand = walk_to_surface(surface, q + alpha * step, opts.phi_tol * scale);
      if ((y - cand).norm() <= dist * (1.0 + 1e-14) + 1e-15 * scale) {
        q = cand;
        break;
      }
      alpha *= 0.5;
    }
  }
  std::ostringstream os;
  os << "closest_point: no convergence for y = (" << y.x() << ", " << y.y() << ", " << y.z() << ")";
  throw std::runtime_error(os.str());
}

double second_fundamental_form(const ImplicitSurface& surface, const Vec3& q, const Vec3& w,
                               const Vec3& v) {
  const double scale = 1.0 + surface.bound_radius;
  if (std::abs(surface.phi(q)) > 1e-8 * scale)
    throw std::invalid_argument("second_fundamental_form: point is off the surface");
  const Vec3 g = surface.grad(q);
  const double gn = g.norm();
  const Vec3 eta = -g / gn;
  if (v.norm() > 0 && std::abs(v.dot(eta)) > 1e-6 * v.norm())
    throw std::invalid_argument("second_fundamental_form: v is not tangent");
  return w.dot(eta) * v.dot(surface.hess(q) * v) / gn;
}

double mean_curvature(const ImplicitSurface& surface, const Vec3& q) {
  const Vec3 g = surface.grad(q);
  const double gn = g.norm();
  const Vec3 n = g / gn;
  const Mat3 H = surface.hess(q);
  return (H.trace() - n.dot(H * n)) / gn;
}

std::pair<Vec3, Vec3> tangent_basis(const ImplicitSurface& surface, const Vec3& q) {
  const Vec3 n = surface.grad(q).normalized();
  const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 t1 = (seed - seed.dot(n) * n).normalized();
  const Vec3 t2 = n.cross(t1);
  return {t1, t2};
}

Vec2 principal_curvatures(const ImplicitSurface& surface, const Vec3& q) {
  const auto [t1, t2] = tangent_basis(surface, q);
  const Mat3 H = surface.hess(q);
  const double gn = surface.grad(q).norm();
  Mat2 S;
  S << t1.dot(H * t1), t1.dot(H * t2), t2.dot(H * t1), t2.dot(H * t2);
  S /= gn;
  Eigen::SelfAdjointEigenSolver<Mat2> es(S);
  return es.eigenvalues();
}

std::vector<Vec3> sample_surface_points(const ImplicitSurface& surface, int n) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = golden * i;
    const Vec3 dir(r * std::cos(th), r * std::sin(th), z);
    pts.push_back(closest_point(surface, 1.5 * surface.bound_radius * dir));
  }
  return pts;
}

double choose_t0(const ImplicitSurface& barrier_surface, double H0, double H, int n_samples) {
  if (!(H0 > 0) || H >= H0) throw std::invalid_argument("choose_t0: need 0 <= H < H0");
  const auto samples = sample_surface_points(barrier_surface, n_samples);
  std::vector<Vec2> kappas;
  kappas.reserve(samples.size());
  for (const auto& q : samples) {
    const Vec2 k = principal_curvatures(barrier_surface, q);
    if (k(0) <= 0) throw std::runtime_error("choose_t0: barrier is not strictly convex at a sample");
    kappas.push_back(k);
  }
  const double target = 0.5 * (H0 + H);
  // outward offset by t maps principal curvatures k -> k/(1+t k)
  auto admissible = [&](double t) {
    for (const auto& k : kappas) {
      const double Ht = k(0) / (1.0 + t * k(0)) + k(1) / (1.0 + t * k(1));
      if (Ht < target) return false;
    }
    return true;
  };
  constexpr int kGrid = 64;
  double t0 = 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    const double t = 0.25 * i / kGrid;
    if (!admissible(t)) break;
    t0 = t;
  }
  if (t0 == 0.0) throw std::runtime_error("choose_t0: no admissible offset depth on the grid");
  return t0;
}

BarrierSpec make_barrier(ImplicitSurface surface, double H0, double H) {
  if (H < 0) throw std::invalid_argument("make_barrier: H must be nonnegative");
  // sampled sanity check of the asserted curvature lower bound
  for (const auto& q : sample_surface_points(surface, 64)) {
    if (mean_curvature(surface, q) < H0 * (1.0 - 1e-9) - 1e-12)
      throw std::invalid_argument("make_barrier: sampled mean curvature drops below H0");
  }
  BarrierSpec b;
  b.H0 = H0;
  b.H = H;
  b.t0 = (H > 0) ? choose_t0(surface, H0, H) : 0.25;
  b.surface = std::move(surface);
  return b;
}

double offset_distance(const BarrierSpec& barrier, const Vec3& y) {
  if (barrier.surface.phi(y) <= 0.0) return 0.0;
  return (y - closest_point(barrier.surface, y)).norm();
}

double PrescribedCurvature::value(double d) const {
  if (d <= 0.25 * t0) return H;
  if (d >= 0.75 * t0) return 0.0;
  const double s = (d - 0.25 * t0) / (0.5 * t0);
  const double step = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  return H * (1.0 - step);
}

double PrescribedCurvature::derivative(double d) const {
  if (d <= 0.25 * t0 || d >= 0.75 * t0) return 0.0;
  const double s = (d - 0.25 * t0) / (0.5 * t0);
  const double dstep = 30.0 * s * s * (1.0 + s * (-2.0 + s));
  return -H * dstep / (0.5 * t0);
}

PrescribedCurvature build_f(const BarrierSpec& barrier) {
  if (barrier.H >= barrier.H0 && barrier.H > 0)
    throw std::invalid_argument("build_f: need H < H0");
  return PrescribedCurvature{barrier.H, barrier.t0};
}

}  // namespace cmcdisk
